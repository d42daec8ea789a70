#include "musym/problem.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"musym: mu-prolongations, mu-symmetries and mu-conservation laws for "
                 "variational problems"};
    std::string file;
    bool json = false;
    std::string mode = "mu";
    musym::RunOptions opts;

    app.add_option("file", file, ".mun problem file")->required();
    app.add_flag("--json", json, "emit a JSON report (stable key order)");
    app.add_option("--seed", opts.oracle.seed, "numeric oracle seed");
    app.add_option("--points", opts.oracle.points, "oracle sample points per check");
    app.add_option("--tol", opts.oracle.rel_tol, "oracle relative tolerance");
    app.add_option("--mode", mode, "prolongation mode for symmetry checks")
        ->check(CLI::IsMember({"mu", "standard"}));
    CLI11_PARSE(app, argc, argv);

    opts.mode = mode == "standard" ? musym::ProlongMode::Standard : musym::ProlongMode::Mu;

    std::ifstream in(file);
    if (!in) {
        std::cerr << "error: cannot open " << file << "\n";
        return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    std::string name = file;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos)
        name = name.substr(slash + 1);

    try {
        musym::ProblemFile pf = musym::parse_problem(buf.str());
        musym::Report rep = musym::run(pf, opts, name);
        std::cout << (json ? rep.to_json() : rep.to_text());
        return rep.exit_code();
    } catch (const musym::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
