#pragma once

#include <compare>
#include <string>
#include <vector>

namespace musym {

// Multi-index J = (j_1 .. j_p): derivative counts per independent variable.
// D_J is the composition D_1^{j_1} ... D_p^{j_p}; identity of a jet
// coordinate depends only on these counts, so u_xy and u_yx coincide.
struct MultiIndex {
    std::vector<int> counts;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> c) : counts(std::move(c)) {}
    static MultiIndex zeros(int p) { return MultiIndex(std::vector<int>(p, 0)); }

    int order() const {
        int s = 0;
        for (int c : counts) s += c;
        return s;
    }
    int size() const { return static_cast<int>(counts.size()); }
    int operator[](int i) const { return counts[static_cast<size_t>(i)]; }

    MultiIndex bumped(int i) const {
        MultiIndex j = *this;
        j.counts[static_cast<size_t>(i)] += 1;
        return j;
    }
    MultiIndex lowered(int i) const {
        MultiIndex j = *this;
        j.counts[static_cast<size_t>(i)] -= 1;
        return j;
    }
    // Index of the first nonzero count, or -1 when |J| = 0.
    int first_nonzero() const {
        for (int i = 0; i < size(); ++i)
            if (counts[static_cast<size_t>(i)] > 0) return i;
        return -1;
    }

    bool operator==(const MultiIndex&) const = default;
    auto operator<=>(const MultiIndex&) const = default;
};

enum class SymbolKind : unsigned char { Independent = 0, Jet = 1, Parameter = 2 };

// A resolved symbol. `name` is display-only; identity and ordering use
// (kind, index, jet) so that renaming cannot split a coordinate in two.
struct SymbolId {
    SymbolKind kind = SymbolKind::Parameter;
    int index = 0;    // independent index, dependent index, or parameter index
    MultiIndex jet;   // only for kind == Jet; |J| = 0 means the field itself
    std::string name; // printable form, fixed at creation

    bool is_jet() const { return kind == SymbolKind::Jet; }
    int order() const { return kind == SymbolKind::Jet ? jet.order() : 0; }

    int compare(const SymbolId& o) const {
        if (kind != o.kind) return kind < o.kind ? -1 : 1;
        if (index != o.index) return index < o.index ? -1 : 1;
        if (jet.order() != o.jet.order()) return jet.order() < o.jet.order() ? -1 : 1;
        // graded, derivatives in earlier variables first (u_x before u_y)
        if (jet.counts != o.jet.counts) return jet.counts > o.jet.counts ? -1 : 1;
        return 0;
    }
    bool operator==(const SymbolId& o) const { return compare(o) == 0; }
    bool operator<(const SymbolId& o) const { return compare(o) < 0; }
};

} // namespace musym
