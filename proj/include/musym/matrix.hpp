#pragma once

#include "musym/expr.hpp"

#include <stdexcept>
#include <vector>

namespace musym {

struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense matrix of expressions; just enough linear algebra for M-vectors,
// Lambda matrices and their commutators.
class ExprMatrix {
  public:
    ExprMatrix() = default;
    ExprMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {}

    static ExprMatrix identity(int n) {
        ExprMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = Expr(1);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Expr& at(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    const Expr& at(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    bool is_zero() const {
        for (const auto& e : a_)
            if (!e.is_zero()) return false;
        return true;
    }

    Expr trace() const {
        if (rows_ != cols_) throw shape_error("trace of a non-square matrix");
        Expr t;
        for (int i = 0; i < rows_; ++i) t += at(i, i);
        return t;
    }

    friend ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b) {
        check_same(a, b);
        ExprMatrix r(a.rows_, a.cols_);
        for (size_t k = 0; k < a.a_.size(); ++k) r.a_[k] = a.a_[k] + b.a_[k];
        return r;
    }
    friend ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b) {
        check_same(a, b);
        ExprMatrix r(a.rows_, a.cols_);
        for (size_t k = 0; k < a.a_.size(); ++k) r.a_[k] = a.a_[k] - b.a_[k];
        return r;
    }
    friend ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b) {
        if (a.cols_ != b.rows_) throw shape_error("matrix product shape mismatch");
        ExprMatrix r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int j = 0; j < b.cols_; ++j) {
                Expr s;
                for (int k = 0; k < a.cols_; ++k) s += a.at(i, k) * b.at(k, j);
                r.at(i, j) = s;
            }
        return r;
    }
    friend ExprMatrix operator*(const Expr& s, const ExprMatrix& m) {
        ExprMatrix r(m.rows_, m.cols_);
        for (size_t k = 0; k < m.a_.size(); ++k) r.a_[k] = s * m.a_[k];
        return r;
    }

    std::vector<Expr> apply(const std::vector<Expr>& v) const {
        if (cols_ != static_cast<int>(v.size())) throw shape_error("matrix-vector shape mismatch");
        std::vector<Expr> r(static_cast<size_t>(rows_));
        for (int i = 0; i < rows_; ++i) {
            Expr s;
            for (int j = 0; j < cols_; ++j) s += at(i, j) * v[static_cast<size_t>(j)];
            r[static_cast<size_t>(i)] = s;
        }
        return r;
    }

    Expr determinant() const {
        if (rows_ != cols_) throw shape_error("determinant of a non-square matrix");
        if (rows_ == 1) return at(0, 0);
        Expr det;
        for (int j = 0; j < cols_; ++j) {
            if (at(0, j).is_zero()) continue;
            Expr term = at(0, j) * minor_matrix(0, j).determinant();
            det += (j % 2 == 0) ? term : -term;
        }
        return det;
    }

    // adjugate / det; generic-point semantics, throws when det is identically 0
    ExprMatrix inverse() const {
        Expr det = determinant();
        if (det.is_zero()) throw math_error("matrix is singular");
        ExprMatrix inv(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) {
                Expr c = minor_matrix(j, i).determinant();
                if ((i + j) % 2 == 1) c = -c;
                inv.at(i, j) = c / det;
            }
        return inv;
    }

  private:
    ExprMatrix minor_matrix(int row, int col) const {
        if (rows_ == 1) {
            ExprMatrix one(1, 1);
            one.at(0, 0) = Expr(1);
            return one;
        }
        ExprMatrix m(rows_ - 1, cols_ - 1);
        for (int i = 0, mi = 0; i < rows_; ++i) {
            if (i == row) continue;
            for (int j = 0, mj = 0; j < cols_; ++j) {
                if (j == col) continue;
                m.at(mi, mj) = at(i, j);
                ++mj;
            }
            ++mi;
        }
        return m;
    }
    static void check_same(const ExprMatrix& a, const ExprMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw shape_error("matrix shape mismatch");
    }
    int rows_ = 0, cols_ = 0;
    std::vector<Expr> a_;
};

inline ExprMatrix commutator(const ExprMatrix& a, const ExprMatrix& b) {
    return a * b - b * a;
}

} // namespace musym
