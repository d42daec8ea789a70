#pragma once

#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>

namespace musym {

struct math_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact rational number over 64-bit integers, always reduced, denominator > 0.
// Intermediate products run in 128 bits; anything that does not fit back into
// 64 bits throws math_error rather than wrapping.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) : num_(n), den_(d) { reduce(); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && den_ == 1; }
    bool is_integer() const { return den_ == 1; }
    bool is_negative() const { return num_ < 0; }
    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    Rational operator-() const { return Rational(-num_, den_, unchecked{}); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw math_error("rational division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

    // Value order (not structural): compares a/b with c/d exactly.
    int compare(const Rational& o) const {
        i128 l = i128(num_) * o.den_, r = i128(o.num_) * den_;
        return l < r ? -1 : (l > r ? 1 : 0);
    }
    friend bool operator<(const Rational& a, const Rational& b) { return a.compare(b) < 0; }

    Rational abs() const { return num_ < 0 ? -*this : *this; }
    Rational inverse() const {
        if (num_ == 0) throw math_error("rational division by zero");
        return num_ < 0 ? Rational(-den_, -num_, unchecked{}) : Rational(den_, num_, unchecked{});
    }

    // base^e for integer e (negative e inverts).
    static Rational pow(const Rational& base, long long e) {
        if (e == 0) return Rational(1);
        Rational b = e < 0 ? base.inverse() : base;
        unsigned long long k = e < 0 ? static_cast<unsigned long long>(-(e + 1)) + 1ull
                                     : static_cast<unsigned long long>(e);
        Rational acc(1);
        while (k) {
            if (k & 1ull) acc *= b;
            b = (k >>= 1) ? b * b : b;
        }
        return acc;
    }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const {
        std::string s = std::to_string(num_);
        if (den_ != 1) s += "/" + std::to_string(den_);
        return s;
    }

  private:
    using i128 = __int128;
    struct unchecked {};
    Rational(long long n, long long d, unchecked) : num_(n), den_(d) {}

    static long long narrow(i128 v) {
        if (v > i128(INT64_MAX) || v < i128(INT64_MIN)) throw math_error("rational overflow");
        return static_cast<long long>(v);
    }
    static Rational make(i128 n, i128 d) {
        if (d == 0) throw math_error("rational division by zero");
        if (d < 0) { n = -n; d = -d; }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        return Rational(narrow(n), narrow(d), unchecked{});
    }
    static i128 gcd128(i128 a, i128 b) {
        while (b) { i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }
    void reduce() {
        if (den_ == 0) throw math_error("rational division by zero");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    long long num_, den_;
};

} // namespace musym
