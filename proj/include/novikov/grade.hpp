#pragma once

#include <cmath>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "novikov/rational.hpp"

namespace novikov {

/// An exact real number a + b*sqrt(2) with rational a, b.
///
/// Grades of group elements live here. Comparison is exact: the sign of
/// a + b*sqrt(2) is decided by comparing a^2 with 2*b^2 when the signs of a
/// and b disagree.
class Grade {
public:
    Grade() = default;
    Grade(Rational a, Rational b = 0) : a_(std::move(a)), b_(std::move(b)) {}
    Grade(long a) : a_(a), b_(0) {}

    const Rational& rational_part() const { return a_; }
    const Rational& sqrt2_part() const { return b_; }
    bool is_rational() const { return b_ == 0; }

    int sign() const {
        int sa = ::sgn(a_), sb = ::sgn(b_);
        if (sb == 0) return sa;
        if (sa == 0 || sa == sb) return sb;
        Rational lhs = a_ * a_, rhs = 2 * b_ * b_;
        if (lhs == rhs) return 0;  // unreachable for rationals, kept for totality
        return lhs > rhs ? sa : sb;
    }

    double to_double() const { return a_.get_d() + b_.get_d() * std::sqrt(2.0); }

    Grade operator-() const { return Grade(-a_, -b_); }
    Grade& operator+=(const Grade& o) {
        a_ += o.a_;
        b_ += o.b_;
        return *this;
    }
    Grade& operator-=(const Grade& o) {
        a_ -= o.a_;
        b_ -= o.b_;
        return *this;
    }
    friend Grade operator+(Grade x, const Grade& y) { return x += y; }
    friend Grade operator-(Grade x, const Grade& y) { return x -= y; }
    friend Grade operator*(const Rational& k, const Grade& x) { return Grade(k * x.a_, k * x.b_); }

    friend bool operator==(const Grade& x, const Grade& y) { return x.a_ == y.a_ && x.b_ == y.b_; }
    friend std::strong_ordering operator<=>(const Grade& x, const Grade& y) {
        if (x.b_ == y.b_) {
            int c = cmp(x.a_, y.a_);
            return c < 0 ? std::strong_ordering::less
                         : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
        }
        int s = (x - y).sign();
        return s < 0 ? std::strong_ordering::less
                     : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    /// "3", "1/2", "3+2r2", "-r2", "1/2 - 3/4*r2"; r2 stands for sqrt(2).
    static Grade parse(std::string_view text) {
        std::string s;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) s += c;
        if (s.empty()) throw ParseError("empty grade");
        Rational a = 0, b = 0;
        std::size_t pos = 0;
        bool any = false;
        while (pos < s.size()) {
            std::size_t end = pos + 1;
            while (end < s.size() && s[end] != '+' && s[end] != '-') ++end;
            std::string term = s.substr(pos, end - pos);
            pos = end;
            any = true;
            if (term.size() >= 2 && term.compare(term.size() - 2, 2, "r2") == 0) {
                std::string coeff = term.substr(0, term.size() - 2);
                if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
                if (coeff.empty() || coeff == "+") b += 1;
                else if (coeff == "-") b -= 1;
                else b += parse_rational(coeff);
            } else {
                a += parse_rational(term);
            }
        }
        if (!any) throw ParseError("bad grade '" + std::string(text) + "'");
        return Grade(a, b);
    }

    std::string str() const {
        if (b_ == 0) return to_string(a_);
        std::string out;
        if (a_ != 0) out = to_string(a_) + (b_ > 0 ? "+" : "-");
        else if (b_ < 0) out = "-";
        Rational mag = abs(b_);
        if (mag != 1) out += to_string(mag);
        return out + "r2";
    }

private:
    Rational a_ = 0;
    Rational b_ = 0;
};

/// A truncation level R: either a finite grade or +infinity (exact).
///
/// A series "known to O(R)" carries no information about terms of grade >= R.
class Truncation {
public:
    Truncation() = default;  // exact
    Truncation(Grade bound) : bound_(std::move(bound)) {}
    Truncation(long bound) : bound_(Grade(bound)) {}

    static Truncation exact() { return Truncation(); }

    bool is_exact() const { return !bound_.has_value(); }
    const Grade& bound() const {
        if (!bound_) throw MathError("exact truncation has no finite bound");
        return *bound_;
    }
    /// True when a term of grade g is below the truncation.
    bool admits(const Grade& g) const { return !bound_ || g < *bound_; }

    Truncation shifted(const Grade& g) const {
        if (!bound_) return *this;
        return Truncation(*bound_ + g);
    }

    friend Truncation min(const Truncation& x, const Truncation& y) {
        if (!x.bound_) return y;
        if (!y.bound_) return x;
        return *x.bound_ <= *y.bound_ ? x : y;
    }
    friend bool operator==(const Truncation&, const Truncation&) = default;
    friend bool operator<(const Truncation& x, const Truncation& y) {
        if (!x.bound_) return false;
        if (!y.bound_) return true;
        return *x.bound_ < *y.bound_;
    }
    friend bool operator<=(const Truncation& x, const Truncation& y) { return !(y < x); }

    std::string str() const { return bound_ ? bound_->str() : "inf"; }

private:
    std::optional<Grade> bound_;
};

}  // namespace novikov
