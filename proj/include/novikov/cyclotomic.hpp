#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "novikov/rational.hpp"

namespace novikov {

/// Dense univariate polynomial over Q; coeffs()[i] multiplies x^i. Always trimmed.
class RationalPolynomial {
public:
    RationalPolynomial() = default;
    explicit RationalPolynomial(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

    static RationalPolynomial monomial(std::size_t degree, Rational c = 1) {
        std::vector<Rational> v(degree + 1);
        v[degree] = std::move(c);
        return RationalPolynomial(std::move(v));
    }

    bool is_zero() const { return c_.empty(); }
    /// -1 for the zero polynomial.
    long degree() const { return static_cast<long>(c_.size()) - 1; }
    const std::vector<Rational>& coeffs() const { return c_; }
    Rational coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
    const Rational& leading() const { return c_.back(); }

    friend RationalPolynomial operator+(const RationalPolynomial& a, const RationalPolynomial& b) {
        std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.coeff(i) + b.coeff(i);
        return RationalPolynomial(std::move(v));
    }
    friend RationalPolynomial operator-(const RationalPolynomial& a, const RationalPolynomial& b) {
        std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.coeff(i) - b.coeff(i);
        return RationalPolynomial(std::move(v));
    }
    friend RationalPolynomial operator*(const RationalPolynomial& a, const RationalPolynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> v(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i] == 0) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
        }
        return RationalPolynomial(std::move(v));
    }
    friend bool operator==(const RationalPolynomial&, const RationalPolynomial&) = default;

    /// Quotient and remainder of long division by a nonzero divisor.
    std::pair<RationalPolynomial, RationalPolynomial> divmod(const RationalPolynomial& d) const {
        if (d.is_zero()) throw MathError("polynomial division by zero");
        std::vector<Rational> r = c_;
        if (degree() < d.degree()) return {RationalPolynomial{}, *this};
        std::vector<Rational> q(static_cast<std::size_t>(degree() - d.degree() + 1));
        for (long i = degree(); i >= d.degree(); --i) {
            Rational f = r[static_cast<std::size_t>(i)] / d.leading();
            if (f == 0) continue;
            std::size_t shift = static_cast<std::size_t>(i - d.degree());
            q[shift] = f;
            for (std::size_t j = 0; j < d.c_.size(); ++j) r[shift + j] -= f * d.c_[j];
        }
        return {RationalPolynomial(std::move(q)), RationalPolynomial(std::move(r))};
    }

    std::string str(char var = 'x') const;

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Rational> c_;
};

namespace detail {

inline std::string render_power_sum(const std::vector<Rational>& c, char var) {
    std::string out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0) continue;
        Rational mag = abs(c[i]);
        bool neg = c[i] < 0;
        if (out.empty()) out += neg ? "-" : "";
        else out += neg ? " - " : " + ";
        std::string mono;
        if (i == 1) mono = std::string(1, var);
        else if (i > 1) mono = std::string(1, var) + "^" + std::to_string(i);
        if (mono.empty()) out += to_string(mag);
        else if (mag == 1) out += mono;
        else out += to_string(mag) + "*" + mono;
    }
    return out.empty() ? "0" : out;
}

}  // namespace detail

inline std::string RationalPolynomial::str(char var) const { return detail::render_power_sum(c_, var); }

inline std::int64_t euler_phi(std::int64_t n) {
    if (n < 1) throw MathError("euler_phi needs a positive argument");
    std::int64_t result = n;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        while (n % p == 0) n /= p;
        result -= result / p;
    }
    if (n > 1) result -= result / n;
    return result;
}

inline std::vector<std::int64_t> divisors(std::int64_t n) {
    std::vector<std::int64_t> out;
    for (std::int64_t d = 1; d <= n; ++d)
        if (n % d == 0) out.push_back(d);
    return out;
}

/// Phi_d, obtained by dividing x^d - 1 by Phi_e for every proper divisor e of d.
inline const RationalPolynomial& cyclotomic_polynomial(std::int64_t d) {
    if (d < 1) throw MathError("cyclotomic polynomial order must be positive");
    static std::mutex mutex;
    static std::map<std::int64_t, RationalPolynomial> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(d); it != cache.end()) return it->second;
    }
    RationalPolynomial p = RationalPolynomial::monomial(static_cast<std::size_t>(d)) - RationalPolynomial::monomial(0);
    for (auto e : divisors(d)) {
        if (e == d) continue;
        auto [q, r] = p.divmod(cyclotomic_polynomial(e));
        if (!r.is_zero()) throw MathError("cyclotomic division left a remainder");
        p = q;
    }
    std::lock_guard lock(mutex);
    return cache.emplace(d, std::move(p)).first->second;
}

/// Element of Q(zeta_d), stored as a polynomial in zeta_d of degree < phi(d).
/// Order 1 is plain Q.
class CyclotomicNumber {
public:
    CyclotomicNumber() : c_(1) {}
    CyclotomicNumber(Rational q, std::int64_t order = 1) : order_(order), c_(dimension(order)) {
        c_[0] = std::move(q);
    }
    CyclotomicNumber(long q) : CyclotomicNumber(Rational(q)) {}

    /// Reduces an arbitrary polynomial in zeta_d modulo Phi_d.
    static CyclotomicNumber from_polynomial(const RationalPolynomial& p, std::int64_t order) {
        auto r = p.divmod(cyclotomic_polynomial(order)).second;
        CyclotomicNumber z(Rational(0), order);
        for (std::size_t i = 0; i < r.coeffs().size(); ++i) z.c_[i] = r.coeffs()[i];
        return z;
    }
    /// zeta_d^j.
    static CyclotomicNumber root_power(std::int64_t order, std::int64_t j) {
        return from_polynomial(RationalPolynomial::monomial(static_cast<std::size_t>(floor_mod(j, order))), order);
    }

    std::int64_t order() const { return order_; }
    const std::vector<Rational>& coeffs() const { return c_; }

    bool is_zero() const {
        return std::all_of(c_.begin(), c_.end(), [](const Rational& q) { return q == 0; });
    }
    std::optional<Rational> as_rational() const {
        for (std::size_t i = 1; i < c_.size(); ++i)
            if (c_[i] != 0) return std::nullopt;
        return c_[0];
    }
    bool is_rational_integer() const {
        auto q = as_rational();
        return q && is_integer(*q);
    }

    RationalPolynomial polynomial() const { return RationalPolynomial(c_); }

    CyclotomicNumber operator-() const {
        CyclotomicNumber z = *this;
        for (auto& q : z.c_) q = -q;
        return z;
    }
    CyclotomicNumber& operator+=(const CyclotomicNumber& o) {
        require_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    CyclotomicNumber& operator-=(const CyclotomicNumber& o) {
        require_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    friend CyclotomicNumber operator+(CyclotomicNumber a, const CyclotomicNumber& b) { return a += b; }
    friend CyclotomicNumber operator-(CyclotomicNumber a, const CyclotomicNumber& b) { return a -= b; }
    friend CyclotomicNumber operator*(const CyclotomicNumber& a, const CyclotomicNumber& b) {
        a.require_same(b);
        if (a.c_.size() == 1) {
            CyclotomicNumber z = a;
            z.c_[0] *= b.c_[0];
            return z;
        }
        return from_polynomial(a.polynomial() * b.polynomial(), a.order_);
    }
    CyclotomicNumber& operator*=(const CyclotomicNumber& o) { return *this = *this * o; }
    CyclotomicNumber scaled(const Rational& q) const {
        CyclotomicNumber z = *this;
        for (auto& c : z.c_) c *= q;
        return z;
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against Phi_d.
    CyclotomicNumber inverse() const {
        if (is_zero()) throw MathError("inverse of zero cyclotomic number");
        if (c_.size() == 1) return CyclotomicNumber(1 / c_[0], order_);
        // invariant: s_i * a = r_i (mod Phi)
        RationalPolynomial r0 = cyclotomic_polynomial(order_), r1 = polynomial();
        RationalPolynomial s0, s1 = RationalPolynomial::monomial(0);
        while (r1.degree() > 0) {
            auto [q, r] = r0.divmod(r1);
            RationalPolynomial s = s0 - q * s1;
            r0 = std::move(r1);
            r1 = std::move(r);
            s0 = std::move(s1);
            s1 = std::move(s);
        }
        if (r1.is_zero()) throw MathError("cyclotomic element shares a factor with Phi_d");
        Rational inv = 1 / r1.coeff(0);
        return from_polynomial(s1 * RationalPolynomial({inv}), order_);
    }

    /// Image in Q(zeta_L) under zeta_d -> zeta_L^(L/d); requires d | L.
    CyclotomicNumber embed(std::int64_t target_order) const {
        if (target_order % order_ != 0) throw MathError("cyclotomic embedding needs d | L");
        std::int64_t step = target_order / order_;
        std::vector<Rational> v(static_cast<std::size_t>((static_cast<std::int64_t>(c_.size()) - 1) * step + 1));
        for (std::size_t i = 0; i < c_.size(); ++i) v[i * static_cast<std::size_t>(step)] = c_[i];
        return from_polynomial(RationalPolynomial(std::move(v)), target_order);
    }

    /// Preimage under embed() into Q(zeta_d) for d | order(), if this number lies there.
    std::optional<CyclotomicNumber> restrict_to(std::int64_t sub_order) const {
        if (order_ % sub_order != 0) throw MathError("restriction needs d | L");
        if (sub_order == order_) return *this;
        const std::size_t rows = c_.size();
        const std::size_t cols = static_cast<std::size_t>(euler_phi(sub_order));
        // columns: images of zeta_d^j, augmented by this number
        std::vector<std::vector<Rational>> m(rows, std::vector<Rational>(cols + 1));
        for (std::size_t j = 0; j < cols; ++j) {
            auto img = root_power(sub_order, static_cast<std::int64_t>(j)).embed(order_);
            for (std::size_t i = 0; i < rows; ++i) m[i][j] = img.c_[i];
        }
        for (std::size_t i = 0; i < rows; ++i) m[i][cols] = c_[i];
        std::vector<std::size_t> pivot_col;
        std::size_t r = 0;
        for (std::size_t c = 0; c < cols && r < rows; ++c) {
            std::size_t p = r;
            while (p < rows && m[p][c] == 0) ++p;
            if (p == rows) continue;
            std::swap(m[p], m[r]);
            for (std::size_t i = 0; i < rows; ++i) {
                if (i == r || m[i][c] == 0) continue;
                Rational f = m[i][c] / m[r][c];
                for (std::size_t k = c; k <= cols; ++k) m[i][k] -= f * m[r][k];
            }
            pivot_col.push_back(c);
            ++r;
        }
        for (std::size_t i = r; i < rows; ++i)
            if (m[i][cols] != 0) return std::nullopt;
        CyclotomicNumber out(Rational(0), sub_order);
        for (std::size_t i = 0; i < r; ++i) out.c_[pivot_col[i]] = m[i][cols] / m[i][pivot_col[i]];
        return out;
    }

    /// Lexicographic order on the coefficient vector; used to pick canonical units.
    friend int compare_lex(const CyclotomicNumber& a, const CyclotomicNumber& b) {
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i] < b.c_[i]) return -1;
            if (a.c_[i] > b.c_[i]) return 1;
        }
        return 0;
    }
    /// True when the first nonzero coefficient is positive.
    bool is_positive() const {
        for (const auto& q : c_)
            if (q != 0) return q > 0;
        return false;
    }

    friend bool operator==(const CyclotomicNumber& a, const CyclotomicNumber& b) {
        return a.order_ == b.order_ && a.c_ == b.c_;
    }

    /// "1 - 2*z + z^2"; z is the primitive root of the declared order.
    std::string str() const { return detail::render_power_sum(c_, 'z'); }
    bool is_single_term() const {
        return std::count_if(c_.begin(), c_.end(), [](const Rational& q) { return q != 0; }) <= 1;
    }

private:
    static std::size_t dimension(std::int64_t order) { return static_cast<std::size_t>(euler_phi(order)); }
    void require_same(const CyclotomicNumber& o) const {
        if (order_ != o.order_) throw MathError("cyclotomic field mismatch");
    }

    std::int64_t order_ = 1;
    std::vector<Rational> c_;
};

/// One field summand L_d = Q(zeta_d) of Q[Z/n]; the torsion generator maps to zeta_d.
struct FieldSummand {
    std::int64_t order = 1;
};

struct FieldSplit {
    std::int64_t torsion_order = 0;
    std::vector<FieldSummand> summands;

    std::int64_t dimension() const {
        std::int64_t total = 0;
        for (const auto& s : summands) total += euler_phi(s.order);
        return total;
    }
};

/// Q[Z/n] = sum over d | n of Q(zeta_d). For n = 0 (free H) the single summand Q.
inline FieldSplit split_group_algebra(std::int64_t n) {
    FieldSplit split;
    split.torsion_order = n;
    if (n <= 1) {
        split.summands.push_back({1});
        return split;
    }
    for (auto d : divisors(n)) split.summands.push_back({d});
    return split;
}

}  // namespace novikov
