#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "novikov/complex.hpp"

namespace novikov {

/// A closed orbit: homology class, period, Lefschetz sign. `count` lets equal
/// orbits be stored once.
struct ClosedOrbit {
    GroupElement cls;
    std::int64_t period = 1;
    int sign = 1;
    std::int64_t count = 1;

    friend bool operator==(const ClosedOrbit&, const ClosedOrbit&) = default;
};

/// All closed orbits whose class has grade below `completeness`.
struct OrbitSet {
    std::vector<ClosedOrbit> orbits;
    Truncation completeness;

    friend bool operator==(const OrbitSet&, const OrbitSet&) = default;
};

/// class / period, when the class is divisible by its period; torsion residues are
/// solved modulo n and the smallest solution is returned.
inline std::optional<GroupElement> primitive_class(const GradedGroup& group, const GroupElement& cls,
                                                   std::int64_t period) {
    GroupElement g;
    for (std::size_t i = 0; i < GroupElement::kMaxRank; ++i) {
        if (cls.free[i] % period != 0) return std::nullopt;
        g.free[i] = cls.free[i] / period;
    }
    std::int64_t n = group.torsion_modulus();
    for (std::int64_t j = 0; j < n; ++j)
        if (floor_mod(j * period, n) == cls.torsion) {
            g.torsion = j;
            return g;
        }
    return std::nullopt;
}

/// Checks period, sign, count, positive grade and divisibility of each orbit.
inline void validate_orbits(const GradedGroup& group, const OrbitSet& s) {
    for (std::size_t i = 0; i < s.orbits.size(); ++i) {
        const auto& o = s.orbits[i];
        std::string tag = "orbit #" + std::to_string(i);
        group.validate(o.cls);
        if (o.period < 1) throw ParseError(tag + ": period must be positive");
        if (o.sign != 1 && o.sign != -1) throw ParseError(tag + ": sign must be +1 or -1");
        if (o.count < 1) throw ParseError(tag + ": count must be positive");
        if (group.grade(o.cls).sign() <= 0) throw MathError(tag + ": class must have positive grade");
        if (!primitive_class(group, o.cls, o.period))
            throw MathError(tag + ": class is not divisible by its period");
    }
}

/// Sorts, merges equal orbits and cancels pairs that differ only in sign.
inline OrbitSet normalize_orbits(const OrbitSet& s) {
    std::map<std::pair<GroupElement, std::int64_t>, std::int64_t> net;
    for (const auto& o : s.orbits) net[{o.cls, o.period}] += o.sign * o.count;
    OrbitSet out;
    out.completeness = s.completeness;
    for (const auto& [key, n] : net)
        if (n != 0) out.orbits.push_back({key.first, key.second, n > 0 ? 1 : -1, n > 0 ? n : -n});
    return out;
}

inline OrbitSet merge_orbits(const OrbitSet& a, const OrbitSet& b) {
    OrbitSet out;
    out.completeness = min(a.completeness, b.completeness);
    out.orbits = a.orbits;
    out.orbits.insert(out.orbits.end(), b.orbits.begin(), b.orbits.end());
    return normalize_orbits(out);
}

/// The same orbits with every sign flipped: the zeta function inverts.
inline OrbitSet inverted_orbits(const OrbitSet& s) {
    OrbitSet out = s;
    for (auto& o : out.orbits) o.sign = -o.sign;
    return out;
}

/// sum of sign * count / period * class over orbits below the completeness grade.
inline NovikovSeries orbit_log(const GroupPtr& group, const OrbitSet& s) {
    std::vector<std::pair<GroupElement, CyclotomicNumber>> terms;
    for (const auto& o : s.orbits) {
        if (!s.completeness.admits(group->grade(o.cls))) continue;
        terms.emplace_back(o.cls, CyclotomicNumber(ratio(o.sign * o.count, o.period)));
    }
    return NovikovSeries::from_terms(group, 1, std::move(terms), s.completeness);
}

/// First non-integer coefficient, if any.
inline std::optional<NovikovSeries::Term> first_non_integer(const NovikovSeries& s) {
    for (const auto& t : s.terms())
        if (!t.coeff.is_rational_integer()) return t;
    return std::nullopt;
}

/// zeta = exp(sum sign/period * class), to O(completeness). A non-integer
/// coefficient means the orbit data is inconsistent.
inline NovikovSeries zeta_from_orbits(const GroupPtr& group, const OrbitSet& s) {
    if (s.completeness.is_exact()) {
        if (!s.orbits.empty()) throw TruncationError("orbit set needs a finite completeness grade");
        return NovikovSeries::one(group);
    }
    NovikovSeries z = exp_plus(orbit_log(group, s));
    if (auto bad = first_non_integer(z))
        throw MathError("zeta has non-integer coefficient " + bad->coeff.str() + " at grade " + bad->grade.str() +
                        "; the orbit set is inconsistent");
    return z;
}

enum class FactorType {
    kOneMinusInverse,  // (1-h)^-1
    kOnePlusInverse,   // (1+h)^-1
    kOneMinus,         // (1-h)^+1
    kOnePlus,          // (1+h)^+1
};

inline std::string factor_type_name(FactorType t) {
    switch (t) {
        case FactorType::kOneMinusInverse: return "(1-h)^-1";
        case FactorType::kOnePlusInverse: return "(1+h)^-1";
        case FactorType::kOneMinus: return "(1-h)^+1";
        case FactorType::kOnePlus: return "(1+h)^+1";
    }
    return "?";
}

inline FactorType parse_factor_type(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s == "(1-h)^-1") return FactorType::kOneMinusInverse;
    if (s == "(1+h)^-1") return FactorType::kOnePlusInverse;
    if (s == "(1-h)^+1" || s == "(1-h)^1" || s == "(1-h)") return FactorType::kOneMinus;
    if (s == "(1+h)^+1" || s == "(1+h)^1" || s == "(1+h)") return FactorType::kOnePlus;
    throw ParseError("unknown factor type '" + std::string(text) + "'");
}

struct OrbitFactor {
    GroupElement cls;
    FactorType type = FactorType::kOneMinusInverse;

    friend bool operator==(const OrbitFactor&, const OrbitFactor&) = default;
};

/// Sign of the orbit (h^k, period k) in the logarithm of the factor.
inline int factor_orbit_sign(FactorType t, std::int64_t k) {
    int odd = k % 2 == 1 ? 1 : -1;  // (-1)^(k+1)
    switch (t) {
        case FactorType::kOneMinusInverse: return 1;
        case FactorType::kOnePlusInverse: return -odd;
        case FactorType::kOneMinus: return -1;
        case FactorType::kOnePlus: return odd;
    }
    return 1;
}

inline NovikovSeries factor_series(const GroupPtr& group, const OrbitFactor& f, const Truncation& r) {
    if (group->grade(f.cls).sign() <= 0) throw MathError("factor class must have positive grade");
    bool minus = f.type == FactorType::kOneMinusInverse || f.type == FactorType::kOneMinus;
    NovikovSeries base = NovikovSeries::one(group) +
                         NovikovSeries::monomial(group, f.cls, CyclotomicNumber(Rational(minus ? -1 : 1)));
    bool inverse = f.type == FactorType::kOneMinusInverse || f.type == FactorType::kOnePlusInverse;
    return inverse ? series_invert(base, r).series() : base.truncated(r);
}

/// Product of the factors, expanded to O(r).
inline NovikovSeries zeta_product(const GroupPtr& group, const std::vector<OrbitFactor>& factors,
                                  const Truncation& r) {
    NovikovSeries acc = NovikovSeries::one(group).truncated(r);
    for (const auto& f : factors) acc *= factor_series(group, f, r);
    return acc;
}

/// The multiples (h^k, period k) whose logarithm reproduces the factor below r.
inline OrbitSet expand_factor_to_orbits(const GroupPtr& group, const OrbitFactor& f, const Truncation& r) {
    Grade g = group->grade(f.cls);
    if (g.sign() <= 0) throw MathError("factor class must have positive grade");
    if (r.is_exact()) throw TruncationError("factor expansion needs a finite grade");
    OrbitSet out;
    out.completeness = r;
    for (std::int64_t k = 1; r.admits(Rational(k) * g); ++k)
        out.orbits.push_back({group->scale(f.cls, k), k, factor_orbit_sign(f.type, k), 1});
    return out;
}

inline OrbitSet orbits_from_factors(const GroupPtr& group, const std::vector<OrbitFactor>& factors,
                                    const Truncation& r) {
    OrbitSet out;
    out.completeness = r;
    for (const auto& f : factors) out = merge_orbits(out, expand_factor_to_orbits(group, f, r));
    return out;
}

namespace detail {

inline int mobius(std::int64_t n) {
    int result = 1;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        n /= p;
        if (n % p == 0) return 0;
        result = -result;
    }
    if (n > 1) result = -result;
    return result;
}

}  // namespace detail

/// Orbits realizing x = 1 + a_1 h + a_2 h^2 + ... (integer a_n, x supported on powers
/// of h) through x = prod (1 - h^n)^(-f_n), n f_n = sum_{d | n} mu(n/d) d c_d with c
/// the coefficients of log x. With `invert` the orbits realize x^-1.
inline OrbitSet orbits_from_power_series(const NovikovSeries& x, const GroupElement& h, const Truncation& r,
                                         bool invert = false) {
    const auto& group = x.group();
    Grade gh = group->grade(h);
    if (gh.sign() <= 0) throw MathError("power series variable must have positive grade");
    OrbitSet out;
    out.completeness = min(r, x.truncation());
    if (out.completeness.is_exact()) throw TruncationError("power series realization needs a finite grade");
    std::int64_t top = 0;
    while (out.completeness.admits(Rational(top + 1) * gh)) ++top;
    std::vector<Rational> a(static_cast<std::size_t>(top + 1));
    for (const auto& t : x.terms()) {
        bool found = false;
        for (std::int64_t n = 0; n <= top && !found; ++n)
            if (group->scale(h, n) == t.element) {
                auto q = t.coeff.as_rational();
                if (!q || !is_integer(*q)) throw MathError("power series coefficients must be integers");
                a[static_cast<std::size_t>(n)] = *q;
                found = true;
            }
        if (!found) throw MathError("power series has a term outside the powers of its variable");
    }
    if (a[0] != 1) throw MathError("power series must have constant term 1");
    // c_n from log x via n c_n = n a_n - sum_{j<n} c_j j a_{n-j}
    std::vector<Rational> c(a.size());
    for (std::int64_t n = 1; n <= top; ++n) {
        Rational s = Rational(n) * a[static_cast<std::size_t>(n)];
        for (std::int64_t j = 1; j < n; ++j)
            s -= Rational(j) * c[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(n - j)];
        c[static_cast<std::size_t>(n)] = s / n;
    }
    for (std::int64_t n = 1; n <= top; ++n) {
        Rational nf = 0;
        for (std::int64_t d = 1; d <= n; ++d)
            if (n % d == 0) nf += Rational(detail::mobius(n / d)) * Rational(d) * c[static_cast<std::size_t>(d)];
        Rational f = nf / n;
        if (!is_integer(f)) throw MathError("power series does not factor into integral orbit factors");
        std::int64_t fn = to_int64(f.get_num());
        if (invert) fn = -fn;
        if (fn == 0) continue;
        for (std::int64_t k = 1; n * k <= top; ++k)
            out.orbits.push_back({group->scale(h, n * k), k, fn > 0 ? 1 : -1, fn > 0 ? fn : -fn});
    }
    return normalize_orbits(out);
}

using IntMatrix = std::vector<std::vector<Integer>>;

namespace detail {

inline IntMatrix int_product(const IntMatrix& a, const IntMatrix& b) {
    std::size_t n = a.size();
    IntMatrix out(n, std::vector<Integer>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

inline void check_square(const std::vector<IntMatrix>& maps) {
    for (std::size_t i = 0; i < maps.size(); ++i)
        for (const auto& row : maps[i])
            if (row.size() != maps[i].size())
                throw ParseError("homology map H_" + std::to_string(i) + " is not square");
}

}  // namespace detail

/// Lefschetz numbers L(phi^k) = sum_i (-1)^i tr(H_i^k) for k = 1..K.
inline std::vector<Integer> lefschetz_numbers(const std::vector<IntMatrix>& maps, std::int64_t K) {
    detail::check_square(maps);
    std::vector<Integer> out(static_cast<std::size_t>(K), 0);
    for (std::size_t i = 0; i < maps.size(); ++i) {
        IntMatrix p = maps[i];
        for (std::int64_t k = 1; k <= K; ++k) {
            Integer tr = 0;
            for (std::size_t j = 0; j < p.size(); ++j) tr += p[j][j];
            out[static_cast<std::size_t>(k - 1)] += (i % 2 == 0 ? 1 : -1) * tr;
            if (k < K) p = detail::int_product(p, maps[i]);
        }
    }
    return out;
}

/// exp(sum_k L(phi^k) t^k / k) over Z with N(t) = 1, to O(r).
inline NovikovSeries lefschetz_zeta(const GroupPtr& group, const std::vector<IntMatrix>& maps,
                                    const Truncation& r) {
    if (r.is_exact()) throw TruncationError("Lefschetz zeta needs a finite grade");
    GroupElement t = group->generator(0);
    Grade g = group->grade(t);
    std::int64_t K = 0;
    while (r.admits(Rational(K + 1) * g)) ++K;
    auto L = lefschetz_numbers(maps, K);
    std::vector<std::pair<GroupElement, CyclotomicNumber>> terms;
    for (std::int64_t k = 1; k <= K; ++k)
        terms.emplace_back(group->scale(t, k), CyclotomicNumber(ratio(L[static_cast<std::size_t>(k - 1)], k)));
    return exp_plus(NovikovSeries::from_terms(group, 1, std::move(terms), r));
}

/// det(1 - t M) as an exact polynomial in t.
inline NovikovSeries characteristic_series(const GroupPtr& group, const IntMatrix& m) {
    const std::size_t n = m.size();
    SeriesMatrix a(n, n, group);
    GroupElement t = group->generator(0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            NovikovSeries e = NovikovSeries::monomial(group, t, CyclotomicNumber(Rational(-m[i][j])));
            if (i == j) e += NovikovSeries::one(group);
            a(i, j) = std::move(e);
        }
    return leibniz_determinant(a);
}

/// prod_i det(1 - t H_i)^((-1)^(i+1)), expanded to O(r).
inline FieldElement mapping_torus_torsion(const GroupPtr& group, const std::vector<IntMatrix>& maps,
                                          const Truncation& r) {
    detail::check_square(maps);
    NovikovSeries acc = NovikovSeries::one(group).truncated(r);
    for (std::size_t i = 0; i < maps.size(); ++i) {
        NovikovSeries d = characteristic_series(group, maps[i]);
        acc *= i % 2 == 1 ? d.truncated(r) : series_invert(d, r).series();
    }
    return FieldElement(acc.truncated(r));
}

/// Orbits of a mapping-torus flow read off from its Lefschetz zeta function.
inline OrbitSet orbits_from_fiber_maps(const GroupPtr& group, const std::vector<IntMatrix>& maps,
                                       const Truncation& r) {
    return orbits_from_power_series(lefschetz_zeta(group, maps, r), group->generator(0), r);
}

/// Projection of a raw zeta function to every summand of the splitting.
inline std::vector<std::pair<std::int64_t, NovikovSeries>> split_series(const NovikovSeries& raw) {
    std::vector<std::pair<std::int64_t, NovikovSeries>> out;
    for (const auto& s : split_group_algebra(raw.group()->torsion_order()).summands)
        out.emplace_back(s.order, project_to_summand(raw, s.order));
    return out;
}

/// I = T_m * zeta, summand by summand.
inline InvariantI invariant_I(const BasedComplex& c, const OrbitSet& s, const TorsionOptions& opts = {}) {
    validate_orbits(*c.group(), s);
    NovikovSeries zeta = zeta_from_orbits(c.group(), s);
    TorsionValue tau = torsion(c, opts);
    return multiply_summands(tau, [&](std::int64_t d) { return project_to_summand(zeta, d); });
}

}  // namespace novikov
