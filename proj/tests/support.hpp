#pragma once

// Random generators and independent oracles shared by the test suites and the
// acceptance binary. Nothing here calls the torsion or determinant code of the
// library; oracles are written against plain series arithmetic.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "novikov/commands.hpp"

namespace testsupport {

using namespace novikov;

inline NovikovSeries mono(const GroupPtr& g, const GroupElement& h, long c = 1) {
    return NovikovSeries::monomial(g, h, CyclotomicNumber(Rational(c)));
}

inline NovikovSeries tpow(const GroupPtr& g, long k, long c = 1) { return mono(g, g->scale(g->generator(0), k), c); }

/// Random element of H with free coordinates in [lo, hi].
inline GroupElement random_element(Rng& rng, const GradedGroup& g, long lo, long hi) {
    std::vector<std::int64_t> free;
    for (std::size_t i = 0; i < g.rank(); ++i) free.push_back(rng.uniform(lo, hi));
    std::int64_t tor = g.torsion_order() > 0 ? rng.uniform(0, g.torsion_order() - 1) : 0;
    return g.make_element(free, tor);
}

/// Random element of positive grade (free coordinates nonnegative, not all zero).
inline GroupElement random_positive(Rng& rng, const GradedGroup& g, long hi) {
    for (;;) {
        GroupElement h = random_element(rng, g, 0, hi);
        if (g.grade(h).sign() > 0) return h;
    }
}

/// Random polynomial with `terms` terms, small integer coefficients.
inline NovikovSeries random_poly(Rng& rng, const GroupPtr& g, int terms, long lo, long hi) {
    NovikovSeries s(g);
    for (int k = 0; k < terms; ++k) {
        long c = rng.uniform(-3, 3);
        if (c == 0) c = 1;
        s += mono(g, random_element(rng, *g, lo, hi), c);
    }
    return s;
}

/// Random element of Lambda^+ with up to `terms` terms.
inline NovikovSeries random_plus(Rng& rng, const GroupPtr& g, int terms, long hi) {
    NovikovSeries s(g);
    for (int k = 0; k < terms; ++k) {
        long c = rng.uniform(-3, 3);
        if (c == 0) c = 2;
        s += mono(g, random_positive(rng, *g, hi), c);
    }
    return s;
}

/// Random unit: c * h * (1 + x) with x in Lambda^+; h = 1 unless `shifted`.
inline NovikovSeries random_unit(Rng& rng, const GroupPtr& g, int terms, long hi, bool shifted = true) {
    long c = rng.uniform(1, 3) * (rng.uniform(0, 1) ? 1 : -1);
    NovikovSeries base = NovikovSeries::one(g) + random_plus(rng, g, terms, hi);
    return mono(g, shifted ? random_element(rng, *g, -1, 1) : g->identity(), c) * base;
}

/// Random nonzero number of Q(zeta_d).
inline CyclotomicNumber random_cyclotomic(Rng& rng, std::int64_t d) {
    for (;;) {
        std::vector<Rational> c;
        for (std::size_t i = 0; i < static_cast<std::size_t>(euler_phi(d)); ++i)
            c.push_back(ratio(rng.uniform(-4, 4), rng.uniform(1, 3)));
        CyclotomicNumber x = CyclotomicNumber::from_polynomial(RationalPolynomial(c), d);
        if (!x.is_zero()) return x;
    }
}

// ---- determinants and torsion oracles -----------------------------------------

/// det by cofactor expansion along the first row.
inline NovikovSeries cofactor_det(const std::vector<std::vector<NovikovSeries>>& m, const GroupPtr& g,
                                  std::int64_t order = 1) {
    const std::size_t n = m.size();
    if (n == 0) return NovikovSeries::one(g, order);
    if (n == 1) return m[0][0];
    NovikovSeries acc(g, order);
    for (std::size_t j = 0; j < n; ++j) {
        if (m[0][j].is_zero() && m[0][j].is_exact()) continue;
        std::vector<std::vector<NovikovSeries>> minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<NovikovSeries> row;
            for (std::size_t c = 0; c < n; ++c)
                if (c != j) row.push_back(m[r][c]);
            minor.push_back(std::move(row));
        }
        NovikovSeries term = m[0][j] * cofactor_det(minor, g, order);
        acc = j % 2 == 0 ? acc + term : acc - term;
    }
    return acc;
}

inline std::vector<std::vector<NovikovSeries>> rows_of(const SeriesMatrix& a) {
    std::vector<std::vector<NovikovSeries>> out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i].push_back(a(i, j));
    return out;
}

inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

/// Every valid subbasis choice of an acyclic complex, projected to summand d:
/// columns S_i of C_i mapped isomorphically onto rows T_{i-1} = C_{i-1} \ S_{i-1}.
/// Each entry is (num, den) with num / den = prod_i det(d_i[T_{i-1}, S_i])^((-1)^i);
/// choices whose determinant vanishes modulo `cap` are skipped.
inline std::vector<std::pair<NovikovSeries, NovikovSeries>> all_subbasis_fractions(const BasedComplex& c,
                                                                                  std::int64_t d,
                                                                                  const Truncation& cap) {
    std::vector<int> degs = c.degrees();
    std::vector<std::pair<NovikovSeries, NovikovSeries>> out;
    if (degs.empty()) {
        out.emplace_back(NovikovSeries::one(c.group(), d), NovikovSeries::one(c.group(), d));
        return out;
    }
    int lo = degs.front(), hi = degs.back();
    // sizes: |S_lo| = 0, |S_i| = n_{i-1} - |S_{i-1}|
    std::map<int, std::size_t> s_size;
    s_size[lo] = 0;
    for (int i = lo + 1; i <= hi + 1; ++i) {
        long need = static_cast<long>(c.size(i - 1)) - static_cast<long>(s_size[i - 1]);
        if (need < 0) return out;
        s_size[i] = static_cast<std::size_t>(need);
    }
    if (s_size[hi + 1] != 0) return out;  // Euler characteristic mismatch: not acyclic
    std::map<int, std::vector<std::size_t>> chosen;
    auto proj = [&](const NovikovSeries& x) { return project_to_summand(x, d); };
    std::function<void(int)> rec = [&](int i) {
        if (i > hi) {
            NovikovSeries num = NovikovSeries::one(c.group(), d), den = NovikovSeries::one(c.group(), d);
            for (int k = lo + 1; k <= hi; ++k) {
                std::vector<bool> in_s(c.size(k - 1), false);
                for (auto x : chosen[k - 1]) in_s[x] = true;
                std::vector<std::size_t> rows;
                for (std::size_t x = 0; x < c.size(k - 1); ++x)
                    if (!in_s[x]) rows.push_back(x);
                SeriesMatrix b = c.boundary(k);
                std::vector<std::vector<NovikovSeries>> m;
                for (auto r : rows) {
                    std::vector<NovikovSeries> row;
                    for (auto col : chosen[k]) row.push_back(proj(b(r, col)));
                    m.push_back(std::move(row));
                }
                NovikovSeries det = cofactor_det(m, c.group(), d);
                if (det.truncated(cap).is_zero()) return;
                if (k % 2 == 0) num = num * det;
                else den = den * det;
            }
            out.emplace_back(std::move(num), std::move(den));
            return;
        }
        for (const auto& s : subsets(c.size(i), s_size[i])) {
            chosen[i] = s;
            rec(i + 1);
        }
    };
    rec(lo);
    return out;
}

/// The same choices as series expanded to O(cap).
inline std::vector<NovikovSeries> all_subbasis_torsions(const BasedComplex& c, std::int64_t d, const Truncation& cap) {
    std::vector<NovikovSeries> out;
    for (const auto& [num, den] : all_subbasis_fractions(c, d, cap))
        out.push_back((num * series_invert(den, cap).series()).truncated(cap));
    return out;
}

/// Random invertible matrix over Lambda: lower unipotent * diagonal units * upper unipotent.
/// Unshifted units keep every entry of A^-1 d A accurate to the working truncation.
inline SeriesMatrix random_automorphism(Rng& rng, const GroupPtr& g, std::size_t n, bool shifted = true) {
    SeriesMatrix l = SeriesMatrix::identity(n, g), u = SeriesMatrix::identity(n, g), dg(n, n, g);
    for (std::size_t i = 0; i < n; ++i) {
        dg(i, i) = random_unit(rng, g, 2, 2, shifted);
        for (std::size_t j = 0; j < i; ++j) {
            if (rng.chance(0.6)) l(i, j) = random_poly(rng, g, 2, 0, 2);
            if (rng.chance(0.6)) u(j, i) = random_poly(rng, g, 2, 0, 2);
        }
    }
    return l * dg * u;
}

/// A random acyclic Novikov complex truncated at r (degrees 0..degrees-1).
inline BasedComplex random_acyclic(std::uint64_t seed, int degrees, int max_per_degree, std::int64_t torsion,
                                   const Truncation& r) {
    builtin::RandomParams p;
    p.degrees = degrees;
    p.max_per_degree = max_per_degree;
    p.torsion = torsion;
    p.density = 0.6;
    Scenario sc = builtin::random_complex(seed, p);
    return build_complex(sc, r);
}

}  // namespace testsupport
