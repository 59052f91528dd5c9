#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "novikov/moves.hpp"

namespace novikov {

namespace detail {

// sigma_i(y) = sum c_h theta^(i m(h)) h with theta = zeta_k, coefficients lifted
// to Q(zeta_L), L = lcm(d, k). Group elements stay in H.
inline NovikovSeries twist(const NovikovSeries& y, const CyclicQuotient& m, std::int64_t i, std::int64_t L) {
    const std::int64_t k = m.modulus;
    std::vector<std::pair<GroupElement, CyclotomicNumber>> terms;
    terms.reserve(y.terms().size());
    for (const auto& t : y.terms()) {
        CyclotomicNumber c = t.coeff.embed(L);
        std::int64_t e = floor_mod(i * m.apply(t.element), k) * (L / k);
        if (e != 0) c = c * CyclotomicNumber::root_power(L, e);
        terms.emplace_back(t.element, std::move(c));
    }
    return NovikovSeries::from_terms(y.group(), L, std::move(terms), y.truncation());
}

// Brings a Q(zeta_L)-series over H supported on K down to a series over K with
// coefficients in Q(zeta_d). With `fold`, torsion residues of K are absorbed
// into zeta_d (summand form); otherwise they are kept (raw form, d = 1).
inline NovikovSeries descend(const NovikovSeries& s, const SubgroupEmbedding& emb, std::int64_t d, bool fold) {
    std::vector<std::pair<GroupElement, CyclotomicNumber>> terms;
    for (const auto& t : s.terms()) {
        auto x = emb.pullback(t.element);
        if (!x) throw MathError("result does not descend to the subgroup: term at grade " + t.grade.str());
        auto c = t.coeff.restrict_to(d);
        if (!c) throw MathError("result does not descend: coefficient " + t.coeff.str() + " outside Q(zeta_" +
                                std::to_string(d) + ")");
        if (fold && x->torsion != 0) {
            *c = *c * CyclotomicNumber::root_power(d, x->torsion);
            x->torsion = 0;
        }
        terms.emplace_back(*x, std::move(*c));
    }
    return NovikovSeries::from_terms(emb.kernel, d, std::move(terms), s.truncation());
}

}  // namespace detail

/// Norm(y) = prod_{i<k} sigma_i(y), the determinant of multiplication by y on Lambda
/// viewed as a module over the Novikov ring of K = ker m.
///
/// y is a raw series over H, or with `summand` set a series in the summand
/// Q(zeta_d) (torsion folded in, which needs m to vanish on torsion).
inline NovikovSeries cover_norm(const NovikovSeries& y, const SubgroupEmbedding& emb, bool summand = false) {
    const auto& m = emb.quotient;
    std::int64_t d = y.coeff_order();
    if (summand && !m.annihilates_torsion())
        throw MathError("summand-wise Norm needs m to vanish on the torsion subgroup");
    std::int64_t L = std::lcm(d, m.modulus);
    NovikovSeries acc = detail::twist(y, m, 0, L);
    for (std::int64_t i = 1; i < m.modulus; ++i) acc *= detail::twist(y, m, i, L);
    return detail::descend(acc, emb, d, summand || d != 1);
}

/// Tr(y) = sum_{i<k} sigma_i(y).
inline NovikovSeries cover_trace(const NovikovSeries& y, const SubgroupEmbedding& emb, bool summand = false) {
    const auto& m = emb.quotient;
    std::int64_t d = y.coeff_order();
    if (summand && !m.annihilates_torsion())
        throw MathError("summand-wise Trace needs m to vanish on the torsion subgroup");
    std::int64_t L = std::lcm(d, m.modulus);
    NovikovSeries acc(y.group(), L, y.truncation());
    for (std::int64_t i = 0; i < m.modulus; ++i) acc += detail::twist(y, m, i, L);
    return detail::descend(acc, emb, d, summand || d != 1);
}

/// iota^*(y): the terms of y lying in K, read in K's coordinates.
inline NovikovSeries restrict_to_kernel(const NovikovSeries& y, const SubgroupEmbedding& emb, bool summand = false) {
    std::vector<std::pair<GroupElement, CyclotomicNumber>> terms;
    std::int64_t d = y.coeff_order();
    for (const auto& t : y.terms()) {
        auto x = emb.pullback(t.element);
        if (!x) continue;
        CyclotomicNumber c = t.coeff;
        if ((summand || d != 1) && x->torsion != 0) {
            c = c * CyclotomicNumber::root_power(d, x->torsion);
            x->torsion = 0;
        }
        terms.emplace_back(*x, std::move(c));
    }
    return NovikovSeries::from_terms(emb.kernel, d, std::move(terms), y.truncation());
}

/// The map from summands of H to summands of K: with m vanishing on torsion, K
/// contains the whole torsion subgroup and summand d goes to summand d.
inline SplitValue norm_split(const SplitValue& v, const SubgroupEmbedding& emb) {
    SplitValue out;
    out.ambiguity = v.ambiguity;
    for (const auto& s : v.summands) {
        SummandValue n{s.order, std::nullopt};
        if (s.value) {
            NovikovSeries ns = cover_norm(s.value->series(), emb, true);
            if (ns.is_zero()) throw TruncationError("Norm vanishes at the working truncation");
            n.value = FieldElement(ns);
        }
        out.summands.push_back(std::move(n));
    }
    return out;
}

/// Lifts of the orbits to the k-fold cover.
///
/// An orbit of period p and class p*g lifts when l = ord(m(g)) divides p, giving
/// k/l orbits of period p/l and class p*g (now in K).
inline OrbitSet cover_orbits(const GroupPtr& group, const OrbitSet& s, const SubgroupEmbedding& emb) {
    const std::int64_t k = emb.index();
    OrbitSet out;
    out.completeness = s.completeness;
    for (const auto& o : s.orbits) {
        auto g = primitive_class(*group, o.cls, o.period);
        if (!g) throw MathError("orbit class is not divisible by its period");
        std::int64_t mg = emb.quotient.apply(*g);
        if (!emb.quotient.annihilates_torsion() && group->torsion_order() != 0) {
            // other roots of the class could have a different image under m
            for (std::int64_t j = 0; j < group->torsion_modulus(); ++j) {
                GroupElement alt = *g;
                alt.torsion = j;
                if (group->scale(alt, o.period) == o.cls && emb.quotient.apply(alt) != mg)
                    throw MathError("orbit lift is ambiguous: m does not vanish on torsion");
            }
        }
        std::int64_t l = k / std::gcd(mg, k);
        if (o.period % l != 0) continue;
        auto x = emb.pullback(o.cls);
        if (!x) throw MathError("lifted orbit class outside the subgroup");
        out.orbits.push_back({*x, o.period / l, o.sign, o.count * (k / l)});
    }
    return normalize_orbits(out);
}

/// The k-fold cyclic cover of a complex, as a complex over the Novikov ring of K.
///
/// Generator x becomes x_0..x_{k-1} standing for c_j * x, with c_j the coset
/// representatives. An entry a of the boundary splits as c_j a = sum_l c_l iota(b_l).
inline BasedComplex cover_complex(const BasedComplex& c, const SubgroupEmbedding& emb) {
    const auto& m = emb.quotient;
    if (!m.annihilates_torsion()) throw MathError("cover complex needs m to vanish on the torsion subgroup");
    const std::int64_t k = emb.index();
    const auto& H = *c.group();
    BasedComplex out(emb.kernel, c.truncation(), c.ambiguity());
    auto name = [](const std::string& base, std::int64_t j) { return base + "_" + std::to_string(j); };
    for (const auto& g : c.all_generators())
        for (std::int64_t j = 0; j < k; ++j) out.add_generator(name(g.name, j), g.degree);
    for (const auto& x : c.all_generators()) {
        for (const auto& y : c.generators(x.degree - 1)) {
            const NovikovSeries& a = c.entry(x.name, y.name);
            if (a.is_zero() && a.is_exact()) continue;
            for (std::int64_t j = 0; j < k; ++j) {
                std::vector<std::vector<std::pair<GroupElement, CyclotomicNumber>>> parts(static_cast<std::size_t>(k));
                for (const auto& t : a.terms()) {
                    GroupElement h = H.add(emb.coset_representatives[static_cast<std::size_t>(j)], t.element);
                    std::int64_t l = m.apply(h);
                    auto b = emb.pullback(H.subtract(h, emb.coset_representatives[static_cast<std::size_t>(l)]));
                    if (!b) throw MathError("coset decomposition failed");
                    parts[static_cast<std::size_t>(l)].emplace_back(*b, t.coeff);
                }
                // the truncation of c_j a, read in K, moves with the coset shift
                for (std::int64_t l = 0; l < k; ++l) {
                    Grade shift = H.grade(emb.coset_representatives[static_cast<std::size_t>(j)]) -
                                  H.grade(emb.coset_representatives[static_cast<std::size_t>(l)]);
                    NovikovSeries b = NovikovSeries::from_terms(emb.kernel, 1, parts[static_cast<std::size_t>(l)],
                                                                a.truncation().shifted(shift));
                    out.set_entry(name(x.name, j), name(y.name, l), std::move(b));
                }
            }
        }
    }
    return out;
}

/// Reads an exact complex over Z[H] as a complex over the Novikov ring of `target`
/// (same H, grading from `target`), truncated at r.
inline BasedComplex latour_embed(const BasedComplex& c, const GroupPtr& target, const Truncation& r) {
    if (target->rank() != c.group()->rank() || target->torsion_order() != c.group()->torsion_order())
        throw MathError("latour embedding needs the same underlying group");
    BasedComplex out(target, r, c.ambiguity());
    for (const auto& g : c.all_generators()) out.add_generator(g.name, g.degree, g.lift);
    for (const auto& x : c.all_generators())
        for (const auto& y : c.generators(x.degree - 1)) {
            const NovikovSeries& a = c.entry(x.name, y.name);
            if (!a.is_exact()) throw MathError("latour embedding needs polynomial entries");
            out.set_entry(x.name, y.name, a.with_group(target).truncated(r));
        }
    return out;
}

/// iota applied to the group-ring torsion of an exact complex, summand by summand.
inline SplitValue embedded_group_ring_torsion(const BasedComplex& c, const GroupPtr& target, const Truncation& r) {
    SplitValue out;
    out.ambiguity = c.ambiguity();
    for (auto& [d, rf] : group_ring_torsion(c))
        out.summands.push_back({d, rf ? std::optional<FieldElement>(iota(*rf, target, r)) : std::nullopt});
    return out;
}

}  // namespace novikov
