#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

#include "novikov/grade.hpp"

namespace novikov {

/// Element of H = Z^r + Z/n.
///
/// With weights in Q(sqrt2) an injective grading exists only for r <= 2, so
/// the free part has two fixed slots; slots at index >= r stay zero.
struct GroupElement {
    static constexpr std::size_t kMaxRank = 2;

    std::array<std::int64_t, kMaxRank> free{};
    std::int64_t torsion = 0;

    friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
    friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

/// H = Z^r + Z/n together with the grading homomorphism N: H -> R.
///
/// N is given by its values on the free generators and vanishes on torsion.
/// Construction rejects weight vectors for which N is not injective on Z^r.
class GradedGroup {
public:
    GradedGroup(std::vector<Grade> weights, std::int64_t torsion_order)
        : weights_(std::move(weights)), torsion_order_(torsion_order <= 1 ? 0 : torsion_order) {
        if (torsion_order < 0) throw MathError("torsion order must be nonnegative");
        if (weights_.size() > GroupElement::kMaxRank)
            throw MathError("grading cannot be injective on Z^" + std::to_string(weights_.size()) +
                            " with weights in Q(sqrt2)");
        check_injective();
    }

    static std::shared_ptr<const GradedGroup> make(std::vector<Grade> weights, std::int64_t torsion_order = 0) {
        return std::make_shared<const GradedGroup>(std::move(weights), torsion_order);
    }
    /// Z with N(t) = 1, the ring of the mapping-torus and circle examples.
    static std::shared_ptr<const GradedGroup> infinite_cyclic() { return make({Grade(1)}); }

    std::size_t rank() const { return weights_.size(); }
    /// 0 when there is no torsion factor.
    std::int64_t torsion_order() const { return torsion_order_; }
    std::int64_t torsion_modulus() const { return torsion_order_ == 0 ? 1 : torsion_order_; }
    const std::vector<Grade>& weights() const { return weights_; }

    GroupElement identity() const { return {}; }
    GroupElement generator(std::size_t i) const {
        if (i >= rank()) throw MathError("free generator index out of range");
        GroupElement g;
        g.free[i] = 1;
        return g;
    }
    GroupElement torsion_generator() const {
        GroupElement g;
        g.torsion = torsion_order_ == 0 ? 0 : 1;
        return g;
    }

    void validate(const GroupElement& h) const {
        for (std::size_t i = rank(); i < GroupElement::kMaxRank; ++i)
            if (h.free[i] != 0) throw MathError("group element has more coordinates than the free rank");
        if (h.torsion < 0 || h.torsion >= torsion_modulus())
            throw MathError("torsion residue out of range");
    }

    GroupElement make_element(std::vector<std::int64_t> free_part, std::int64_t torsion = 0) const {
        if (free_part.size() != rank()) throw MathError("dimension mismatch: expected " + std::to_string(rank()) +
                                                        " free coordinates, got " + std::to_string(free_part.size()));
        GroupElement h;
        for (std::size_t i = 0; i < free_part.size(); ++i) h.free[i] = free_part[i];
        h.torsion = floor_mod(torsion, torsion_modulus());
        return h;
    }

    GroupElement add(const GroupElement& x, const GroupElement& y) const {
        GroupElement z;
        for (std::size_t i = 0; i < GroupElement::kMaxRank; ++i) z.free[i] = x.free[i] + y.free[i];
        z.torsion = (x.torsion + y.torsion) % torsion_modulus();
        return z;
    }
    GroupElement negate(const GroupElement& x) const { return scale(x, -1); }
    GroupElement subtract(const GroupElement& x, const GroupElement& y) const { return add(x, negate(y)); }
    GroupElement scale(const GroupElement& x, std::int64_t k) const {
        GroupElement z;
        for (std::size_t i = 0; i < GroupElement::kMaxRank; ++i) z.free[i] = x.free[i] * k;
        z.torsion = floor_mod(x.torsion * k, torsion_modulus());
        return z;
    }

    Grade grade(const GroupElement& h) const {
        validate(h);
        Grade g;
        for (std::size_t i = 0; i < rank(); ++i)
            if (h.free[i] != 0) g += Rational(h.free[i]) * weights_[i];
        return g;
    }

    bool is_torsion(const GroupElement& h) const {
        for (auto c : h.free)
            if (c != 0) return false;
        return true;
    }

    friend bool operator==(const GradedGroup& x, const GradedGroup& y) {
        return x.weights_ == y.weights_ && x.torsion_order_ == y.torsion_order_;
    }

    std::string str() const {
        std::string out = "Z^" + std::to_string(rank());
        if (torsion_order_) out += " + Z/" + std::to_string(torsion_order_);
        out += " weights(";
        for (std::size_t i = 0; i < rank(); ++i) out += (i ? "," : "") + weights_[i].str();
        return out + ")";
    }

private:
    // N(x) = sum x_i (a_i + b_i sqrt2) vanishes on a nonzero integer x iff the
    // 2 x r rational matrix [a; b] has a kernel, i.e. rank < r.
    void check_injective() const {
        std::vector<std::vector<Rational>> m(2, std::vector<Rational>(rank()));
        for (std::size_t j = 0; j < rank(); ++j) {
            m[0][j] = weights_[j].rational_part();
            m[1][j] = weights_[j].sqrt2_part();
        }
        std::size_t r = 0;
        for (std::size_t c = 0; c < rank() && r < 2; ++c) {
            std::size_t p = r;
            while (p < 2 && m[p][c] == 0) ++p;
            if (p == 2) continue;
            std::swap(m[p], m[r]);
            for (std::size_t i = 0; i < 2; ++i) {
                if (i == r || m[i][c] == 0) continue;
                Rational f = m[i][c] / m[r][c];
                for (std::size_t k = 0; k < rank(); ++k) m[i][k] -= f * m[r][k];
            }
            ++r;
        }
        if (r < rank()) throw MathError("grading is not injective on the free part");
    }

    std::vector<Grade> weights_;
    std::int64_t torsion_order_;
};

using GroupPtr = std::shared_ptr<const GradedGroup>;

inline bool same_group(const GroupPtr& x, const GroupPtr& y) { return x == y || (x && y && *x == *y); }

/// A homomorphism m: H -> Z/k given by residues on the generators.
struct CyclicQuotient {
    std::int64_t modulus = 1;
    std::vector<std::int64_t> free_weights;
    std::int64_t torsion_weight = 0;

    std::int64_t apply(const GroupElement& h) const {
        std::int64_t r = 0;
        for (std::size_t i = 0; i < free_weights.size(); ++i)
            r = floor_mod(r + floor_mod(free_weights[i], modulus) * floor_mod(h.free[i], modulus), modulus);
        return floor_mod(r + floor_mod(torsion_weight, modulus) * h.torsion, modulus);
    }
    bool annihilates_torsion() const { return floor_mod(torsion_weight, modulus) == 0; }
};

namespace detail {

struct ExtGcd {
    std::int64_t g, s, t;  // g = s*a + t*b, g >= 0
};

inline ExtGcd ext_gcd(std::int64_t a, std::int64_t b) {
    std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        std::int64_t q = old_r / r;
        std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
        std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
        std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
    }
    if (old_r < 0) return {-old_r, -old_s, -old_t};
    return {old_r, old_s, old_t};
}

using IntRows = std::vector<std::vector<std::int64_t>>;

// Row-style Hermite normal form of a square full-rank integer matrix:
// upper triangular, positive pivots, entries above each pivot reduced into [0, pivot).
inline IntRows hermite_normal_form(IntRows m) {
    const std::size_t n = m.size();
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = c + 1; i < n; ++i) {
            if (m[i][c] == 0) continue;
            auto [g, s, t] = ext_gcd(m[c][c], m[i][c]);
            std::int64_t a = m[c][c] / g, b = m[i][c] / g;
            for (std::size_t k = 0; k < n; ++k) {
                std::int64_t top = s * m[c][k] + t * m[i][k];
                std::int64_t bot = -b * m[c][k] + a * m[i][k];
                m[c][k] = top;
                m[i][k] = bot;
            }
        }
        if (m[c][c] < 0)
            for (auto& v : m[c]) v = -v;
        if (m[c][c] == 0) throw MathError("lattice basis is not full rank");
        for (std::size_t i = 0; i < c; ++i) {
            std::int64_t q = (m[i][c] - floor_mod(m[i][c], m[c][c])) / m[c][c];
            for (std::size_t k = 0; k < n; ++k) m[i][k] -= q * m[c][k];
        }
    }
    return m;
}

}  // namespace detail

/// Checks that m is a well-defined surjection H -> Z/k.
inline void validate_quotient(const GradedGroup& group, const CyclicQuotient& m) {
    if (m.modulus < 1) throw MathError("cyclic quotient modulus must be positive");
    if (m.free_weights.size() != group.rank()) throw MathError("dimension mismatch in cyclic quotient weights");
    if (group.torsion_order() == 0 && !m.annihilates_torsion())
        throw MathError("torsion weight given for a group without torsion");
    if (group.torsion_order() != 0 && floor_mod(m.torsion_weight * group.torsion_order(), m.modulus) != 0)
        throw MathError("cyclic quotient is not well defined on the torsion factor");
    std::int64_t g = m.modulus;
    for (auto w : m.free_weights) g = std::gcd(g, w);
    if (group.torsion_order() != 0) g = std::gcd(g, m.torsion_weight);
    if (g != 1) throw MathError("cyclic quotient is not surjective");
}

/// K = ker(m) as a graded group, the inclusion iota: K -> H, and coset representatives.
struct SubgroupEmbedding {
    GroupPtr ambient;
    GroupPtr kernel;
    CyclicQuotient quotient;
    std::vector<GroupElement> free_basis;  // images of K's free generators in H
    std::int64_t torsion_step = 1;         // K's torsion generator is s^torsion_step
    std::vector<GroupElement> coset_representatives;  // c_j with m(c_j) = j

    std::int64_t index() const { return quotient.modulus; }

    GroupElement embed(const GroupElement& x) const {
        kernel->validate(x);
        GroupElement h;
        for (std::size_t i = 0; i < free_basis.size(); ++i)
            h = ambient->add(h, ambient->scale(free_basis[i], x.free[i]));
        GroupElement s;
        s.torsion = floor_mod(x.torsion * torsion_step, ambient->torsion_modulus());
        return ambient->add(h, s);
    }

    /// iota^{-1}(h), or nullopt when h is not in K.
    std::optional<GroupElement> pullback(const GroupElement& h) const {
        if (quotient.apply(h) != 0) return std::nullopt;
        const std::size_t r = ambient->rank();
        GroupElement x;
        // free parts of the basis rows are upper triangular: y_j = sum_{i<=j} x_i B[i][j]
        for (std::size_t j = 0; j < r; ++j) {
            std::int64_t rest = h.free[j];
            for (std::size_t i = 0; i < j; ++i) rest -= x.free[i] * free_basis[i].free[j];
            std::int64_t piv = free_basis[j].free[j];
            if (rest % piv != 0) return std::nullopt;
            x.free[j] = rest / piv;
        }
        std::int64_t n = ambient->torsion_modulus();
        std::int64_t tors = h.torsion;
        for (std::size_t i = 0; i < r; ++i) tors -= x.free[i] * free_basis[i].torsion;
        tors = floor_mod(tors, n);
        if (tors % torsion_step != 0) return std::nullopt;
        x.torsion = floor_mod(tors / torsion_step, kernel->torsion_modulus());
        return x;
    }
};

/// Computes K = ker(m) with inherited grading.
///
/// The preimage lattice {v : w.v = 0 mod k} is obtained as the projection of the
/// integer kernel of the row (k, w_1, ..., w_D) and brought to Hermite normal form;
/// the last HNF row then generates K's torsion.
inline SubgroupEmbedding kernel_of_quotient(const GroupPtr& group, const CyclicQuotient& m) {
    validate_quotient(*group, m);
    const std::size_t r = group->rank();
    const bool with_torsion = group->torsion_order() != 0;
    const std::size_t dim = r + (with_torsion ? 1 : 0);
    const std::int64_t k = m.modulus;

    std::vector<std::int64_t> row(dim + 1);
    row[0] = k;
    for (std::size_t i = 0; i < r; ++i) row[i + 1] = floor_mod(m.free_weights[i], k);
    if (with_torsion) row[dim] = floor_mod(m.torsion_weight, k);

    // unimodular U with row * U = (g, 0, ..., 0)
    detail::IntRows u(dim + 1, std::vector<std::int64_t>(dim + 1, 0));
    for (std::size_t i = 0; i <= dim; ++i) u[i][i] = 1;
    for (std::size_t j = 1; j <= dim; ++j) {
        std::int64_t x = row[0], y = row[j];
        if (y == 0) continue;
        auto [g, s, t] = detail::ext_gcd(x, y);
        for (std::size_t i = 0; i <= dim; ++i) {
            std::int64_t c0 = u[i][0], cj = u[i][j];
            u[i][0] = s * c0 + t * cj;
            u[i][j] = (-y / g) * c0 + (x / g) * cj;
        }
        row[0] = g;
        row[j] = 0;
    }

    SubgroupEmbedding emb;
    emb.ambient = group;
    emb.quotient = m;

    GroupElement unit_lift;  // m(unit_lift) = 1
    for (std::size_t i = 0; i < r; ++i) unit_lift.free[i] = u[i + 1][0];
    if (with_torsion) unit_lift.torsion = floor_mod(u[dim][0], group->torsion_modulus());
    for (std::int64_t j = 0; j < k; ++j) emb.coset_representatives.push_back(group->scale(unit_lift, j));

    std::vector<Grade> weights;
    if (dim > 0) {
        detail::IntRows lattice(dim, std::vector<std::int64_t>(dim));
        for (std::size_t c = 1; c <= dim; ++c)
            for (std::size_t i = 0; i < dim; ++i) lattice[c - 1][i] = u[i + 1][c];
        auto hnf = detail::hermite_normal_form(lattice);
        for (std::size_t i = 0; i < r; ++i) {
            GroupElement e;
            for (std::size_t j = 0; j < r; ++j) e.free[j] = hnf[i][j];
            if (with_torsion) e.torsion = floor_mod(hnf[i][dim - 1], group->torsion_modulus());
            emb.free_basis.push_back(e);
            weights.push_back(group->grade(e));
        }
        if (with_torsion) emb.torsion_step = hnf[dim - 1][dim - 1];
    }
    std::int64_t kernel_torsion = with_torsion ? group->torsion_order() / emb.torsion_step : 0;
    emb.kernel = GradedGroup::make(std::move(weights), kernel_torsion);
    return emb;
}

}  // namespace novikov
