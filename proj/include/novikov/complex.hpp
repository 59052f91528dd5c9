#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "novikov/matrix.hpp"
#include "novikov/series_io.hpp"

namespace novikov {

struct Generator {
    std::string name;
    int degree = 0;
    GroupElement lift;

    friend bool operator==(const Generator&, const Generator&) = default;
};

inline int alternating_sign(int i) { return floor_mod(i, 2) == 0 ? 1 : -1; }

/// Finite free based chain complex over the Novikov ring of a graded group.
///
/// boundary(i) has one row per degree i-1 generator and one column per degree i
/// generator; entry (q, p) is the coefficient of q in the boundary of p, measured
/// relative to the chosen lifts. Entries are raw series (rational coefficients,
/// torsion residues kept).
class BasedComplex {
public:
    BasedComplex() = default;
    BasedComplex(GroupPtr group, Truncation truncation, Ambiguity ambiguity = Ambiguity::kTranslation)
        : group_(std::move(group)), truncation_(std::move(truncation)), ambiguity_(ambiguity) {}

    const GroupPtr& group() const { return group_; }
    const Truncation& truncation() const { return truncation_; }
    Ambiguity ambiguity() const { return ambiguity_; }
    void set_ambiguity(Ambiguity a) { ambiguity_ = a; }
    void set_truncation(Truncation r) { truncation_ = std::move(r); }

    void add_generator(const std::string& name, int degree, const GroupElement& lift = {}) {
        if (name.empty()) throw ParseError("generator name must be nonempty");
        if (find(name)) throw ParseError("duplicate generator '" + name + "'");
        group_->validate(lift);
        auto& list = by_degree_[degree];
        std::size_t pos = list.size();
        list.push_back({name, degree, lift});
        if (auto it = boundary_.find(degree); it != boundary_.end())
            it->second.append_col(std::vector<NovikovSeries>(it->second.rows(), zero()));
        else boundary_.emplace(degree, SeriesMatrix(size(degree - 1), pos + 1, group_));
        if (auto it = boundary_.find(degree + 1); it != boundary_.end())
            it->second.append_row(std::vector<NovikovSeries>(it->second.cols(), zero()));
        else boundary_.emplace(degree + 1, SeriesMatrix(pos + 1, size(degree + 1), group_));
    }

    struct Location {
        int degree;
        std::size_t index;
    };
    std::optional<Location> find(const std::string& name) const {
        for (const auto& [deg, list] : by_degree_)
            for (std::size_t i = 0; i < list.size(); ++i)
                if (list[i].name == name) return Location{deg, i};
        return std::nullopt;
    }
    Location locate(const std::string& name) const {
        auto loc = find(name);
        if (!loc) throw ParseError("unknown generator '" + name + "'");
        return *loc;
    }
    const Generator& generator(const std::string& name) const {
        auto loc = locate(name);
        return by_degree_.at(loc.degree)[loc.index];
    }

    /// Degrees that carry at least one generator, ascending.
    std::vector<int> degrees() const {
        std::vector<int> out;
        for (const auto& [deg, list] : by_degree_)
            if (!list.empty()) out.push_back(deg);
        return out;
    }
    std::size_t size(int degree) const {
        auto it = by_degree_.find(degree);
        return it == by_degree_.end() ? 0 : it->second.size();
    }
    std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& [deg, list] : by_degree_) n += list.size();
        return n;
    }
    const std::vector<Generator>& generators(int degree) const {
        static const std::vector<Generator> empty;
        auto it = by_degree_.find(degree);
        return it == by_degree_.end() ? empty : it->second;
    }
    std::vector<Generator> all_generators() const {
        std::vector<Generator> out;
        for (const auto& [deg, list] : by_degree_) out.insert(out.end(), list.begin(), list.end());
        return out;
    }

    /// The matrix of the boundary from degree i to degree i-1.
    SeriesMatrix boundary(int i) const {
        auto it = boundary_.find(i);
        if (it != boundary_.end() && it->second.rows() == size(i - 1) && it->second.cols() == size(i))
            return it->second;
        return SeriesMatrix(size(i - 1), size(i), group_);
    }
    void set_boundary(int i, SeriesMatrix m) {
        if (m.rows() != size(i - 1) || m.cols() != size(i))
            throw MathError("boundary matrix in degree " + std::to_string(i) + " has the wrong shape");
        boundary_[i] = std::move(m);
    }
    /// Coefficient of `to` in the boundary of `from`.
    const NovikovSeries& entry(const std::string& from, const std::string& to) const {
        auto p = locate(from), q = locate(to);
        if (q.degree != p.degree - 1)
            throw ParseError("boundary entry " + from + " -> " + to + " does not lower the degree by one");
        return boundary_.at(p.degree)(q.index, p.index);
    }
    void set_entry(const std::string& from, const std::string& to, NovikovSeries value) {
        auto p = locate(from), q = locate(to);
        if (q.degree != p.degree - 1)
            throw ParseError("boundary entry " + from + " -> " + to + " does not lower the degree by one");
        if (!same_group(value.group(), group_) || value.coeff_order() != 1)
            throw MathError("boundary entry must be a raw series over the complex's group");
        boundary_.at(p.degree)(q.index, p.index) = std::move(value);
    }

    void set_lift(const std::string& name, const GroupElement& lift) {
        auto loc = locate(name);
        by_degree_[loc.degree][loc.index].lift = lift;
    }

    void remove_generator(const std::string& name) {
        auto loc = locate(name);
        boundary_.at(loc.degree).erase_col(loc.index);
        boundary_.at(loc.degree + 1).erase_row(loc.index);
        auto& list = by_degree_[loc.degree];
        list.erase(list.begin() + static_cast<std::ptrdiff_t>(loc.index));
        if (list.empty()) by_degree_.erase(loc.degree);
    }

    NovikovSeries zero() const { return NovikovSeries(group_); }

    friend bool operator==(const BasedComplex& a, const BasedComplex& b) {
        if (!same_group(a.group_, b.group_) || a.by_degree_ != b.by_degree_) return false;
        for (int d : a.degrees()) {
            for (int i : {d, d + 1}) {
                auto x = a.boundary(i), y = b.boundary(i);
                for (std::size_t r = 0; r < x.rows(); ++r)
                    for (std::size_t c = 0; c < x.cols(); ++c)
                        if (!(x(r, c) == y(r, c))) return false;
            }
        }
        return true;
    }

    /// Same generators and lifts, entries agreeing below the common truncation.
    bool agrees_with(const BasedComplex& b) const {
        if (!same_group(group_, b.group_) || by_degree_ != b.by_degree_) return false;
        for (int d : degrees())
            for (int i : {d, d + 1})
                if (!boundary(i).agrees_with(b.boundary(i))) return false;
        return true;
    }

    /// Like agrees_with, but generators are matched by name rather than position.
    bool agrees_by_name(const BasedComplex& b) const {
        if (!same_group(group_, b.group_)) return false;
        auto mine = all_generators(), theirs = b.all_generators();
        if (mine.size() != theirs.size()) return false;
        for (const auto& g : mine) {
            auto loc = b.find(g.name);
            if (!loc || loc->degree != g.degree || !(b.generator(g.name).lift == g.lift)) return false;
        }
        for (const auto& x : mine)
            for (const auto& y : generators(x.degree - 1))
                if (!agree(entry(x.name, y.name), b.entry(x.name, y.name))) return false;
        return true;
    }

private:
    GroupPtr group_;
    Truncation truncation_;
    Ambiguity ambiguity_ = Ambiguity::kTranslation;
    std::map<int, std::vector<Generator>> by_degree_;
    std::map<int, SeriesMatrix> boundary_;
};

struct BoundaryReport {
    struct Offender {
        int degree;  // composite boundary(degree-1) * boundary(degree)
        std::string row, col;
        NovikovSeries value;
    };
    std::vector<Offender> offenders;
    bool ok() const { return offenders.empty(); }
};

/// Checks that the composite of consecutive boundaries vanishes modulo O(R).
inline BoundaryReport check_boundary(const BasedComplex& c) {
    BoundaryReport report;
    for (int d : c.degrees()) {
        if (c.size(d - 2) == 0 || c.size(d) == 0) continue;
        SeriesMatrix comp = c.boundary(d - 1) * c.boundary(d);
        for (std::size_t r = 0; r < comp.rows(); ++r)
            for (std::size_t k = 0; k < comp.cols(); ++k) {
                NovikovSeries v = comp(r, k).truncated(c.truncation());
                if (!v.is_zero())
                    report.offenders.push_back(
                        {d, c.generators(d - 2)[r].name, c.generators(d)[k].name, std::move(v)});
            }
    }
    return report;
}

/// One entry of a per-summand value: zero (non-acyclic) or a field element.
struct SummandValue {
    std::int64_t order = 1;
    std::optional<FieldElement> value;

    bool is_zero() const { return !value.has_value(); }
};

/// A value living in the fraction field of the group algebra, stored summand by
/// summand along the splitting of Q[Z/n], and defined up to an ambiguity.
struct SplitValue {
    std::vector<SummandValue> summands;
    Ambiguity ambiguity = Ambiguity::kTranslation;

    const SummandValue& summand(std::int64_t d) const {
        for (const auto& s : summands)
            if (s.order == d) return s;
        throw MathError("no summand Q(zeta_" + std::to_string(d) + ")");
    }
    /// Lowest truncation among the nonzero summands.
    Truncation certified() const {
        Truncation r;
        for (const auto& s : summands)
            if (s.value) r = min(r, s.value->truncation());
        return r;
    }
};

using TorsionValue = SplitValue;
using InvariantI = SplitValue;

/// Canonical representative text of one summand ("0" for a zero summand).
inline std::string render_summand(const SummandValue& s, Ambiguity a) {
    if (!s.value) return "0";
    return render_series(canonicalize(*s.value, a).series());
}

struct Comparison {
    bool equal = true;
    std::vector<std::string> diagnostics;
};

/// Compares two split values modulo `ambiguity`, below the common truncation
/// (further capped by `cap`).
inline Comparison compare(const SplitValue& a, const SplitValue& b, Ambiguity ambiguity,
                          const Truncation& cap = {}) {
    Comparison out;
    if (a.summands.size() != b.summands.size()) {
        out.equal = false;
        out.diagnostics.push_back("summand count differs");
        return out;
    }
    for (std::size_t i = 0; i < a.summands.size(); ++i) {
        const auto& x = a.summands[i];
        const auto& y = b.summands[i];
        std::string tag = "summand d=" + std::to_string(x.order);
        if (x.is_zero() || y.is_zero()) {
            if (x.is_zero() != y.is_zero()) {
                out.equal = false;
                out.diagnostics.push_back(tag + ": one side is zero");
            }
            continue;
        }
        auto cx = canonicalize(*x.value, ambiguity).series();
        auto cy = canonicalize(*y.value, ambiguity).series();
        Truncation r = min(min(cx.truncation(), cy.truncation()), cap);
        if (!agree(cx, cy, r)) {
            out.equal = false;
            out.diagnostics.push_back(tag + ": " + render_series(cx.truncated(r)) + " vs " +
                                      render_series(cy.truncated(r)));
        }
    }
    return out;
}

/// Multiplies summand d of v by f_d, where f returns a projected series.
template <class F>
SplitValue multiply_summands(const SplitValue& v, F&& f) {
    SplitValue out = v;
    for (auto& s : out.summands)
        if (s.value) s.value = FieldElement(s.value->series() * f(s.order));
    return out;
}

struct TorsionOptions {
    /// Cap for series inverses; defaults to the complex's truncation.
    std::optional<Truncation> cap;
    /// Randomized pivot order (for order-independence checks).
    std::optional<std::uint64_t> pivot_seed;
};

namespace detail {

inline std::optional<FieldElement> summand_torsion(const BasedComplex& c, std::int64_t d, const Truncation& cap,
                                                   const TorsionOptions& opts) {
    const GroupPtr& group = c.group();
    std::vector<int> degs = c.degrees();
    NovikovSeries tau = NovikovSeries::one(group, d);
    if (degs.empty()) return FieldElement(tau);
    int lo = degs.front(), hi = degs.back();
    std::vector<std::size_t> active(c.size(hi));
    std::iota(active.begin(), active.end(), 0);
    std::uint64_t seed_step = 0;
    for (int i = hi; i > lo; --i) {
        SeriesMatrix full = c.boundary(i).map([d](const NovikovSeries& e) { return project_to_summand(e, d); });
        full = full.with_ring(group, d);
        std::vector<std::size_t> all_rows(c.size(i - 1));
        std::iota(all_rows.begin(), all_rows.end(), 0);
        SeriesMatrix m = full.submatrix(all_rows, active);
        PivotRule rule;
        for (const auto& g : c.generators(i - 1)) rule.row_keys.push_back(g.name);
        for (auto a : active) rule.col_keys.push_back(c.generators(i)[a].name);
        if (opts.pivot_seed) rule.random_seed = *opts.pivot_seed + 0x9e3779b97f4a7c15ULL * ++seed_step;
        Elimination e = eliminate(m, cap, rule);
        if (!e.complete) {
            if (e.precision_lost)
                throw TruncationError("torsion undecided in degree " + std::to_string(i) + " for summand d=" +
                                      std::to_string(d) + " at O(" + cap.str() + ")");
            return std::nullopt;
        }
        NovikovSeries det = e.determinant(group, d);
        tau = alternating_sign(i) > 0 ? tau * det : tau * series_invert(det, cap).series();
        std::vector<bool> used(c.size(i - 1), false);
        for (const auto& p : e.pivots) used[p.row] = true;
        active.clear();
        for (std::size_t r = 0; r < used.size(); ++r)
            if (!used[r]) active.push_back(r);
    }
    if (!active.empty()) return std::nullopt;
    if (tau.is_zero())
        throw TruncationError("torsion vanishes modulo O(" + tau.truncation().str() + ") for summand d=" +
                              std::to_string(d));
    return FieldElement(tau);
}

}  // namespace detail

/// Reidemeister torsion, one value per field summand of Q[Z/n].
///
/// Works from the top degree down: all top generators form D_top; elimination of
/// the boundary columns D_i picks rows E_{i-1}, and D_{i-1} is the complement.
/// Over a field and an acyclic complex the complement always has full column rank,
/// so no backtracking is needed. The summand is zero when a column cannot be
/// pivoted or generators remain in the lowest degree.
inline TorsionValue torsion(const BasedComplex& c, const TorsionOptions& opts = {}) {
    Truncation cap = opts.cap.value_or(c.truncation());
    TorsionValue out;
    out.ambiguity = c.ambiguity();
    for (const auto& s : split_group_algebra(c.group()->torsion_order()).summands)
        out.summands.push_back({s.order, detail::summand_torsion(c, s.order, cap, opts)});
    return out;
}

/// Conjugates the boundary by degree-preserving automorphisms: d_i' = A_{i-1}^-1 d_i A_i.
/// Missing degrees use the identity.
inline BasedComplex change_basis(const BasedComplex& c, const std::map<int, SeriesMatrix>& a) {
    for (const auto& [deg, m] : a)
        if (m.rows() != c.size(deg) || m.cols() != c.size(deg))
            throw MathError("automorphism in degree " + std::to_string(deg) + " has the wrong shape");
    std::map<int, SeriesMatrix> inv;
    for (const auto& [deg, m] : a) inv.emplace(deg, inverse(m, c.truncation()));
    BasedComplex out = c;
    std::set<int> touched;
    for (int d : c.degrees()) {
        touched.insert(d);
        touched.insert(d + 1);
    }
    for (int i : touched) {
        if (c.size(i) == 0 || c.size(i - 1) == 0) continue;
        SeriesMatrix m = c.boundary(i);
        if (auto it = a.find(i); it != a.end()) m = m * it->second;
        if (auto it = inv.find(i - 1); it != inv.end()) m = it->second * m;
        out.set_boundary(i, std::move(m));
    }
    return out;
}

/// Translates the lift of one generator by h. Its boundary column picks up h and
/// the row it occupies in the next boundary picks up h^-1.
inline BasedComplex shift_lift(const BasedComplex& c, const std::string& name, const GroupElement& h) {
    auto loc = c.locate(name);
    const auto& group = *c.group();
    group.validate(h);
    BasedComplex out = c;
    out.set_lift(name, group.add(c.generator(name).lift, h));
    GroupElement hinv = group.negate(h);
    SeriesMatrix down = c.boundary(loc.degree);
    for (std::size_t r = 0; r < down.rows(); ++r) down(r, loc.index) = down(r, loc.index).shifted(h);
    out.set_boundary(loc.degree, std::move(down));
    SeriesMatrix up = c.boundary(loc.degree + 1);
    for (std::size_t k = 0; k < up.cols(); ++k) up(loc.index, k) = up(loc.index, k).shifted(hinv);
    out.set_boundary(loc.degree + 1, std::move(up));
    return out;
}

/// A fraction num/den of exact (Laurent polynomial) series.
struct RationalFunction {
    NovikovSeries num, den;
};

namespace detail {

// Exact torsion over the group ring: search subbases bottom-up with exact
// Leibniz determinants and backtracking.
inline bool search_subbases(const BasedComplex& c, std::int64_t d, const std::vector<int>& range, std::size_t k,
                            const std::vector<std::size_t>& e_below, NovikovSeries num, NovikovSeries den,
                            RationalFunction& out) {
    if (k == range.size()) {
        if (!e_below.empty()) return false;
        out = {std::move(num), std::move(den)};
        return true;
    }
    int i = range[k];
    std::size_t n = c.size(i), need = e_below.size();
    if (need > n) return false;
    SeriesMatrix full = c.boundary(i).map([d](const NovikovSeries& e) { return project_to_summand(e, d); });
    full = full.with_ring(c.group(), d);
    std::vector<bool> choose(n, false);
    std::fill(choose.begin(), choose.begin() + static_cast<std::ptrdiff_t>(need), true);
    do {
        std::vector<std::size_t> cols, rest;
        for (std::size_t j = 0; j < n; ++j) (choose[j] ? cols : rest).push_back(j);
        NovikovSeries det = leibniz_determinant(full.submatrix(e_below, cols));
        if (det.is_zero()) continue;
        bool even = alternating_sign(i) > 0;
        if (search_subbases(c, d, range, k + 1, rest, even ? num * det : num, even ? den : den * det, out))
            return true;
    } while (std::prev_permutation(choose.begin(), choose.end()));
    return false;
}

}  // namespace detail

/// Torsion of a complex with exact entries over Q(Z[H]), per summand, as num/den;
/// nullopt marks a non-acyclic summand.
inline std::vector<std::pair<std::int64_t, std::optional<RationalFunction>>> group_ring_torsion(
    const BasedComplex& c) {
    for (int deg : c.degrees())
        for (int i : {deg, deg + 1}) {
            SeriesMatrix m = c.boundary(i);
            for (std::size_t r = 0; r < m.rows(); ++r)
                for (std::size_t k = 0; k < m.cols(); ++k)
                    if (!m(r, k).is_exact()) throw MathError("group ring torsion needs polynomial entries");
        }
    std::vector<std::pair<std::int64_t, std::optional<RationalFunction>>> out;
    std::vector<int> degs = c.degrees();
    std::vector<int> range;
    if (!degs.empty())
        for (int i = degs.front(); i <= degs.back(); ++i) range.push_back(i);
    for (const auto& s : split_group_algebra(c.group()->torsion_order()).summands) {
        NovikovSeries one = NovikovSeries::one(c.group(), s.order);
        if (range.empty()) {
            out.emplace_back(s.order, RationalFunction{one, one});
            continue;
        }
        // lowest degree: D = empty, E = everything
        std::vector<std::size_t> e_lo(c.size(range.front()));
        std::iota(e_lo.begin(), e_lo.end(), 0);
        RationalFunction rf;
        bool found = detail::search_subbases(c, s.order, range, 1, e_lo, one, one, rf);
        out.emplace_back(s.order, found ? std::optional<RationalFunction>(rf) : std::nullopt);
    }
    return out;
}

/// The embedding iota: Q(Z[H]) -> Q(Lambda) on a fraction, expanded to O(cap)
/// over the target grading.
inline FieldElement iota(const RationalFunction& f, const GroupPtr& target, const Truncation& cap) {
    NovikovSeries num = f.num.with_group(target), den = f.den.with_group(target);
    return FieldElement((num * series_invert(den, cap).series()).truncated(cap));
}

}  // namespace novikov
