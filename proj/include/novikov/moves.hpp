#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "novikov/zeta.hpp"

namespace novikov {

/// A Novikov complex paired with the closed orbits of the same flow.
struct FlowState {
    BasedComplex complex;
    OrbitSet orbits;

    const GroupPtr& group() const { return complex.group(); }
    const Truncation& truncation() const { return complex.truncation(); }
};

namespace moves {

/// Flow-line or orbit cancellation: neither the complex nor the orbits change.
struct NoOp {
    std::string kind = "flow-line-cancel";

    friend bool operator==(const NoOp&, const NoOp&) = default;
};
/// p -> p + sign * h * q for generators of equal degree.
struct Slide {
    std::string p, q;
    int sign = 1;
    GroupElement h;

    friend bool operator==(const Slide&, const Slide&) = default;
};
/// p -> x * p with x = 1 + a_1 h + a_2 h^2 + ...
struct SelfSlide {
    std::string p;
    NovikovSeries x;
    GroupElement h;

    friend bool operator==(const SelfSlide&, const SelfSlide&) = default;
};
/// Cancels p (degree i) against q (degree i-1) through the pivot (-1)^mu + eta.
struct Death {
    std::string p, q;
    int mu = 0;

    friend bool operator==(const Death&, const Death&) = default;
};
/// Creates p (degree i) and q (degree i-1) with pivot (-1)^mu + eta and the
/// off-pivot blocks v (coefficients of q in the boundary of the other degree i
/// generators) and w (boundary of p in the other degree i-1 generators).
struct Birth {
    std::string p, q;
    int degree = 1;
    int mu = 0;
    NovikovSeries eta;
    std::vector<std::pair<std::string, NovikovSeries>> v, w;
    GroupElement p_lift, q_lift;

    friend bool operator==(const Birth&, const Birth&) = default;
};
/// Negative control: multiplies the zeta function by a factor with no change to
/// the complex.
struct TamperZeta {
    OrbitFactor factor;

    friend bool operator==(const TamperZeta&, const TamperZeta&) = default;
};

}  // namespace moves

using BifurcationMove =
    std::variant<moves::NoOp, moves::Slide, moves::SelfSlide, moves::Death, moves::Birth, moves::TamperZeta>;

inline std::string move_name(const BifurcationMove& m) {
    struct V {
        std::string operator()(const moves::NoOp& x) const { return "noop(" + x.kind + ")"; }
        std::string operator()(const moves::Slide& x) const {
            return "slide(" + x.p + (x.sign > 0 ? " += " : " -= ") + x.q + ")";
        }
        std::string operator()(const moves::SelfSlide& x) const {
            return "self_slide(" + x.p + ", " + render_series(x.x) + ")";
        }
        std::string operator()(const moves::Death& x) const {
            return "death(" + x.p + ", " + x.q + ", mu=" + std::to_string(x.mu) + ")";
        }
        std::string operator()(const moves::Birth& x) const {
            return "birth(" + x.p + ", " + x.q + ", mu=" + std::to_string(x.mu) + ")";
        }
        std::string operator()(const moves::TamperZeta& x) const {
            return "tamper_zeta(" + factor_type_name(x.factor.type) + ")";
        }
    };
    return std::visit(V{}, m);
}

inline NovikovSeries signed_unit(const GroupPtr& group, int mu) {
    return NovikovSeries::constant(group, CyclotomicNumber(Rational(floor_mod(mu, 2) == 0 ? 1 : -1)));
}

/// Orbits created when a pair dies with pivot (-1)^mu + eta in degree i.
///
/// Each term c*h of eta stands for |c| flow lines of class h and sign sgn(c). A
/// necklace of k flow lines gives one orbit with the product class, period equal
/// to its rotational symmetry, and sign (-1)^(mu k + k + i + 1) times the product
/// of the line signs. Necklaces are enumerated over the distinct terms; the
/// number of line necklaces over a term necklace with symmetry s_T and exact
/// symmetry s is g(s) * s / s_T, g from Mobius inversion of the line tuples
/// invariant under each rotation.
inline OrbitSet necklace_orbits(const NovikovSeries& eta, int mu, int degree, const Truncation& r) {
    const auto& group = eta.group();
    OrbitSet out;
    out.completeness = min(r, eta.truncation());
    if (eta.is_zero()) return out;
    if (out.completeness.is_exact()) throw TruncationError("necklace enumeration needs a finite grade");
    struct Line {
        GroupElement cls;
        Grade grade;
        std::int64_t mult;
        int sign;
    };
    std::vector<Line> lines;
    for (const auto& t : eta.terms()) {
        if (t.grade.sign() <= 0) throw MathError("flow line of nonpositive grade in eta");
        auto q = t.coeff.as_rational();
        if (!q || !is_integer(*q)) throw MathError("flow line counts in eta must be integers");
        std::int64_t c = to_int64(q->get_num());
        lines.push_back({t.element, t.grade, c > 0 ? c : -c, c > 0 ? 1 : -1});
    }
    std::vector<std::size_t> tuple;
    std::function<void(const Grade&)> extend = [&](const Grade& total) {
        if (!tuple.empty()) {
            const std::size_t k = tuple.size();
            bool minimal = true;
            std::size_t symmetry = 0;
            for (std::size_t shift = 0; shift < k && minimal; ++shift) {
                int c = 0;
                for (std::size_t j = 0; j < k && c == 0; ++j) {
                    std::size_t a = tuple[(j + shift) % k], b = tuple[j];
                    c = a < b ? -1 : (a > b ? 1 : 0);
                }
                if (c < 0) minimal = false;
                if (c == 0) ++symmetry;
            }
            if (minimal) {
                const std::int64_t kk = static_cast<std::int64_t>(k), st = static_cast<std::int64_t>(symmetry);
                GroupElement cls;
                int sign = 1;
                Integer block = 1;
                for (std::size_t j = 0; j < k; ++j) {
                    cls = group->add(cls, lines[tuple[j]].cls);
                    sign *= lines[tuple[j]].sign;
                    if (static_cast<std::int64_t>(j) < kk / st) block *= lines[tuple[j]].mult;
                }
                int mk = floor_mod(static_cast<std::int64_t>(mu) * kk + kk + degree + 1, 2) == 0 ? 1 : -1;
                sign *= mk;
                for (std::int64_t s = 1; s <= st; ++s) {
                    if (st % s) continue;
                    Integer g = 0;
                    for (std::int64_t s2 = s; s2 <= st; s2 += s) {
                        if (st % s2) continue;
                        Integer p;
                        mpz_pow_ui(p.get_mpz_t(), block.get_mpz_t(), static_cast<unsigned long>(st / s2));
                        g += detail::mobius(s2 / s) * p;
                    }
                    Integer num = g * s;
                    if (num % st != 0) throw MathError("necklace count is not integral");
                    Integer count = num / st;
                    if (count != 0) out.orbits.push_back({cls, s, sign, to_int64(count)});
                }
            }
        }
        for (std::size_t i = 0; i < lines.size(); ++i) {
            Grade next = total + lines[i].grade;
            if (!out.completeness.admits(next)) continue;
            tuple.push_back(i);
            extend(next);
            tuple.pop_back();
        }
    };
    extend(Grade(0));
    return normalize_orbits(out);
}

/// Power-series variable of a self-slide: the leading element of x - 1.
inline GroupElement self_slide_variable(const NovikovSeries& x) {
    NovikovSeries u = x - NovikovSeries::one(x.group());
    if (u.is_zero()) return x.group()->identity();
    return u.leading().element;
}

namespace detail {

inline void require_raw(const GroupPtr& group, const NovikovSeries& s, const char* what) {
    if (!same_group(s.group(), group) || s.coeff_order() != 1)
        throw MathError(std::string(what) + " must be a raw series over the state's group");
}

}  // namespace detail

inline FlowState apply_slide(const FlowState& st, const moves::Slide& m) {
    const auto& c = st.complex;
    auto p = c.locate(m.p), q = c.locate(m.q);
    if (p.degree != q.degree) throw MathError("slide needs generators of equal degree");
    if (m.p == m.q) throw MathError("slide needs two distinct generators");
    if (m.sign != 1 && m.sign != -1) throw MathError("slide sign must be +1 or -1");
    const auto& group = st.group();
    NovikovSeries a = NovikovSeries::monomial(group, m.h, CyclotomicNumber(Rational(m.sign)));
    FlowState out = st;
    SeriesMatrix down = c.boundary(p.degree);
    for (std::size_t r = 0; r < down.rows(); ++r)
        if (!down(r, q.index).is_zero()) down(r, p.index) += a * down(r, q.index);
    out.complex.set_boundary(p.degree, std::move(down));
    SeriesMatrix up = c.boundary(p.degree + 1);
    for (std::size_t k = 0; k < up.cols(); ++k)
        if (!up(p.index, k).is_zero()) up(q.index, k) -= a * up(p.index, k);
    out.complex.set_boundary(p.degree + 1, std::move(up));
    return out;
}

inline FlowState apply_self_slide(const FlowState& st, const moves::SelfSlide& m) {
    const auto& c = st.complex;
    auto p = c.locate(m.p);
    detail::require_raw(st.group(), m.x, "self-slide series");
    if (!(m.x - NovikovSeries::one(st.group())).in_lambda_plus() || m.x.coefficient(st.group()->identity()) != 1)
        throw MathError("self-slide series must have the form 1 + (terms of positive grade)");
    const Truncation& r = st.truncation();
    NovikovSeries xinv = series_invert(m.x, r).series();
    FlowState out = st;
    SeriesMatrix down = c.boundary(p.degree);
    for (std::size_t k = 0; k < down.rows(); ++k) down(k, p.index) = down(k, p.index) * m.x;
    out.complex.set_boundary(p.degree, std::move(down));
    SeriesMatrix up = c.boundary(p.degree + 1);
    for (std::size_t k = 0; k < up.cols(); ++k)
        if (!up(p.index, k).is_zero()) up(p.index, k) = up(p.index, k) * xinv;
    out.complex.set_boundary(p.degree + 1, std::move(up));
    // zeta picks up x^((-1)^(i+1))
    if (!(m.x - NovikovSeries::one(st.group())).is_zero()) {
        OrbitSet extra = orbits_from_power_series(m.x.truncated(r), m.h, min(r, st.orbits.completeness),
                                                  alternating_sign(p.degree) > 0);
        out.orbits = merge_orbits(st.orbits, extra);
    }
    return out;
}

/// eta of a death move: the pivot minus (-1)^mu.
inline NovikovSeries death_eta(const FlowState& st, const moves::Death& m) {
    return st.complex.entry(m.p, m.q) - signed_unit(st.group(), m.mu);
}

inline FlowState apply_death(const FlowState& st, const moves::Death& m) {
    const auto& c = st.complex;
    auto p = c.locate(m.p), q = c.locate(m.q);
    if (q.degree != p.degree - 1) throw MathError("death needs deg q = deg p - 1");
    const int i = p.degree;
    const Truncation& r = st.truncation();
    NovikovSeries eta = death_eta(st, m);
    if (!eta.in_lambda_plus())
        throw MathError("death pivot " + render_series(c.entry(m.p, m.q)) + " is not (-1)^mu + (positive terms)");
    NovikovSeries eps_inv = series_invert(c.entry(m.p, m.q), r).series();
    SeriesMatrix d = c.boundary(i);
    // d_i+ = N - w eps^-1 v on the remaining rows and columns
    for (std::size_t y = 0; y < d.rows(); ++y) {
        if (y == q.index || d(y, p.index).is_zero()) continue;
        NovikovSeries we = d(y, p.index) * eps_inv;
        for (std::size_t x = 0; x < d.cols(); ++x) {
            if (x == p.index || d(q.index, x).is_zero()) continue;
            d(y, x) -= we * d(q.index, x);
        }
    }
    FlowState out = st;
    out.complex.set_boundary(i, std::move(d));
    out.complex.remove_generator(m.p);
    out.complex.remove_generator(m.q);
    out.orbits = merge_orbits(st.orbits, necklace_orbits(eta, m.mu, i, min(r, st.orbits.completeness)));
    return out;
}

inline FlowState apply_birth(const FlowState& st, const moves::Birth& m) {
    const auto& c = st.complex;
    const auto& group = st.group();
    const int i = m.degree;
    const Truncation& r = st.truncation();
    detail::require_raw(group, m.eta, "birth eta");
    if (!m.eta.in_lambda_plus()) throw MathError("birth eta must lie in Lambda^+");
    NovikovSeries eps = signed_unit(group, m.mu) + m.eta;
    NovikovSeries eps_inv = series_invert(eps, r).series();
    auto lookup = [&](const std::vector<std::pair<std::string, NovikovSeries>>& list, const std::string& name) {
        for (const auto& [n, s] : list)
            if (n == name) return s;
        return NovikovSeries(group);
    };
    for (const auto& [n, s] : m.v)
        if (c.locate(n).degree != i) throw MathError("birth v entry '" + n + "' is not in degree " + std::to_string(i));
    for (const auto& [n, s] : m.w)
        if (c.locate(n).degree != i - 1)
            throw MathError("birth w entry '" + n + "' is not in degree " + std::to_string(i - 1));
    const auto& gi = c.generators(i);
    const auto& gl = c.generators(i - 1);
    std::vector<NovikovSeries> v, w;
    for (const auto& g : gi) v.push_back(lookup(m.v, g.name));
    for (const auto& g : gl) w.push_back(lookup(m.w, g.name));

    // N = d+ + w eps^-1 v
    SeriesMatrix n = c.boundary(i);
    for (std::size_t y = 0; y < gl.size(); ++y) {
        if (w[y].is_zero()) continue;
        NovikovSeries we = w[y] * eps_inv;
        for (std::size_t x = 0; x < gi.size(); ++x)
            if (!v[x].is_zero()) n(y, x) += we * v[x];
    }
    // row p of d_{i+1}: -eps^-1 sum_x v_x d_{i+1}(x, .)
    SeriesMatrix up = c.boundary(i + 1);
    std::vector<NovikovSeries> p_row(up.cols(), NovikovSeries(group));
    for (std::size_t z = 0; z < up.cols(); ++z) {
        NovikovSeries acc(group);
        for (std::size_t x = 0; x < gi.size(); ++x)
            if (!v[x].is_zero() && !up(x, z).is_zero()) acc += v[x] * up(x, z);
        if (!acc.is_zero() || !acc.is_exact()) p_row[z] = -(eps_inv * acc);
    }
    // column q of d_{i-1}: -eps^-1 sum_y d_{i-1}(., y) w_y
    SeriesMatrix down = c.boundary(i - 1);
    std::vector<NovikovSeries> q_col(down.rows(), NovikovSeries(group));
    for (std::size_t b = 0; b < down.rows(); ++b) {
        NovikovSeries acc(group);
        for (std::size_t y = 0; y < gl.size(); ++y)
            if (!w[y].is_zero() && !down(b, y).is_zero()) acc += down(b, y) * w[y];
        if (!acc.is_zero() || !acc.is_exact()) q_col[b] = -(eps_inv * acc);
    }

    FlowState out = st;
    BasedComplex& oc = out.complex;
    oc.set_boundary(i, n);
    oc.add_generator(m.p, i, m.p_lift);
    oc.add_generator(m.q, i - 1, m.q_lift);
    // new generators sit last in their degree
    SeriesMatrix di = oc.boundary(i);
    std::size_t pi = gi.size(), qi = gl.size();
    di(qi, pi) = eps;
    for (std::size_t x = 0; x < gi.size(); ++x) di(qi, x) = v[x];
    for (std::size_t y = 0; y < gl.size(); ++y) di(y, pi) = w[y];
    oc.set_boundary(i, std::move(di));
    SeriesMatrix dup = oc.boundary(i + 1);
    for (std::size_t z = 0; z < dup.cols(); ++z) dup(pi, z) = p_row[z];
    oc.set_boundary(i + 1, std::move(dup));
    SeriesMatrix ddown = oc.boundary(i - 1);
    for (std::size_t b = 0; b < ddown.rows(); ++b) ddown(b, qi) = q_col[b];
    oc.set_boundary(i - 1, std::move(ddown));
    out.orbits = merge_orbits(st.orbits,
                              inverted_orbits(necklace_orbits(m.eta, m.mu, i, min(r, st.orbits.completeness))));
    return out;
}

inline FlowState apply_move(const FlowState& st, const BifurcationMove& move) {
    struct V {
        const FlowState& st;
        FlowState operator()(const moves::NoOp&) const { return st; }
        FlowState operator()(const moves::Slide& m) const { return apply_slide(st, m); }
        FlowState operator()(const moves::SelfSlide& m) const { return apply_self_slide(st, m); }
        FlowState operator()(const moves::Death& m) const { return apply_death(st, m); }
        FlowState operator()(const moves::Birth& m) const { return apply_birth(st, m); }
        FlowState operator()(const moves::TamperZeta& m) const {
            FlowState out = st;
            out.orbits = merge_orbits(st.orbits, expand_factor_to_orbits(st.group(), m.factor, st.orbits.completeness));
            return out;
        }
    };
    return std::visit(V{st}, move);
}

struct MoveCheck {
    std::string name;
    bool ok = true;
    std::string detail;
};

struct MoveReport {
    std::string move;
    InvariantI before, after;
    std::vector<MoveCheck> checks;
    bool invariant = true;  // I before and after agree
    std::vector<std::string> diagnostics;

    bool ok() const {
        if (!invariant) return false;
        for (const auto& c : checks)
            if (!c.ok) return false;
        return true;
    }
};

namespace detail {

inline MoveCheck compare_check(const std::string& name, const SplitValue& a, const SplitValue& b,
                               Ambiguity ambiguity, const Truncation& cap) {
    Comparison cmp = compare(a, b, ambiguity, cap);
    MoveCheck c{name, cmp.equal, ""};
    for (const auto& d : cmp.diagnostics) c.detail += (c.detail.empty() ? "" : "; ") + d;
    return c;
}

inline MoveCheck series_check(const std::string& name, const NovikovSeries& a, const NovikovSeries& b) {
    MoveCheck c{name, agree(a, b), ""};
    if (!c.ok) c.detail = render_series(a) + " vs " + render_series(b);
    return c;
}

}  // namespace detail

/// Recomputes I on both states from scratch and compares them; no predicted ratio
/// enters the verdict.
inline MoveReport verify_invariance(const FlowState& before, const FlowState& after, const std::string& name = "") {
    MoveReport rep;
    rep.move = name;
    rep.before = invariant_I(before.complex, before.orbits);
    rep.after = invariant_I(after.complex, after.orbits);
    Ambiguity a = before.complex.ambiguity();
    Truncation cap = min(before.truncation(), after.truncation());
    Comparison cmp = compare(rep.before, rep.after, a, cap);
    rep.invariant = cmp.equal;
    rep.diagnostics = cmp.diagnostics;
    return rep;
}

/// Applies one move and checks both the invariance of I and the move's predicted
/// effect on torsion and zeta.
inline std::pair<FlowState, MoveReport> apply_and_verify(const FlowState& st, const BifurcationMove& move) {
    FlowState next = apply_move(st, move);
    MoveReport rep = verify_invariance(st, next, move_name(move));
    const auto& group = st.group();
    const Truncation r = min(st.truncation(), st.orbits.completeness);
    Ambiguity amb = st.complex.ambiguity();
    auto zeta_before = [&] { return zeta_from_orbits(group, st.orbits); };
    auto zeta_after = [&] { return zeta_from_orbits(group, next.orbits); };
    auto tau_ratio_check = [&](const std::string& label, const NovikovSeries& factor_before) {
        // torsion(after) == torsion(before) * factor
        TorsionValue tb = torsion(st.complex), ta = torsion(next.complex);
        TorsionValue predicted = multiply_summands(tb, [&](std::int64_t d) { return project_to_summand(factor_before, d); });
        rep.checks.push_back(detail::compare_check(label, predicted, ta, amb, r));
    };
    struct V {
        std::function<void(const moves::Slide&)> slide;
        std::function<void(const moves::SelfSlide&)> self_slide;
        std::function<void(const moves::Death&)> death;
        std::function<void(const moves::Birth&)> birth;
        void operator()(const moves::NoOp&) const {}
        void operator()(const moves::TamperZeta&) const {}
        void operator()(const moves::Slide& m) const { slide(m); }
        void operator()(const moves::SelfSlide& m) const { self_slide(m); }
        void operator()(const moves::Death& m) const { death(m); }
        void operator()(const moves::Birth& m) const { birth(m); }
    };
    V v;
    v.slide = [&](const moves::Slide&) {
        tau_ratio_check("torsion unchanged", NovikovSeries::one(group));
        rep.checks.push_back(detail::series_check("zeta unchanged", zeta_before(), zeta_after()));
    };
    v.self_slide = [&](const moves::SelfSlide& m) {
        int i = st.complex.locate(m.p).degree;
        NovikovSeries x = m.x.truncated(r);
        NovikovSeries xinv = series_invert(m.x, r).series();
        bool even = alternating_sign(i) > 0;
        tau_ratio_check("torsion ratio x^((-1)^i)", even ? x : xinv);
        NovikovSeries y = even ? xinv : x;
        rep.checks.push_back(detail::series_check("zeta ratio x^((-1)^(i+1))", zeta_before() * y, zeta_after()));
        // first-order coefficient b_1 = (-1)^(i+1) a_1
        if (!(m.x - NovikovSeries::one(group)).is_zero()) {
            CyclotomicNumber a1 = m.x.coefficient(m.h);
            NovikovSeries ratio = zeta_after() * series_invert(zeta_before(), r).series();
            CyclotomicNumber b1 = ratio.coefficient(m.h);
            CyclotomicNumber expect = even ? -a1 : a1;
            MoveCheck c{"first-order zeta coefficient", b1 == expect, ""};
            if (!c.ok) c.detail = "b1=" + b1.str() + " expected " + expect.str();
            rep.checks.push_back(c);
        }
    };
    v.death = [&](const moves::Death& m) {
        int i = st.complex.locate(m.p).degree;
        NovikovSeries eps = st.complex.entry(m.p, m.q);
        NovikovSeries eta = eps - signed_unit(group, m.mu);
        bool even = alternating_sign(i) > 0;
        // T- / T+ = eps^((-1)^i)  <=>  T+ = T- * eps^(-(-1)^i)
        tau_ratio_check("torsion ratio eps^((-1)^i)", even ? series_invert(eps, r).series() : eps.truncated(r));
        NovikovSeries f = NovikovSeries::one(group) + (floor_mod(m.mu, 2) == 0 ? eta : -eta);
        NovikovSeries factor = even ? f.truncated(r) : series_invert(f, r).series();
        rep.checks.push_back(
            detail::series_check("zeta ratio (1+(-1)^mu eta)^((-1)^i)", zeta_before() * factor, zeta_after()));
    };
    v.birth = [&](const moves::Birth& m) {
        int i = m.degree;
        NovikovSeries eps = signed_unit(group, m.mu) + m.eta;
        bool even = alternating_sign(i) > 0;
        tau_ratio_check("torsion ratio eps^((-1)^i)", even ? eps.truncated(r) : series_invert(eps, r).series());
        NovikovSeries f = NovikovSeries::one(group) + (floor_mod(m.mu, 2) == 0 ? m.eta : -m.eta);
        NovikovSeries factor = even ? series_invert(f, r).series() : f.truncated(r);
        rep.checks.push_back(
            detail::series_check("zeta ratio (1+(-1)^mu eta)^(-(-1)^i)", zeta_before() * factor, zeta_after()));
    };
    std::visit(v, move);
    return {std::move(next), std::move(rep)};
}

struct ScriptResult {
    FlowState final_state;
    std::vector<MoveReport> reports;
    MoveReport overall;  // initial vs final state
    std::string failure;  // set when a move could not be applied

    bool ok() const {
        if (!failure.empty() || !overall.ok()) return false;
        for (const auto& r : reports)
            if (!r.ok()) return false;
        return true;
    }
};

inline ScriptResult run_script(const FlowState& initial, const std::vector<BifurcationMove>& script) {
    ScriptResult res;
    FlowState st = initial;
    for (std::size_t k = 0; k < script.size(); ++k) {
        try {
            auto [next, rep] = apply_and_verify(st, script[k]);
            res.reports.push_back(std::move(rep));
            st = std::move(next);
        } catch (const MathError& e) {
            res.failure = "move #" + std::to_string(k) + " " + move_name(script[k]) + ": " + e.what();
            break;
        }
    }
    res.overall = verify_invariance(initial, st, "initial vs final");
    res.final_state = std::move(st);
    return res;
}

}  // namespace novikov
