#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "novikov/cyclotomic.hpp"
#include "novikov/group.hpp"

namespace novikov {

/// Truncated element of the Novikov ring Nov(H; N) with coefficients in Q(zeta_d).
///
/// Terms are kept sorted by (grade, free part, torsion residue), carry no zero
/// coefficients, and all have grade below the truncation R. "Raw" series
/// (coefficient order 1) may mix torsion residues; series projected to a field
/// summand have torsion residue 0 everywhere and encode s as zeta_d.
class NovikovSeries {
public:
    struct Term {
        GroupElement element;
        Grade grade;
        CyclotomicNumber coeff;

        friend bool operator==(const Term&, const Term&) = default;
    };

    NovikovSeries() = default;
    explicit NovikovSeries(GroupPtr group, std::int64_t order = 1, Truncation truncation = {})
        : group_(std::move(group)), order_(order), truncation_(std::move(truncation)) {}

    static NovikovSeries monomial(GroupPtr group, const GroupElement& h, const CyclotomicNumber& c,
                                  Truncation truncation = {}) {
        NovikovSeries s(std::move(group), c.order(), std::move(truncation));
        s.group_->validate(h);
        Grade g = s.group_->grade(h);
        if (!c.is_zero() && s.truncation_.admits(g)) s.terms_.push_back({h, std::move(g), c});
        return s;
    }
    static NovikovSeries monomial(GroupPtr group, const GroupElement& h) {
        return monomial(std::move(group), h, CyclotomicNumber(Rational(1)));
    }
    static NovikovSeries constant(GroupPtr group, const CyclotomicNumber& c, Truncation truncation = {}) {
        GroupElement e;
        return monomial(std::move(group), e, c, std::move(truncation));
    }
    static NovikovSeries one(GroupPtr group, std::int64_t order = 1) {
        return constant(std::move(group), CyclotomicNumber(Rational(1), order));
    }
    static NovikovSeries from_terms(GroupPtr group, std::int64_t order,
                                    std::vector<std::pair<GroupElement, CyclotomicNumber>> terms,
                                    Truncation truncation = {}) {
        NovikovSeries s(std::move(group), order, std::move(truncation));
        for (auto& [h, c] : terms) {
            if (c.order() != order) throw MathError("coefficient field mismatch");
            s.group_->validate(h);
            s.terms_.push_back({h, s.group_->grade(h), std::move(c)});
        }
        s.normalize();
        return s;
    }

    const GroupPtr& group() const { return group_; }
    std::int64_t coeff_order() const { return order_; }
    const Truncation& truncation() const { return truncation_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_exact() const { return truncation_.is_exact(); }
    const Term& leading() const {
        if (terms_.empty()) throw MathError("zero series has no leading term");
        return terms_.front();
    }
    std::optional<Grade> valuation() const {
        if (terms_.empty()) return std::nullopt;
        return terms_.front().grade;
    }
    /// Every term has strictly positive grade.
    bool in_lambda_plus() const { return terms_.empty() || terms_.front().grade.sign() > 0; }

    CyclotomicNumber coefficient(const GroupElement& h) const {
        for (const auto& t : terms_)
            if (t.element == h) return t.coeff;
        return CyclotomicNumber(Rational(0), order_);
    }

    NovikovSeries truncated(const Truncation& r) const {
        NovikovSeries s = *this;
        s.truncation_ = min(truncation_, r);
        while (!s.terms_.empty() && !s.truncation_.admits(s.terms_.back().grade)) s.terms_.pop_back();
        return s;
    }
    NovikovSeries with_group(GroupPtr group) const {
        NovikovSeries s(group, order_, truncation_);
        for (const auto& t : terms_) s.terms_.push_back({t.element, group->grade(t.element), t.coeff});
        s.normalize();
        return s;
    }

    /// Multiplication by the monomial h; the truncation moves with the grades.
    NovikovSeries shifted(const GroupElement& h) const {
        Grade g = group_->grade(h);
        NovikovSeries s(group_, order_, truncation_.shifted(g));
        s.terms_.reserve(terms_.size());
        for (const auto& t : terms_) s.terms_.push_back({group_->add(t.element, h), t.grade + g, t.coeff});
        if (group_->torsion_order() != 0) s.normalize();
        return s;
    }
    NovikovSeries scaled(const CyclotomicNumber& c) const {
        if (c.order() != order_) throw MathError("coefficient field mismatch");
        NovikovSeries s(group_, order_, truncation_);
        if (c.is_zero()) return s;
        for (const auto& t : terms_) s.terms_.push_back({t.element, t.grade, t.coeff * c});
        return s;
    }

    NovikovSeries operator-() const {
        NovikovSeries s = *this;
        for (auto& t : s.terms_) t.coeff = -t.coeff;
        return s;
    }
    friend NovikovSeries operator+(const NovikovSeries& a, const NovikovSeries& b) { return combine(a, b, false); }
    friend NovikovSeries operator-(const NovikovSeries& a, const NovikovSeries& b) { return combine(a, b, true); }
    friend NovikovSeries operator*(const NovikovSeries& a, const NovikovSeries& b) {
        require_compatible(a, b);
        if ((a.is_zero() && a.is_exact()) || (b.is_zero() && b.is_exact())) return NovikovSeries(a.group_, a.order_);
        Truncation r = product_truncation(a, b);
        NovikovSeries s(a.group_, a.order_, r);
        s.terms_.reserve(a.terms_.size() * b.terms_.size());
        for (const auto& x : a.terms_) {
            for (const auto& y : b.terms_) {
                Grade g = x.grade + y.grade;
                if (!r.admits(g)) break;
                s.terms_.push_back({a.group_->add(x.element, y.element), std::move(g), x.coeff * y.coeff});
            }
        }
        s.normalize();
        return s;
    }
    NovikovSeries& operator+=(const NovikovSeries& o) { return *this = *this + o; }
    NovikovSeries& operator-=(const NovikovSeries& o) { return *this = *this - o; }
    NovikovSeries& operator*=(const NovikovSeries& o) { return *this = *this * o; }

    /// Structural equality: same ring, same truncation, same terms.
    friend bool operator==(const NovikovSeries& a, const NovikovSeries& b) {
        return same_group(a.group_, b.group_) && a.order_ == b.order_ && a.truncation_ == b.truncation_ &&
               a.terms_ == b.terms_;
    }

    /// Sound truncation of a product: a = A + O(Ra), b = B + O(Rb) gives
    /// ab = AB + O(min(Ra + v(B), Rb + v(A), Ra + Rb)); valuations are clamped at 0
    /// so that nonnegative series follow the plain min rule.
    static Truncation product_truncation(const NovikovSeries& a, const NovikovSeries& b) {
        auto clamp = [](const std::optional<Grade>& v) { return v && v->sign() < 0 ? *v : Grade(0); };
        Truncation r;
        if (!a.is_exact()) r = min(r, a.truncation_.shifted(clamp(b.valuation())));
        if (!b.is_exact()) r = min(r, b.truncation_.shifted(clamp(a.valuation())));
        if (!a.is_exact() && !b.is_exact()) r = min(r, Truncation(a.truncation_.bound() + b.truncation_.bound()));
        return r;
    }

private:
    static void require_compatible(const NovikovSeries& a, const NovikovSeries& b) {
        if (!a.group_ || !b.group_) throw MathError("series without a group");
        if (!same_group(a.group_, b.group_)) throw MathError("group mismatch between series");
        if (a.order_ != b.order_) throw MathError("coefficient field mismatch between series");
    }

    static NovikovSeries combine(const NovikovSeries& a, const NovikovSeries& b, bool subtract) {
        require_compatible(a, b);
        NovikovSeries s(a.group_, a.order_, min(a.truncation_, b.truncation_));
        s.terms_.reserve(a.terms_.size() + b.terms_.size());
        for (const auto& t : a.terms_) s.terms_.push_back(t);
        for (const auto& t : b.terms_) s.terms_.push_back(subtract ? Term{t.element, t.grade, -t.coeff} : t);
        s.normalize();
        return s;
    }

    static bool key_less(const Term& x, const Term& y) {
        auto c = x.grade <=> y.grade;
        if (c != 0) return c < 0;
        return x.element < y.element;
    }

    void normalize() {
        std::sort(terms_.begin(), terms_.end(), key_less);
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (auto& t : terms_) {
            if (!truncation_.admits(t.grade)) break;
            if (!out.empty() && out.back().element == t.element) out.back().coeff += t.coeff;
            else out.push_back(std::move(t));
        }
        out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coeff.is_zero(); }), out.end());
        terms_ = std::move(out);
    }

    GroupPtr group_;
    std::int64_t order_ = 1;
    Truncation truncation_;
    std::vector<Term> terms_;
};

/// a and b coincide below the common truncation min(Ra, Rb, extra).
inline bool agree(const NovikovSeries& a, const NovikovSeries& b, const Truncation& extra = {}) {
    Truncation r = min(min(a.truncation(), b.truncation()), extra);
    return (a.truncated(r) - b.truncated(r)).is_zero();
}

/// Image of a raw series in the summand Q(zeta_d): s^j c maps to c zeta_d^j.
inline NovikovSeries project_to_summand(const NovikovSeries& raw, std::int64_t d) {
    if (raw.coeff_order() != 1 && raw.coeff_order() != d)
        throw MathError("projection to Q(zeta_" + std::to_string(d) + ") from an incompatible coefficient field");
    const auto& group = raw.group();
    std::vector<std::pair<GroupElement, CyclotomicNumber>> terms;
    terms.reserve(raw.terms().size());
    for (const auto& t : raw.terms()) {
        GroupElement h = t.element;
        std::int64_t j = h.torsion;
        h.torsion = 0;
        CyclotomicNumber c = raw.coeff_order() == d ? t.coeff : t.coeff.embed(d);
        if (j != 0) c = c * CyclotomicNumber::root_power(d, j);
        terms.emplace_back(h, std::move(c));
    }
    return NovikovSeries::from_terms(group, d, std::move(terms), raw.truncation());
}

/// Nonzero element of the fraction field, viewed through its leading-unit factorization
/// c * g * (1 + u) with u in Lambda^+.
class FieldElement {
public:
    explicit FieldElement(NovikovSeries series) : series_(std::move(series)) {
        if (series_.is_zero()) throw MathError("field element must be nonzero modulo its truncation");
    }

    const NovikovSeries& series() const { return series_; }
    const CyclotomicNumber& unit() const { return series_.leading().coeff; }
    const GroupElement& monomial() const { return series_.leading().element; }
    const Grade& leading_grade() const { return series_.leading().grade; }
    /// 1 + u, i.e. the series divided by its leading term.
    NovikovSeries tail() const {
        const auto& g = *series_.group();
        return series_.shifted(g.negate(monomial())).scaled(unit().inverse());
    }
    const Truncation& truncation() const { return series_.truncation(); }

    friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
        return FieldElement(a.series_ * b.series_);
    }

private:
    NovikovSeries series_;
};

/// Inverse in the truncated fraction field.
///
/// a = c g (1 + u) + O(R) has inverse c^-1 g^-1 sum_k (-u)^k, known to O(R - 2 N(g)).
/// The geometric series stops once (-u)^k vanishes below the truncation, which
/// takes about R / min grade(u) steps. An exact non-monomial input needs a finite cap.
inline FieldElement series_invert(const NovikovSeries& a, const Truncation& cap = {}) {
    if (a.is_zero())
        throw TruncationError("cannot invert: series is zero modulo O(" + a.truncation().str() + ")");
    const auto& group = a.group();
    const auto& lead = a.leading();
    CyclotomicNumber cinv = lead.coeff.inverse();
    GroupElement ginv = group->negate(lead.element);
    NovikovSeries tail = a.shifted(ginv).scaled(cinv);  // 1 + u
    NovikovSeries one = NovikovSeries::one(group, a.coeff_order());
    NovikovSeries u = tail - one;
    if (!u.in_lambda_plus())
        throw MathError("cannot invert: leading grade carries several monomials");
    Truncation out = min(cap, a.truncation().shifted(-(lead.grade + lead.grade)));
    if (u.is_zero() && u.is_exact()) {
        return FieldElement(NovikovSeries::monomial(group, ginv, cinv, out));
    }
    if (out.is_exact()) throw TruncationError("inverse of an exact non-monomial series needs a truncation");
    Truncation inner = out.shifted(lead.grade);  // truncation of sum (-u)^k
    NovikovSeries minus_u = (-u).truncated(inner);
    NovikovSeries acc = one.truncated(inner);
    NovikovSeries power = one.truncated(inner);
    while (true) {
        power = power * minus_u;
        if (power.is_zero()) break;
        acc += power;
    }
    NovikovSeries result = acc.truncated(inner).shifted(ginv).scaled(cinv);
    return FieldElement(result.truncated(out));
}

inline FieldElement field_inverse(const FieldElement& a, const Truncation& cap = {}) {
    return series_invert(a.series(), cap);
}

/// a^e for any integer e; negative exponents go through series_invert.
inline NovikovSeries series_pow(const NovikovSeries& a, long e, const Truncation& cap = {}) {
    NovikovSeries base = e < 0 ? series_invert(a, cap).series() : a;
    NovikovSeries out = NovikovSeries::one(a.group(), a.coeff_order()).truncated(min(cap, a.truncation()));
    for (long k = 0; k < (e < 0 ? -e : e); ++k) out = out * base;
    return out.truncated(cap);
}

namespace detail {

inline Truncation series_window(const NovikovSeries& x, const Truncation& cap, const char* what) {
    if (!x.in_lambda_plus()) throw MathError(std::string(what) + ": argument is not in Lambda^+");
    Truncation r = min(x.truncation(), cap);
    if (r.is_exact() && !x.is_zero()) throw TruncationError(std::string(what) + " of an exact series needs a truncation");
    return r;
}

}  // namespace detail

/// exp(x) = sum x^k / k! for x in Lambda^+.
inline NovikovSeries exp_plus(const NovikovSeries& x, const Truncation& cap = {}) {
    Truncation r = detail::series_window(x, cap, "exp");
    NovikovSeries xr = x.truncated(r);
    NovikovSeries acc = NovikovSeries::one(x.group(), x.coeff_order()).truncated(r);
    NovikovSeries term = acc;
    for (long k = 1;; ++k) {
        term = (term * xr).scaled(CyclotomicNumber(ratio(1, k), x.coeff_order()));
        if (term.is_zero()) break;
        acc += term;
    }
    return acc;
}

/// log(1 + x) = sum (-1)^(k+1) x^k / k for x in Lambda^+.
inline NovikovSeries log_one_plus(const NovikovSeries& x, const Truncation& cap = {}) {
    Truncation r = detail::series_window(x, cap, "log");
    NovikovSeries xr = x.truncated(r);
    NovikovSeries acc(x.group(), x.coeff_order(), r);
    NovikovSeries power = NovikovSeries::one(x.group(), x.coeff_order()).truncated(r);
    for (long k = 1;; ++k) {
        power = power * xr;
        if (power.is_zero()) break;
        Rational w = ratio(k % 2 == 1 ? 1 : -1, k);
        acc += power.scaled(CyclotomicNumber(w, x.coeff_order()));
    }
    return acc;
}

/// The ambiguity a torsion-type value is defined up to.
enum class Ambiguity {
    kSign,         // +-1: lifts fixed (an Euler structure chosen)
    kTranslation,  // +-H: lifts free
};

inline const char* ambiguity_name(Ambiguity a) { return a == Ambiguity::kSign ? "pm1" : "pmH"; }

/// Canonical representative modulo +-1 or +-H.
///
/// +-H: divide by the leading monomial, then multiply by the unit among
/// +-zeta_d^j that makes the leading coefficient lexicographically largest.
/// +-1: only flip the sign so the leading coefficient's first nonzero entry is positive.
inline FieldElement canonicalize(const FieldElement& q, Ambiguity ambiguity) {
    const auto& group = q.series().group();
    std::int64_t d = q.series().coeff_order();
    if (ambiguity == Ambiguity::kSign) {
        if (q.unit().is_positive()) return q;
        return FieldElement(-q.series());
    }
    NovikovSeries moved = q.series().shifted(group->negate(q.monomial()));
    const CyclotomicNumber& c = moved.leading().coeff;
    CyclotomicNumber best_unit(Rational(1), d);
    CyclotomicNumber best = c;
    for (std::int64_t j = 0; j < d; ++j) {
        for (int sign : {1, -1}) {
            CyclotomicNumber unit = CyclotomicNumber::root_power(d, j).scaled(Rational(sign));
            CyclotomicNumber cand = c * unit;
            if (compare_lex(cand, best) > 0) {
                best = cand;
                best_unit = unit;
            }
        }
    }
    return FieldElement(moved.scaled(best_unit));
}

}  // namespace novikov
