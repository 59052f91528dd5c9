#pragma once

// Text form of series: "1 - t + 3/2*t^2*s + (1 - z)*u^-1 + O(8)".
// t and u are the free generators, s the torsion generator, z the root of
// unity of the coefficient field. "t^(a,b)" names the free element (a, b).

#include <cctype>
#include <string>
#include <string_view>

#include "novikov/series.hpp"

namespace novikov {

namespace detail {

class SeriesParser {
public:
    SeriesParser(std::string_view text, GroupPtr group, std::int64_t order)
        : text_(text), group_(std::move(group)), order_(order) {}

    NovikovSeries run() {
        skip_space();
        if (at_end()) fail("empty series");
        NovikovSeries value = expression();
        skip_space();
        if (!at_end()) fail("unexpected '" + std::string(1, peek()) + "'");
        if (order_ != 1) value = project_to_summand(value, order_);
        return value.truncated(truncation_);
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("series '" + std::string(text_) + "': " + why + " at offset " + std::to_string(pos_));
    }
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }
    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_space();
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    NovikovSeries zero() const { return NovikovSeries(group_, order_); }
    CyclotomicNumber unit() const { return CyclotomicNumber(Rational(1), order_); }
    NovikovSeries constant(const Rational& q) const {
        return NovikovSeries::constant(group_, CyclotomicNumber(q, order_));
    }

    // expression := ['+'|'-'] term (('+'|'-') term)*
    NovikovSeries expression() {
        NovikovSeries acc = zero();
        bool first = true;
        while (true) {
            skip_space();
            bool negative = false;
            if (accept('+')) {
            } else if (accept('-')) {
                negative = true;
            } else if (!first) {
                break;
            }
            first = false;
            skip_space();
            if (peek() == 'O') {
                truncation_term();
                continue;
            }
            NovikovSeries t = term();
            acc = negative ? acc - t : acc + t;
        }
        return acc;
    }

    void truncation_term() {
        ++pos_;
        expect('(');
        std::size_t close = text_.find(')', pos_);
        if (close == std::string_view::npos) fail("unterminated O(");
        Grade r;
        try {
            r = Grade::parse(text_.substr(pos_, close - pos_));
        } catch (const ParseError&) {
            fail("bad truncation grade");
        }
        pos_ = close + 1;
        truncation_ = min(truncation_, Truncation(r));
    }

    // term := factor ('*' factor)*
    NovikovSeries term() {
        NovikovSeries acc = factor();
        while (accept('*')) acc = acc * factor();
        return acc;
    }

    // factor := primary ['^' exponent]
    NovikovSeries factor() {
        skip_space();
        bool is_t = peek() == 't';
        NovikovSeries base = primary();
        if (!accept('^')) return base;
        skip_space();
        if (is_t && peek() == '(') {
            ++pos_;
            std::vector<std::int64_t> v{signed_integer()};
            while (accept(',')) v.push_back(signed_integer());
            expect(')');
            if (v.size() != group_->rank()) fail("free exponent has wrong length");
            return NovikovSeries::monomial(group_, group_->make_element(v), unit());
        }
        std::int64_t e;
        if (accept('(')) {
            e = signed_integer();
            expect(')');
        } else {
            e = signed_integer();
        }
        return power(base, e);
    }

    NovikovSeries power(const NovikovSeries& base, std::int64_t e) {
        if (e < 0) {
            if (base.terms().size() != 1) fail("negative power of a non-monomial");
            const auto& t = base.terms().front();
            GroupElement h = group_->scale(t.element, e);
            CyclotomicNumber c = t.coeff.inverse();
            CyclotomicNumber out = unit();
            for (std::int64_t k = 0; k < -e; ++k) out = out * c;
            return NovikovSeries::monomial(group_, h, out);
        }
        if (e > 256) fail("exponent too large");
        NovikovSeries acc = constant(1);
        for (std::int64_t k = 0; k < e; ++k) acc = acc * base;
        return acc;
    }

    std::int64_t signed_integer() {
        skip_space();
        std::size_t start = pos_;
        if (peek() == '-' || peek() == '+') ++pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        std::string_view digits = text_.substr(start, pos_ - start);
        if (!is_integer_text(digits)) fail("expected an integer");
        Integer z{std::string(digits)};
        if (!z.fits_slong_p()) fail("integer out of range");
        return z.get_si();
    }

    NovikovSeries primary() {
        skip_space();
        char c = peek();
        if (c == '(') {
            ++pos_;
            NovikovSeries inner = expression();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            if (peek() == '/') {
                ++pos_;
                while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            }
            try {
                return constant(parse_rational(text_.substr(start, pos_ - start)));
            } catch (const ParseError&) {
                fail("bad number");
            }
        }
        ++pos_;
        switch (c) {
            case 't':
            case 'u': {
                std::size_t i = c == 't' ? 0 : 1;
                if (i >= group_->rank()) fail(std::string("generator '") + c + "' exceeds the free rank");
                return NovikovSeries::monomial(group_, group_->generator(i), unit());
            }
            case 's':
                if (group_->torsion_order() == 0) fail("group has no torsion generator 's'");
                return NovikovSeries::monomial(group_, group_->torsion_generator(), unit());
            case 'z':
                if (order_ == 1) fail("'z' needs a cyclotomic coefficient field");
                return NovikovSeries::constant(group_, CyclotomicNumber::root_power(order_, 1));
            default:
                --pos_;
                fail(c == '\0' ? std::string("unexpected end") : std::string("unexpected '") + c + "'");
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    GroupPtr group_;
    std::int64_t order_;
    Truncation truncation_;
};

}  // namespace detail

/// Parses a series over `group` with coefficients in Q(zeta_order).
inline NovikovSeries parse_series(std::string_view text, const GroupPtr& group, std::int64_t order = 1) {
    return detail::SeriesParser(text, group, order).run();
}

/// Parses "1 - 2*z + z^2" as an element of Q(zeta_order).
inline CyclotomicNumber parse_cyclotomic(std::string_view text, std::int64_t order) {
    static const GroupPtr trivial = GradedGroup::make({}, 0);
    NovikovSeries s = parse_series(text, trivial, order);
    if (!s.is_exact()) throw ParseError("cyclotomic number cannot carry a truncation");
    return s.coefficient(trivial->identity());
}

namespace detail {

inline std::string render_monomial(const GradedGroup& group, const GroupElement& h) {
    static const char* names[] = {"t", "u"};
    std::string out;
    auto append = [&out](const std::string& factor) { out += (out.empty() ? "" : "*") + factor; };
    for (std::size_t i = 0; i < group.rank(); ++i) {
        if (h.free[i] == 0) continue;
        append(h.free[i] == 1 ? std::string(names[i]) : std::string(names[i]) + "^" + std::to_string(h.free[i]));
    }
    if (h.torsion != 0) append(h.torsion == 1 ? std::string("s") : "s^" + std::to_string(h.torsion));
    return out;
}

}  // namespace detail

/// Canonical text: terms in increasing grade, then " + O(R)" when truncated.
inline std::string render_series(const NovikovSeries& s) {
    std::string out;
    for (const auto& t : s.terms()) {
        std::string mono = detail::render_monomial(*s.group(), t.element);
        bool negative = false;
        std::string coeff;
        if (t.coeff.is_single_term()) {
            negative = !t.coeff.is_positive();
            CyclotomicNumber mag = negative ? -t.coeff : t.coeff;
            coeff = mag.str();
            if (coeff == "1" && !mono.empty()) coeff.clear();
        } else {
            coeff = "(" + t.coeff.str() + ")";
        }
        std::string body = coeff.empty() ? mono : (mono.empty() ? coeff : coeff + "*" + mono);
        if (out.empty()) out = negative ? "-" + body : body;
        else out += (negative ? " - " : " + ") + body;
    }
    if (!s.is_exact()) {
        std::string tail = "O(" + s.truncation().str() + ")";
        out = out.empty() ? tail : out + " + " + tail;
    }
    return out.empty() ? "0" : out;
}

}  // namespace novikov
