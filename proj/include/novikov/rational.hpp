#pragma once

// Exact scalar plumbing shared by every module: GMP rationals, the error
// hierarchy, and small text helpers.

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace novikov {

using Integer = mpz_class;
using Rational = mpq_class;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text or an invalid scenario document.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A mathematical precondition does not hold (zero inverse, non-unit pivot, ...).
class MathError : public Error {
public:
    using Error::Error;
};

/// The working truncation is too small to decide a question.
class TruncationError : public MathError {
public:
    using MathError::MathError;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool is_integer_text(std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace detail

/// Parses "7", "-3/4", "+2". Denominator must be nonzero.
inline Rational parse_rational(std::string_view text) {
    auto s = detail::trim(text);
    auto slash = s.find('/');
    auto num = s.substr(0, slash);
    if (!num.empty() && num.front() == '+') num.remove_prefix(1);
    if (!detail::is_integer_text(num)) throw ParseError("bad rational '" + std::string(text) + "'");
    Rational q;
    if (slash == std::string_view::npos) {
        q = Rational(Integer(std::string(num)));
    } else {
        auto den = s.substr(slash + 1);
        if (!detail::is_integer_text(den)) throw ParseError("bad rational '" + std::string(text) + "'");
        Integer d{std::string(den)};
        if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
        q = Rational(Integer(std::string(num)), d);
        q.canonicalize();
    }
    return q;
}

/// a / b in lowest terms.
inline Rational ratio(const Integer& a, const Integer& b) {
    if (b == 0) throw MathError("division by zero");
    Rational q(a, b);
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline std::int64_t to_int64(const Integer& z) {
    if (!z.fits_slong_p()) throw MathError("integer out of 64-bit range: " + z.get_str());
    return z.get_si();
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    auto r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace novikov
