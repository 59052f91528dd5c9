#include <gtest/gtest.h>

#include "support.hpp"

using namespace novikov;
using namespace testsupport;

namespace {

GroupPtr Z() { return GradedGroup::infinite_cyclic(); }

NovikovSeries P(const std::string& s, const GroupPtr& g, std::int64_t d = 1) { return parse_series(s, g, d); }

// Two series equal below a common bound.
::testing::AssertionResult same_below(const NovikovSeries& a, const NovikovSeries& b, const Truncation& r) {
    if (agree(a, b, r)) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << render_series(a.truncated(r)) << " vs " << render_series(b.truncated(r));
}

}  // namespace

TEST(SeriesArithmetic, AddExamples) {
    auto g = Z();
    EXPECT_EQ(P("1 + t", g) + P("1 - t", g), P("2", g));
    NovikovSeries x = P("3 - t^2 + O(5)", g);
    EXPECT_EQ(x + NovikovSeries(g), x);
    NovikovSeries sum = P("1 + t + t^2 + O(3)", g) + P("t^3 + O(4)", g);
    EXPECT_EQ(sum, P("1 + t + t^2 + O(3)", g));
    EXPECT_EQ(sum.truncation(), Truncation(3));
}

TEST(SeriesArithmetic, MulExamples) {
    auto g = Z();
    NovikovSeries geo(g);
    for (int k = 0; k < 10; ++k) geo += tpow(g, k);
    geo = geo.truncated(10);
    EXPECT_EQ(P("1 - t", g) * geo, P("1 + O(10)", g));
    EXPECT_EQ(tpow(g, 3) * tpow(g, -5), tpow(g, -2));
    auto h = GradedGroup::make({Grade(1), Grade::parse("r2")});
    EXPECT_EQ(P("t*u", h) * P("u^-1", h), P("t", h));
}

TEST(SeriesArithmetic, TorsionProjection) {
    auto g = GradedGroup::make({Grade(1)}, 2);
    NovikovSeries a = P("1 + s", g), b = P("1 - s", g);
    EXPECT_TRUE(project_to_summand(a * b, 2).is_zero());
    EXPECT_TRUE(project_to_summand(a, 2).is_zero());
    EXPECT_EQ(project_to_summand(b, 2), P("2", g, 2));
    EXPECT_EQ(project_to_summand(a * b, 1), NovikovSeries(g, 1));
    EXPECT_EQ(project_to_summand(P("s*t", g), 2), P("-t", g, 2));
}

TEST(SeriesArithmetic, MismatchThrows) {
    auto g = Z();
    auto h = GradedGroup::make({Grade(2)});
    EXPECT_THROW(P("t", g) + P("t", h), MathError);
    EXPECT_THROW(NovikovSeries::one(g, 1) + NovikovSeries::one(g, 3), MathError);
}

TEST(SeriesArithmetic, ProductTruncationTracksValuation) {
    auto g = Z();
    // t^-2 + O(3) times 1 + O(5): known up to O(3) only
    NovikovSeries a = P("t^-2 + O(3)", g), b = P("1 + t + O(5)", g);
    EXPECT_EQ((a * b).truncation(), Truncation(3));
    // shifting by t^-2 drops the window by 2
    NovikovSeries c = P("1 + O(5)", g) * P("t^-2 + t + O(6)", g);
    EXPECT_EQ(c.truncation(), Truncation(3));
}

TEST(SeriesInverse, Examples) {
    auto g = Z();
    FieldElement inv = series_invert(P("1 - t", g), Truncation(8));
    NovikovSeries geo(g);
    for (int k = 0; k < 8; ++k) geo += tpow(g, k);
    EXPECT_EQ(inv.series(), geo.truncated(8));
    EXPECT_EQ(series_invert(tpow(g, 1)).series(), tpow(g, -1));
    EXPECT_EQ(series_invert(tpow(g, 1)).leading_grade(), Grade(-1));
    EXPECT_THROW(series_invert(NovikovSeries(g)), TruncationError);
    EXPECT_THROW(series_invert(P("1 + t", g)), TruncationError);  // exact non-monomial without a cap
    EXPECT_THROW(series_invert(P("t^5 + O(3)", g)), TruncationError);
}

TEST(SeriesInverse, RandomUnits) {
    Rng rng(41);
    for (int k = 0; k < 200; ++k) {
        GroupPtr g = k % 3 == 0 ? GradedGroup::make({Grade(1), Grade::parse("r2")})
                     : k % 3 == 1 ? GradedGroup::make({Grade(1)}, 3)
                                  : Z();
        NovikovSeries a = random_unit(rng, g, 5, 3).truncated(12);
        FieldElement inv = series_invert(a);
        NovikovSeries prod = a * inv.series();
        ASSERT_FALSE(prod.is_exact());
        EXPECT_TRUE(same_below(prod, NovikovSeries::one(g), prod.truncation())) << render_series(a);
    }
}

TEST(SeriesInverse, RandomUnitsInSummands) {
    Rng rng(43);
    auto g = GradedGroup::make({Grade(1)}, 6);
    for (int k = 0; k < 50; ++k) {
        std::int64_t d = std::vector<std::int64_t>{1, 2, 3, 6}[k % 4];
        NovikovSeries a(g, d);
        a += NovikovSeries::monomial(g, g->identity(), random_cyclotomic(rng, d));
        for (int j = 0; j < 3; ++j)
            a += NovikovSeries::monomial(g, g->make_element({rng.uniform(1, 3)}), random_cyclotomic(rng, d));
        a = a.truncated(10);
        NovikovSeries prod = a * series_invert(a).series();
        EXPECT_TRUE(same_below(prod, NovikovSeries::one(g, d), prod.truncation()));
    }
}

TEST(SeriesExpLog, Examples) {
    auto g = Z();
    EXPECT_EQ(exp_plus(NovikovSeries(g)), NovikovSeries::one(g));
    EXPECT_TRUE(log_one_plus(NovikovSeries(g)).is_zero());
    const long R = 16;
    NovikovSeries x(g);
    for (long k = 1; k < R; ++k) x += mono(g, g->make_element({k}), 1).scaled(CyclotomicNumber(ratio(1, k)));
    x = x.truncated(R);
    NovikovSeries geo(g);
    for (long k = 0; k < R; ++k) geo += tpow(g, k);
    EXPECT_EQ(exp_plus(x), geo.truncated(R));
    EXPECT_THROW(exp_plus(P("1 + t + O(5)", g)), MathError);
    EXPECT_THROW(log_one_plus(P("t^-1 + O(5)", g)), MathError);
    EXPECT_THROW(exp_plus(P("t", g)), TruncationError);
}

TEST(SeriesExpLog, RoundTrips) {
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        GroupPtr g = k % 2 ? Z() : GradedGroup::make({Grade(1), Grade::parse("r2")});
        NovikovSeries x = random_plus(rng, g, 4, 3).truncated(10);
        NovikovSeries e = exp_plus(x);
        EXPECT_TRUE(same_below(log_one_plus(e - NovikovSeries::one(g)), x, Truncation(10)));
        NovikovSeries y = random_plus(rng, g, 3, 2).truncated(10);
        EXPECT_TRUE(same_below(exp_plus(log_one_plus(y)) - NovikovSeries::one(g), y, Truncation(10)));
    }
}

TEST(SeriesExpLog, ExpIsAdditive) {
    Rng rng(7);
    for (int k = 0; k < 100; ++k) {
        GroupPtr g = k % 2 ? Z() : GradedGroup::make({Grade(1)}, 2);
        NovikovSeries x = random_plus(rng, g, 3, 3).truncated(9), y = random_plus(rng, g, 3, 3).truncated(9);
        EXPECT_TRUE(same_below(exp_plus(x + y), exp_plus(x) * exp_plus(y), Truncation(9)));
    }
}

TEST(SeriesRing, AxiomsOnRandomTriples) {
    Rng rng(13);
    for (int k = 0; k < 300; ++k) {
        GroupPtr g = k % 3 == 0 ? GradedGroup::make({Grade(1), Grade::parse("1/2+r2")})
                     : k % 3 == 1 ? GradedGroup::make({Grade(1)}, 4)
                                  : Z();
        auto pick = [&] {
            NovikovSeries s = random_poly(rng, g, 3, -1, 3);
            return rng.chance(0.5) ? s.truncated(Truncation(rng.uniform(4, 9))) : s;
        };
        NovikovSeries a = pick(), b = pick(), c = pick();
        Truncation r(2);  // products of elements with valuation >= -2 stay certified below 2
        EXPECT_TRUE(same_below((a * b) * c, a * (b * c), r));
        EXPECT_TRUE(same_below(a * (b + c), a * b + a * c, r));
        EXPECT_TRUE(same_below((a + b) * c, a * c + b * c, r));
        EXPECT_TRUE(same_below(a * b, b * a, r));
        EXPECT_TRUE(same_below((a + b) + c, a + (b + c), Truncation()));
        EXPECT_TRUE(same_below(a - a, NovikovSeries(g), Truncation()));
    }
}

TEST(SeriesRing, LambdaPlusIsClosed) {
    Rng rng(19);
    for (int k = 0; k < 100; ++k) {
        GroupPtr g = k % 2 ? Z() : GradedGroup::make({Grade(1), Grade::parse("r2")});
        NovikovSeries a = random_plus(rng, g, 3, 3), b = random_plus(rng, g, 3, 3);
        EXPECT_TRUE(a.in_lambda_plus());
        EXPECT_TRUE((a * b).in_lambda_plus());
        EXPECT_TRUE((a + b).in_lambda_plus());
    }
    EXPECT_FALSE(NovikovSeries::one(Z()).in_lambda_plus());
}

TEST(Canonicalize, Examples) {
    auto g = Z();
    auto canon = [](const NovikovSeries& s, Ambiguity a) { return canonicalize(FieldElement(s), a).series(); };
    EXPECT_EQ(canon(P("-t^3*(1 + t)", g), Ambiguity::kTranslation), P("1 + t", g));
    EXPECT_EQ(canon(P("1 + t", g), Ambiguity::kTranslation), P("1 + t", g));
    EXPECT_EQ(canon(P("-t^3*(1 + t)", g), Ambiguity::kSign), P("t^3 + t^4", g));
    EXPECT_EQ(canon(P("t^-1 - 2 + O(4)", g), Ambiguity::kTranslation), P("1 - 2*t + O(5)", g));

    auto gs = GradedGroup::make({Grade(1)}, 2);
    NovikovSeries x = P("s*(1 - t)", gs);
    EXPECT_EQ(canon(project_to_summand(x, 1), Ambiguity::kTranslation), P("1 - t", gs, 1));
    EXPECT_EQ(project_to_summand(x, 2), P("-1 + t", gs, 2));
    EXPECT_EQ(canon(project_to_summand(x, 2), Ambiguity::kTranslation), P("1 - t", gs, 2));

    // zeta_3 times a series is identified with it modulo +-H in the d=3 summand
    auto g3 = GradedGroup::make({Grade(1)}, 3);
    NovikovSeries y = P("2 + t", g3, 3);
    EXPECT_EQ(canon(y.scaled(CyclotomicNumber::root_power(3, 1)), Ambiguity::kTranslation),
              canon(y, Ambiguity::kTranslation));
    EXPECT_THROW(FieldElement(NovikovSeries(g)), MathError);
}

TEST(Canonicalize, IdempotentAndConstantOnOrbits) {
    Rng rng(29);
    for (int k = 0; k < 50; ++k) {
        GroupPtr g = k % 2 ? Z() : GradedGroup::make({Grade(1), Grade::parse("r2")}, 3);
        std::int64_t d = g->torsion_order() == 3 ? 3 : 1;
        NovikovSeries q = project_to_summand(random_unit(rng, g, 3, 3).truncated(8), d);
        GroupElement h = random_element(rng, *g, -3, 3);
        FieldElement c = canonicalize(FieldElement(q), Ambiguity::kTranslation);
        EXPECT_EQ(canonicalize(c, Ambiguity::kTranslation).series(), c.series());
        NovikovSeries moved = project_to_summand(NovikovSeries::monomial(g, h), d) * q;
        if (rng.chance(0.5)) moved = -moved;
        EXPECT_TRUE(same_below(canonicalize(FieldElement(moved), Ambiguity::kTranslation).series(), c.series(),
                               c.truncation()));
        FieldElement s = canonicalize(FieldElement(q), Ambiguity::kSign);
        EXPECT_EQ(canonicalize(FieldElement(-q), Ambiguity::kSign).series(), s.series());
        EXPECT_EQ(canonicalize(s, Ambiguity::kSign).series(), s.series());
    }
}

TEST(SeriesText, ParseRender) {
    auto g = Z();
    for (const char* s : {"1 + t + t^2 + O(3)", "-2*t^-1 + 1/3", "0", "O(4)", "t^2 - 5*t^7"}) {
        NovikovSeries x = P(s, g);
        EXPECT_EQ(P(render_series(x), g), x) << s;
    }
    EXPECT_EQ(render_series(P("(1 + t)^2 + O(2)", g)), "1 + 2*t + O(2)");
    EXPECT_EQ(render_series(NovikovSeries(g)), "0");

    auto h = GradedGroup::make({Grade(1), Grade::parse("r2")}, 2);
    EXPECT_EQ(P("1 - 1*t^(1,0)*s^1 + O(8)", h), P("1 - t*s + O(8)", h));
    EXPECT_EQ(P("t^(2,-1)", h), P("t^2*u^-1", h));
    NovikovSeries y = P("u*s - t^(1,1) + 3 + O(5)", h);
    EXPECT_EQ(P(render_series(y), h), y);

    auto g5 = GradedGroup::make({Grade(1)}, 5);
    NovikovSeries z = P("(1 + z^2)*t - z + O(3)", g5, 5);
    EXPECT_EQ(P(render_series(z), g5, 5), z);
}

TEST(SeriesText, Errors) {
    auto g = Z();
    for (const char* s : {"1 - t^", "t +", "u", "s", "z", "(1 + t", "t^x", "O(", "2 ** t", "(1 + t)^-1"})
        EXPECT_THROW(P(s, g), ParseError) << s;
}

TEST(SeriesText, RandomRoundTrip) {
    Rng rng(31);
    for (int k = 0; k < 100; ++k) {
        GroupPtr g = k % 2 ? GradedGroup::make({Grade::parse("1/2"), Grade::parse("r2")}, 3) : Z();
        NovikovSeries x = random_poly(rng, g, 4, -3, 3);
        if (rng.chance(0.5)) x = x.truncated(Truncation(rng.uniform(-2, 4)));
        EXPECT_EQ(P(render_series(x), g), x) << render_series(x);
    }
}
