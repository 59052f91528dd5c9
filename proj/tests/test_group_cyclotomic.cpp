#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace novikov;
using namespace testsupport;

// ---- graded groups ---------------------------------------------------------------

TEST(GradedGroup, GradeIsLinear) {
    auto g = GradedGroup::infinite_cyclic();
    EXPECT_EQ(g->grade(g->make_element({3})), Grade(3));
    EXPECT_EQ(g->grade(g->identity()), Grade(0));
}

TEST(GradedGroup, IrrationalWeights) {
    auto g = GradedGroup::make({Grade(1), Grade::parse("r2")});
    Grade x = g->grade(g->make_element({1, -1}));
    EXPECT_EQ(x, Grade(Rational(1), Rational(-1)));
    EXPECT_LT(x.sign(), 0);
    EXPECT_NEAR(x.to_double(), 1 - std::sqrt(2.0), 1e-12);
}

TEST(GradedGroup, RejectsNonInjectiveGrading) {
    EXPECT_THROW(GradedGroup::make({Grade(1), Grade(2)}), MathError);
    EXPECT_THROW(GradedGroup::make({Grade(1), Grade::parse("r2"), Grade(3)}), MathError);
    EXPECT_NO_THROW(GradedGroup::make({Grade::parse("1/2"), Grade::parse("3+2r2")}));
}

TEST(GradedGroup, TorsionHasGradeZero) {
    auto g = GradedGroup::make({Grade(1)}, 6);
    GroupElement s = g->torsion_generator();
    EXPECT_EQ(g->grade(s), Grade(0));
    EXPECT_EQ(g->scale(s, 6), g->identity());
}

TEST(GradedGroup, GradeAdditiveOnRandomPairs) {
    auto g = GradedGroup::make({Grade::parse("1/3"), Grade::parse("2-r2")}, 4);
    Rng rng(11);
    for (int k = 0; k < 200; ++k) {
        auto a = random_element(rng, *g, -9, 9), b = random_element(rng, *g, -9, 9);
        EXPECT_EQ(g->grade(g->add(a, b)), g->grade(a) + g->grade(b));
    }
}

TEST(GradeParse, Forms) {
    EXPECT_EQ(Grade::parse("3+2r2"), Grade(Rational(3), Rational(2)));
    EXPECT_EQ(Grade::parse("-r2"), Grade(Rational(0), Rational(-1)));
    EXPECT_EQ(Grade::parse("1/2 - 3/4*r2"), Grade(ratio(1, 2), ratio(-3, 4)));
    EXPECT_THROW(Grade::parse(""), ParseError);
    EXPECT_THROW(Grade::parse("abc"), ParseError);
    for (const char* s : {"3+2r2", "-r2", "1/2-3/4r2", "7", "r2"}) EXPECT_EQ(Grade::parse(Grade::parse(s).str()), Grade::parse(s));
}

// ---- kernels of cyclic quotients ---------------------------------------------------

TEST(Kernel, IndexTwoInZ) {
    auto g = GradedGroup::infinite_cyclic();
    auto emb = kernel_of_quotient(g, CyclicQuotient{2, {1}, 0});
    ASSERT_EQ(emb.kernel->rank(), 1u);
    EXPECT_EQ(emb.kernel->weights()[0], Grade(2));
    EXPECT_EQ(emb.embed(emb.kernel->generator(0)), g->make_element({2}));
}

TEST(Kernel, TrivialQuotientIsIdentity) {
    auto g = GradedGroup::make({Grade(1), Grade::parse("r2")});
    auto emb = kernel_of_quotient(g, CyclicQuotient{1, {0, 0}, 0});
    EXPECT_EQ(*emb.kernel, *g);
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        auto x = random_element(rng, *g, -5, 5);
        EXPECT_EQ(emb.embed(x), x);
    }
}

TEST(Kernel, RankTwoModThree) {
    auto g = GradedGroup::make({Grade(1), Grade::parse("r2")});
    auto emb = kernel_of_quotient(g, CyclicQuotient{3, {1, 0}, 0});
    ASSERT_EQ(emb.free_basis.size(), 2u);
    EXPECT_EQ(emb.free_basis[0], g->make_element({3, 0}));
    EXPECT_EQ(emb.free_basis[1], g->make_element({0, 1}));
}

TEST(Kernel, RejectsNonSurjective) {
    auto g = GradedGroup::infinite_cyclic();
    EXPECT_THROW(kernel_of_quotient(g, CyclicQuotient{4, {2}, 0}), MathError);
    auto gt = GradedGroup::make({Grade(1)}, 2);
    EXPECT_THROW(kernel_of_quotient(gt, CyclicQuotient{3, {1}, 1}), MathError);  // s of order 2 cannot map to 1 mod 3
}

TEST(Kernel, EmbeddingLandsInKernelAndCosetsCoverResidues) {
    Rng rng(5);
    std::vector<std::pair<GroupPtr, CyclicQuotient>> cases = {
        {GradedGroup::infinite_cyclic(), {3, {1}, 0}},
        {GradedGroup::make({Grade(1), Grade::parse("r2")}), {4, {1, 2}, 0}},
        {GradedGroup::make({Grade(1)}, 4), {2, {1}, 0}},
        {GradedGroup::make({Grade(1)}, 4), {4, {1}, 1}},
        {GradedGroup::make({Grade(1), Grade::parse("1/2+r2")}, 6), {3, {2, 1}, 2}},
    };
    for (const auto& [g, m] : cases) {
        auto emb = kernel_of_quotient(g, m);
        for (int k = 0; k < 100; ++k) {
            auto x = random_element(rng, *emb.kernel, -6, 6);
            GroupElement h = emb.embed(x);
            EXPECT_EQ(m.apply(h), 0);
            EXPECT_EQ(emb.kernel->grade(x), g->grade(h));
            auto back = emb.pullback(h);
            ASSERT_TRUE(back.has_value());
            EXPECT_EQ(*back, x);
        }
        std::set<std::int64_t> residues;
        for (const auto& c : emb.coset_representatives) residues.insert(m.apply(c));
        EXPECT_EQ(static_cast<std::int64_t>(residues.size()), m.modulus);
        // index check: |H / K| on a box of elements
        for (int k = 0; k < 50; ++k) {
            auto h = random_element(rng, *g, -6, 6);
            EXPECT_EQ(emb.pullback(h).has_value(), m.apply(h) == 0);
        }
    }
}

// ---- cyclotomic fields -------------------------------------------------------------

namespace {

// Totient by counting, independent of the library.
long count_totient(long n) {
    long c = 0;
    for (long k = 1; k <= n; ++k) c += std::gcd(k, n) == 1;
    return c;
}

}  // namespace

TEST(Cyclotomic, SmallPolynomials) {
    EXPECT_EQ(cyclotomic_polynomial(1), RationalPolynomial({Rational(-1), Rational(1)}));
    EXPECT_EQ(cyclotomic_polynomial(2), RationalPolynomial({Rational(1), Rational(1)}));
    // x^4 - x^2 + 1
    EXPECT_EQ(cyclotomic_polynomial(12),
              RationalPolynomial({Rational(1), Rational(0), Rational(-1), Rational(0), Rational(1)}));
}

TEST(Cyclotomic, DegreesAndIntegralityUpTo30) {
    for (long d = 1; d <= 30; ++d) {
        const auto& p = cyclotomic_polynomial(d);
        EXPECT_EQ(p.degree(), count_totient(d)) << d;
        for (const auto& c : p.coeffs()) EXPECT_TRUE(is_integer(c)) << d;
        EXPECT_EQ(p.leading(), 1);
    }
}

TEST(Cyclotomic, ProductOverDivisorsIsXnMinusOne) {
    for (long n = 1; n <= 24; ++n) {
        RationalPolynomial acc({Rational(1)});
        for (long d = 1; d <= n; ++d)
            if (n % d == 0) acc = acc * cyclotomic_polynomial(d);
        RationalPolynomial target = RationalPolynomial::monomial(static_cast<std::size_t>(n)) -
                                    RationalPolynomial({Rational(1)});
        EXPECT_EQ(acc, target) << n;
    }
}

TEST(Cyclotomic, InverseExamples) {
    EXPECT_EQ(CyclotomicNumber(Rational(2)).inverse(), CyclotomicNumber(ratio(1, 2)));
    auto i4 = CyclotomicNumber::root_power(4, 1);
    EXPECT_EQ(i4.inverse(), -i4);
    auto z3 = CyclotomicNumber::root_power(3, 1);
    CyclotomicNumber a = CyclotomicNumber(Rational(1), 3) + z3;
    EXPECT_EQ(a.inverse(), -z3);
    EXPECT_EQ(a * (-z3), CyclotomicNumber(Rational(1), 3));
    EXPECT_EQ(parse_cyclotomic("1 + z", 3).inverse(), parse_cyclotomic("-z", 3));
    EXPECT_THROW(CyclotomicNumber(Rational(0), 5).inverse(), MathError);
}

TEST(Cyclotomic, RandomInverses) {
    Rng rng(17);
    for (int k = 0; k < 200; ++k) {
        std::int64_t d = rng.uniform(1, 12);
        CyclotomicNumber a = random_cyclotomic(rng, d);
        EXPECT_EQ(a * a.inverse(), CyclotomicNumber(Rational(1), d)) << a.str() << " in Q(zeta_" << d << ")";
    }
}

TEST(Cyclotomic, RootsOfUnity) {
    for (std::int64_t d = 1; d <= 12; ++d) {
        CyclotomicNumber one(Rational(1), d), z = CyclotomicNumber::root_power(d, 1), acc = one, sum(Rational(0), d);
        for (std::int64_t j = 0; j < d; ++j) {
            sum = sum + acc;
            acc = acc * z;
        }
        EXPECT_EQ(acc, one) << d;
        if (d > 1) EXPECT_TRUE(sum.is_zero()) << d;
    }
}

TEST(Cyclotomic, EmbedAndRestrict) {
    Rng rng(2);
    for (int k = 0; k < 30; ++k) {
        CyclotomicNumber a = random_cyclotomic(rng, 3);
        CyclotomicNumber up = a.embed(12);
        EXPECT_EQ(up.order(), 12);
        auto down = up.restrict_to(3);
        ASSERT_TRUE(down.has_value());
        EXPECT_EQ(*down, a);
        CyclotomicNumber b = random_cyclotomic(rng, 3);
        EXPECT_EQ((a * b).embed(12), a.embed(12) * b.embed(12));
    }
    EXPECT_FALSE(CyclotomicNumber::root_power(12, 1).restrict_to(3).has_value());
}

TEST(FieldSplit, Summands) {
    auto s1 = split_group_algebra(1);
    ASSERT_EQ(s1.summands.size(), 1u);
    auto s2 = split_group_algebra(2);
    ASSERT_EQ(s2.summands.size(), 2u);
    EXPECT_EQ(s2.summands[1].order, 2);
    EXPECT_EQ(CyclotomicNumber::root_power(2, 1), CyclotomicNumber(Rational(-1), 2));
    auto s6 = split_group_algebra(6);
    std::vector<std::int64_t> orders, dims;
    for (const auto& s : s6.summands) orders.push_back(s.order), dims.push_back(euler_phi(s.order));
    EXPECT_EQ(orders, (std::vector<std::int64_t>{1, 2, 3, 6}));
    EXPECT_EQ(dims, (std::vector<std::int64_t>{1, 1, 2, 2}));
    for (std::int64_t n = 1; n <= 30; ++n) EXPECT_EQ(split_group_algebra(n).dimension(), n);
    EXPECT_EQ(split_group_algebra(0).summands.size(), 1u);
}

// projection to the summands is a ring homomorphism on Q[Z/n]
TEST(FieldSplit, ProjectionIsMultiplicative) {
    Rng rng(23);
    for (int k = 0; k < 50; ++k) {
        std::int64_t n = rng.uniform(2, 12);
        auto g = GradedGroup::make({}, n);
        auto elem = [&] {
            NovikovSeries s(g);
            for (std::int64_t j = 0; j < n; ++j) {
                GroupElement h;
                h.torsion = j;
                s += NovikovSeries::monomial(g, h, CyclotomicNumber(Rational(rng.uniform(-3, 3))));
            }
            return s;
        };
        NovikovSeries a = elem(), b = elem();
        for (const auto& sm : split_group_algebra(n).summands) {
            auto pa = project_to_summand(a, sm.order), pb = project_to_summand(b, sm.order);
            EXPECT_EQ(project_to_summand(a * b, sm.order), pa * pb);
            EXPECT_EQ(project_to_summand(a + b, sm.order), pa + pb);
        }
    }
}

// the projections together are injective: the regular representation is recovered
TEST(FieldSplit, ProjectionsSeparateGroupAlgebra) {
    for (std::int64_t n : {2, 3, 4, 6}) {
        auto g = GradedGroup::make({}, n);
        for (std::int64_t j = 1; j < n; ++j) {
            GroupElement h;
            h.torsion = j;
            NovikovSeries x = NovikovSeries::monomial(g, h) - NovikovSeries::one(g);
            bool all_zero = true;
            for (const auto& sm : split_group_algebra(n).summands)
                all_zero = all_zero && project_to_summand(x, sm.order).is_zero();
            EXPECT_FALSE(all_zero) << "s^" << j << " - 1 in Q[Z/" << n << "]";
        }
    }
}
