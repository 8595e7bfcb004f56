#include <gtest/gtest.h>

#include "qkm/qfield.hpp"

#include <random>

using namespace qkm;

namespace {

FieldElem random_elem(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coef(-3, 3), expo(-3, 3), nterms(1, 3);
    auto poly = [&] {
        std::map<int, Rational> t;
        int n = nterms(rng);
        for (int k = 0; k < n; ++k) t[expo(rng)] += coef(rng);
        return LaurentPoly::from_terms(t);
    };
    LaurentPoly d = poly();
    while (d.is_zero()) d = poly();
    return FieldElem(poly(), d);
}

}  // namespace

TEST(QField, EvalAtQInt3) {
    FieldElem x = q_int(3, 1);
    EXPECT_EQ(x.eval_exact(Rational(1, 2)), Rational(21, 4));
    auto n = eval_at(x, Rational(1, 2));
    EXPECT_DOUBLE_EQ(n.value.real(), 5.25);
    EXPECT_EQ(n.value.imag(), 0.0);
    EXPECT_EQ(n.origin_q, Rational(1, 2));
}

TEST(QField, QIntExpansion) {
    EXPECT_EQ(q_int(3), FieldElem(LaurentPoly::from_terms({{-2, 1}, {0, 1}, {2, 1}})));
    EXPECT_EQ(q_int(2, 2), FieldElem(LaurentPoly::from_terms({{-2, 1}, {2, 1}})));
    EXPECT_TRUE(q_int(0).is_zero());
    EXPECT_EQ(q_int(-2), -q_int(2));
    EXPECT_EQ(q_int(1), FieldElem(1));
}

TEST(QField, QIntIsQuotient) {
    for (int n = 1; n < 7; ++n)
        for (int d = 1; d < 4; ++d) {
            FieldElem lhs = (FieldElem::q_pow(n * d) - FieldElem::q_pow(-n * d)) / (FieldElem::q_pow(d) - FieldElem::q_pow(-d));
            EXPECT_EQ(q_int(n, d), lhs);
        }
}

TEST(QField, Binom42AgainstFactorialRatio) {
    FieldElem b = q_binom(4, 2, 1);
    EXPECT_TRUE(b.is_poly());
    EXPECT_EQ(b, FieldElem(LaurentPoly::from_terms({{-4, 1}, {-2, 1}, {0, 2}, {2, 1}, {4, 1}})));
    // [4]! = [2]! [2]! * binom, with every factor expanded by hand
    FieldElem q2 = FieldElem(LaurentPoly::from_terms({{-1, 1}, {1, 1}}));
    FieldElem q3 = FieldElem(LaurentPoly::from_terms({{-2, 1}, {0, 1}, {2, 1}}));
    FieldElem q4 = FieldElem(LaurentPoly::from_terms({{-3, 1}, {-1, 1}, {1, 1}, {3, 1}}));
    EXPECT_EQ(q2 * q3 * q4, q2 * q2 * b);
}

TEST(QField, BinomPascal) {
    for (int n = 1; n < 7; ++n)
        for (int t = 1; t < n; ++t) {
            FieldElem rhs = FieldElem::q_pow(-t) * q_binom(n - 1, t) + FieldElem::q_pow(n - t) * q_binom(n - 1, t - 1);
            EXPECT_EQ(q_binom(n, t), rhs) << n << " " << t;
        }
    EXPECT_THROW(q_binom(2, 3), FieldError);
}

TEST(QField, CanonicalForm) {
    FieldElem a(LaurentPoly::from_terms({{2, 1}, {0, -1}}), LaurentPoly::from_terms({{1, 1}, {0, -1}}));
    EXPECT_EQ(a, FieldElem(LaurentPoly::from_terms({{1, 1}, {0, 1}})));
    EXPECT_TRUE(a.is_poly());
    FieldElem b(LaurentPoly::from_terms({{0, 2}}), LaurentPoly::from_terms({{3, 4}}));
    EXPECT_EQ(b, FieldElem(LaurentPoly::from_terms({{-3, Rational(1, 2)}})));
}

TEST(QField, Errors) {
    EXPECT_THROW(FieldElem(1) / FieldElem(0), FieldError);
    EXPECT_THROW(FieldElem(LaurentPoly(1), LaurentPoly()), FieldError);
    FieldElem pole = FieldElem(1) / (FieldElem::q_pow(1) - FieldElem(Rational(1, 2)));
    EXPECT_THROW(pole.eval_exact(Rational(1, 2)), FieldError);
    EXPECT_THROW(eval_at(q_int(2), Rational(3, 2)), FieldError);
    EXPECT_THROW(eval_at(q_int(2), Rational(0)), FieldError);
    EXPECT_THROW(field_arith(1, 2, '%'), FieldError);
}

TEST(QField, ParseStrRoundTrip) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
        FieldElem x = random_elem(rng);
        EXPECT_EQ(FieldElem::parse(x.str()), x) << x.str();
    }
    EXPECT_EQ(FieldElem::parse("q^2 + 1 + q^-2"), q_int(3));
}

TEST(QField, FieldLaws) {
    std::mt19937_64 rng(19);
    for (int k = 0; k < 150; ++k) {
        FieldElem a = random_elem(rng), b = random_elem(rng), c = random_elem(rng);
        EXPECT_EQ(a + b, b + a);
        EXPECT_EQ(a * b, b * a);
        EXPECT_EQ((a + b) + c, a + (b + c));
        EXPECT_EQ((a * b) * c, a * (b * c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        EXPECT_TRUE((a - a).is_zero());
        if (!b.is_zero()) EXPECT_EQ((a * b) / b, a);
        EXPECT_EQ(a.bar().bar(), a);
        EXPECT_EQ((a * b).bar(), a.bar() * b.bar());
    }
}

TEST(QField, EvaluationIsHomomorphism) {
    std::mt19937_64 rng(23);
    const Rational q0(2, 5);
    for (int k = 0; k < 100; ++k) {
        FieldElem a = random_elem(rng), b = random_elem(rng);
        try {
            Rational ea = a.eval_exact(q0), eb = b.eval_exact(q0);
            EXPECT_EQ((a + b).eval_exact(q0), ea + eb);
            EXPECT_EQ((a * b).eval_exact(q0), ea * eb);
        } catch (const FieldError&) {
        }
    }
}

TEST(QField, BarSymmetricQInts) {
    for (int n = 0; n < 8; ++n) {
        EXPECT_EQ(q_int(n).bar(), q_int(n));
        EXPECT_EQ(q_factorial(n).bar(), q_factorial(n));
    }
}
