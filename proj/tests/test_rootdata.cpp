#include <gtest/gtest.h>

#include "qkm/rootdata.hpp"

#include <random>

using namespace qkm;

namespace {

const IntMat kA1 = {{2, -2}, {-2, 2}};
const IntMat kA2 = {{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}};

Weight random_weight(const CartanData& cd, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> u(-3, 3);
    Weight w = zero_weight(cd);
    for (std::size_t i = 0; i < cd.l; ++i) {
        w.dom[i] = u(rng);
        w.beta[i] = u(rng);
    }
    return w;
}

}  // namespace

TEST(RootData, AffineA2Marks) {
    auto cd = validate_cartan(kA2);
    EXPECT_TRUE(cd.affine);
    EXPECT_EQ(cd.marks, (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(cd.d, (std::vector<int>{1, 1, 1}));
}

TEST(RootData, AffineA1) {
    auto cd = validate_cartan(kA1);
    EXPECT_TRUE(cd.affine);
    EXPECT_TRUE(cd.a0);
    EXPECT_EQ(cd.marks, (std::vector<int>{1, 1}));
    Weight delta = alpha(cd, 0) + alpha(cd, 1);
    EXPECT_EQ(bilinear(cd, delta, delta), 0);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(bilinear(cd, delta_weight(cd), fundamental(cd, i)), bilinear(cd, delta, fundamental(cd, i)));
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(bilinear(cd, delta, alpha(cd, i)), 0);
}

TEST(RootData, FiniteIsNotAffine) {
    auto cd = validate_cartan({{2, -1}, {-1, 2}});
    EXPECT_FALSE(cd.affine);
    EXPECT_FALSE(cd.a0);
}

TEST(RootData, RejectsInvalid) {
    EXPECT_THROW(validate_cartan({{2, -1}, {-2, 3}}), ValidationError);
    EXPECT_THROW(validate_cartan({{2, -1}, {0, 2}}), ValidationError);
    EXPECT_THROW(validate_cartan({{2, 1}, {1, 2}}), ValidationError);
    EXPECT_THROW(validate_cartan({{2, -1, 0}, {-1, 2}}), ValidationError);
}

TEST(RootData, SimpleRootTable) {
    for (const auto& a : {kA1, kA2}) {
        auto cd = validate_cartan(a);
        for (std::size_t i = 0; i < cd.l; ++i) {
            for (std::size_t j = 0; j < cd.l; ++j) EXPECT_EQ(bilinear(cd, alpha(cd, i), alpha(cd, j)), cd.sym(i, j));
            EXPECT_EQ(bilinear(cd, fundamental(cd, i), alpha(cd, i)), cd.d[i]);
            EXPECT_EQ(coroot_pairing(cd, fundamental(cd, i), i), 1);
        }
    }
}

TEST(RootData, NonAbelianAction) {
    auto cd = validate_cartan(kA1);
    Weight w0 = fundamental(cd, 0);
    Weight a = reflect(cd, 0, reflect(cd, 1, w0));
    Weight b = reflect(cd, 1, reflect(cd, 0, w0));
    EXPECT_NE(a, b);
    EXPECT_EQ(weyl_act(cd, {0, 1}, w0), a);
    EXPECT_EQ(weyl_act(cd, {1, 0}, w0), b);
}

TEST(RootData, BraidWordsA2) {
    auto cd = validate_cartan(kA2);
    auto r1 = reduce_word(cd, {0, 1, 0});
    auto r2 = reduce_word(cd, {1, 0, 1});
    EXPECT_EQ(r1.length, 3u);
    EXPECT_EQ(r2.length, 3u);
    EXPECT_TRUE(same_element(cd, {0, 1, 0}, {1, 0, 1}));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(weyl_act(cd, {0, 1, 0}, fundamental(cd, j)), weyl_act(cd, {1, 0, 1}, fundamental(cd, j)));
    EXPECT_EQ(weyl_act(cd, {0, 1, 0}, delta_weight(cd)), delta_weight(cd));
    EXPECT_FALSE(same_element(cd, {0, 1}, {1, 0}));
}

TEST(RootData, ReduceWord) {
    auto cd = validate_cartan(kA1);
    EXPECT_EQ(reduce_word(cd, {0, 0}).length, 0u);
    EXPECT_EQ(reduce_word(cd, {0, 1, 1, 0}).length, 0u);
    auto r = reduce_word(cd, {0, 1, 1, 0, 1});
    EXPECT_EQ(r.word, (WeylWord{1}));
    EXPECT_EQ(reduce_word(cd, {0, 1, 0, 1}).length, 4u);
    EXPECT_THROW(reduce_word(cd, {2}), ValidationError);
}

TEST(RootData, ReduceWordProperties) {
    std::mt19937_64 rng(5);
    for (const auto& a : {kA1, kA2}) {
        auto cd = validate_cartan(a);
        for (int t = 0; t < 60; ++t) {
            WeylWord w(rng() % 7);
            for (auto& x : w) x = rng() % cd.l;
            auto r = reduce_word(cd, w);
            EXPECT_LE(r.length, w.size());
            EXPECT_TRUE(same_element(cd, w, r.word));
            EXPECT_EQ(reduce_word(cd, r.word).length, r.length);
            // length parity is a homomorphism to Z/2
            EXPECT_EQ(r.length % 2, w.size() % 2);
        }
    }
}

TEST(RootData, BilinearProperties) {
    std::mt19937_64 rng(9);
    for (const auto& a : {kA1, kA2}) {
        auto cd = validate_cartan(a);
        for (int t = 0; t < 80; ++t) {
            Weight x = random_weight(cd, rng), y = random_weight(cd, rng);
            EXPECT_EQ(bilinear(cd, x, y), bilinear(cd, y, x));
            std::size_t i = rng() % cd.l;
            EXPECT_EQ(reflect(cd, i, reflect(cd, i, x)), x);
            EXPECT_EQ(bilinear(cd, reflect(cd, i, x), reflect(cd, i, y)), bilinear(cd, x, y));
        }
    }
}

TEST(RootData, JsonRoundTrip) {
    auto cd = validate_cartan(kA2);
    auto back = cartan_from_json(to_json(cd));
    EXPECT_EQ(back.a, cd.a);
    EXPECT_EQ(back.marks, cd.marks);
    Weight w = rho(cd) - alpha(cd, 2);
    EXPECT_EQ(weight_from_json(to_json(w)), w);
}
