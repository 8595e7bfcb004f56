#include <gtest/gtest.h>

#include "qkm/linalg.hpp"
#include "qkm/uqmod.hpp"

#include <random>

using namespace qkm;

namespace {

CartanData a1() { return validate_cartan({{2, -2}, {-2, 2}}); }

}  // namespace

TEST(UqMod, MultiplicityTableOmega0Depth4) {
    auto cd = a1();
    auto m = build_module(cd, fundamental(cd, 0), 4);
    std::map<Beta, std::size_t> expected{{{0, 0}, 1}, {{1, 0}, 1}, {{1, 1}, 1}, {{1, 2}, 1}, {{2, 1}, 1}, {{2, 2}, 2}};
    EXPECT_EQ(multiplicities(m), expected);
    EXPECT_EQ(m.total, 7u);
}

TEST(UqMod, MultiplicitiesAgreeWithVermaOracle) {
    auto cd = a1();
    std::mt19937_64 rng(31);
    for (std::size_t i = 0; i < 2; ++i) {
        auto m = build_module(cd, fundamental(cd, i), 4);
        for (int t = 0; t < 3; ++t) EXPECT_EQ(multiplicities(m), verma_multiplicities(cd, fundamental(cd, i), 4, random_q0(rng)));
    }
    auto cd2 = validate_cartan({{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}});
    auto m2 = build_module(cd2, fundamental(cd2, 0), 3);
    EXPECT_EQ(multiplicities(m2), verma_multiplicities(cd2, fundamental(cd2, 0), 3, Rational(2, 7)));
}

TEST(UqMod, EFOnHighestWeight) {
    auto cd = a1();
    auto m = build_module(cd, fundamental(cd, 0), 2);
    SparseVec v = apply_word(m, {{Gen::E, 0}, {Gen::F, 0}}, basis_vec(0));
    EXPECT_EQ(v, basis_vec(0));
    EXPECT_TRUE(apply_word(m, {{Gen::F, 1}}, basis_vec(0)).empty());
    EXPECT_TRUE(apply_word(m, {{Gen::E, 0}}, basis_vec(0)).empty());
    EXPECT_EQ(apply_word(m, {{Gen::K, 0}}, basis_vec(0)), (SparseVec{{0, FieldElem::q_pow(1)}}));
}

TEST(UqMod, CrossRelationEverywhere) {
    auto cd = a1();
    for (std::size_t h = 0; h < 2; ++h) {
        auto m = build_module(cd, fundamental(cd, h), 3);
        auto r = cross_defect(m);
        EXPECT_GT(r.checked, 0u);
        EXPECT_EQ(r.nonzero, 0u);
    }
}

TEST(UqMod, SerreRelations) {
    auto cd = a1();
    auto m = build_module(cd, fundamental(cd, 0), 6);
    for (auto [i, j] : {std::pair<std::size_t, std::size_t>{0, 1}, {1, 0}}) {
        auto r = serre_defect(m, i, j);
        EXPECT_GT(r.checked, 0u);
        EXPECT_EQ(r.nonzero, 0u);
        auto bad = serre_defect(m, i, j, 1);
        EXPECT_GT(bad.nonzero, 0u);
    }
    auto cd2 = validate_cartan({{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}});
    auto m2 = build_module(cd2, fundamental(cd2, 1), 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) EXPECT_EQ(serre_defect(m2, i, j).nonzero, 0u);
}

TEST(UqMod, SharpOrbitSpansModule) {
    auto cd = a1();
    const int depth = 4;
    auto m = build_module(cd, fundamental(cd, 0), depth);
    std::map<Beta, Mat<FieldElem>> rows;
    for (const auto& w : all_words(cd.l, depth, false)) {
        bool only_e = std::all_of(w.begin(), w.end(), [](const Letter& x) { return x.g == Gen::E; });
        if (!only_e) continue;
        SparseVec v = apply_word(m, w, basis_vec(0), true);
        if (v.empty()) continue;
        const auto& sp = m.spaces[m.space_of[v.begin()->first]];
        std::vector<FieldElem> row(sp.dim);
        for (const auto& [idx, c] : v) row[idx - sp.offset] = c;
        rows[sp.beta].push_back(row);
    }
    std::size_t total = 0;
    for (const auto& [b, r] : rows) total += exact_rank(r);
    EXPECT_EQ(total, m.total);
}

TEST(UqMod, WeightsAndTruncation) {
    auto cd = a1();
    auto m = build_module(cd, fundamental(cd, 1), 2);
    for (std::size_t g = 0; g < m.total; ++g) {
        EXPECT_LE(m.level_of(g), 2);
        Weight w = m.weight_of(g);
        for (std::size_t i = 0; i < cd.l; ++i) EXPECT_EQ(m.spaces[m.space_of[g]].coroot[i], coroot_pairing(cd, w, i));
    }
    std::size_t top = m.total - 1;
    EXPECT_THROW(act(m, {Gen::F, 0}, basis_vec(top)), TruncationError);
}

TEST(UqMod, ShapovalovNormsPositiveAtSmallQ) {
    auto cd = a1();
    auto m = build_module(cd, fundamental(cd, 0), 4);
    for (std::size_t g = 0; g < m.total; ++g) {
        EXPECT_GT(m.shap_norm(g).eval_exact(Rational(1, 2)), 0);
        EXPECT_GT(m.star_norm(g).eval_exact(Rational(1, 3)), 0);
    }
}

TEST(UqMod, RejectsBadInput) {
    auto cd = a1();
    Weight w = zero_weight(cd);
    w.dom = {-1, 0};
    EXPECT_THROW(build_module(cd, w, 2), ValidationError);
    EXPECT_THROW(build_module(cd, fundamental(cd, 0), -1), ValidationError);
    EXPECT_THROW(parse_uword("X0"), std::exception);
}

TEST(UqMod, WordParse) {
    UWord w = parse_uword("E0 F1 K0");
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w[1], (Letter{Gen::F, 1}));
    EXPECT_EQ(parse_uword(word_str(w)), w);
}

TEST(UqMod, JsonRoundTrip) {
    auto cd = a1();
    auto m = build_module(cd, fundamental(cd, 0), 3);
    auto back = module_from_json(to_json(m));
    EXPECT_EQ(back.total, m.total);
    EXPECT_EQ(multiplicities(back), multiplicities(m));
    for (std::size_t g = 0; g < m.total; ++g) {
        EXPECT_EQ(back.shap_norm(g), m.shap_norm(g));
        for (std::size_t i = 0; i < cd.l; ++i) {
            if (m.f_boundary[i][g]) continue;
            EXPECT_EQ(act(back, {Gen::F, i}, basis_vec(g)), act(m, {Gen::F, i}, basis_vec(g)));
            EXPECT_EQ(act(back, {Gen::E, i}, basis_vec(g)), act(m, {Gen::E, i}, basis_vec(g)));
        }
    }
    EXPECT_EQ(to_json(back).dump(), to_json(m).dump());
}
