#include <gtest/gtest.h>

#include "qkm/repmod.hpp"

#include <random>

using namespace qkm;

namespace {

CartanData a1() { return validate_cartan({{2, -2}, {-2, 2}}); }
CartanData a2() { return validate_cartan({{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}}); }

const Rational kQ0(1, 2);

std::vector<Weight> fundamentals(const CartanData& cd) {
    std::vector<Weight> out;
    for (std::size_t i = 0; i < cd.l; ++i) out.push_back(fundamental(cd, i));
    return out;
}

// Label of the tensor basis vector e_{k_0} (x) ... (x) e_{k_{n-1}}: leg j shifts the weight by
// k_j times s_{i_{n-1}} ... s_{i_{j+1}} alpha_{i_j}.
std::vector<long> weyl_label(const CartanData& cd, const WeylWord& w, const std::vector<int>& k) {
    std::vector<long> n(cd.l, 0);
    for (std::size_t j = 0; j < w.size(); ++j) {
        WeylWord suffix(w.rbegin(), w.rend() - static_cast<long>(j) - 1);
        Weight root = weyl_act(cd, suffix, alpha(cd, w[j]));
        auto part = root_part(cd, root);
        for (std::size_t c = 0; c < cd.l; ++c) n[c] += k[j] * part[c].get_num().get_si();
    }
    return n;
}

// chi_w on the normalized extremal coefficient: leg j contributes twist_j^{n_j}, n_j the
// alpha_{i_j}-string length at the weight reached by the legs to its right.
cplx twist_oracle(const CartanData& cd, const WeylWord& w, const std::vector<cplx>& twists, const Weight& lam) {
    cplx out = 1;
    Weight mu = lam;
    for (std::size_t j = w.size(); j-- > 0;) {
        out *= std::pow(twists[j], coroot_pairing(cd, mu, w[j]));
        mu = reflect(cd, w[j], mu);
    }
    return out;
}

}  // namespace

TEST(RepMod, Sl2RelationsAndStarTable) {
    const auto& r = detail::relations_cached(1);
    EXPECT_EQ(r.rels.size(), 7u);
    EXPECT_EQ(r.rank, 10u);
    // t11^* = t22, t12^* = -t21, t21^* = -t12, t22^* = t11
    const std::array<std::pair<int, int>, 4> expected{{{3, 1}, {2, -1}, {1, -1}, {0, 1}}};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            FieldElem want = b == expected[static_cast<std::size_t>(a)].first ? FieldElem(expected[static_cast<std::size_t>(a)].second) : FieldElem(0);
            EXPECT_EQ(r.star[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)], want) << a << " " << b;
        }
}

TEST(RepMod, ElementaryValidatesForSeveralSymmetrizers) {
    for (int d : {1, 2})
        for (int K : {4, 12}) {
            auto e = elementary_rep(0, d, K, Rational(1, 3), std::polar(1.0, 0.4));
            auto v = validate_elementary(e);
            EXPECT_LE(v.relation_defect, 1e-12);
            EXPECT_LE(v.star_defect, 1e-12);
        }
}

TEST(RepMod, ElementaryMinimalQuantumDeterminant) {
    auto e = elementary_rep(1, 1, 2, kQ0);
    const double q = 0.5;
    CMat det = e.gen(0) * e.gen(3) - q * e.gen(1) * e.gen(2);
    EXPECT_NEAR(std::abs(det(0, 0) - cplx(1)), 0.0, 1e-12);
    EXPECT_LE(validate_elementary(e).relation_defect, 1e-12);
}

TEST(RepMod, DiagonalSpectrum) {
    const cplx twist = std::polar(1.0, 1.1);
    auto e = elementary_rep(0, 2, 8, kQ0, twist);
    const double qi = 0.25;
    CMat t21 = e.gen(2);
    for (int k = 0; k < 8; ++k) {
        cplx want = twist * std::pow(qi, k);
        EXPECT_NEAR(std::abs(t21(k, k) / std::sqrt(qi) - want), 0.0, 1e-14);
    }
    EXPECT_NEAR((t21 - CMat(t21.diagonal().asDiagonal())).norm(), 0.0, 0.0);
}

TEST(RepMod, ElementaryRejectsBadInput) {
    EXPECT_THROW(elementary_rep(0, 1, 1, kQ0), ValidationError);
    EXPECT_THROW(elementary_rep(0, 1, 4, Rational(3, 2)), ValidationError);
    EXPECT_THROW(elementary_rep(0, 1, 4, kQ0, cplx(2, 0)), ValidationError);
}

TEST(RepMod, PsiExpansionMatchesEvaluation) {
    auto cd = a1();
    auto m = share(build_module(cd, fundamental(cd, 0), 3));
    std::mt19937_64 rng(17);
    // C_{-s0 Lambda, Lambda}
    auto p = psi_star_expand(m, 1, 0, false, 0);
    EXPECT_FALSE(p.terms.empty());
    std::size_t compared = 0;
    for (int t = 0; t < 20; ++t) {
        UWord w;
        for (int k = static_cast<int>(rng() % 6); k > 0; --k) w.push_back({static_cast<Gen>(rng() % 4), 0});
        try {
            EXPECT_EQ(evaluate(p, w), evaluate(coeff(m, 1, 0), w)) << word_str(w);
            ++compared;
        } catch (const TruncationError&) {
        }
    }
    EXPECT_GE(compared, 15u);
    for (bool st : {false, true})
        for (std::size_t l = 0; l < 3; ++l) {
            auto q = psi_star_expand(m, l, 0, st, 1);
            for (int t = 0; t < 10; ++t) {
                UWord w;
                for (int k = static_cast<int>(rng() % 4); k > 0; --k) w.push_back({static_cast<Gen>(rng() % 4), 1});
                EXPECT_EQ(evaluate(q, w), evaluate(coeff(m, l, 0, st), w));
            }
        }
}

TEST(RepMod, SingleLegIsElementaryGenerator) {
    auto cd = a1();
    Rep rep = build_Nw(cd, {0}, {}, 6, kQ0);
    auto m = share(build_module(cd, fundamental(cd, 0), 2));
    CMat op = rep_operator(rep, coeff(m, 1, 0));
    EXPECT_LE((op - rep.factors[0].gen(2)).cwiseAbs().maxCoeff(), 1e-13);
    CMat top = rep_operator(rep, coeff(m, 0, 0));
    EXPECT_LE((top - rep.factors[0].gen(0)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(RepMod, FactorizationA1) {
    auto cd = a1();
    Rep rep = build_Nw(cd, {0, 1}, {}, 8, kQ0, {fundamental(cd, 0)});
    auto r = check_factorization(rep, fundamental(cd, 0));
    EXPECT_TRUE(r.pass()) << r.witness.dump();
    EXPECT_FALSE(check_factorization(rep, fundamental(cd, 0), true).pass());
}

TEST(RepMod, WeightBlocksA1) {
    auto cd = a1();
    const WeylWord w{0, 1};
    Rep rep = build_Nw(cd, w, {}, 6, kQ0, fundamentals(cd));
    auto wd = weight_decomposition(rep);
    EXPECT_TRUE(wd.report.pass()) << wd.report.witness.dump();
    std::size_t sum = 0;
    for (const auto& [n, c] : wd.blocks) {
        sum += c;
        EXPECT_EQ(c, 1u);
    }
    EXPECT_EQ(sum, 36u);
    for (std::size_t b = 0; b < rep.dim(); ++b) EXPECT_EQ(wd.labels[b], weyl_label(cd, w, rep.digits(b))) << b;
}

TEST(RepMod, WeightBlocksElementary) {
    auto cd = a1();
    Rep rep = build_Nw(cd, {1}, {}, 7, kQ0, fundamentals(cd));
    auto wd = weight_decomposition(rep);
    EXPECT_TRUE(wd.report.pass());
    for (std::size_t k = 0; k < 7; ++k) EXPECT_EQ(wd.labels[k], (std::vector<long>{0, static_cast<long>(k)}));
}

TEST(RepMod, SpectraStrictness) {
    auto cd = a1();
    Rep rep = build_Nw(cd, {0, 1}, {}, 6, kQ0, fundamentals(cd));
    auto s0 = spectrum_report(rep, fundamental(cd, 0));
    auto s1 = spectrum_report(rep, fundamental(cd, 1));
    EXPECT_TRUE(s0.pass()) << s0.witness.dump();
    EXPECT_TRUE(s1.pass()) << s1.witness.dump();
    EXPECT_FALSE(s0.witness["strict_chain"].get<bool>());
    EXPECT_TRUE(s1.witness["strict_chain"].get<bool>());
    std::size_t unit = 0;
    for (const auto& e : spectra(rep, fundamental(cd, 1))) {
        EXPECT_LE(std::abs(e.value), 1 + 1e-12);
        if (std::abs(std::abs(e.value) - 1) < 1e-9) ++unit;
    }
    EXPECT_EQ(unit, 1u);
}

TEST(RepMod, Annihilator) {
    auto cd = a1();
    auto m = share(build_module(cd, fundamental(cd, 0), 4));
    for (const WeylWord& w : {WeylWord{0}, WeylWord{0, 1}}) {
        Rep rep = build_Nw(cd, w, {}, 6, kQ0);
        auto r = check_annihilator(rep, m, 4);
        EXPECT_TRUE(r.pass()) << r.witness.dump();
    }
    auto dem = demazure(*m, {0});
    std::size_t dim = 0;
    for (const auto& [b, rows] : dem) dim += rows.size();
    EXPECT_EQ(dim, 2u);
}

TEST(RepMod, UnitarityHighestWeightAssociativity) {
    auto cd = a1();
    Rep rep = build_Nw(cd, {0, 1}, {std::polar(1.0, 0.3), std::polar(1.0, -1.2)}, 6, kQ0, fundamentals(cd));
    auto u = check_unitarity(rep, unitarity_sample(rep));
    EXPECT_TRUE(u.pass()) << u.witness.dump();
    EXPECT_TRUE(check_highest_weight(rep).pass());
    for (const auto& lam : fundamentals(cd)) EXPECT_TRUE(check_associativity(rep, lam).pass());
    EXPECT_LE(commutator_defect(rep), 1e-10);
}

TEST(RepMod, ReducedWordIndependence) {
    auto cd = a2();
    auto r = check_reduced_word_independence(cd, {0, 1, 0}, {1, 0, 1}, {fundamental(cd, 0)}, 6, kQ0);
    EXPECT_TRUE(r.pass()) << r.witness.dump();
    EXPECT_THROW(check_reduced_word_independence(cd, {0, 1}, {1, 0}, {fundamental(cd, 0)}, 6, kQ0), ValidationError);
    EXPECT_THROW(check_reduced_word_independence(cd, {0, 0}, {1, 1}, {fundamental(cd, 0)}, 6, kQ0), ValidationError);
}

TEST(RepMod, NonReducedWordWarns) {
    auto cd = a1();
    Rep rep = build_Nw(cd, {0, 1, 1}, {}, 4, kQ0);
    EXPECT_EQ(rep.word, (WeylWord{0}));
    EXPECT_FALSE(rep.warning.empty());
}

TEST(RepMod, JsonRoundTripAndCorruption) {
    auto cd = a1();
    Rep rep = build_Nw(cd, {0, 1}, {std::polar(1.0, 0.5), cplx(1)}, 4, kQ0, fundamentals(cd));
    auto j = to_json(rep);
    Rep back = rep_from_json(j);
    EXPECT_EQ(to_json(back).dump(), j.dump());
    auto bad = j;
    bool corrupted = false;
    for (auto& e : bad["registry"]) {
        e["op"][0][0][0] = e["op"][0][0][0].get<double>() + 0.25;
        corrupted = true;
        break;
    }
    ASSERT_TRUE(corrupted);
    EXPECT_THROW(rep_from_json(bad), ValidationError);
    EXPECT_THROW(rep_from_json(nlohmann::json::object()), ValidationError);
}

TEST(RepMod, CharacterChiW) {
    auto cd = a1();
    const cplx t0 = std::polar(1.0, 0.7), t1 = std::polar(1.0, -0.4);
    const WeylWord w{0, 1};
    Rep plain = build_Nw(cd, w, {}, 5, kQ0, fundamentals(cd));
    Rep twisted = build_Nw(cd, w, {t0, t1}, 5, kQ0, fundamentals(cd));
    CharacterData chd{CharacterKind::ChiW, w, {t0, t1}};
    for (const auto& lam : fundamentals(cd)) {
        const auto& e = twisted.entry(lam);
        AElem x = lift(coeff(e.m, e.extremal, 0));
        cplx chi = e.scale * character_eval(chd, x, &twisted);
        EXPECT_NEAR(std::abs(chi), 1.0, 1e-12);
        // v_w = e_0 (x) e_0 is an eigenvector
        EXPECT_LE(e.op.col(0).tail(e.op.rows() - 1).cwiseAbs().maxCoeff(), 1e-12);
        const auto& p = plain.entry(lam);
        EXPECT_NEAR(std::abs(p.scale * character_eval(chd, lift(coeff(p.m, p.extremal, 0)), &plain) - cplx(1)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(character_eval(chd, lift(coeff(e.m, 0, 0)), &twisted)), 0.0, 1e-12);
    }
    for (const WeylWord& w3 : {WeylWord{1, 0, 1}, WeylWord{0, 1}}) {
        std::vector<cplx> tw;
        for (std::size_t j = 0; j < w3.size(); ++j) tw.push_back(std::polar(1.0, 0.3 + 0.45 * static_cast<double>(j)));
        Rep rep = build_Nw(cd, w3, tw, 4, kQ0, fundamentals(cd));
        CharacterData c3{CharacterKind::ChiW, w3, tw};
        for (const auto& e : rep.registry) {
            cplx chi = e.scale * character_eval(c3, lift(coeff(e.m, e.extremal, 0)), &rep);
            EXPECT_NEAR(std::abs(chi - twist_oracle(cd, w3, tw, e.lam)), 0.0, 1e-12);
        }
    }
    EXPECT_NEAR(std::abs(character_eval(chd, AElem::unit(), &twisted) - cplx(1)), 0.0, 0.0);
    EXPECT_THROW(character_eval(chd, lift(coeff(twisted.registry[0].m, 0, 0, true)), &twisted), ValidationError);
    EXPECT_THROW(character_eval(chd, AElem::unit()), ValidationError);
}

TEST(RepMod, CharacterNInfinity) {
    auto cd = a1();
    auto m = share(build_module(cd, fundamental(cd, 1), 2));
    CharacterData chd{CharacterKind::NInfinity, {}, {}};
    EXPECT_EQ(character_eval(chd, AElem::unit()), cplx(1));
    EXPECT_EQ(character_eval(chd, lift(coeff(m, 0, 0))), cplx(0));
}
