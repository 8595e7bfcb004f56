#pragma once

#include "qkm/coeffalg.hpp"
#include "qkm/repmod.hpp"
#include "qkm/report.hpp"
#include "qkm/rootdata.hpp"
#include "qkm/uqmod.hpp"

#include <json.hpp>

#include <chrono>
#include <functional>
#include <string>
#include <vector>

namespace qkm {

struct SuiteConfig {
    Rational q0{1, 2};
    std::uint64_t seed = 11;
};

struct Criterion {
    int id = 0;
    std::string name;
    CheckReport report;
    double seconds = 0;
};

namespace suite {

inline CartanData a1() { return validate_cartan({{2, -2}, {-2, 2}}); }
inline CartanData a2() { return validate_cartan({{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}}); }

inline nlohmann::json serre_json(const SerreResult& s) {
    return {{"checked", s.checked}, {"skipped", s.skipped}, {"nonzero", s.nonzero}, {"worst", s.worst.str()}};
}

inline CheckReport serre(const SuiteConfig&) {
    CheckReport r{"serre"};
    nlohmann::json cases = nlohmann::json::array();
    for (auto [cd, depth] : {std::pair{a1(), 6}, std::pair{a2(), 4}}) {
        auto m = build_module(cd, fundamental(cd, 0), depth);
        nlohmann::json pairs = nlohmann::json::array();
        for (std::size_t i = 0; i < cd.l; ++i)
            for (std::size_t j = 0; j < cd.l; ++j) {
                if (i == j) continue;
                auto s = serre_defect(m, i, j);
                r.fail_if(s.nonzero != 0 || s.checked == 0);
                pairs.push_back({{"i", i}, {"j", j}, {"defect", serre_json(s)}});
            }
        auto c = cross_defect(m);
        r.fail_if(c.nonzero != 0 || c.checked == 0);
        cases.push_back({{"rank", cd.l}, {"depth", depth}, {"hw", to_json(m.hw)}, {"serre", pairs}, {"cross", serre_json(c)}});
    }
    r.witness = {{"cases", cases}, {"tolerance", "exact"}};
    return r;
}

inline CheckReport triangular(const SuiteConfig&) {
    auto cd = a1();
    auto m = share(build_module(cd, fundamental(cd, 0), 4));
    auto r = triangular_rank_check(m, m, 2, 4);
    auto control = triangular_rank_check(m, m, 2, 4, true);
    r.witness["duplicate_control_status"] = control.status;
    r.fail_if(control.pass());
    return r;
}

inline CheckReport commute(const SuiteConfig&) {
    auto cd = a1();
    auto m = share(build_module(cd, fundamental(cd, 0), 4));
    CheckReport r{"commute"};
    std::size_t tuples = 0, passed = 0, determined = 0, independent = 0, nonzero_corrections = 0;
    nlohmann::json failures = nlohmann::json::array();
    for (std::size_t lam = 0; lam < m->total; ++lam)
        for (std::size_t mu = 0; mu < m->total; ++mu)
            for (std::size_t nu = 0; nu < m->total; ++nu) {
                if (m->level_of(lam) > 2 || m->level_of(mu) > 2 || m->level_of(nu) > 2) continue;
                auto c = commutation_residual(m, m, lam, mu, nu, 4);
                ++tuples;
                if (c.report.pass()) ++passed;
                else failures.push_back({{"tuple", {lam, mu, nu}}, {"report", to_json(c.report)}});
                if (c.determined) ++determined;
                if (c.report.witness.value("extension_independent", false)) ++independent;
                if (!c.corrections.empty()) ++nonzero_corrections;
            }
    r.fail_if(tuples < 10 || passed != tuples || independent != tuples);
    r.witness = {{"tuples", tuples},          {"passed", passed},
                 {"determined", determined},  {"extension_independent", independent},
                 {"with_corrections", nonzero_corrections}, {"module_depth", 4},
                 {"weight_level_cap", 2},     {"maxlen", 4},
                 {"failures", failures},      {"tolerance", "exact residual rank 0"}};
    return r;
}

inline CheckReport resolve(const SuiteConfig&) {
    auto cd = a1();
    return resolution_report(share(build_module(cd, fundamental(cd, 0), 3)), 3);
}

inline CheckReport filtration(const SuiteConfig&) {
    auto cd = a1();
    auto m = share(build_module(cd, fundamental(cd, 0), 4));
    auto m1 = share(build_module(cd, fundamental(cd, 1), 4));
    CheckReport r{"filtration"};
    std::size_t total = 0, passed = 0, shifted_fail = 0;
    std::set<int> levels;
    for (const auto& mp : {m, m1})
        for (std::size_t xi = 0; xi < m->total; ++xi) {
            if (m->level_of(xi) > 2) continue;
            for (std::size_t xp = 0; xp < mp->total; ++xp) {
                if (mp->level_of(xp) > 2) continue;
                auto c = filtration_check(m, mp, xi, xp, 4);
                ++total;
                if (c.pass()) ++passed;
                levels.insert(m->level_of(xi));
                if (!filtration_check(m, mp, xi, xp, 4, 1).pass()) ++shifted_fail;
            }
        }
    r.fail_if(passed != total || levels != std::set<int>{0, 1, 2});
    r.witness = {{"pairs", total}, {"passed", passed}, {"levels", levels}, {"maxlen", 4}, {"shifted_exponent_failures", shifted_fail},
                 {"tolerance", "exact span membership"}};
    return r;
}

inline CheckReport aperp(const SuiteConfig&) {
    auto cd = a1();
    auto m0 = share(build_module(cd, fundamental(cd, 0), 4));
    auto m1 = share(build_module(cd, fundamental(cd, 1), 4));
    auto m01 = share(build_module(cd, weight_from_dom(cd, {1, 1}), 4));
    auto triv = share(build_module(cd, zero_weight(cd), 0));
    std::vector<ModulePtr> mods{m0, m1, m01};
    CheckReport r{"aperp"};
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& probe : {lift(plus_coeff(m1, 0)), lift(star(plus_coeff(m1, 0))), lift(plus_coeff(m1, 1)), lift(star(plus_coeff(m1, 1)))}) {
        auto c = a_perp_ideal_check(m0, probe, mods, 2, 4);
        r.fail_if(!c.pass());
        probes.push_back(to_json(c));
    }
    std::size_t perp_samples = 0, perp_nonzero = 0;
    for (const auto& m : {m0, m1, m01})
        for (std::size_t b = 0; b < m->total; ++b) {
            if (m->level_of(b) > 1) continue;
            for (bool st : {false, true}) {
                ++perp_samples;
                if (!n_infinity(lift(coeff(m, b, 0, st))).is_zero()) ++perp_nonzero;
            }
        }
    std::vector<AElem> a0{AElem::unit(), FieldElem(3) * AElem::unit(), lift(plus_coeff(triv, 0)), lift(star(plus_coeff(triv, 0))),
                          FieldElem::q_pow(2) * AElem::unit() + lift(plus_coeff(triv, 0))};
    std::size_t products = 0, nonmultiplicative = 0;
    for (const auto& x : a0)
        for (const auto& y : a0) {
            ++products;
            if (!(n_infinity(multiply(x, y)) - n_infinity(x) * n_infinity(y)).is_zero()) ++nonmultiplicative;
        }
    r.fail_if(perp_nonzero != 0 || nonmultiplicative != 0);
    r.witness = {{"probes", probes},
                 {"n_infinity_perp_samples", perp_samples},
                 {"n_infinity_perp_nonzero", perp_nonzero},
                 {"n_infinity_a0_products", products},
                 {"n_infinity_nonmultiplicative", nonmultiplicative},
                 {"level_cap", 2},
                 {"maxlen", 4},
                 {"tolerance", "exact"}};
    return r;
}

inline CheckReport elementary(const SuiteConfig& cfg) {
    CheckReport r{"elementary"};
    nlohmann::json cases = nlohmann::json::array();
    for (auto [d, tw] : {std::pair{1, cplx(1)}, std::pair{1, std::polar(1.0, 0.9)}, std::pair{2, cplx(1)}}) {
        auto c = elementary_report(0, d, 12, cfg.q0, tw);
        r.fail_if(!c.pass());
        cases.push_back(to_json(c));
    }
    r.witness = {{"cases", cases}, {"K", 12}, {"q0", cfg.q0.get_str()}, {"tolerance", 1e-12}, {"star_tolerance", 1e-9}};
    return r;
}

inline std::vector<Weight> rep_lambdas(const CartanData& cd, const WeylWord& w) {
    std::vector<Weight> out;
    for (std::size_t j = 0; j < cd.l; ++j) out.push_back(fundamental(cd, j));
    if (chain_depth(cd, w, rho(cd)) <= 6) out.push_back(rho(cd));
    return out;
}

inline CheckReport tensor(const SuiteConfig& cfg) {
    CheckReport r{"tensor"};
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& [cd, name] : {std::pair{a1(), "A1(1)"}, std::pair{a2(), "A2(1)"}})
        for (const WeylWord& w : {WeylWord{0, 1}, WeylWord{0, 1, 0}})
            for (int K : {6, 8}) {
                auto lams = rep_lambdas(cd, w);
                Rep rep = build_Nw(cd, w, {}, K, cfg.q0, lams);
                nlohmann::json per = nlohmann::json::array();
                std::size_t strict = 0;
                for (const auto& lam : lams) {
                    auto f = check_factorization(rep, lam);
                    auto sw = check_factorization(rep, lam, true);
                    auto sp = spectrum_report(rep, lam);
                    r.fail_if(!f.pass() || !sp.pass());
                    if (sp.witness["strict_chain"].get<bool>()) ++strict;
                    per.push_back({{"lambda", to_json(lam)},
                                   {"factorization", f.witness["max_deviation"]},
                                   {"factorization_status", f.status},
                                   {"swapped_control_status", sw.status},
                                   {"spectra", sp.witness},
                                   {"spectra_status", sp.status}});
                }
                auto wd = weight_decomposition(rep);
                auto hw = check_highest_weight(rep);
                double comm = commutator_defect(rep);
                r.fail_if(!wd.report.pass() || !hw.pass() || !(comm <= 1e-10) || strict == 0);
                cases.push_back({{"algebra", name},
                                 {"word", w},
                                 {"K", K},
                                 {"dimension", rep.dim()},
                                 {"per_lambda", per},
                                 {"strict_lambdas", strict},
                                 {"weights", wd.report.witness},
                                 {"weights_status", wd.report.status},
                                 {"highest_weight", hw.witness},
                                 {"commutator_defect", comm}});
            }
    r.witness = {{"cases", cases},
                 {"q0", cfg.q0.get_str()},
                 {"factorization_tolerance", 1e-10},
                 {"modulus_tolerance", 1e-9},
                 {"label_tolerance", 1e-8},
                 {"commutator_tolerance", 1e-10}};
    return r;
}

inline CheckReport annihilator(const SuiteConfig& cfg) {
    auto cd = a1();
    auto m = share(build_module(cd, fundamental(cd, 0), 4));
    CheckReport r{"annihilator"};
    nlohmann::json cases = nlohmann::json::array();
    for (const WeylWord& w : {WeylWord{}, WeylWord{0}, WeylWord{0, 1}}) {
        Rep rep = build_Nw(cd, w, {}, 6, cfg.q0);
        auto c = check_annihilator(rep, m, 4);
        r.fail_if(!c.pass());
        cases.push_back(to_json(c));
    }
    r.witness = {{"cases", cases}, {"depth", 4}, {"K", 6}, {"tolerance", 1e-10}};
    return r;
}

inline CheckReport words(const SuiteConfig& cfg) {
    auto cd = a2();
    auto lams = rep_lambdas(cd, {0, 1, 0});
    auto r = check_reduced_word_independence(cd, {0, 1, 0}, {1, 0, 1}, lams, 6, cfg.q0);
    bool rejected = false;
    try {
        check_reduced_word_independence(cd, {0, 1}, {1, 0}, lams, 6, cfg.q0);
    } catch (const ValidationError&) {
        rejected = true;
    }
    r.witness["nonequivalent_words_rejected"] = rejected;
    r.fail_if(!rejected);
    return r;
}

inline CheckReport multiplicities(const SuiteConfig& cfg) {
    auto cd = a1();
    CheckReport r{"multiplicities"};
    nlohmann::json cases = nlohmann::json::array();
    std::mt19937_64 rng(cfg.seed);
    for (const auto& hw : {fundamental(cd, 0), fundamental(cd, 1), rho(cd)}) {
        auto m = build_module(cd, hw, 4);
        Rational q0 = random_q0(rng);
        auto a = qkm::multiplicities(m), b = verma_multiplicities(cd, hw, 4, q0);
        r.fail_if(a != b);
        nlohmann::json table = nlohmann::json::array();
        for (const auto& [beta, n] : a) table.push_back({{"beta", beta}, {"mult", n}, {"oracle", b.count(beta) ? b.at(beta) : 0}});
        cases.push_back({{"hw", to_json(hw)}, {"oracle_q0", q0.get_str()}, {"agree", a == b}, {"table", table}});
    }
    r.witness = {{"cases", cases}, {"depth", 4}, {"tolerance", "exact"}};
    return r;
}

inline CheckReport pairing(const SuiteConfig&) {
    auto cd = a1();
    CheckReport r{"weight-pairing"};
    std::vector<TruncModule> mods;
    for (const auto& hw : {fundamental(cd, 0), fundamental(cd, 1), rho(cd), weight_from_dom(cd, {2, 0})}) mods.push_back(build_module(cd, hw, 4));
    std::size_t pairs = 0, violations = 0, equalities = 0;
    Rational worst_gap;
    bool first = true;
    for (const auto& m1 : mods)
        for (const auto& m2 : mods) {
            Rational top = bilinear(cd, m1.hw, m2.hw);
            for (const auto& s1 : m1.spaces)
                for (const auto& s2 : m2.spaces) {
                    Weight l1 = m1.hw, l2 = m2.hw;
                    l1.beta = s1.beta;
                    l2.beta = s2.beta;
                    Rational gap = top - bilinear(cd, l1, l2);
                    ++pairs;
                    if (gap < 0) ++violations;
                    if (gap == 0) ++equalities;
                    if (first || gap < worst_gap) worst_gap = gap;
                    first = false;
                }
        }
    r.fail_if(violations != 0 || pairs == 0);
    r.witness = {{"pairs", pairs}, {"violations", violations}, {"equalities", equalities}, {"min_gap", worst_gap.get_str()}, {"depth", 4},
                 {"tolerance", "exact rational comparison"}};
    return r;
}

}  // namespace suite

inline std::vector<std::pair<std::string, std::function<CheckReport(const SuiteConfig&)>>> acceptance_criteria() {
    return {{"serre", suite::serre},           {"triangular", suite::triangular}, {"commute", suite::commute},
            {"resolve", suite::resolve},       {"filtration", suite::filtration}, {"aperp", suite::aperp},
            {"elementary", suite::elementary}, {"tensor", suite::tensor},         {"annihilator", suite::annihilator},
            {"words", suite::words},           {"multiplicities", suite::multiplicities}, {"weight-pairing", suite::pairing}};
}

inline std::vector<Criterion> run_acceptance(const SuiteConfig& cfg, const std::function<void(const Criterion&)>& on_done = {}) {
    std::vector<Criterion> out;
    int id = 0;
    for (const auto& [name, fn] : acceptance_criteria()) {
        Criterion c{++id, name, CheckReport{name}, 0};
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.report = fn(cfg);
        } catch (const std::exception& e) {
            c.report.status = "FAIL";
            c.report.witness = {{"error", e.what()}};
        }
        c.report.check = name;
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_done) on_done(c);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace qkm
