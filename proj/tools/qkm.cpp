#include "qkm/coeffalg.hpp"
#include "qkm/repmod.hpp"
#include "qkm/report.hpp"
#include "qkm/rootdata.hpp"
#include "qkm/suite.hpp"
#include "qkm/uqmod.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <gmp.h>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace qkm;
using nlohmann::json;

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string cartan_path;
    std::string cartan_inline;
    std::string module_path, module2_path, rep_path;
    std::string hw, lambda_list, word, word1, word2, string_complete, twists;
    std::string tuple;
    std::string q = "1/2";
    std::size_t maxlen = 4;
    int depth = 4, dual_depth = 2, level = 2, K = 8, margin = 2, node = -1, shift = 0, level_cap = 2, probe_index = 0;
    bool probe_star = false;
    std::string probe_module;
    std::vector<std::string> extra_modules;
    std::uint64_t seed = 11;
    std::string out, report;
    std::string threads_env;

    json to_json() const {
        return {{"command", command},
                {"cartan_path", cartan_path},
                {"cartan_inline", cartan_inline},
                {"module", module_path},
                {"module2", module2_path},
                {"rep", rep_path},
                {"hw", hw},
                {"lambda", lambda_list},
                {"word", word},
                {"word1", word1},
                {"word2", word2},
                {"i", node},
                {"string_complete", string_complete},
                {"twist_angles", twists},
                {"tuple", tuple},
                {"q_mode", "exact Q(q); numerics at rational q0"},
                {"q0", q},
                {"maxlen", maxlen},
                {"depth", depth},
                {"dual_depth", dual_depth},
                {"level", level},
                {"level_cap", level_cap},
                {"shift", shift},
                {"probe_module", probe_module},
                {"probe_index", probe_index},
                {"probe_star", probe_star},
                {"modules", extra_modules},
                {"K", K},
                {"margin", margin},
                {"seed", seed},
                {"out", out},
                {"report", report},
                {"QKM_THREADS", threads_env},
                {"threads_used", 1}};
    }
};

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<int> int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = strip(tok);
        if (tok.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InputError("not an integer list: " + s);
        }
    }
    return out;
}

WeylWord word_list(const std::string& s) {
    WeylWord w;
    for (int x : int_list(s)) {
        if (x < 0) throw InputError("negative node in word " + s);
        w.push_back(static_cast<std::size_t>(x));
    }
    return w;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& j) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << "\n";
}

CartanData load_cartan(const RunConfig& cfg, bool default_a1 = false) {
    if (!cfg.cartan_inline.empty()) {
        try {
            return validate_cartan(json::parse(cfg.cartan_inline).get<IntMat>());
        } catch (const json::exception& e) {
            throw InputError(std::string("bad --a matrix: ") + e.what());
        }
    }
    if (!cfg.cartan_path.empty()) {
        json j = read_json(cfg.cartan_path);
        if (j.is_array()) return validate_cartan(j.get<IntMat>());
        return cartan_from_json(j);
    }
    if (default_a1) return suite::a1();
    throw InputError("give --cartan FILE or --a MATRIX");
}

Weight dom_weight(const CartanData& cd, const std::string& s) {
    auto dom = int_list(s);
    if (dom.size() != cd.l) throw InputError("weight " + s + " has the wrong rank");
    return weight_from_dom(cd, dom);
}

std::vector<Weight> lambda_list(const CartanData& cd, const std::string& s) {
    std::vector<Weight> out;
    if (s.empty()) {
        for (std::size_t j = 0; j < cd.l; ++j) out.push_back(fundamental(cd, j));
        return out;
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';')) out.push_back(dom_weight(cd, tok));
    return out;
}

ModulePtr module_arg(const RunConfig& cfg, const std::string& path) {
    if (!path.empty()) {
        try {
            return share(module_from_json(read_json(path)));
        } catch (const json::exception& e) {
            throw InputError(path + ": " + e.what());
        }
    }
    if (cfg.hw.empty()) throw InputError("give --module FILE or --cartan with --hw and --depth");
    CartanData cd = load_cartan(cfg);
    std::vector<std::size_t> sc;
    for (int x : int_list(cfg.string_complete)) sc.push_back(static_cast<std::size_t>(x));
    return share(build_module(cd, dom_weight(cd, cfg.hw), cfg.depth, sc));
}

Rational q0_arg(const RunConfig& cfg) {
    Rational q = parse_rational(cfg.q);
    check_q0(q);
    return q;
}

Rep rep_arg(const RunConfig& cfg) {
    if (!cfg.rep_path.empty()) return rep_from_json(read_json(cfg.rep_path));
    CartanData cd = load_cartan(cfg, true);
    if (cfg.word.empty() && cfg.node < 0) throw InputError("give --rep FILE or --word");
    WeylWord w = word_list(cfg.word);
    if (cfg.node >= 0) w.insert(w.begin(), static_cast<std::size_t>(cfg.node));
    std::vector<cplx> twists;
    if (!cfg.twists.empty()) {
        std::stringstream ss(cfg.twists);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                twists.push_back(std::polar(1.0, std::stod(tok)));
            } catch (const std::exception&) {
                throw InputError("bad twist angle " + tok);
            }
        }
    }
    return build_Nw(cd, w, twists, cfg.K, q0_arg(cfg), lambda_list(cd, cfg.lambda_list), cfg.margin);
}

std::string iso_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json versions() {
    return {{"qkm", "0.1.0"},
            {"gmp", gmp_version},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION}};
}

std::string summary_line(const CheckReport& r) {
    std::string s = r.status + " " + r.check;
    for (const char* k : {"max_deviation", "max_bulk_norm", "rank", "tuples", "pairs", "words", "unit_modulus_count"})
        if (r.witness.contains(k)) s += std::string(" ") + k + "=" + r.witness[k].dump();
    return s;
}

int finish(const RunConfig& cfg, ReportBundle& b, const std::string& started) {
    b.config = cfg.to_json();
    b.versions = versions();
    b.timestamps["started"] = started;
    b.timestamps["finished"] = iso_now();
    for (const auto& [k, r] : b.checks) std::cout << summary_line(r) << "\n";
    write_json(cfg.report, to_json(b));
    return b.any_fail() ? 1 : 0;
}

CheckReport serre_report(const TruncModule& m) {
    CheckReport r{"serre"};
    json pairs = json::array();
    for (std::size_t i = 0; i < m.cd.l; ++i)
        for (std::size_t j = 0; j < m.cd.l; ++j) {
            if (i == j) continue;
            auto s = serre_defect(m, i, j);
            r.fail_if(s.nonzero != 0);
            pairs.push_back({{"i", i}, {"j", j}, {"defect", suite::serre_json(s)}});
        }
    auto c = cross_defect(m);
    r.fail_if(c.nonzero != 0);
    r.witness = {{"hw", to_json(m.hw)}, {"depth", m.depth}, {"serre", pairs}, {"cross", suite::serre_json(c)}, {"tolerance", "exact"}};
    return r;
}

int run_command(const RunConfig& cfg) {
    const std::string started = iso_now();
    ReportBundle b;
    const std::string& c = cfg.command;

    if (c == "cartan validate") {
        CartanData cd = load_cartan(cfg);
        std::cout << describe(cd) << "\n";
        write_json(cfg.out, to_json(cd));
        return 0;
    }
    if (c == "module build") {
        auto m = module_arg(cfg, "");
        std::cout << "module " << to_json(m->hw).dump() << " depth " << m->depth << ": " << m->total << " basis vectors in " << m->spaces.size()
                  << " weight spaces\n";
        write_json(cfg.out, to_json(*m));
        return 0;
    }
    if (c == "verify serre") {
        b.add(serre_report(*module_arg(cfg, cfg.module_path)));
        return finish(cfg, b, started);
    }
    if (c == "verify triangular") {
        auto m = module_arg(cfg, cfg.module_path);
        auto mp = cfg.module2_path.empty() ? m : module_arg(cfg, cfg.module2_path);
        b.add(triangular_rank_check(m, mp, cfg.dual_depth, cfg.maxlen));
        return finish(cfg, b, started);
    }
    if (c == "verify commute") {
        auto m = module_arg(cfg, cfg.module_path);
        auto mp = cfg.module2_path.empty() ? m : module_arg(cfg, cfg.module2_path);
        if (!cfg.tuple.empty()) {
            auto t = int_list(cfg.tuple);
            if (t.size() != 3) throw InputError("--tuple needs lambda,mu,nu basis indices");
            for (int x : t)
                if (x < 0 || static_cast<std::size_t>(x) >= std::max(m->total, mp->total)) throw InputError("tuple index out of range");
            b.add(commutation_residual(m, mp, t[0], t[1], t[2], cfg.maxlen).report);
        } else {
            for (std::size_t lam = 0; lam < mp->total; ++lam)
                for (std::size_t mu = 0; mu < m->total; ++mu)
                    for (std::size_t nu = 0; nu < m->total; ++nu) {
                        if (mp->level_of(lam) > cfg.level || m->level_of(mu) > cfg.level || m->level_of(nu) > cfg.level) continue;
                        auto res = commutation_residual(m, mp, lam, mu, nu, cfg.maxlen).report;
                        res.witness["tuple"] = {lam, mu, nu};
                        b.add(res);
                    }
        }
        return finish(cfg, b, started);
    }
    if (c == "verify resolve") {
        b.add(resolution_report(module_arg(cfg, cfg.module_path), cfg.maxlen));
        return finish(cfg, b, started);
    }
    if (c == "verify filtration") {
        auto m = module_arg(cfg, cfg.module_path);
        auto mp = cfg.module2_path.empty() ? m : module_arg(cfg, cfg.module2_path);
        for (std::size_t xi = 0; xi < m->total; ++xi) {
            if (m->level_of(xi) > cfg.level) continue;
            for (std::size_t xp = 0; xp < mp->total; ++xp)
                if (mp->level_of(xp) <= cfg.level) b.add(filtration_check(m, mp, xi, xp, cfg.maxlen, cfg.shift));
        }
        return finish(cfg, b, started);
    }
    if (c == "verify aperp") {
        auto m = module_arg(cfg, cfg.module_path);
        std::vector<ModulePtr> mods{m};
        for (const auto& p : cfg.extra_modules) mods.push_back(module_arg(cfg, p));
        auto pm = cfg.probe_module.empty() ? m : module_arg(cfg, cfg.probe_module);
        if (static_cast<std::size_t>(cfg.probe_index) >= pm->total) throw InputError("probe index out of range");
        auto probe = lift(coeff(pm, static_cast<std::size_t>(cfg.probe_index), 0, cfg.probe_star));
        b.add(a_perp_ideal_check(m, probe, mods, cfg.level_cap, cfg.maxlen));
        return finish(cfg, b, started);
    }
    if (c == "rep build") {
        Rep rep = rep_arg(cfg);
        if (!rep.warning.empty()) std::cerr << "warning: " << rep.warning << "\n";
        std::cout << "N(w) for word " << json(rep.word).dump() << ": dimension " << rep.dim() << ", " << rep.registry.size() << " weights\n";
        write_json(cfg.out, to_json(rep));
        return 0;
    }
    if (c == "rep spectra") {
        Rep rep = rep_arg(cfg);
        for (const auto& e : rep.registry) b.add(spectrum_report(rep, e.lam));
        bool all_fund = true;
        for (std::size_t j = 0; j < rep.cd.l; ++j) {
            bool found = false;
            for (const auto& e : rep.registry) found = found || e.lam == fundamental(rep.cd, j);
            all_fund = all_fund && found;
        }
        if (all_fund) b.add(weight_decomposition(rep).report);
        return finish(cfg, b, started);
    }
    if (c == "rep verify-tensor") {
        Rep rep = rep_arg(cfg);
        if (cfg.node >= 0 && !cfg.rep_path.empty() && rep.word.front() != static_cast<std::size_t>(cfg.node))
            throw InputError("--i differs from the first letter of the stored word");
        for (const auto& e : rep.registry) b.add(check_factorization(rep, e.lam));
        return finish(cfg, b, started);
    }
    if (c == "rep verify-annihilator") {
        Rep rep = rep_arg(cfg);
        auto lams = lambda_list(rep.cd, cfg.lambda_list);
        auto m = share(build_module(rep.cd, cfg.lambda_list.empty() ? fundamental(rep.cd, 0) : lams.front(), cfg.depth));
        b.add(check_annihilator(rep, m, cfg.depth));
        return finish(cfg, b, started);
    }
    if (c == "rep verify-unitary") {
        Rep rep = rep_arg(cfg);
        b.add(check_unitarity(rep, unitarity_sample(rep)));
        b.add(check_highest_weight(rep));
        return finish(cfg, b, started);
    }
    if (c == "rep verify-words") {
        CartanData cd = load_cartan(cfg, true);
        b.add(check_reduced_word_independence(cd, word_list(cfg.word1), word_list(cfg.word2), lambda_list(cd, cfg.lambda_list), cfg.K, q0_arg(cfg),
                                              cfg.margin));
        return finish(cfg, b, started);
    }
    if (c == "suite acceptance") {
        SuiteConfig sc{q0_arg(cfg), cfg.seed};
        json seconds = json::object();
        run_acceptance(sc, [&](const Criterion& cr) {
            std::printf("%s [%2d] %s (%.2fs)\n", cr.report.status.c_str(), cr.id, cr.name.c_str(), cr.seconds);
            std::fflush(stdout);
            b.add(cr.report);
            seconds[cr.name] = cr.seconds;
        });
        b.config = cfg.to_json();
        b.versions = versions();
        b.timestamps = {{"started", started}, {"finished", iso_now()}, {"seconds", seconds}};
        write_json(cfg.report, to_json(b));
        return b.any_fail() ? 1 : 0;
    }
    throw InputError("unknown command " + c);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantized function algebras of affine Kac-Moody algebras"};
    app.require_subcommand(1);
    RunConfig cfg;
    if (const char* t = std::getenv("QKM_THREADS")) cfg.threads_env = t;

    auto cartan_opts = [&](CLI::App* s) {
        s->add_option("--cartan", cfg.cartan_path, "Cartan data JSON file (matrix or object)");
        s->add_option("--a", cfg.cartan_inline, "Cartan matrix inline, e.g. \"[[2,-2],[-2,2]]\"");
    };
    auto module_opts = [&](CLI::App* s) {
        cartan_opts(s);
        s->add_option("--module", cfg.module_path, "module JSON from `module build`");
        s->add_option("--hw", cfg.hw, "highest weight as Dynkin labels, e.g. 1,0");
        s->add_option("--depth", cfg.depth, "truncation depth");
        s->add_option("--string-complete", cfg.string_complete, "nodes whose strings are completed, e.g. 0,1");
        s->add_option("--report", cfg.report, "report bundle output path");
    };
    auto rep_opts = [&](CLI::App* s) {
        cartan_opts(s);
        s->add_option("--rep", cfg.rep_path, "rep JSON from `rep build`");
        s->add_option("--word", cfg.word, "reduced word, e.g. 0,1,0");
        s->add_option("--i", cfg.node, "prepend node i to the word (the s_i w of the tensor step)");
        s->add_option("--K", cfg.K, "states per elementary factor");
        s->add_option("--q", cfg.q, "numeric point q0 in (0,1), rational");
        s->add_option("--lambda", cfg.lambda_list, "dominant weights separated by ';', e.g. \"1,0;0,1\" (default: fundamentals)");
        s->add_option("--twist-angles", cfg.twists, "character twist angles in radians, one per factor");
        s->add_option("--margin", cfg.margin, "boundary margin excluded from bulk checks");
        s->add_option("--report", cfg.report, "report bundle output path");
    };

    auto* cartan = app.add_subcommand("cartan", "Cartan data");
    cartan->require_subcommand(1);
    auto* cv = cartan->add_subcommand("validate", "validate a generalized Cartan matrix and print its summary");
    cartan_opts(cv);
    cv->add_option("--out", cfg.out, "write the validated Cartan data");

    auto* module = app.add_subcommand("module", "truncated highest-weight modules");
    module->require_subcommand(1);
    auto* mb = module->add_subcommand("build", "build L(Lambda) to a depth");
    cartan_opts(mb);
    mb->add_option("--hw", cfg.hw, "highest weight as Dynkin labels")->required();
    mb->add_option("--depth", cfg.depth, "truncation depth");
    mb->add_option("--string-complete", cfg.string_complete, "nodes whose strings are completed");
    mb->add_option("--out", cfg.out, "module JSON output path");

    auto* verify = app.add_subcommand("verify", "exact identities in the coefficient algebra");
    verify->require_subcommand(1);
    for (const char* name : {"serre", "triangular", "commute", "resolve", "filtration", "aperp"}) {
        auto* s = verify->add_subcommand(name, std::string("verify ") + name);
        module_opts(s);
        s->add_option("--maxlen", cfg.maxlen, "longest U word used for observational equality");
        s->add_option("--seed", cfg.seed, "seed for sampled choices");
        if (std::string(name) != "serre" && std::string(name) != "resolve") s->add_option("--module2", cfg.module2_path, "second module (primed weights)");
        if (std::string(name) == "triangular") s->add_option("--dual-depth", cfg.dual_depth, "deepest dual vector in the products");
        if (std::string(name) == "commute") {
            s->add_option("--tuple", cfg.tuple, "basis indices lambda,mu,nu (default: all up to --level)");
            s->add_option("--level", cfg.level, "deepest weight level when enumerating tuples");
        }
        if (std::string(name) == "filtration") {
            s->add_option("--level", cfg.level, "deepest level of xi and xi'");
            s->add_option("--shift", cfg.shift, "exponent shift (nonzero values are negative controls)");
        }
        if (std::string(name) == "aperp") {
            s->add_option("--probe-module", cfg.probe_module, "module of the probe coefficient");
            s->add_option("--probe-index", cfg.probe_index, "dual basis index of the probe");
            s->add_flag("--probe-star", cfg.probe_star, "use the starred probe");
            s->add_option("--modules", cfg.extra_modules, "modules for the other highest weights in the normal form");
            s->add_option("--level-cap", cfg.level_cap, "deepest dual in normal-form terms");
        }
    }

    auto* rep = app.add_subcommand("rep", "irreducible modules N(w)");
    rep->require_subcommand(1);
    for (const char* name : {"build", "spectra", "verify-tensor", "verify-annihilator", "verify-unitary"}) {
        auto* s = rep->add_subcommand(name, std::string("rep ") + name);
        rep_opts(s);
        if (std::string(name) == "build") s->add_option("--out", cfg.out, "rep JSON output path");
        if (std::string(name) == "verify-annihilator") s->add_option("--depth", cfg.depth, "depth of L(Lambda) and of the tested duals");
    }
    auto* rw = rep->add_subcommand("verify-words", "compare spectra of two reduced words");
    cartan_opts(rw);
    rw->add_option("--word1", cfg.word1, "first reduced word")->required();
    rw->add_option("--word2", cfg.word2, "second reduced word")->required();
    rw->add_option("--K", cfg.K, "states per elementary factor");
    rw->add_option("--q", cfg.q, "numeric point q0");
    rw->add_option("--lambda", cfg.lambda_list, "dominant weights separated by ';'");
    rw->add_option("--margin", cfg.margin, "boundary margin");
    rw->add_option("--report", cfg.report, "report bundle output path");

    auto* suite_cmd = app.add_subcommand("suite", "acceptance suite");
    suite_cmd->require_subcommand(1);
    auto* acc = suite_cmd->add_subcommand("acceptance", "run every acceptance criterion");
    acc->add_option("--q", cfg.q, "numeric point q0");
    acc->add_option("--seed", cfg.seed, "seed for the multiplicity oracle");
    acc->add_option("--report", cfg.report, "report bundle output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    for (auto* top : app.get_subcommands())
        for (auto* sub : top->get_subcommands()) cfg.command = top->get_name() + " " + sub->get_name();

    try {
        return run_command(cfg);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
    } catch (const ValidationError& e) {
        std::cerr << "input error: " << e.what() << "\n";
    } catch (const FieldError& e) {
        std::cerr << "input error: " << e.what() << "\n";
    } catch (const TruncationError& e) {
        std::cerr << "truncation error: " << e.what() << "\n";
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
    } catch (const RepError& e) {
        std::cerr << "FAIL: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
