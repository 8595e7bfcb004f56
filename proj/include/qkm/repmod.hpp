#pragma once

#include "qkm/coeffalg.hpp"
#include "qkm/linalg.hpp"
#include "qkm/qfield.hpp"
#include "qkm/report.hpp"
#include "qkm/rootdata.hpp"
#include "qkm/uqmod.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace qkm {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

struct RepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// C_q[SL2] for U_{q^d}(sl2): the rank-one datum with symmetrizer d and its spin-1/2 module.
// Generators t11, t12, t21, t22 = C_{l_a, v_b} with v_1 the highest vector, v_2 = F v_1.
struct Sl2Data {
    int d = 1;
    CartanData cd;
    ModulePtr spin;

    MatrixCoeff gen(int k) const { return coeff(spin, static_cast<std::size_t>(k / 2), static_cast<std::size_t>(k % 2)); }
};

inline Sl2Data make_sl2(int d) {
    if (d < 1) throw ValidationError("symmetrizer must be positive");
    Sl2Data s;
    s.d = d;
    s.cd = validate_cartan({{2}});
    s.cd.d = {d};
    s.cd.ext_gram = {{Rational(d, 2)}};
    s.spin = share(build_module(s.cd, fundamental(s.cd, 0), 1));
    return s;
}

// Linear relations among 1 and the sixteen ordered products t_a t_b, found as the left kernel of
// their evaluation matrix on rank-one words. Entry 0 is the unit, entry 1 + 4a + b the product.
struct Sl2Relations {
    int d = 1;
    std::size_t rank = 0;
    std::vector<std::vector<FieldElem>> rels;
    std::array<std::array<FieldElem, 4>, 4> star;  // t_a^* = sum_b star[a][b] t_b
};

inline Sl2Relations derive_sl2_relations(const Sl2Data& s, std::size_t maxlen = 4) {
    WordIndex wi(1, maxlen);
    std::vector<EvalRow> rows{eval_row(AElem::unit(), wi)};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) rows.push_back(eval_row(multiply(s.gen(a), s.gen(b)), wi));
    auto em = eval_matrix(rows);
    auto sb = span_basis(em.rows);
    Sl2Relations out;
    out.d = s.d;
    out.rank = sb.rows.size();
    std::vector<bool> in(rows.size(), false);
    for (auto r : sb.rows) in[r] = true;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (in[r]) continue;
        auto x = express_in_basis(em.rows, sb, em.rows[r]);
        std::vector<FieldElem> rel(rows.size());
        rel[r] = FieldElem(1);
        for (std::size_t k = 0; k < sb.rows.size(); ++k) rel[sb.rows[k]] -= x[k];
        out.rels.push_back(std::move(rel));
    }
    std::vector<EvalRow> lin;
    for (int b = 0; b < 4; ++b) lin.push_back(eval_row(lift(s.gen(b)), wi));
    for (int a = 0; a < 4; ++a) {
        auto sc = span_check(lin, eval_row(lift(star(s.gen(a))), wi));
        if (!sc.member) throw RepError("star of a spin-1/2 coefficient is not linear in the generators");
        for (int b = 0; b < 4; ++b) out.star[a][b] = sc.coeffs[b];
    }
    return out;
}

namespace detail {

inline const Sl2Data& sl2_cached(int d) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Sl2Data>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& p = cache[d];
    if (!p) p = std::make_unique<Sl2Data>(make_sl2(d));
    return *p;
}

inline const Sl2Relations& relations_cached(int d) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Sl2Relations>> cache;
    const Sl2Data& s = sl2_cached(d);
    std::lock_guard<std::mutex> lock(mu);
    auto& p = cache[d];
    if (!p) p = std::make_unique<Sl2Relations>(derive_sl2_relations(s));
    return *p;
}

inline cplx num(const FieldElem& x, const Rational& q0) { return x.is_zero() ? cplx(0) : cplx(eval_real(x, q0)); }

}  // namespace detail

// The irreducible *-representation of C_{q_i}[SL2] on l^2 with basis e_k, q_i = q0^{d_i}:
// t11 e_k = sqrt(1 - q^2k) e_{k-1}, t22 e_k = sqrt(1 - q^{2k+2}) e_{k+1},
// t21 e_k = q^{1/2} chi q^k e_k, t12 e_k = -q^{1/2} conj(chi) q^k e_k.
struct ElementaryRep {
    std::size_t node = 0;
    int d = 1;
    int K = 0;
    Rational q0;
    cplx twist{1, 0};

    double q() const { return std::pow(q0.get_d(), d); }

    CMat gen(int k, int n) const {
        const double qi = q();
        CMat m = CMat::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            double p = std::pow(qi, j);
            switch (k) {
                case 0:
                    if (j > 0) m(j - 1, j) = std::sqrt(1 - p * p);
                    break;
                case 3:
                    if (j + 1 < n) m(j + 1, j) = std::sqrt(1 - p * p * qi * qi);
                    break;
                case 2:
                    m(j, j) = std::sqrt(qi) * twist * p;
                    break;
                case 1:
                    m(j, j) = -std::sqrt(qi) * std::conj(twist) * p;
                    break;
                default:
                    throw RepError("generator index out of range");
            }
        }
        return m;
    }
    CMat gen(int k) const { return gen(k, K); }
};

struct ElementaryValidation {
    double relation_defect = 0;  // worst interior entry over all relations
    double star_defect = 0;
    std::size_t relations = 0;
};

// Interior block: rows and columns below K - 1, where products of two ladder operators are exact.
inline ElementaryValidation validate_elementary(const ElementaryRep& e) {
    const auto& rel = detail::relations_cached(e.d);
    ElementaryValidation v;
    v.relations = rel.rels.size();
    const int n = e.K - 1;
    std::array<CMat, 4> g;
    for (int k = 0; k < 4; ++k) g[static_cast<std::size_t>(k)] = e.gen(k);
    for (const auto& r : rel.rels) {
        CMat s = detail::num(r[0], e.q0) * CMat::Identity(e.K, e.K);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const auto& c = r[static_cast<std::size_t>(1 + 4 * a + b)];
                if (!c.is_zero()) s += detail::num(c, e.q0) * (g[static_cast<std::size_t>(a)] * g[static_cast<std::size_t>(b)]);
            }
        v.relation_defect = std::max(v.relation_defect, s.topLeftCorner(n, n).cwiseAbs().maxCoeff());
    }
    for (int a = 0; a < 4; ++a) {
        CMat s = CMat::Zero(e.K, e.K);
        for (int b = 0; b < 4; ++b) s += detail::num(rel.star[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)], e.q0) * g[static_cast<std::size_t>(b)];
        CMat diff = g[static_cast<std::size_t>(a)].adjoint() - s;
        v.star_defect = std::max(v.star_defect, diff.topLeftCorner(n, n).cwiseAbs().maxCoeff());
    }
    return v;
}

inline ElementaryRep elementary_rep(std::size_t node, int d, int K, const Rational& q0, cplx twist = {1, 0}, double tol = 1e-12,
                                    double star_tol = 1e-9) {
    if (K < 2) throw ValidationError("K must be at least 2");
    if (!(q0 > 0 && q0 < 1)) throw ValidationError("q0 must lie in (0,1)");
    if (std::abs(std::abs(twist) - 1) > 1e-12) throw ValidationError("twist must have unit modulus");
    ElementaryRep e{node, d, K, q0, twist};
    auto v = validate_elementary(e);
    if (v.relation_defect > tol) throw RepError("elementary generators violate a C_q[SL2] relation by " + std::to_string(v.relation_defect));
    if (v.star_defect > star_tol) throw RepError("elementary generators are not *-compatible, defect " + std::to_string(v.star_defect));
    return e;
}

// Ordered monomials t11^r t12^s t21^t (when L + R >= 0) or t12^s t21^t t22^p, one per
// (L, R, n) with bi-weight (L, R) and degree n; the quantum determinant removes the rest.
using Monomial = std::array<int, 4>;

inline Monomial sl2_monomial(int L, int R, int n) {
    if ((n + L) % 2 != 0 || (n + R) % 2 != 0 || std::abs(L) > n || std::abs(R) > n) throw ValidationError("no monomial of this bi-weight and degree");
    if (L + R >= 0) return {(L + R) / 2, (n - R) / 2, (n - L) / 2, 0};
    return {0, (n + L) / 2, (n + R) / 2, -(L + R) / 2};
}

inline AElem monomial_elem(const Sl2Data& s, const Monomial& mono) {
    AElem x = AElem::unit();
    for (int k = 0; k < 4; ++k)
        for (int e = 0; e < mono[static_cast<std::size_t>(k)]; ++e) x = multiply(x, lift(s.gen(k)));
    return x;
}

struct Sl2Poly {
    int d = 1;
    std::vector<std::pair<Monomial, FieldElem>> terms;
};

inline nlohmann::json to_json(const Sl2Poly& p) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& [m, c] : p.terms) t.push_back({{"exponents", m}, {"coeff", c.str()}});
    return {{"d", p.d}, {"terms", t}};
}

namespace detail {

inline UWord rank_one_word(const UWord& w) {
    UWord out = w;
    for (auto& x : out) x.i = 0;
    return out;
}

// basis vectors of the alpha_i string through basis vector g; throws when the string is cut
inline std::vector<std::size_t> string_through(const TruncModule& m, std::size_t g, std::size_t i) {
    Beta top = m.beta_of(g);
    while (top[i] > 0) {
        Beta up = top;
        --up[i];
        if (!m.mult(up)) break;
        top = up;
    }
    std::vector<std::size_t> out;
    for (Beta b = top;; ++b[i]) {
        const WeightSpace* s = m.space(b);
        if (!s) break;
        for (std::size_t x = 0; x < s->dim; ++x) {
            if (m.f_boundary[i][s->offset + x])
                throw TruncationError("alpha_" + std::to_string(i) + " string through level " + std::to_string(detail::level(m.beta_of(g))) +
                                      " is cut by the truncation; rebuild with depth > " + std::to_string(m.depth) +
                                      " and string completion for node " + std::to_string(i));
            out.push_back(s->offset + x);
        }
    }
    return out;
}

}  // namespace detail

// Restriction of C = C_{l,v} (l, v basis vectors) to U_i, written in the monomial basis of
// C_{q_i}[SL2]. Coefficients are matched on the words F^a E^b (E^a F^b when starred), which only
// raise the vector before lowering it.
inline Sl2Poly psi_star_expand(const ModulePtr& mp, std::size_t l, std::size_t v, bool starred, std::size_t i, int degree_cap = 8) {
    const TruncModule& m = *mp;
    const CartanData& cd = m.cd;
    if (i >= cd.l) throw ValidationError("node index out of range");
    Sl2Poly out;
    out.d = cd.d[i];
    Beta diff = detail::beta_diff(m.beta_of(v), m.beta_of(l));  // positive entries: l is higher
    for (std::size_t j = 0; j < cd.l; ++j)
        if (j != i && diff[j] != 0) return out;  // different alpha_i strings: zero on U_i
    auto str = detail::string_through(m, v, i);
    if (std::find(str.begin(), str.end(), l) == str.end()) throw RepError("dual vector outside the string");
    int sign = starred ? -1 : 1;
    int L = sign * m.spaces[m.space_of[l]].coroot[i];
    int R = sign * m.spaces[m.space_of[v]].coroot[i];
    int k = (L - R) / 2;  // word weight in units of alpha_i
    // top of the string measured from v
    int p = 0;
    for (Beta b = m.beta_of(v); b[i] > 0;) {
        --b[i];
        if (!m.mult(b)) break;
        ++p;
    }
    int nmax = m.spaces[m.space_of[v]].coroot[i] + 2 * p;
    int n0 = std::max(std::abs(L), std::abs(R));
    if (nmax > degree_cap) throw RepError("string needs degree " + std::to_string(nmax) + "; raise degree_cap");
    if (nmax < n0) return out;
    std::vector<int> degrees;
    for (int n = n0; n <= nmax; n += 2) degrees.push_back(n);
    const Sl2Data& s = detail::sl2_cached(cd.d[i]);
    std::vector<AElem> monos;
    for (int n : degrees) monos.push_back(monomial_elem(s, sl2_monomial(L, R, n)));
    MatrixCoeff c{mp, basis_vec(l), basis_vec(v), starred};
    const std::size_t N = degrees.size();
    Mat<FieldElem> a(N, std::vector<FieldElem>(N));
    std::vector<FieldElem> rhs(N);
    int up0 = std::max(0, starred ? -k : k);
    for (std::size_t r = 0; r < N; ++r) {
        int up = up0 + static_cast<int>(r);
        int down = up - (starred ? -k : k);
        UWord w;
        Gen first = starred ? Gen::F : Gen::E, second = starred ? Gen::E : Gen::F;
        for (int t = 0; t < down; ++t) w.push_back({second, i});
        for (int t = 0; t < up; ++t) w.push_back({first, i});
        rhs[r] = evaluate(c, w);
        UWord w1 = detail::rank_one_word(w);
        for (std::size_t col = 0; col < N; ++col) a[r][col] = evaluate(monos[col], w1);
    }
    auto x = solve_square(a, rhs);
    if (!x) throw RepError("psi_star expansion is underdetermined; raise degree_cap");
    for (std::size_t col = 0; col < N; ++col)
        if (!(*x)[col].is_zero()) out.terms.push_back({sl2_monomial(L, R, degrees[col]), (*x)[col]});
    return out;
}

// Value of the expansion on a rank-one word (used to validate expansions).
inline FieldElem evaluate(const Sl2Poly& p, const UWord& w) {
    const Sl2Data& s = detail::sl2_cached(p.d);
    FieldElem v;
    UWord w1 = detail::rank_one_word(w);
    for (const auto& [mono, c] : p.terms) v += c * evaluate(monomial_elem(s, mono), w1);
    return v;
}

// phi(p) as the compression of the infinite operator to e_0..e_{K-1}; monomials are formed on a
// padded basis so that no ladder step is lost to the cut.
inline CMat apply_elementary(const ElementaryRep& e, const Sl2Poly& p) {
    int deg = 0;
    for (const auto& [mono, c] : p.terms) deg = std::max(deg, mono[0] + mono[1] + mono[2] + mono[3]);
    const int n = e.K + deg;
    std::array<CMat, 4> g;
    for (int k = 0; k < 4; ++k) g[static_cast<std::size_t>(k)] = e.gen(k, n);
    CMat out = CMat::Zero(n, n);
    for (const auto& [mono, c] : p.terms) {
        CMat x = CMat::Identity(n, n);
        for (int k = 0; k < 4; ++k)
            for (int t = 0; t < mono[static_cast<std::size_t>(k)]; ++t) x = x * g[static_cast<std::size_t>(k)];
        out += detail::num(c, e.q0) * x;
    }
    return out.topLeftCorner(e.K, e.K);
}

struct RegistryEntry {
    Weight lam;
    ModulePtr m;
    std::size_t extremal = 0;  // basis index of u_{w Lambda}
    double scale = 1;          // sqrt of the star-form norm of u_{w Lambda}
    CMat op;                   // pi(C_{-w Lambda, Lambda}) for the unit-normalized dual
    CMat op_star;
};

struct Rep {
    CartanData cd;
    WeylWord word;
    int K = 0;
    Rational q0;
    int margin = 2;
    std::vector<ElementaryRep> factors;
    std::vector<RegistryEntry> registry;
    std::string warning;

    std::size_t dim() const {
        std::size_t n = 1;
        for (std::size_t j = 0; j < factors.size(); ++j) n *= static_cast<std::size_t>(K);
        return n;
    }
    // multi-index of a tensor basis vector, leg 0 most significant
    std::vector<int> digits(std::size_t idx) const {
        std::vector<int> out(factors.size());
        for (std::size_t j = factors.size(); j-- > 0;) {
            out[j] = static_cast<int>(idx % static_cast<std::size_t>(K));
            idx /= static_cast<std::size_t>(K);
        }
        return out;
    }
    bool interior(std::size_t idx) const {
        for (int x : digits(idx))
            if (x >= K - margin) return false;
        return true;
    }
    const RegistryEntry& entry(const Weight& lam) const {
        for (const auto& e : registry)
            if (e.lam == lam) return e;
        throw ValidationError("weight " + to_json(lam).dump() + " is not registered on this module");
    }
};

// Operator of C_{l,v} (basis vectors of m) on the legs first..end of the tensor product, by
// iterating Delta(C_{l,v}) = sum_u C_{l,u} (x) C_{l_u,v} over the intermediate basis.
struct ChainEvaluator {
    const Rep& rep;
    ModulePtr m;
    bool starred = false;
    int degree_cap = 8;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, CMat> leg_cache;

    ChainEvaluator(const Rep& r, ModulePtr mod, bool st) : rep(r), m(std::move(mod)), starred(st) {}

    const CMat& leg(std::size_t j, std::size_t l, std::size_t v) {
        auto key = std::make_tuple(j, l, v);
        auto it = leg_cache.find(key);
        if (it != leg_cache.end()) return it->second;
        auto p = psi_star_expand(m, l, v, starred, rep.word[j], degree_cap);
        return leg_cache.emplace(key, apply_elementary(rep.factors[j], p)).first->second;
    }

    bool reachable(std::size_t first, std::size_t last, const Beta& from, const Beta& to) const {
        for (std::size_t c = 0; c < from.size(); ++c) {
            if (from[c] == to[c]) continue;
            bool used = false;
            for (std::size_t j = first; j <= last && !used; ++j) used = rep.word[j] == c;
            if (!used) return false;
        }
        return true;
    }

    CMat run(std::size_t first, std::size_t l, std::size_t v) {
        const std::size_t k = rep.word.size();
        if (first >= k) return CMat::Constant(1, 1, l == v ? cplx(1) : cplx(0));
        return step(first, k - 1, l, v);
    }

    CMat step(std::size_t first, std::size_t j, std::size_t l, std::size_t v) {
        std::size_t n = 1;
        for (std::size_t t = first; t <= j; ++t) n *= static_cast<std::size_t>(rep.K);
        const auto idx = static_cast<Eigen::Index>(n);
        if (!reachable(first, j, m->beta_of(v), m->beta_of(l))) return CMat::Zero(idx, idx);
        if (j == first) {
            auto str = detail::string_through(*m, v, rep.word[j]);
            if (std::find(str.begin(), str.end(), l) == str.end()) return CMat::Zero(idx, idx);
            return leg(j, l, v);
        }
        CMat out = CMat::Zero(idx, idx);
        for (auto u : detail::string_through(*m, v, rep.word[j])) {
            if (!reachable(first, j - 1, m->beta_of(u), m->beta_of(l))) continue;
            const CMat& right = leg(j, u, v);
            if (right.cwiseAbs().maxCoeff() == 0) continue;
            CMat left = step(first, j - 1, l, u);
            if (left.cwiseAbs().maxCoeff() == 0) continue;
            out += Eigen::kroneckerProduct(left, right).eval();
        }
        return out;
    }
};

inline CMat rep_operator(const Rep& rep, const MatrixCoeff& c, std::size_t first_leg = 0) {
    if (c.m->cd.a != rep.cd.a) throw ValidationError("coefficient and module use different Cartan data");
    ChainEvaluator ev{rep, c.m, c.starred};
    std::size_t n = 1;
    for (std::size_t t = first_leg; t < rep.word.size(); ++t) n *= static_cast<std::size_t>(rep.K);
    const auto idx = static_cast<Eigen::Index>(n);
    CMat out = CMat::Zero(idx, idx);
    for (const auto& [li, cl] : c.l)
        for (const auto& [vi, cv] : c.v) out += detail::num(cl * cv, rep.q0) * ev.run(first_leg, li, vi);
    return out;
}

// Extremal weight w Lambda as a root-lattice offset, and its one-dimensional weight space.
inline std::size_t extremal_index(const TruncModule& m, const WeylWord& w) {
    Weight x = weyl_act(m.cd, w, m.hw);
    const WeightSpace* s = m.space(x.beta);
    if (!s) throw TruncationError("extremal weight outside the module; rebuild deeper");
    if (s->dim != 1) throw RepError("extremal weight space is not one-dimensional");
    return s->offset;
}

// Deepest level reached by the chain sum for C_{l, v_Lambda}: starting from Lambda, leg j visits the
// alpha_{i_j}-string of every weight met so far. A string through Lambda - beta reaches at most
// beta_i + (mu, alpha_i^vee) steps down.
inline int chain_depth(const CartanData& cd, const WeylWord& w, const Weight& lam) {
    std::set<Beta> seen{Beta(cd.l, 0)};
    for (std::size_t j = w.size(); j-- > 0;) {
        const std::size_t i = w[j];
        std::set<Beta> next;
        for (const auto& b : seen) {
            Weight mu = lam;
            mu.beta = b;
            int down = b[i] + coroot_pairing(cd, mu, i);
            for (int t = 0; t <= std::max(down, 0); ++t) {
                Beta nb = b;
                nb[i] += t;
                next.insert(nb);
            }
        }
        seen = std::move(next);
    }
    int depth = 0;
    for (const auto& b : seen) depth = std::max(depth, detail::level(b));
    return depth;
}

inline ModulePtr rep_module(const CartanData& cd, const WeylWord& word, const Weight& lam, int extra_depth = 0) {
    return share(build_module(cd, lam, chain_depth(cd, word, lam) + extra_depth));
}

inline void register_weight(Rep& rep, const Weight& lam, int extra_depth = 0) {
    RegistryEntry e;
    e.lam = lam;
    e.m = rep_module(rep.cd, rep.word, lam, extra_depth);
    e.extremal = extremal_index(*e.m, rep.word);
    double h = eval_real(e.m->star_norm(e.extremal), rep.q0);
    if (!(h > 0)) throw RepError("star form is not positive on the extremal vector");
    e.scale = std::sqrt(h);
    e.op = e.scale * rep_operator(rep, coeff(e.m, e.extremal, 0));
    e.op_star = e.scale * rep_operator(rep, coeff(e.m, e.extremal, 0, true));
    rep.registry.push_back(std::move(e));
}

inline Rep build_Nw(const CartanData& cd, WeylWord word, const std::vector<cplx>& twists, int K, const Rational& q0,
                    const std::vector<Weight>& lambdas = {}, int margin = 2) {
    Rep rep;
    rep.cd = cd;
    auto red = reduce_word(cd, word);
    if (red.length != word.size()) {
        rep.warning = "word is not reduced; replaced by a reduced word for the same element";
        word = red.word;
    }
    rep.word = word;
    rep.K = K;
    rep.q0 = q0;
    rep.margin = margin;
    if (!twists.empty() && twists.size() != word.size()) throw ValidationError("one twist per factor expected");
    for (std::size_t j = 0; j < word.size(); ++j)
        rep.factors.push_back(elementary_rep(word[j], cd.d[word[j]], K, q0, twists.empty() ? cplx(1) : twists[j]));
    for (const auto& lam : lambdas) register_weight(rep, lam);
    return rep;
}

namespace detail {

inline double bulk_max(const Rep& rep, const CMat& m) {
    double worst = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (!rep.interior(static_cast<std::size_t>(r))) continue;
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (rep.interior(static_cast<std::size_t>(c))) worst = std::max(worst, std::abs(m(r, c)));
    }
    return worst;
}

inline std::size_t boundary_count(const Rep& rep) {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rep.dim(); ++r)
        if (!rep.interior(r)) ++n;
    return n;
}

}  // namespace detail

// Factorization: pi(C_{-s_i w Lambda, Lambda}) = pi_i(C_{-s_i w Lambda, w Lambda}) (x) pi_w(C_{-w Lambda, Lambda}).
inline CheckReport check_factorization(const Rep& rep, const Weight& lam, bool swap_factors = false, double tol = 1e-10) {
    if (rep.word.empty()) throw ValidationError("factorization needs a nonempty word");
    if (reduce_word(rep.cd, rep.word).length != rep.word.size()) throw ValidationError("s_i w is not length-increasing");
    const auto& e = rep.entry(lam);
    WeylWord tail(rep.word.begin() + 1, rep.word.end());
    std::size_t mid = extremal_index(*e.m, tail);
    ChainEvaluator ev{rep, e.m, false};
    CMat lhs = ev.run(0, e.extremal, 0);
    CMat head = ev.leg(0, e.extremal, mid);
    CMat rest = ev.run(1, mid, 0);
    CMat rhs = swap_factors ? Eigen::kroneckerProduct(rest, head).eval() : Eigen::kroneckerProduct(head, rest).eval();
    double dev = (lhs - rhs).cwiseAbs().maxCoeff() * e.scale;
    CheckReport r{"verify-tensor"};
    r.fail_if(!(dev <= tol));
    r.witness = {{"lambda", to_json(lam)}, {"word", rep.word},          {"K", rep.K},         {"max_deviation", dev},
                 {"tolerance", tol},       {"swap_factors", swap_factors}, {"dimension", rep.dim()}};
    return r;
}

struct SpectrumEntry {
    cplx value;
    Rational gamma_pairing;  // (gamma, Lambda) read from |value| = q0^{-(gamma, Lambda)}
    bool matched = true;
};

// Diagonal of the weight-triangular operator; labels from |value| = q0^{-(gamma,Lambda)}.
inline std::vector<SpectrumEntry> spectra(const Rep& rep, const Weight& lam, double tol = 1e-8) {
    const auto& e = rep.entry(lam);
    const double lq = std::log(rep.q0.get_d());
    std::vector<SpectrumEntry> out;
    for (Eigen::Index k = 0; k < e.op.rows(); ++k) {
        SpectrumEntry s;
        s.value = e.op(k, k);
        double mod = std::abs(s.value);
        if (mod == 0) {
            s.matched = false;
        } else {
            long t = std::lround(std::log(mod) / lq);
            s.gamma_pairing = Rational(-t);
            s.matched = std::abs(mod - std::pow(rep.q0.get_d(), static_cast<double>(t))) <= tol;
        }
        out.push_back(s);
    }
    return out;
}

inline CheckReport spectrum_report(const Rep& rep, const Weight& lam, double tol = 1e-8) {
    auto sp = spectra(rep, lam, tol);
    const auto& e = rep.entry(lam);
    double maxmod = 0, lower = 0;
    std::size_t unit = 0, unmatched = 0;
    bool top_is_unit = !sp.empty() && std::abs(std::abs(sp[0].value) - 1) <= tol;
    for (const auto& s : sp) {
        maxmod = std::max(maxmod, std::abs(s.value));
        if (std::abs(std::abs(s.value) - 1) <= tol) ++unit;
        if (!s.matched) ++unmatched;
    }
    for (Eigen::Index r = 0; r < e.op.rows(); ++r)
        for (Eigen::Index c = 0; c < r; ++c) lower = std::max(lower, std::abs(e.op(r, c)));
    // every leg moves the weight: otherwise a leg acts by a scalar and only the joint labels are unique
    bool strict = true;
    for (std::size_t j = 0; j < rep.word.size(); ++j) {
        WeylWord tail(rep.word.begin() + static_cast<std::ptrdiff_t>(j) + 1, rep.word.end());
        strict = strict && coroot_pairing(rep.cd, weyl_act(rep.cd, tail, lam), rep.word[j]) > 0;
    }
    CheckReport r{"spectra"};
    r.fail_if(maxmod > 1 + 1e-9 || (strict ? unit != 1 : unit == 0) || !top_is_unit || unmatched != 0);
    r.witness = {{"lambda", to_json(lam)},
                 {"word", rep.word},
                 {"K", rep.K},
                 {"max_modulus", maxmod},
                 {"unit_modulus_count", unit},
                 {"strict_chain", strict},
                 {"top_is_unit", top_is_unit},
                 {"unmatched", unmatched},
                 {"max_below_diagonal", lower},
                 {"top_value", {sp.empty() ? 0.0 : sp[0].value.real(), sp.empty() ? 0.0 : sp[0].value.imag()}},
                 {"tolerance", tol}};
    return r;
}

// Joint labels gamma = -sum n_j alpha_j from the fundamental weights in the registry, checked
// against every registered weight.
struct WeightDecomposition {
    std::vector<std::vector<long>> labels;  // n_j per basis vector
    std::map<std::vector<long>, std::size_t> blocks;
    CheckReport report;
};

inline WeightDecomposition weight_decomposition(const Rep& rep, double tol = 1e-8) {
    const CartanData& cd = rep.cd;
    std::vector<const RegistryEntry*> fund(cd.l, nullptr);
    for (const auto& e : rep.registry)
        for (std::size_t j = 0; j < cd.l; ++j)
            if (e.lam == fundamental(cd, j)) fund[j] = &e;
    for (std::size_t j = 0; j < cd.l; ++j)
        if (!fund[j]) throw ValidationError("weight decomposition needs every fundamental weight registered");
    const double q0 = rep.q0.get_d(), lq = std::log(q0);
    WeightDecomposition wd;
    std::size_t inconsistent = 0, negative = 0;
    double worst = 0;
    for (std::size_t b = 0; b < rep.dim(); ++b) {
        const auto bi = static_cast<Eigen::Index>(b);
        std::vector<long> n(cd.l);
        for (std::size_t j = 0; j < cd.l; ++j) {
            double t = std::log(std::abs(fund[j]->op(bi, bi))) / lq / cd.d[j];
            n[j] = std::lround(t);
            if (n[j] < 0) ++negative;
        }
        for (const auto& e : rep.registry) {
            double pair = 0;  // -(gamma, Lambda) = sum n_j d_j (Lambda, alpha_j^vee)
            for (std::size_t j = 0; j < cd.l; ++j) pair += static_cast<double>(n[j]) * cd.d[j] * e.lam.dom[j];
            double dev = std::abs(std::abs(e.op(bi, bi)) - std::pow(q0, pair));
            worst = std::max(worst, dev);
            if (dev > tol) ++inconsistent;
        }
        ++wd.blocks[n];
        wd.labels.push_back(std::move(n));
    }
    std::vector<long> zero(cd.l, 0);
    std::size_t zero_block = wd.blocks.count(zero) ? wd.blocks[zero] : 0;
    bool zero_is_top = !wd.labels.empty() && wd.labels[0] == zero;
    auto& r = wd.report;
    r.check = "weights";
    r.fail_if(inconsistent != 0 || negative != 0 || zero_block != 1 || !zero_is_top);
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& [n, c] : wd.blocks) blocks.push_back({{"n", n}, {"size", c}});
    nlohmann::json lams = nlohmann::json::array();
    for (const auto& e : rep.registry) lams.push_back(to_json(e.lam));
    r.witness = {{"word", rep.word},           {"K", rep.K},
                 {"lambdas", lams},            {"blocks", blocks},
                 {"zero_block", zero_block},   {"zero_is_top", zero_is_top},
                 {"inconsistent", inconsistent}, {"negative", negative},
                 {"max_deviation", worst},     {"tolerance", tol}};
    return wd;
}

// Demazure module U^{>=0} u_{w Lambda}: per weight space, a basis in coordinates.
inline std::map<Beta, Mat<FieldElem>> demazure(const TruncModule& m, const WeylWord& w) {
    std::map<Beta, Mat<FieldElem>> out;
    std::size_t start = extremal_index(m, w);
    std::vector<Beta> queue{m.beta_of(start)};
    {
        std::vector<FieldElem> v(1, FieldElem(1));
        out[m.beta_of(start)] = {v};
    }
    // process weights from deepest to highest so every E-image is collected before its span is used
    std::map<int, std::vector<Beta>, std::greater<>> pending;
    pending[detail::level(m.beta_of(start))].push_back(m.beta_of(start));
    while (!pending.empty()) {
        auto it = pending.begin();
        auto level_betas = std::move(it->second);
        pending.erase(it);
        for (const auto& b : level_betas) {
            const WeightSpace* s = m.space(b);
            auto& rows = out[b];
            auto sb = span_basis(rows);
            Mat<FieldElem> basis;
            for (auto r : sb.rows) basis.push_back(rows[r]);
            rows = basis;
            for (std::size_t i = 0; i < m.cd.l; ++i) {
                if (b[i] == 0) continue;
                Beta up = b;
                --up[i];
                const WeightSpace* t = m.space(up);
                if (!t) continue;
                bool added = false;
                for (const auto& vec : basis) {
                    SparseVec sv;
                    for (std::size_t x = 0; x < s->dim; ++x)
                        if (!vec[x].is_zero()) sv[s->offset + x] = vec[x];
                    SparseVec img = act(m, {Gen::E, i}, sv);
                    if (img.empty()) continue;
                    std::vector<FieldElem> row(t->dim);
                    for (const auto& [g, c] : img) row[g - t->offset] = c;
                    if (!out.count(up)) added = true;
                    out[up].push_back(std::move(row));
                }
                if (added) pending[detail::level(up)].push_back(up);
            }
        }
    }
    return out;
}

// Null space of the row span: dual vectors (coordinates) vanishing on every row.
inline Mat<FieldElem> annihilator(const Mat<FieldElem>& rows, std::size_t dim) {
    Mat<FieldElem> out;
    if (rows.empty()) {
        for (std::size_t x = 0; x < dim; ++x) {
            std::vector<FieldElem> v(dim);
            v[x] = FieldElem(1);
            out.push_back(std::move(v));
        }
        return out;
    }
    auto e = echelon(rows);
    std::vector<bool> pivot(dim, false);
    for (auto p : e.pivots) pivot[p] = true;
    for (std::size_t f = 0; f < dim; ++f) {
        if (pivot[f]) continue;
        std::vector<FieldElem> v(dim);
        v[f] = FieldElem(1);
        for (std::size_t r = 0; r < e.rows.size(); ++r) v[e.pivots[r]] = -e.rows[r][f];
        out.push_back(std::move(v));
    }
    return out;
}

// Annihilator certificates: coefficients C_{xi, Lambda} with xi orthogonal to the Demazure module
// vanish on the bulk, and C_{-w Lambda, Lambda} does not.
inline CheckReport check_annihilator(const Rep& rep, const ModulePtr& m, int maxdepth, double tol = 1e-10) {
    auto dem = demazure(*m, rep.word);
    std::size_t tested = 0;
    double worst = 0;
    nlohmann::json worst_xi = nullptr;
    for (const auto& s : m->spaces) {
        if (detail::level(s.beta) > maxdepth) continue;
        Mat<FieldElem> rows;
        auto it = dem.find(s.beta);
        if (it != dem.end()) rows = it->second;
        for (const auto& xi : annihilator(rows, s.dim)) {
            DualVec l;
            for (std::size_t x = 0; x < s.dim; ++x)
                if (!xi[x].is_zero()) l[s.offset + x] = xi[x];
            if (l.empty()) continue;
            CMat op = rep_operator(rep, MatrixCoeff{m, l, basis_vec(0), false});
            double n = detail::bulk_max(rep, op);
            ++tested;
            if (n > worst) {
                worst = n;
                worst_xi = s.beta;
            }
        }
    }
    std::size_t ext = extremal_index(*m, rep.word);
    double top = detail::bulk_max(rep, rep_operator(rep, coeff(m, ext, 0)));
    CheckReport r{"verify-annihilator"};
    r.fail_if(!(worst <= tol) || !(top > tol));
    r.witness = {{"word", rep.word},
                 {"lambda", to_json(m->hw)},
                 {"maxdepth", maxdepth},
                 {"module_depth", m->depth},
                 {"complement_duals", tested},
                 {"max_bulk_norm", worst},
                 {"worst_beta", worst_xi},
                 {"extremal_bulk_norm", top},
                 {"K", rep.K},
                 {"margin", rep.margin},
                 {"tolerance", tol}};
    return r;
}

// <pi(a) v1, v2> = <v1, pi(a^*) v2> on the bulk, for each sampled coefficient.
inline CheckReport check_unitarity(const Rep& rep, const std::vector<MatrixCoeff>& sample, double tol = 1e-9) {
    double worst = 0;
    std::size_t tested = 0, skipped = 0;
    for (const auto& a : sample) {
        try {
            CMat p = rep_operator(rep, a), s = rep_operator(rep, star(a));
            worst = std::max(worst, detail::bulk_max(rep, p.adjoint() - s));
            ++tested;
        } catch (const TruncationError&) {
            ++skipped;
        }
    }
    CheckReport r{"verify-unitary"};
    r.fail_if(!(worst <= tol) || tested == 0);
    r.witness = {{"word", rep.word},          {"K", rep.K},         {"samples", tested}, {"skipped_truncated", skipped},
                 {"max_deviation", worst},    {"tolerance", tol},   {"boundary_excluded", detail::boundary_count(rep)},
                 {"margin", rep.margin}};
    return r;
}

// Default unitarity sample: C_{xi, v} over each registered module for xi, v at level <= 1.
inline std::vector<MatrixCoeff> unitarity_sample(const Rep& rep) {
    std::vector<MatrixCoeff> out{};
    for (const auto& e : rep.registry)
        for (std::size_t l = 0; l < e.m->total; ++l)
            for (std::size_t v = 0; v < e.m->total; ++v)
                if (e.m->level_of(l) <= 1 && e.m->level_of(v) <= 1) out.push_back(coeff(e.m, l, v));
    return out;
}

// [pi(C_{-w Lambda, Lambda}), pi((C_{-w Lambda', Lambda'})^*)] on the bulk over registered pairs.
inline double commutator_defect(const Rep& rep) {
    double worst = 0;
    for (const auto& a : rep.registry)
        for (const auto& b : rep.registry) worst = std::max(worst, detail::bulk_max(rep, a.op * b.op_star - b.op_star * a.op));
    return worst;
}

inline CheckReport check_reduced_word_independence(const CartanData& cd, const WeylWord& w1, const WeylWord& w2,
                                                   const std::vector<Weight>& lambdas, int K, const Rational& q0, int margin = 2,
                                                   double tol = 1e-6) {
    auto r1 = reduce_word(cd, w1), r2 = reduce_word(cd, w2);
    if (r1.length != w1.size() || r2.length != w2.size()) throw ValidationError("words must be reduced");
    if (w1.size() != w2.size() || !same_element(cd, w1, w2)) throw ValidationError("words are not reduced decompositions of one element");
    Rep a = build_Nw(cd, w1, {}, K, q0, lambdas, margin);
    Rep b = build_Nw(cd, w2, {}, K, q0, lambdas, margin);
    const double cutoff = std::pow(q0.get_d(), K - 1 - margin) * (1 - 1e-9);
    CheckReport r{"verify-words"};
    nlohmann::json per = nlohmann::json::array();
    for (const auto& lam : lambdas) {
        auto top = [&](const Rep& rep) {
            std::vector<cplx> v;
            const auto& op = rep.entry(lam).op;
            for (Eigen::Index k = 0; k < op.rows(); ++k)
                if (std::abs(op(k, k)) >= cutoff) v.push_back(op(k, k));
            std::sort(v.begin(), v.end(), [](cplx x, cplx y) {
                if (std::abs(std::abs(x) - std::abs(y)) > 1e-12) return std::abs(x) > std::abs(y);
                return std::arg(x) < std::arg(y);
            });
            return v;
        };
        auto ea = top(a), eb = top(b);
        double dev = 0;
        bool same = ea.size() == eb.size();
        for (std::size_t k = 0; same && k < ea.size(); ++k) dev = std::max(dev, std::abs(ea[k] - eb[k]));
        bool ok = same && dev <= tol;
        r.fail_if(!ok);
        per.push_back({{"lambda", to_json(lam)}, {"compared", std::min(ea.size(), eb.size())}, {"counts", {ea.size(), eb.size()}}, {"max_deviation", dev}});
    }
    r.witness = {{"word1", w1}, {"word2", w2}, {"K", K}, {"margin", margin}, {"cutoff_modulus", cutoff}, {"per_lambda", per}, {"tolerance", tol}};
    return r;
}

enum class CharacterKind { ChiW, NInfinity };

struct CharacterData {
    CharacterKind kind = CharacterKind::ChiW;
    WeylWord w;
    std::vector<cplx> twists;
};

// chi_w(x) for x in the span of products of C_{l, v_Lambda}: the eigenvalue on v_w = e_0 (x) ... (x) e_0,
// multiplicative over factors. Duals enter unit-normalized only through the caller's choice of l.
inline cplx character_eval(const CharacterData& chd, const AElem& x, const Rep* rep = nullptr) {
    if (chd.kind == CharacterKind::NInfinity) return detail::num(n_infinity(x), Rational(1, 2));
    if (!rep) throw ValidationError("chi_w needs the module N(w)");
    if (rep->word != chd.w) throw ValidationError("module word differs from the character's word");
    cplx total = 0;
    for (const auto& t : x.terms) {
        cplx p = detail::num(t.c, rep->q0);
        for (const auto& f : t.f) {
            if (f.starred || f.v != basis_vec(0)) throw ValidationError("chi_w is defined on A_+ only");
            p *= rep_operator(*rep, f)(0, 0);
        }
        total += p;
    }
    return total;
}

inline CheckReport elementary_report(std::size_t node, int d, int K, const Rational& q0, cplx twist = {1, 0}, double tol = 1e-12,
                                     double star_tol = 1e-9) {
    ElementaryRep e{node, d, K, q0, twist};
    auto v = validate_elementary(e);
    CMat diag = e.gen(2);
    std::size_t unit = 0;
    for (int k = 0; k < K; ++k)
        if (std::abs(std::abs(diag(k, k) / std::sqrt(e.q())) - 1) <= 1e-12) ++unit;
    bool top = std::abs(std::abs(diag(0, 0) / std::sqrt(e.q())) - 1) <= 1e-12;
    CheckReport r{"elementary"};
    r.fail_if(!(v.relation_defect <= tol) || !(v.star_defect <= star_tol) || unit != 1 || !top || v.relations == 0);
    r.witness = {{"node", node},           {"d", d},
                 {"K", K},                 {"q0", q0.get_str()},
                 {"relations", v.relations}, {"relation_defect", v.relation_defect},
                 {"star_defect", v.star_defect}, {"unit_modulus_count", unit},
                 {"tolerance", tol},       {"star_tolerance", star_tol},
                 {"interior_rows", K - 1}};
    return r;
}

// pi(f) v_w = chi_w(f) v_w for f = C_{l, v_Lambda}, l up to the given level, on every registered module.
inline CheckReport check_highest_weight(const Rep& rep, int max_level = 2, double tol = 1e-10) {
    double worst = 0;
    std::size_t tested = 0;
    for (const auto& e : rep.registry)
        for (std::size_t l = 0; l < e.m->total; ++l) {
            if (e.m->level_of(l) > max_level) continue;
            CMat op = rep_operator(rep, coeff(e.m, l, 0));
            worst = std::max(worst, op.col(0).tail(op.rows() - 1).cwiseAbs().maxCoeff());
            ++tested;
        }
    CheckReport r{"highest-weight"};
    r.fail_if(!(worst <= tol) || tested == 0);
    r.witness = {{"word", rep.word}, {"K", rep.K}, {"coefficients", tested}, {"max_off_top", worst}, {"tolerance", tol}};
    return r;
}

// (N(i_1) (x) ... (x) N(i_s)) (x) (N(i_{s+1}) (x) ...) against the left-nested chain, at every split s.
inline CheckReport check_associativity(const Rep& rep, const Weight& lam, double tol = 1e-12) {
    const auto& e = rep.entry(lam);
    ChainEvaluator ev{rep, e.m, false};
    CMat ref = ev.run(0, e.extremal, 0);
    double worst = 0;
    for (std::size_t split = 1; split < rep.word.size(); ++split) {
        CMat out = CMat::Zero(ref.rows(), ref.cols());
        for (std::size_t u = 0; u < e.m->total; ++u) {
            CMat right = ev.run(split, u, 0);
            if (right.cwiseAbs().maxCoeff() == 0) continue;
            CMat left = ev.step(0, split - 1, e.extremal, u);
            if (left.cwiseAbs().maxCoeff() == 0) continue;
            out += Eigen::kroneckerProduct(left, right).eval();
        }
        worst = std::max(worst, (out - ref).cwiseAbs().maxCoeff());
    }
    CheckReport r{"associativity"};
    r.fail_if(!(worst <= tol));
    r.witness = {{"word", rep.word}, {"K", rep.K}, {"lambda", to_json(lam)}, {"max_deviation", worst}, {"tolerance", tol}};
    return r;
}

namespace detail {

inline nlohmann::json cmat_json(const CMat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMat cmat_from_json(const nlohmann::json& j, std::size_t n) {
    if (!j.is_array() || j.size() != n) throw ValidationError("operator matrix has the wrong number of rows");
    CMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != n) throw ValidationError("operator matrix row has the wrong length");
        for (std::size_t c = 0; c < n; ++c) {
            const auto& z = row[c];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                throw ValidationError("operator entries must be [re, im] pairs");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cplx(z[0].get<double>(), z[1].get<double>());
        }
    }
    return m;
}

}  // namespace detail

inline nlohmann::json to_json(const Rep& rep) {
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& f : rep.factors)
        factors.push_back({{"node", f.node}, {"d", f.d}, {"K", f.K}, {"q0", f.q0.get_str()}, {"twist", {f.twist.real(), f.twist.imag()}}});
    nlohmann::json reg = nlohmann::json::array();
    for (const auto& e : rep.registry)
        reg.push_back({{"lambda", to_json(e.lam)},
                       {"module_depth", e.m->depth},
                       {"scale", e.scale},
                       {"op", detail::cmat_json(e.op)},
                       {"op_star", detail::cmat_json(e.op_star)}});
    return {{"cartan", to_json(rep.cd)}, {"word", rep.word},    {"K", rep.K},        {"q0", rep.q0.get_str()},
            {"margin", rep.margin},      {"factors", factors},  {"registry", reg},   {"warning", rep.warning}};
}

// Rebuilds the module from its metadata and rejects files whose stored operators disagree.
inline Rep rep_from_json(const nlohmann::json& j, double tol = 1e-9) {
    try {
        CartanData cd = cartan_from_json(j.at("cartan"));
        auto word = j.at("word").get<WeylWord>();
        int K = j.at("K").get<int>();
        Rational q0 = parse_rational(j.at("q0").get<std::string>());
        int margin = j.value("margin", 2);
        const auto& factors = j.at("factors");
        if (!factors.is_array() || factors.size() != word.size()) throw ValidationError("one factor per letter expected");
        std::vector<cplx> twists;
        for (std::size_t t = 0; t < factors.size(); ++t) {
            const auto& f = factors[t];
            if (f.at("node").get<std::size_t>() != word[t] || f.at("K").get<int>() != K) throw ValidationError("factor metadata disagrees with the word");
            const auto& z = f.at("twist");
            twists.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
        }
        std::vector<Weight> lams;
        for (const auto& e : j.at("registry")) lams.push_back(weight_from_json(e.at("lambda")));
        Rep rep = build_Nw(cd, word, twists, K, q0, lams, margin);
        if (rep.word != word) throw ValidationError("stored word is not reduced");
        const auto& reg = j.at("registry");
        for (std::size_t t = 0; t < rep.registry.size(); ++t) {
            CMat op = detail::cmat_from_json(reg[t].at("op"), rep.dim());
            CMat st = detail::cmat_from_json(reg[t].at("op_star"), rep.dim());
            double dev = std::max((op - rep.registry[t].op).cwiseAbs().maxCoeff(), (st - rep.registry[t].op_star).cwiseAbs().maxCoeff());
            if (!(dev <= tol)) throw ValidationError("stored operator differs from the rebuilt one by " + std::to_string(dev));
        }
        return rep;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed rep JSON: ") + e.what());
    }
}

}  // namespace qkm
