#pragma once

#include "qkm/linalg.hpp"
#include "qkm/qfield.hpp"
#include "qkm/rootdata.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qkm {

struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Gen { E, F, K, Kinv };

struct Letter {
    Gen g;
    std::size_t i;
    friend bool operator==(const Letter& a, const Letter& b) { return a.g == b.g && a.i == b.i; }
    friend bool operator<(const Letter& a, const Letter& b) { return a.g != b.g ? a.g < b.g : a.i < b.i; }
};

using UWord = std::vector<Letter>;

inline std::string letter_str(const Letter& x) {
    static const char* names[] = {"E", "F", "K", "k"};
    return names[static_cast<int>(x.g)] + std::to_string(x.i);
}

inline std::string word_str(const UWord& w) {
    std::string s;
    for (const auto& x : w) s += (s.empty() ? "" : " ") + letter_str(x);
    return s.empty() ? "1" : s;
}

// Tokens E<i>, F<i>, K<i>, k<i> (k = K inverse), separated by spaces or commas; "1" is the empty word.
inline UWord parse_uword(const std::string& s) {
    UWord w;
    std::size_t p = 0;
    while (p < s.size()) {
        char c = s[p];
        if (c == ' ' || c == ',' || c == '*') {
            ++p;
            continue;
        }
        if (c == '1' && w.empty() && s.find_first_not_of(" 1") == std::string::npos) break;
        Gen g;
        switch (c) {
            case 'E': g = Gen::E; break;
            case 'F': g = Gen::F; break;
            case 'K': g = Gen::K; break;
            case 'k': g = Gen::Kinv; break;
            default: throw std::invalid_argument("bad letter '" + std::string(1, c) + "' in word '" + s + "'");
        }
        ++p;
        std::size_t q = p;
        while (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) ++q;
        if (q == p) throw std::invalid_argument("letter without index in word '" + s + "'");
        w.push_back({g, static_cast<std::size_t>(std::stoul(s.substr(p, q - p)))});
        p = q;
    }
    return w;
}

inline int counit(const UWord& w) {
    for (const auto& x : w)
        if (x.g == Gen::E || x.g == Gen::F) return 0;
    return 1;
}

inline std::size_t ef_count(const UWord& w) {
    std::size_t n = 0;
    for (const auto& x : w)
        if (x.g == Gen::E || x.g == Gen::F) ++n;
    return n;
}

// All words of length <= maxlen over {E_i, F_i, K_i, K_i^-1}.
inline std::vector<UWord> all_words(std::size_t l, std::size_t maxlen, bool with_k = true) {
    std::vector<Letter> alphabet;
    for (std::size_t i = 0; i < l; ++i) {
        alphabet.push_back({Gen::E, i});
        alphabet.push_back({Gen::F, i});
        if (with_k) {
            alphabet.push_back({Gen::K, i});
            alphabet.push_back({Gen::Kinv, i});
        }
    }
    std::vector<UWord> out{UWord{}};
    std::size_t start = 0;
    for (std::size_t len = 1; len <= maxlen; ++len) {
        std::size_t end = out.size();
        for (std::size_t k = start; k < end; ++k)
            for (const auto& a : alphabet) {
                UWord w = out[k];
                w.push_back(a);
                out.push_back(std::move(w));
            }
        start = end;
    }
    return out;
}

using Beta = std::vector<int>;
using SparseVec = std::map<std::size_t, FieldElem>;

inline void axpy(SparseVec& y, const FieldElem& a, std::size_t idx) {
    if (a.is_zero()) return;
    auto it = y.find(idx);
    if (it == y.end()) {
        y.emplace(idx, a);
    } else {
        it->second += a;
        if (it->second.is_zero()) y.erase(it);
    }
}

struct WeightSpace {
    Beta beta;
    std::size_t offset = 0;
    std::size_t dim = 0;
    std::vector<FieldElem> shap;  // Shapovalov norms of the orthogonal basis
    std::vector<int> kexp;        // (alpha_i, mu)
    std::vector<int> coroot;      // (mu, alpha_i^vee)
    bool interior = true;         // inside the nominal depth window
};

struct TruncModule {
    CartanData cd;
    Weight hw;
    int depth = 0;
    std::vector<std::size_t> string_complete;
    std::vector<WeightSpace> spaces;
    std::map<Beta, std::size_t> index;
    std::size_t total = 0;
    // ops[gen][i][col] = sparse column (target global index -> coefficient), gen 0 = E, 1 = F
    std::vector<std::vector<std::vector<std::vector<std::pair<std::size_t, FieldElem>>>>> ops;
    std::vector<std::vector<bool>> f_boundary;  // [i][global index]: F_i leaves the window
    std::vector<std::size_t> space_of;          // global index -> space index

    std::size_t mult(const Beta& b) const {
        auto it = index.find(b);
        return it == index.end() ? 0 : spaces[it->second].dim;
    }
    const WeightSpace* space(const Beta& b) const {
        auto it = index.find(b);
        return it == index.end() ? nullptr : &spaces[it->second];
    }
    Weight weight_of_space(const WeightSpace& s) const {
        Weight w = hw;
        w.beta = s.beta;
        return w;
    }
    Weight weight_of(std::size_t g) const { return weight_of_space(spaces[space_of[g]]); }
    const Beta& beta_of(std::size_t g) const { return spaces[space_of[g]].beta; }
    int level_of(std::size_t g) const {
        const auto& b = beta_of(g);
        return std::accumulate(b.begin(), b.end(), 0);
    }
    std::size_t local_of(std::size_t g) const { return g - spaces[space_of[g]].offset; }
    const FieldElem& shap_norm(std::size_t g) const { return spaces[space_of[g]].shap[local_of(g)]; }

    // exponent of the star-form rescaling: H = q^{-g} * Shapovalov
    int star_shift(const Beta& b) const {
        Weight beta_w = zero_weight(cd);
        for (std::size_t i = 0; i < cd.l; ++i) beta_w.beta[i] = -b[i];
        Rational g = bilinear(cd, hw, beta_w) - bilinear(cd, beta_w, beta_w) / 2;
        for (std::size_t i = 0; i < cd.l; ++i) g += b[i] * cd.d[i];
        if (g.get_den() != 1) throw ValidationError("non-integral star-form exponent");
        return static_cast<int>(g.get_num().get_si());
    }
    FieldElem star_norm(std::size_t g) const { return shap_norm(g) * FieldElem::q_pow(-star_shift(beta_of(g))); }
};

namespace detail {

inline int level(const Beta& b) { return std::accumulate(b.begin(), b.end(), 0); }

}  // namespace detail

inline TruncModule build_module(const CartanData& cd, const Weight& hw, int depth, std::vector<std::size_t> string_complete = {},
                                std::uint64_t seed = 11) {
    if (!hw.dominant()) throw ValidationError("highest weight is not dominant");
    if (hw.dom.size() != cd.l) throw ValidationError("highest weight has the wrong rank");
    if (depth < 0) throw ValidationError("negative depth");
    for (auto i : string_complete)
        if (i >= cd.l) throw ValidationError("string-complete index out of range");
    std::sort(string_complete.begin(), string_complete.end());
    string_complete.erase(std::unique(string_complete.begin(), string_complete.end()), string_complete.end());

    TruncModule m;
    m.cd = cd;
    m.hw = hw;
    m.depth = depth;
    m.string_complete = string_complete;
    const std::size_t l = cd.l;

    // Per space: E blocks E[i] (dim(beta - e_i) x dim), F blocks filled later.
    std::vector<std::vector<Mat<FieldElem>>> eblk;

    auto coroot_of = [&](const Beta& b, std::size_t i) {
        Weight w = hw;
        w.beta = b;
        return coroot_pairing(cd, w, i);
    };

    auto add_space = [&](const Beta& b, bool interior) {
        WeightSpace s;
        s.beta = b;
        s.interior = interior;
        for (std::size_t i = 0; i < l; ++i) {
            int c = coroot_of(b, i);
            s.coroot.push_back(c);
            s.kexp.push_back(c * cd.d[i]);
        }
        std::vector<Mat<FieldElem>> e(l);
        if (detail::level(b) == 0) {
            s.dim = 1;
            s.shap = {FieldElem(1)};
            m.index[b] = m.spaces.size();
            m.spaces.push_back(std::move(s));
            eblk.push_back(std::move(e));
            return;
        }
        // candidates F_j u for u in the orthogonal basis of beta - e_j
        struct Cand {
            std::size_t j, src, k;
        };
        std::vector<Cand> cands;
        for (std::size_t j = 0; j < l; ++j) {
            if (b[j] == 0) continue;
            Beta up = b;
            --up[j];
            auto it = m.index.find(up);
            if (it == m.index.end()) continue;
            for (std::size_t k = 0; k < m.spaces[it->second].dim; ++k) cands.push_back({j, it->second, k});
        }
        if (cands.empty()) return;
        // E_i images of each candidate, as coordinate blocks per i
        std::vector<std::size_t> tgt(l, SIZE_MAX), tdim(l, 0), roff(l, 0);
        std::size_t rows = 0;
        for (std::size_t i = 0; i < l; ++i) {
            if (b[i] == 0) continue;
            Beta up = b;
            --up[i];
            auto it = m.index.find(up);
            if (it == m.index.end()) continue;
            tgt[i] = it->second;
            tdim[i] = m.spaces[it->second].dim;
            roff[i] = rows;
            rows += tdim[i];
        }
        Mat<FieldElem> img(cands.size(), std::vector<FieldElem>(rows));
        for (std::size_t c = 0; c < cands.size(); ++c) {
            const auto& cd_ = cands[c];
            const WeightSpace& src = m.spaces[cd_.src];
            for (std::size_t i = 0; i < l; ++i) {
                if (tgt[i] == SIZE_MAX) continue;
                // E_i F_j u = F_j E_i u + delta_ij [(wt u, alpha_i^vee)]_{q_i} u
                if (i == cd_.j) {
                    // tgt[i] == src here
                    img[c][roff[i] + cd_.k] += q_int(src.coroot[i], cd.d[i]);
                }
                const auto& eb = eblk[cd_.src][i];
                if (eb.empty()) continue;
                // E_i u lives in src.beta - e_i; apply F_j from there into b - e_i
                Beta mid = src.beta;
                --mid[i];
                auto mit = m.index.find(mid);
                if (mit == m.index.end()) continue;
                for (std::size_t r = 0; r < eb.size(); ++r) {
                    const FieldElem& coef = eb[r][cd_.k];
                    if (coef.is_zero()) continue;
                    std::size_t g = m.spaces[mit->second].offset + r;
                    for (const auto& [t, v] : m.ops[1][cd_.j][g]) {
                        std::size_t tl = t - m.spaces[tgt[i]].offset;
                        img[c][roff[i] + tl] += coef * v;
                    }
                }
            }
        }
        SpanBasis sb = span_basis(img, seed);
        std::size_t r = sb.rows.size();
        if (r == 0) return;
        std::vector<std::size_t> piv = sb.rows;
        std::sort(piv.begin(), piv.end());
        // Shapovalov Gram of the pivot candidates: S(F_j u, y) = S(u, E_j y)
        auto gram = [&](std::size_t a, std::size_t c) {
            const auto& ca = cands[a];
            const WeightSpace& src = m.spaces[ca.src];
            return img[c][roff[ca.j] + ca.k] * src.shap[ca.k];
        };
        Mat<FieldElem> gm(r, std::vector<FieldElem>(r));
        for (std::size_t x = 0; x < r; ++x)
            for (std::size_t y = 0; y < r; ++y) gm[x][y] = gram(piv[x], piv[y]);
        // Gram-Schmidt: u_m = sum_k t[m][k] c_k
        Mat<FieldElem> t(r, std::vector<FieldElem>(r));
        std::vector<FieldElem> norm(r);
        for (std::size_t x = 0; x < r; ++x) {
            t[x][x] = 1;
            for (std::size_t y = 0; y < x; ++y) {
                // S(c_x, u_y) = sum_k t[y][k] S(c_x, c_k)
                FieldElem s;
                for (std::size_t k = 0; k <= y; ++k)
                    if (!t[y][k].is_zero()) s += t[y][k] * gm[x][k];
                if (s.is_zero()) continue;
                FieldElem f = s / norm[y];
                for (std::size_t k = 0; k <= y; ++k)
                    if (!t[y][k].is_zero()) t[x][k] -= f * t[y][k];
            }
            FieldElem nn;
            for (std::size_t a = 0; a <= x; ++a) {
                if (t[x][a].is_zero()) continue;
                for (std::size_t c = 0; c <= x; ++c)
                    if (!t[x][c].is_zero()) nn += t[x][a] * t[x][c] * gm[a][c];
            }
            if (nn.is_zero()) throw FieldError("isotropic vector in Shapovalov form");
            norm[x] = nn;
        }
        s.dim = r;
        s.shap = norm;
        for (std::size_t i = 0; i < l; ++i) {
            if (tgt[i] == SIZE_MAX) continue;
            Mat<FieldElem> blk(tdim[i], std::vector<FieldElem>(r));
            for (std::size_t x = 0; x < r; ++x)
                for (std::size_t k = 0; k <= x; ++k) {
                    if (t[x][k].is_zero()) continue;
                    for (std::size_t rr = 0; rr < tdim[i]; ++rr) {
                        const FieldElem& v = img[piv[k]][roff[i] + rr];
                        if (!v.is_zero()) blk[rr][x] += t[x][k] * v;
                    }
                }
            e[i] = std::move(blk);
        }
        std::size_t sidx = m.spaces.size();
        s.offset = m.total;
        m.index[b] = sidx;
        m.spaces.push_back(std::move(s));
        eblk.push_back(std::move(e));
        WeightSpace& ns = m.spaces.back();
        m.total += ns.dim;
        for (std::size_t g = 0; g < 2; ++g)
            for (std::size_t i = 0; i < l; ++i) m.ops[g][i].resize(m.total);
        m.space_of.resize(m.total, sidx);
        // fill E columns of the new space and F columns into it (F is the Shapovalov adjoint of E)
        for (std::size_t i = 0; i < l; ++i) {
            if (tgt[i] == SIZE_MAX) continue;
            const WeightSpace& up = m.spaces[tgt[i]];
            const auto& blk = eblk[sidx][i];
            for (std::size_t x = 0; x < ns.dim; ++x)
                for (std::size_t rr = 0; rr < up.dim; ++rr)
                    if (!blk[rr][x].is_zero()) m.ops[0][i][ns.offset + x].emplace_back(up.offset + rr, blk[rr][x]);
            for (std::size_t rr = 0; rr < up.dim; ++rr)
                for (std::size_t x = 0; x < ns.dim; ++x)
                    if (!blk[rr][x].is_zero())
                        m.ops[1][i][up.offset + rr].emplace_back(ns.offset + x, blk[rr][x] * up.shap[rr] / ns.shap[x]);
        }
    };

    m.ops.assign(2, std::vector<std::vector<std::vector<std::pair<std::size_t, FieldElem>>>>(l));
    // top space
    {
        Beta z(l, 0);
        add_space(z, true);
        m.spaces[0].offset = 0;
        m.total = 1;
        for (std::size_t g = 0; g < 2; ++g)
            for (std::size_t i = 0; i < l; ++i) m.ops[g][i].resize(1);
        m.space_of = {0};
    }
    std::set<Beta> processed{Beta(l, 0)};
    auto grow_level = [&](const std::vector<Beta>& prev, auto&& allowed, bool interior) {
        std::set<Beta> next;
        for (const auto& b : prev)
            for (std::size_t j = 0; j < l; ++j) {
                Beta nb = b;
                ++nb[j];
                if (processed.count(nb) || !allowed(nb)) continue;
                next.insert(nb);
            }
        std::vector<Beta> out;
        for (const auto& nb : next) {
            processed.insert(nb);
            add_space(nb, interior);
            if (m.index.count(nb)) out.push_back(nb);
        }
        return out;
    };
    std::vector<Beta> frontier{Beta(l, 0)};
    for (int h = 1; h <= depth; ++h) {
        frontier = grow_level(frontier, [&](const Beta& b) { return detail::level(b) <= depth; }, true);
        if (frontier.empty()) break;
    }
    // string completion: extend downward i-strings of interior weights, closed upward
    if (!string_complete.empty()) {
        std::set<Beta> extra;
        for (const auto& s : std::vector<WeightSpace>(m.spaces)) {
            for (auto i : string_complete) {
                int top = 0;
                Beta up = s.beta;
                while (up[i] > 0) {
                    --up[i];
                    if (!m.index.count(up)) break;
                    ++top;
                }
                int bottom = top + s.coroot[i];
                for (int t = 1; t <= bottom; ++t) {
                    Beta nb = s.beta;
                    nb[i] += t;
                    if (detail::level(nb) > depth) extra.insert(nb);
                }
            }
        }
        auto allowed = [&](const Beta& b) {
            for (const auto& x : extra) {
                bool le = true;
                for (std::size_t k = 0; k < l && le; ++k) le = b[k] <= x[k];
                if (le) return true;
            }
            return false;
        };
        std::vector<Beta> all;
        for (const auto& s : m.spaces) all.push_back(s.beta);
        int maxlev = 0;
        for (const auto& x : extra) maxlev = std::max(maxlev, detail::level(x));
        for (int h = depth + 1; h <= maxlev; ++h) {
            std::vector<Beta> lev;
            for (const auto& s : m.spaces)
                if (detail::level(s.beta) == h - 1) lev.push_back(s.beta);
            grow_level(lev, allowed, false);
        }
    }
    // boundary flags: F_i leaves the window while the target could be a weight
    m.f_boundary.assign(l, std::vector<bool>(m.total, false));
    for (const auto& s : m.spaces) {
        for (std::size_t i = 0; i < l; ++i) {
            Beta down = s.beta;
            ++down[i];
            if (processed.count(down)) continue;
            int top = 0;
            Beta up = s.beta;
            while (up[i] > 0) {
                --up[i];
                if (!m.index.count(up)) break;
                ++top;
            }
            if (top + s.coroot[i] >= 1)
                for (std::size_t x = 0; x < s.dim; ++x) m.f_boundary[i][s.offset + x] = true;
        }
    }
    return m;
}

inline FieldElem k_scalar(const TruncModule& m, std::size_t g, std::size_t i, bool inverse) {
    int e = m.spaces[m.space_of[g]].kexp[i];
    return FieldElem::q_pow(inverse ? -e : e);
}

// Action of one letter; `sharp` twists by omega (E -> -F, F -> -E, K -> K^-1).
inline SparseVec act(const TruncModule& m, const Letter& x, const SparseVec& v, bool sharp = false) {
    if (x.i >= m.cd.l) throw std::invalid_argument("letter index out of range");
    Gen g = x.g;
    FieldElem sign(1);
    if (sharp) {
        switch (g) {
            case Gen::E: g = Gen::F; sign = FieldElem(-1); break;
            case Gen::F: g = Gen::E; sign = FieldElem(-1); break;
            case Gen::K: g = Gen::Kinv; break;
            case Gen::Kinv: g = Gen::K; break;
        }
    }
    SparseVec out;
    for (const auto& [idx, c] : v) {
        if (g == Gen::K || g == Gen::Kinv) {
            axpy(out, c * k_scalar(m, idx, x.i, g == Gen::Kinv), idx);
            continue;
        }
        int gi = g == Gen::E ? 0 : 1;
        if (gi == 1 && m.f_boundary[x.i][idx]) throw TruncationError("truncation exceeded by " + letter_str({g, x.i}) + " at level " + std::to_string(m.level_of(idx)));
        for (const auto& [t, a] : m.ops[gi][x.i][idx]) axpy(out, c * a * sign, t);
    }
    return out;
}

inline SparseVec apply_word(const TruncModule& m, const UWord& w, SparseVec v, bool sharp = false) {
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        v = act(m, *it, v, sharp);
        if (v.empty()) break;
    }
    return v;
}

inline SparseVec basis_vec(std::size_t g) { return SparseVec{{g, FieldElem(1)}}; }

// Dual vectors are sparse coordinate functionals on the orthogonal basis.
using DualVec = SparseVec;

inline FieldElem pairing(const DualVec& l, const SparseVec& v) {
    FieldElem s;
    for (const auto& [i, c] : l) {
        auto it = v.find(i);
        if (it != v.end()) s += c * it->second;
    }
    return s;
}

// (u . l)(v) = l(S(u) v) for a single letter u; S(E) = -K^-1 E, S(F) = -F K, S(K) = K^-1.
inline DualVec dual_act(const TruncModule& m, const Letter& x, const DualVec& l) {
    UWord s;
    FieldElem sign(1);
    switch (x.g) {
        case Gen::E: s = {{Gen::Kinv, x.i}, {Gen::E, x.i}}; sign = FieldElem(-1); break;
        case Gen::F: s = {{Gen::F, x.i}, {Gen::K, x.i}}; sign = FieldElem(-1); break;
        case Gen::K: s = {{Gen::Kinv, x.i}}; break;
        case Gen::Kinv: s = {{Gen::K, x.i}}; break;
    }
    // transpose: (l o S(u))_j = sum_i l_i (S(u))_{ij}
    DualVec out;
    for (std::size_t j = 0; j < m.total; ++j) {
        SparseVec img;
        try {
            img = apply_word(m, s, basis_vec(j));
        } catch (const TruncationError&) {
            continue;
        }
        FieldElem c = pairing(l, img) * sign;
        if (!c.is_zero()) out[j] = c;
    }
    return out;
}

struct SerreResult {
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t nonzero = 0;
    FieldElem worst;  // a nonzero defect coefficient, or 0
};

// Quantum Serre defect for (i, j), both E and F versions, on interior basis vectors.
inline SerreResult serre_defect(const TruncModule& m, std::size_t i, std::size_t j, int binom_perturb = 0) {
    if (i == j) throw std::invalid_argument("serre_defect needs i != j");
    int n = 1 - m.cd.a[i][j];
    SerreResult res;
    for (Gen g : {Gen::E, Gen::F}) {
        for (std::size_t b = 0; b < m.total; ++b) {
            SparseVec total;
            bool skip = false;
            for (int k = 0; k <= n && !skip; ++k) {
                FieldElem c = q_binom(n, k, m.cd.d[i]);
                if (k == 1) c += binom_perturb;
                if (k % 2) c = -c;
                UWord w;
                for (int t = 0; t < k; ++t) w.push_back({g, i});
                w.push_back({g, j});
                for (int t = 0; t < n - k; ++t) w.push_back({g, i});
                try {
                    for (const auto& [idx, v] : apply_word(m, w, basis_vec(b))) axpy(total, c * v, idx);
                } catch (const TruncationError&) {
                    skip = true;
                }
            }
            if (skip) {
                ++res.skipped;
                continue;
            }
            ++res.checked;
            if (!total.empty()) {
                ++res.nonzero;
                res.worst = total.begin()->second;
            }
        }
    }
    return res;
}

// (E_i F_j - F_j E_i) v - delta_ij [(mu, alpha_i^vee)]_{q_i} v on interior vectors.
inline SerreResult cross_defect(const TruncModule& m) {
    SerreResult res;
    for (std::size_t b = 0; b < m.total; ++b)
        for (std::size_t i = 0; i < m.cd.l; ++i)
            for (std::size_t j = 0; j < m.cd.l; ++j) {
                SparseVec total;
                try {
                    auto ef = apply_word(m, {{Gen::E, i}, {Gen::F, j}}, basis_vec(b));
                    auto fe = apply_word(m, {{Gen::F, j}, {Gen::E, i}}, basis_vec(b));
                    for (const auto& [idx, v] : ef) axpy(total, v, idx);
                    for (const auto& [idx, v] : fe) axpy(total, -v, idx);
                } catch (const TruncationError&) {
                    ++res.skipped;
                    continue;
                }
                if (i == j) axpy(total, -q_int(m.spaces[m.space_of[b]].coroot[i], m.cd.d[i]), b);
                ++res.checked;
                if (!total.empty()) {
                    ++res.nonzero;
                    res.worst = total.begin()->second;
                }
            }
    return res;
}

// Action table of the omega-twisted module L(Lambda)^sharp for one generator letter.
struct SharpTable {
    std::vector<std::vector<std::pair<std::size_t, FieldElem>>> cols;
};

inline SharpTable dual_sharp(const TruncModule& m, const Letter& x) {
    SharpTable t;
    t.cols.resize(m.total);
    for (std::size_t b = 0; b < m.total; ++b) {
        try {
            for (const auto& [idx, v] : act(m, x, basis_vec(b), true)) t.cols[b].emplace_back(idx, v);
        } catch (const TruncationError&) {
        }
    }
    return t;
}

inline std::map<Beta, std::size_t> multiplicities(const TruncModule& m) {
    std::map<Beta, std::size_t> out;
    for (const auto& s : m.spaces) out[s.beta] = s.dim;
    return out;
}

// Independent oracle: weight multiplicities from the Verma-module Shapovalov
// Gram matrix of F-monomials, exact rank at a rational point q0.
inline std::map<Beta, std::size_t> verma_multiplicities(const CartanData& cd, const Weight& hw, int depth, const Rational& q0) {
    const std::size_t l = cd.l;
    auto qn = [&](int n, int d) {
        Rational x = LaurentPoly::pow(q0, d);
        return Rational((LaurentPoly::pow(x, n) - LaurentPoly::pow(x, -n)) / (x - 1 / x));
    };
    using Mono = std::vector<std::size_t>;  // F_{m[0]} F_{m[1]} ... v
    auto wt_coroot = [&](const Mono& mono, std::size_t from, std::size_t i) {
        Weight w = hw;
        for (std::size_t t = from; t < mono.size(); ++t) ++w.beta[mono[t]];
        return coroot_pairing(cd, w, i);
    };
    auto apply_e = [&](std::size_t i, const std::map<Mono, Rational>& v) {
        std::map<Mono, Rational> out;
        for (const auto& [mono, c] : v)
            for (std::size_t k = 0; k < mono.size(); ++k) {
                if (mono[k] != i) continue;
                Rational f = c * qn(wt_coroot(mono, k + 1, i), cd.d[i]);
                if (f == 0) continue;
                Mono rest = mono;
                rest.erase(rest.begin() + static_cast<long>(k));
                out[rest] += f;
            }
        return out;
    };
    std::map<Beta, std::size_t> out;
    std::vector<Beta> betas{Beta(l, 0)};
    for (std::size_t k = 0; k < betas.size(); ++k) {
        if (detail::level(betas[k]) >= depth) continue;
        for (std::size_t j = 0; j < l; ++j) {
            Beta nb = betas[k];
            ++nb[j];
            if (std::find(betas.begin(), betas.end(), nb) == betas.end()) betas.push_back(nb);
        }
    }
    for (const auto& b : betas) {
        Mono base;
        for (std::size_t i = 0; i < l; ++i)
            for (int t = 0; t < b[i]; ++t) base.push_back(i);
        std::vector<Mono> monos;
        std::sort(base.begin(), base.end());
        do monos.push_back(base);
        while (std::next_permutation(base.begin(), base.end()));
        Mat<Rational> g(monos.size(), std::vector<Rational>(monos.size()));
        for (std::size_t x = 0; x < monos.size(); ++x)
            for (std::size_t y = 0; y < monos.size(); ++y) {
                // S(F_x v, F_y v) = <v, E_{x[n-1]} ... E_{x[0]} F_y v>
                std::map<Mono, Rational> v{{monos[y], Rational(1)}};
                for (auto e : monos[x]) v = apply_e(e, v);
                auto f = v.find(Mono{});
                g[x][y] = f == v.end() ? Rational(0) : f->second;
            }
        std::size_t r = rank(g);
        if (r) out[b] = r;
    }
    return out;
}

inline nlohmann::json to_json(const TruncModule& m) {
    using nlohmann::json;
    json j;
    j["cartan"] = to_json(m.cd);
    j["hw"] = to_json(m.hw);
    j["depth"] = m.depth;
    j["string_complete"] = m.string_complete;
    json basis = json::array(), mult = json::array(), shap = json::array();
    for (const auto& s : m.spaces) {
        mult.push_back(json{{"beta", s.beta}, {"dim", s.dim}, {"interior", s.interior}});
        for (std::size_t k = 0; k < s.dim; ++k) {
            basis.push_back(json{{"beta", s.beta}, {"index", k}});
            shap.push_back(s.shap[k].str());
        }
    }
    j["basis"] = basis;
    j["mult"] = mult;
    j["shapovalov"] = shap;
    json ops = json::object();
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t i = 0; i < m.cd.l; ++i) {
            json trip = json::array();
            for (std::size_t c = 0; c < m.total; ++c)
                for (const auto& [r, v] : m.ops[g][i][c]) trip.push_back(json::array({r, c, v.str()}));
            ops[(g == 0 ? "E" : "F") + std::to_string(i)] = trip;
        }
    j["ops"] = ops;
    json bd = json::object();
    for (std::size_t i = 0; i < m.cd.l; ++i) {
        json idx = json::array();
        for (std::size_t c = 0; c < m.total; ++c)
            if (m.f_boundary[i][c]) idx.push_back(c);
        bd["F" + std::to_string(i)] = idx;
    }
    j["boundary"] = bd;
    return j;
}

inline TruncModule module_from_json(const nlohmann::json& j) {
    TruncModule m;
    m.cd = cartan_from_json(j.at("cartan"));
    m.hw = weight_from_json(j.at("hw"));
    m.depth = j.at("depth").get<int>();
    m.string_complete = j.at("string_complete").get<std::vector<std::size_t>>();
    const std::size_t l = m.cd.l;
    const auto& shap = j.at("shapovalov");
    for (const auto& e : j.at("mult")) {
        WeightSpace s;
        s.beta = e.at("beta").get<Beta>();
        if (s.beta.size() != l) throw ValidationError("module weight has the wrong rank");
        s.dim = e.at("dim").get<std::size_t>();
        s.interior = e.value("interior", true);
        s.offset = m.total;
        Weight w = m.hw;
        w.beta = s.beta;
        for (std::size_t i = 0; i < l; ++i) {
            s.coroot.push_back(coroot_pairing(m.cd, w, i));
            s.kexp.push_back(s.coroot.back() * m.cd.d[i]);
        }
        for (std::size_t k = 0; k < s.dim; ++k) s.shap.push_back(FieldElem::parse(shap.at(m.total + k).get<std::string>()));
        m.index[s.beta] = m.spaces.size();
        for (std::size_t k = 0; k < s.dim; ++k) m.space_of.push_back(m.spaces.size());
        m.total += s.dim;
        m.spaces.push_back(std::move(s));
    }
    m.ops.assign(2, std::vector<std::vector<std::vector<std::pair<std::size_t, FieldElem>>>>(l, std::vector<std::vector<std::pair<std::size_t, FieldElem>>>(m.total)));
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t i = 0; i < l; ++i) {
            for (const auto& t : j.at("ops").at((g == 0 ? "E" : "F") + std::to_string(i))) {
                std::size_t r = t.at(0).get<std::size_t>(), c = t.at(1).get<std::size_t>();
                if (r >= m.total || c >= m.total) throw ValidationError("operator triplet out of range");
                m.ops[g][i][c].emplace_back(r, FieldElem::parse(t.at(2).get<std::string>()));
            }
        }
    m.f_boundary.assign(l, std::vector<bool>(m.total, false));
    for (std::size_t i = 0; i < l; ++i)
        for (const auto& c : j.at("boundary").at("F" + std::to_string(i))) m.f_boundary[i].at(c.get<std::size_t>()) = true;
    return m;
}

}  // namespace qkm
