#pragma once

#include "qkm/linalg.hpp"
#include "qkm/qfield.hpp"

#include <json.hpp>

#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkm {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using IntMat = std::vector<std::vector<int>>;

struct CartanData {
    std::size_t l = 0;
    IntMat a;
    std::vector<int> d;
    std::vector<int> marks;
    Mat<Rational> ext_gram;
    bool affine = false;
    bool a0 = false;  // every connected component is of infinite type

    int sym(std::size_t i, std::size_t j) const { return d[i] * a[i][j]; }
};

struct Weight {
    std::vector<int> dom;
    std::vector<int> beta;
    Rational delta = 0;

    friend bool operator==(const Weight& x, const Weight& y) { return x.dom == y.dom && x.beta == y.beta && x.delta == y.delta; }
    friend bool operator!=(const Weight& x, const Weight& y) { return !(x == y); }
    bool dominant() const {
        if (delta != 0) return false;
        for (int b : beta)
            if (b != 0) return false;
        for (int c : dom)
            if (c < 0) return false;
        return true;
    }
};

using WeylWord = std::vector<std::size_t>;

inline Weight zero_weight(const CartanData& cd) { return {std::vector<int>(cd.l, 0), std::vector<int>(cd.l, 0), 0}; }

inline Weight fundamental(const CartanData& cd, std::size_t i) {
    Weight w = zero_weight(cd);
    w.dom.at(i) = 1;
    return w;
}

inline Weight weight_from_dom(const CartanData& cd, const std::vector<int>& dom) {
    if (dom.size() != cd.l) throw ValidationError("weight has " + std::to_string(dom.size()) + " entries, expected " + std::to_string(cd.l));
    Weight w = zero_weight(cd);
    w.dom = dom;
    return w;
}

inline Weight rho(const CartanData& cd) { return weight_from_dom(cd, std::vector<int>(cd.l, 1)); }

// delta as a weight: the imaginary root sum marks_i alpha_i
inline Weight delta_weight(const CartanData& cd) {
    Weight w = zero_weight(cd);
    w.delta = 1;
    return w;
}

namespace detail {

inline Rational det(Mat<Rational> m) {
    std::size_t n = m.size();
    Rational dt = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m[p][c] == 0) ++p;
        if (p == n) return 0;
        if (p != c) {
            std::swap(m[p], m[c]);
            dt = -dt;
        }
        dt *= m[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            if (m[r][c] == 0) continue;
            Rational f = m[r][c] / m[c][c];
            for (std::size_t j = c; j < n; ++j) m[r][j] -= f * m[c][j];
        }
    }
    return dt;
}

inline Mat<Rational> inverse(const Mat<Rational>& m) {
    std::size_t n = m.size();
    Mat<Rational> inv(n, std::vector<Rational>(n));
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<Rational> e(n, 0);
        e[c] = 1;
        auto x = solve_square(m, e);
        if (!x) throw ValidationError("singular matrix in extension");
        for (std::size_t r = 0; r < n; ++r) inv[r][c] = (*x)[r];
    }
    return inv;
}

inline bool positive_definite(const Mat<Rational>& m) {
    for (std::size_t k = 1; k <= m.size(); ++k) {
        Mat<Rational> sub(k, std::vector<Rational>(k));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) sub[i][j] = m[i][j];
        if (det(sub) <= 0) return false;
    }
    return true;
}

// (omega_i, omega_j) = d_i d_j (B^{-1})_{ij} on the index set `idx`
inline void fill_gram(const CartanData& cd, const std::vector<std::size_t>& idx, Mat<Rational>& g) {
    std::size_t n = idx.size();
    if (n == 0) return;
    Mat<Rational> b(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b[i][j] = cd.sym(idx[i], idx[j]);
    auto bi = inverse(b);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g[idx[i]][idx[j]] = Rational(cd.d[idx[i]] * cd.d[idx[j]]) * bi[i][j];
}

}  // namespace detail

inline CartanData validate_cartan(const IntMat& a) {
    CartanData cd;
    cd.l = a.size();
    if (cd.l == 0) throw ValidationError("empty Cartan matrix");
    for (const auto& row : a)
        if (row.size() != cd.l) throw ValidationError("Cartan matrix is not square");
    for (std::size_t i = 0; i < cd.l; ++i) {
        if (a[i][i] != 2) throw ValidationError("axiom a_ii = 2 violated at i = " + std::to_string(i));
        for (std::size_t j = 0; j < cd.l; ++j) {
            if (i == j) continue;
            if (a[i][j] > 0) throw ValidationError("axiom a_ij <= 0 violated at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            if ((a[i][j] == 0) != (a[j][i] == 0))
                throw ValidationError("axiom a_ij = 0 <=> a_ji = 0 violated at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
    cd.a = a;
    // symmetrizers by propagation along the Dynkin graph
    std::vector<Rational> d(cd.l, 0);
    std::vector<int> comp(cd.l, -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < cd.l; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = ncomp;
        d[s] = 1;
        while (!stack.empty()) {
            std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < cd.l; ++j) {
                if (i == j || a[i][j] == 0) continue;
                Rational dj = d[i] * (Rational(a[i][j]) / a[j][i]);
                if (comp[j] < 0) {
                    comp[j] = ncomp;
                    d[j] = dj;
                    stack.push_back(j);
                } else if (d[j] != dj) {
                    throw ValidationError("matrix is not symmetrizable (d_i a_ij != d_j a_ji)");
                }
            }
        }
        ++ncomp;
    }
    // clear denominators per component and make coprime
    cd.d.assign(cd.l, 0);
    for (int c = 0; c < ncomp; ++c) {
        mpz_class lcm = 1;
        for (std::size_t i = 0; i < cd.l; ++i)
            if (comp[i] == c) lcm = lcm * d[i].get_den() / gcd(lcm, mpz_class(d[i].get_den()));
        mpz_class g = 0;
        std::vector<mpz_class> vals(cd.l);
        for (std::size_t i = 0; i < cd.l; ++i)
            if (comp[i] == c) {
                Rational v = d[i] * lcm;
                vals[i] = v.get_num();
                g = gcd(g, vals[i]);
            }
        for (std::size_t i = 0; i < cd.l; ++i)
            if (comp[i] == c) cd.d[i] = static_cast<int>(mpz_class(vals[i] / g).get_si());
    }
    Mat<Rational> b(cd.l, std::vector<Rational>(cd.l));
    for (std::size_t i = 0; i < cd.l; ++i)
        for (std::size_t j = 0; j < cd.l; ++j) b[i][j] = cd.sym(i, j);
    std::size_t rk = rank(b);
    std::size_t corank = cd.l - rk;
    if (corank > 1) throw ValidationError("corank " + std::to_string(corank) + " > 1 is not supported");
    cd.ext_gram.assign(cd.l, std::vector<Rational>(cd.l, 0));
    if (corank == 1) {
        // kernel vector of b
        auto e = echelon(b);
        std::vector<bool> piv(cd.l, false);
        for (auto p : e.pivots) piv[p] = true;
        std::size_t free = 0;
        while (piv[free]) ++free;
        std::vector<Rational> k(cd.l, 0);
        k[free] = 1;
        for (std::size_t r = 0; r < e.rows.size(); ++r) k[e.pivots[r]] = -e.rows[r][free];
        bool pos = true, neg = true;
        for (auto& x : k) {
            if (x <= 0) pos = false;
            if (x >= 0) neg = false;
        }
        if (neg)
            for (auto& x : k) x = -x;
        if (pos || neg) {
            mpz_class lcm = 1;
            for (auto& x : k) lcm = lcm * x.get_den() / gcd(lcm, mpz_class(x.get_den()));
            mpz_class g = 0;
            for (auto& x : k) g = gcd(g, mpz_class(Rational(x * lcm).get_num()));
            for (auto& x : k) cd.marks.push_back(static_cast<int>(mpz_class(Rational(x * lcm).get_num() / g).get_si()));
            cd.affine = true;
        } else {
            throw ValidationError("degenerate matrix whose kernel is not positive (not affine)");
        }
        std::vector<std::size_t> rest;
        for (std::size_t i = 1; i < cd.l; ++i) rest.push_back(i);
        detail::fill_gram(cd, rest, cd.ext_gram);
    } else {
        std::vector<std::size_t> all(cd.l);
        std::iota(all.begin(), all.end(), 0);
        detail::fill_gram(cd, all, cd.ext_gram);
    }
    cd.a0 = true;
    for (int c = 0; c < ncomp; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < cd.l; ++i)
            if (comp[i] == c) idx.push_back(i);
        Mat<Rational> sub(idx.size(), std::vector<Rational>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) sub[i][j] = b[idx[i]][idx[j]];
        if (detail::positive_definite(sub)) cd.a0 = false;
    }
    return cd;
}

// Root-lattice coordinates of x (coefficient of alpha_i), delta expanded via marks.
inline std::vector<Rational> root_part(const CartanData& cd, const Weight& x) {
    std::vector<Rational> r(cd.l);
    for (std::size_t i = 0; i < cd.l; ++i) {
        r[i] = -x.beta.at(i);
        if (x.delta != 0) {
            if (!cd.affine) throw ValidationError("delta shift on a non-affine Cartan datum");
            r[i] += x.delta * cd.marks[i];
        }
    }
    return r;
}

inline Rational bilinear(const CartanData& cd, const Weight& x, const Weight& y) {
    auto rx = root_part(cd, x), ry = root_part(cd, y);
    Rational s = 0;
    for (std::size_t i = 0; i < cd.l; ++i) {
        for (std::size_t j = 0; j < cd.l; ++j) {
            if (x.dom[i] && y.dom[j]) s += Rational(x.dom[i] * y.dom[j]) * cd.ext_gram[i][j];
            if (rx[i] != 0 && ry[j] != 0) s += rx[i] * ry[j] * cd.sym(i, j);
        }
        s += Rational(x.dom[i] * cd.d[i]) * ry[i];
        s += Rational(y.dom[i] * cd.d[i]) * rx[i];
    }
    return s;
}

inline Weight alpha(const CartanData& cd, std::size_t i) {
    Weight w = zero_weight(cd);
    w.beta.at(i) = -1;
    return w;
}

inline Weight operator+(Weight x, const Weight& y) {
    for (std::size_t i = 0; i < x.dom.size(); ++i) {
        x.dom[i] += y.dom[i];
        x.beta[i] += y.beta[i];
    }
    x.delta += y.delta;
    return x;
}

inline Weight operator-(Weight x, const Weight& y) {
    for (std::size_t i = 0; i < x.dom.size(); ++i) {
        x.dom[i] -= y.dom[i];
        x.beta[i] -= y.beta[i];
    }
    x.delta -= y.delta;
    return x;
}

// (x, alpha_i^vee), an integer for integral weights
inline int coroot_pairing(const CartanData& cd, const Weight& x, std::size_t i) {
    Rational s = x.dom.at(i) * cd.d[i];
    for (std::size_t j = 0; j < cd.l; ++j) s -= Rational(x.beta[j] * cd.sym(j, i));
    s /= cd.d[i];
    if (s.get_den() != 1) throw ValidationError("non-integral coroot pairing");
    return static_cast<int>(s.get_num().get_si());
}

inline Weight reflect(const CartanData& cd, std::size_t i, Weight x) {
    if (i >= cd.l) throw ValidationError("reflection index out of range");
    x.beta[i] += coroot_pairing(cd, x, i);
    return x;
}

inline Weight weyl_act(const CartanData& cd, const WeylWord& w, Weight x) {
    for (auto it = w.rbegin(); it != w.rend(); ++it) x = reflect(cd, *it, x);
    return x;
}

struct ReducedWord {
    WeylWord word;
    std::size_t length = 0;
};

inline ReducedWord reduce_word(const CartanData& cd, const WeylWord& w) {
    const Weight r = rho(cd);
    WeylWord u;  // reduced, acting as u(rho)
    Weight ur = r;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        std::size_t i = *it;
        if (i >= cd.l) throw ValidationError("word letter out of range");
        Weight target = reflect(cd, i, ur);
        if (coroot_pairing(cd, ur, i) > 0) {
            u.insert(u.begin(), i);
        } else {
            // exchange condition: s_i u equals u with one letter deleted
            bool found = false;
            for (std::size_t t = 0; t < u.size() && !found; ++t) {
                WeylWord cand = u;
                cand.erase(cand.begin() + static_cast<long>(t));
                if (weyl_act(cd, cand, r) == target) {
                    u = std::move(cand);
                    found = true;
                }
            }
            if (!found) throw ValidationError("exchange condition failed (internal error)");
        }
        ur = target;
    }
    return {u, u.size()};
}

inline bool same_element(const CartanData& cd, const WeylWord& a, const WeylWord& b) {
    return weyl_act(cd, a, rho(cd)) == weyl_act(cd, b, rho(cd));
}

inline std::string describe(const CartanData& cd) {
    std::ostringstream os;
    os << (cd.affine ? "affine" : "non-affine") << " rank " << cd.l << ", d = (";
    for (std::size_t i = 0; i < cd.l; ++i) os << (i ? "," : "") << cd.d[i];
    os << ")";
    if (cd.affine) {
        os << ", marks = (";
        for (std::size_t i = 0; i < cd.l; ++i) os << (i ? "," : "") << cd.marks[i];
        os << ")";
    }
    os << ", A0 " << (cd.a0 ? "holds" : "fails");
    return os.str();
}

inline nlohmann::json to_json(const CartanData& cd) {
    nlohmann::json j;
    j["a"] = cd.a;
    j["d"] = cd.d;
    j["marks"] = cd.marks;
    nlohmann::json g = nlohmann::json::array();
    for (const auto& row : cd.ext_gram) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& x : row) r.push_back(x.get_str());
        g.push_back(r);
    }
    j["ext_gram"] = g;
    j["affine"] = cd.affine;
    return j;
}

inline CartanData cartan_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("a")) throw ValidationError("CartanData JSON needs an \"a\" matrix");
    CartanData cd = validate_cartan(j.at("a").get<IntMat>());
    if (j.contains("d")) {
        auto d = j.at("d").get<std::vector<int>>();
        if (d != cd.d) throw ValidationError("stored symmetrizers disagree with the matrix");
    }
    if (j.contains("ext_gram")) {
        const auto& g = j.at("ext_gram");
        if (g.size() != cd.l) throw ValidationError("ext_gram has wrong size");
        for (std::size_t r = 0; r < cd.l; ++r) {
            if (g[r].size() != cd.l) throw ValidationError("ext_gram has wrong size");
            for (std::size_t c = 0; c < cd.l; ++c) {
                const auto& x = g[r][c];
                cd.ext_gram[r][c] = x.is_string() ? parse_rational(x.get<std::string>()) : Rational(x.get<long>());
            }
        }
        for (std::size_t r = 0; r < cd.l; ++r)
            for (std::size_t c = 0; c < cd.l; ++c)
                if (cd.ext_gram[r][c] != cd.ext_gram[c][r]) throw ValidationError("ext_gram is not symmetric");
    }
    if (j.contains("affine") && j.at("affine").get<bool>() != cd.affine) throw ValidationError("stored affine flag disagrees with the matrix");
    return cd;
}

inline nlohmann::json to_json(const Weight& w) {
    return nlohmann::json{{"dom", w.dom}, {"beta", w.beta}, {"delta", w.delta.get_str()}};
}

inline Weight weight_from_json(const nlohmann::json& j) {
    Weight w;
    w.dom = j.at("dom").get<std::vector<int>>();
    w.beta = j.contains("beta") ? j.at("beta").get<std::vector<int>>() : std::vector<int>(w.dom.size(), 0);
    if (j.contains("delta")) w.delta = j.at("delta").is_string() ? parse_rational(j.at("delta").get<std::string>()) : Rational(j.at("delta").get<long>());
    if (w.beta.size() != w.dom.size()) throw ValidationError("weight dom/beta size mismatch");
    return w;
}

}  // namespace qkm
