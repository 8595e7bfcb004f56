#pragma once

#include "qkm/qfield.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace qkm {

template <class T>
using Mat = std::vector<std::vector<T>>;

inline bool is_zero(const Rational& x) { return x == 0; }
inline bool is_zero(const FieldElem& x) { return x.is_zero(); }

template <class T>
struct Echelon {
    Mat<T> rows;                    // reduced rows, one per pivot
    std::vector<std::size_t> pivots;  // pivot column per row
    std::vector<std::size_t> source;  // original row index of each pivot row
};

// Gauss-Jordan elimination; rows are processed in order so `source` lists a
// maximal independent prefix-greedy subset of the input rows.
template <class T>
Echelon<T> echelon(const Mat<T>& m) {
    Echelon<T> e;
    for (std::size_t r = 0; r < m.size(); ++r) {
        std::vector<T> row = m[r];
        for (std::size_t k = 0; k < e.rows.size(); ++k) {
            const T& f = row[e.pivots[k]];
            if (is_zero(f)) continue;
            T c = f;
            for (std::size_t j = 0; j < row.size(); ++j)
                if (!is_zero(e.rows[k][j])) row[j] -= c * e.rows[k][j];
        }
        std::size_t p = 0;
        while (p < row.size() && is_zero(row[p])) ++p;
        if (p == row.size()) continue;
        T inv = T(1) / row[p];
        for (auto& x : row)
            if (!is_zero(x)) x *= inv;
        for (auto& other : e.rows) {
            if (is_zero(other[p])) continue;
            T c = other[p];
            for (std::size_t j = 0; j < row.size(); ++j)
                if (!is_zero(row[j])) other[j] -= c * row[j];
        }
        e.rows.push_back(std::move(row));
        e.pivots.push_back(p);
        e.source.push_back(r);
    }
    return e;
}

template <class T>
std::size_t rank(const Mat<T>& m) {
    return echelon(m).rows.size();
}

// Solves A x = b for square nonsingular A; returns nullopt when singular.
template <class T>
std::optional<std::vector<T>> solve_square(Mat<T> a, std::vector<T> b) {
    std::size_t n = a.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && is_zero(a[p][c])) ++p;
        if (p == n) return std::nullopt;
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        T inv = T(1) / a[c][c];
        for (std::size_t j = c; j < n; ++j) a[c][j] *= inv;
        b[c] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || is_zero(a[r][c])) continue;
            T f = a[r][c];
            for (std::size_t j = c; j < n; ++j)
                if (!is_zero(a[c][j])) a[r][j] -= f * a[c][j];
            b[r] -= f * b[c];
        }
    }
    return b;
}

inline Mat<Rational> specialize(const Mat<FieldElem>& m, const Rational& q0) {
    Mat<Rational> r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        r[i].reserve(m[i].size());
        for (const auto& x : m[i]) r[i].push_back(x.is_zero() ? Rational(0) : x.eval_exact(q0));
    }
    return r;
}

inline Rational random_q0(std::mt19937_64& rng) {
    std::uniform_int_distribution<long> num(1, 96), den(97, 211);
    Rational q(num(rng), den(rng));
    q.canonicalize();
    return q;
}

// Exact generic rank and span data over Q(q). A specialization at a random
// rational point picks independent rows and pivot columns; the exact pass then
// proves every remaining row lies in their span, which certifies the rank.
struct SpanBasis {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    Mat<FieldElem> square;  // m[rows][cols]
    bool exact = false;
};

inline std::vector<FieldElem> express_in_basis(const Mat<FieldElem>& m, const SpanBasis& sb, const std::vector<FieldElem>& target,
                                               std::vector<FieldElem>* residual = nullptr) {
    std::size_t r = sb.rows.size();
    std::vector<FieldElem> coeffs;
    if (r > 0) {
        Mat<FieldElem> at(r, std::vector<FieldElem>(r));
        std::vector<FieldElem> b(r);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) at[i][j] = sb.square[j][i];
            b[i] = target[sb.cols[i]];
        }
        auto x = solve_square(at, b);
        if (!x) throw FieldError("span basis block is singular");
        coeffs = *x;
    }
    if (residual) {
        *residual = target;
        for (std::size_t k = 0; k < r; ++k) {
            if (coeffs[k].is_zero()) continue;
            const auto& row = m[sb.rows[k]];
            for (std::size_t j = 0; j < row.size(); ++j)
                if (!row[j].is_zero()) (*residual)[j] -= coeffs[k] * row[j];
        }
    }
    return coeffs;
}

inline bool all_zero(const std::vector<FieldElem>& v) {
    for (const auto& x : v)
        if (!x.is_zero()) return false;
    return true;
}

inline SpanBasis span_basis(const Mat<FieldElem>& m, std::uint64_t seed = 7, int attempts = 4) {
    std::mt19937_64 rng(seed);
    for (int a = 0; a < attempts; ++a) {
        Rational q0 = random_q0(rng);
        Mat<Rational> mq;
        try {
            mq = specialize(m, q0);
        } catch (const FieldError&) {
            continue;
        }
        auto e = echelon(mq);
        SpanBasis sb;
        sb.rows = e.source;
        sb.cols = e.pivots;
        sb.square.assign(sb.rows.size(), std::vector<FieldElem>(sb.cols.size()));
        for (std::size_t i = 0; i < sb.rows.size(); ++i)
            for (std::size_t j = 0; j < sb.cols.size(); ++j) sb.square[i][j] = m[sb.rows[i]][sb.cols[j]];
        bool ok = true;
        std::vector<bool> in(m.size(), false);
        for (auto r : sb.rows) in[r] = true;
        for (std::size_t r = 0; r < m.size() && ok; ++r) {
            if (in[r]) continue;
            std::vector<FieldElem> res;
            express_in_basis(m, sb, m[r], &res);
            ok = all_zero(res);
        }
        if (ok) {
            sb.exact = true;
            return sb;
        }
    }
    // fall back to plain elimination over Q(q)
    auto e = echelon(m);
    SpanBasis sb;
    sb.rows = e.source;
    sb.cols = e.pivots;
    sb.square.assign(sb.rows.size(), std::vector<FieldElem>(sb.cols.size()));
    for (std::size_t i = 0; i < sb.rows.size(); ++i)
        for (std::size_t j = 0; j < sb.cols.size(); ++j) sb.square[i][j] = m[sb.rows[i]][sb.cols[j]];
    sb.exact = true;
    return sb;
}

inline std::size_t exact_rank(const Mat<FieldElem>& m, std::uint64_t seed = 7) { return span_basis(m, seed).rows.size(); }

}  // namespace qkm
