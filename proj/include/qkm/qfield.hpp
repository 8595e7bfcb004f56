#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <complex>
#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qkm {

using Rational = mpq_class;

struct FieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Rational parse_rational(const std::string& s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw FieldError("empty rational literal");
    if (t[0] == '+') t.erase(0, 1);
    Rational r;
    if (r.set_str(t, 10) != 0) throw FieldError("bad rational literal '" + s + "'");
    if (r.get_den() == 0) throw FieldError("zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
}

inline std::string rational_str(const Rational& r) { return r.get_str(); }

// Sparse Laurent polynomial with rational coefficients, terms kept sorted by
// ascending exponent and never holding a zero coefficient.
class LaurentPoly {
public:
    using Term = std::pair<int, Rational>;

    LaurentPoly() = default;
    LaurentPoly(const Rational& c, int k = 0) {
        if (c != 0) terms_.emplace_back(k, c);
    }
    LaurentPoly(long c) : LaurentPoly(Rational(c)) {}
    LaurentPoly(int c) : LaurentPoly(Rational(c)) {}

    static LaurentPoly monomial(int k, const Rational& c = 1) { return LaurentPoly(c, k); }

    static LaurentPoly from_terms(std::map<int, Rational> m) {
        LaurentPoly p;
        for (auto& [k, c] : m)
            if (c != 0) p.terms_.emplace_back(k, c);
        return p;
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first == 0); }
    bool is_one() const { return terms_.size() == 1 && terms_[0].first == 0 && terms_[0].second == 1; }
    bool is_monomial() const { return terms_.size() == 1; }
    int low() const { return terms_.empty() ? 0 : terms_.front().first; }
    int high() const { return terms_.empty() ? 0 : terms_.back().first; }
    const Rational& low_coeff() const { return terms_.front().second; }
    const Rational& high_coeff() const { return terms_.back().second; }

    Rational coeff(int k) const {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), k,
                                   [](const Term& t, int e) { return t.first < e; });
        if (it != terms_.end() && it->first == k) return it->second;
        return 0;
    }

    LaurentPoly shifted(int s) const {
        LaurentPoly r = *this;
        for (auto& t : r.terms_) t.first += s;
        return r;
    }

    LaurentPoly scaled(const Rational& c) const {
        if (c == 0) return {};
        LaurentPoly r = *this;
        for (auto& t : r.terms_) t.second *= c;
        return r;
    }

    LaurentPoly bar() const {
        LaurentPoly r;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) r.terms_.emplace_back(-it->first, it->second);
        return r;
    }

    friend LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) { return combine(a, b, 1); }
    friend LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) { return combine(a, b, -1); }
    LaurentPoly operator-() const { return scaled(-1); }

    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.terms_.size() == 1) return b.scaled(a.terms_[0].second).shifted(a.terms_[0].first);
        if (b.terms_.size() == 1) return a.scaled(b.terms_[0].second).shifted(b.terms_[0].first);
        int lo = a.low() + b.low();
        std::vector<Rational> acc(static_cast<std::size_t>(a.high() + b.high() - lo + 1));
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_) acc[static_cast<std::size_t>(ka + kb - lo)] += ca * cb;
        return from_dense(acc, lo);
    }

    LaurentPoly& operator+=(const LaurentPoly& o) { return *this = *this + o; }
    LaurentPoly& operator-=(const LaurentPoly& o) { return *this = *this - o; }
    LaurentPoly& operator*=(const LaurentPoly& o) { return *this = *this * o; }

    friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const LaurentPoly& a, const LaurentPoly& b) { return !(a == b); }

    Rational eval(const Rational& x) const {
        if (terms_.empty()) return 0;
        if (x == 0) throw FieldError("evaluation at q = 0");
        // Horner over the exponent range, then one shift by x^low
        Rational acc = 0;
        int prev = high();
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            acc *= pow(x, prev - it->first);
            acc += it->second;
            prev = it->first;
        }
        return acc * pow(x, low());
    }

    static Rational pow(const Rational& x, int e) {
        Rational r = 1, b = x;
        bool inv = e < 0;
        unsigned long n = static_cast<unsigned long>(inv ? -static_cast<long>(e) : e);
        while (n) {
            if (n & 1) r *= b;
            b *= b;
            n >>= 1;
        }
        return inv ? Rational(1 / r) : r;
    }

    // Dense ascending coefficients of q^{-low} * p (an ordinary polynomial with nonzero constant term).
    std::vector<Rational> dense() const {
        std::vector<Rational> d;
        if (terms_.empty()) return d;
        d.resize(static_cast<std::size_t>(high() - low() + 1));
        for (const auto& [k, c] : terms_) d[static_cast<std::size_t>(k - low())] = c;
        return d;
    }

    static LaurentPoly from_dense(const std::vector<Rational>& d, int lo) {
        LaurentPoly p;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d[i] != 0) p.terms_.emplace_back(lo + static_cast<int>(i), d[i]);
        return p;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            Rational c = it->second;
            if (first) {
                if (c < 0) s += "-";
            } else {
                s += c < 0 ? " - " : " + ";
            }
            Rational a = abs(c);
            s += a.get_str();
            if (it->first != 0) s += "*q^" + std::to_string(it->first);
            first = false;
        }
        return s;
    }

    static LaurentPoly parse(const std::string& text);

private:
    std::vector<Term> terms_;

    static LaurentPoly combine(const LaurentPoly& a, const LaurentPoly& b, int sign) {
        LaurentPoly r;
        r.terms_.reserve(a.terms_.size() + b.terms_.size());
        auto i = a.terms_.begin(), j = b.terms_.begin();
        while (i != a.terms_.end() || j != b.terms_.end()) {
            if (j == b.terms_.end() || (i != a.terms_.end() && i->first < j->first)) {
                r.terms_.push_back(*i++);
            } else if (i == a.terms_.end() || j->first < i->first) {
                r.terms_.emplace_back(j->first, sign > 0 ? j->second : Rational(-j->second));
                ++j;
            } else {
                Rational c = sign > 0 ? Rational(i->second + j->second) : Rational(i->second - j->second);
                if (c != 0) r.terms_.emplace_back(i->first, c);
                ++i;
                ++j;
            }
        }
        return r;
    }
};

inline LaurentPoly LaurentPoly::parse(const std::string& text) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw FieldError("empty polynomial");
    std::map<int, Rational> acc;
    std::size_t pos = 0;
    while (pos < t.size()) {
        int sign = 1;
        if (t[pos] == '+' || t[pos] == '-') {
            sign = t[pos] == '-' ? -1 : 1;
            ++pos;
        }
        std::size_t end = pos;
        while (end < t.size() && t[end] != '+' && t[end] != '-') {
            if (t[end] == '^' && end + 1 < t.size() && t[end + 1] == '-') ++end;
            ++end;
        }
        std::string tok = t.substr(pos, end - pos);
        if (tok.empty()) throw FieldError("malformed polynomial '" + text + "'");
        Rational c = 1;
        int k = 0;
        auto qpos = tok.find('q');
        if (qpos == std::string::npos) {
            c = parse_rational(tok);
        } else {
            std::string cs = tok.substr(0, qpos);
            if (!cs.empty()) {
                if (cs.back() != '*') throw FieldError("malformed term '" + tok + "'");
                cs.pop_back();
                c = parse_rational(cs);
            }
            std::string es = tok.substr(qpos + 1);
            if (es.empty()) {
                k = 1;
            } else {
                if (es[0] != '^') throw FieldError("malformed exponent in '" + tok + "'");
                try {
                    std::size_t used = 0;
                    k = std::stoi(es.substr(1), &used);
                    if (used != es.size() - 1) throw FieldError("malformed exponent in '" + tok + "'");
                } catch (const std::logic_error&) {
                    throw FieldError("malformed exponent in '" + tok + "'");
                }
            }
        }
        acc[k] += sign * c;
        pos = end;
    }
    return from_terms(std::move(acc));
}

namespace detail {

// Polynomials over Q as dense ascending coefficient vectors.
using Dense = std::vector<Rational>;

inline void trim(Dense& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline Dense poly_mod(Dense a, const Dense& b) {
    trim(a);
    std::size_t db = b.size() - 1;
    const Rational& lead = b.back();
    while (a.size() >= b.size()) {
        Rational f = a.back() / lead;
        std::size_t off = a.size() - 1 - db;
        for (std::size_t i = 0; i <= db; ++i) a[off + i] -= f * b[i];
        a.pop_back();
        trim(a);
    }
    return a;
}

inline Dense poly_divexact(Dense a, const Dense& b) {
    trim(a);
    if (a.empty()) return {};
    std::size_t db = b.size() - 1;
    Dense quo(a.size() - db);
    const Rational& lead = b.back();
    while (a.size() >= b.size()) {
        Rational f = a.back() / lead;
        std::size_t off = a.size() - 1 - db;
        quo[off] = f;
        for (std::size_t i = 0; i <= db; ++i) a[off + i] -= f * b[i];
        a.pop_back();
    }
    trim(a);
    if (!a.empty()) throw FieldError("inexact polynomial division");
    return quo;
}

inline Dense poly_gcd(Dense a, Dense b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Dense r = poly_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        Rational lead = a.back();
        for (auto& c : a) c /= lead;
    }
    return a;
}

}  // namespace detail

// Element of Q(q): num/den in canonical form (coprime, den has lowest term 1*q^0).
class FieldElem {
public:
    FieldElem() : num_(), den_(1) {}
    FieldElem(const LaurentPoly& p) : num_(p), den_(1) {}
    FieldElem(const Rational& c) : num_(c), den_(1) {}
    FieldElem(long c) : FieldElem(Rational(c)) {}
    FieldElem(int c) : FieldElem(Rational(c)) {}
    FieldElem(const LaurentPoly& n, const LaurentPoly& d) : num_(n), den_(d) {
        if (den_.is_zero()) throw FieldError("division by zero");
        normalize();
    }

    static FieldElem q_pow(int k) { return FieldElem(LaurentPoly::monomial(k)); }

    const LaurentPoly& num() const { return num_; }
    const LaurentPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_poly() const { return den_.is_one(); }

    friend FieldElem operator+(const FieldElem& a, const FieldElem& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) {
            FieldElem r;
            r.num_ = a.num_ + b.num_;
            r.den_ = a.den_;
            if (!r.den_.is_one()) r.normalize();
            return r;
        }
        return FieldElem(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend FieldElem operator-(const FieldElem& a, const FieldElem& b) { return a + (-b); }
    FieldElem operator-() const {
        FieldElem r = *this;
        r.num_ = -r.num_;
        return r;
    }
    friend FieldElem operator*(const FieldElem& a, const FieldElem& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.den_.is_one() && b.den_.is_one()) return FieldElem(a.num_ * b.num_);
        if (b.num_.is_monomial() && b.den_.is_one()) return a.times_monomial(b.num_);
        if (a.num_.is_monomial() && a.den_.is_one()) return b.times_monomial(a.num_);
        return FieldElem(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend FieldElem operator/(const FieldElem& a, const FieldElem& b) {
        if (b.is_zero()) throw FieldError("division by zero");
        return FieldElem(a.num_ * b.den_, a.den_ * b.num_);
    }
    FieldElem& operator+=(const FieldElem& o) { return *this = *this + o; }
    FieldElem& operator-=(const FieldElem& o) { return *this = *this - o; }
    FieldElem& operator*=(const FieldElem& o) { return *this = *this * o; }
    FieldElem& operator/=(const FieldElem& o) { return *this = *this / o; }

    friend bool operator==(const FieldElem& a, const FieldElem& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator!=(const FieldElem& a, const FieldElem& b) { return !(a == b); }

    FieldElem bar() const { return FieldElem(num_.bar(), den_.bar()); }

    Rational eval_exact(const Rational& q0) const {
        Rational d = den_.eval(q0);
        if (d == 0) throw FieldError("pole at q0 = " + q0.get_str());
        return num_.eval(q0) / d;
    }

    std::string str() const { return "(" + num_.str() + ")/(" + den_.str() + ")"; }

    static FieldElem parse(const std::string& s) {
        std::string t;
        for (char c : s)
            if (!std::isspace(static_cast<unsigned char>(c))) t += c;
        auto split = t.find(")/(");
        if (t.size() < 2 || t.front() != '(' || t.back() != ')' || split == std::string::npos)
            return FieldElem(LaurentPoly::parse(t));
        return FieldElem(LaurentPoly::parse(t.substr(1, split - 1)), LaurentPoly::parse(t.substr(split + 3, t.size() - split - 4)));
    }

private:
    LaurentPoly num_;
    LaurentPoly den_;

    FieldElem times_monomial(const LaurentPoly& m) const {
        FieldElem r;
        r.num_ = num_ * m;
        r.den_ = den_;
        return r;
    }

    void normalize() {
        if (num_.is_zero()) {
            den_ = LaurentPoly(1);
            return;
        }
        int shift = -den_.low();
        if (!den_.is_monomial()) {
            int nlow = num_.low();
            auto g = detail::poly_gcd(num_.dense(), den_.dense());
            if (g.size() > 1) {
                num_ = LaurentPoly::from_dense(detail::poly_divexact(num_.dense(), g), nlow);
                int dlow = den_.low();
                den_ = LaurentPoly::from_dense(detail::poly_divexact(den_.dense(), g), dlow);
            }
        }
        Rational c = den_.low_coeff();
        num_ = num_.scaled(1 / c).shifted(shift);
        den_ = den_.scaled(1 / c).shifted(shift);
    }
};

inline FieldElem field_arith(const FieldElem& a, const FieldElem& b, char op) {
    switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
    }
    throw FieldError(std::string("unknown field operation '") + op + "'");
}

// [n]_{q^d}
inline FieldElem q_int(int n, int d = 1) {
    if (d <= 0) throw FieldError("q_int needs d > 0");
    if (n == 0) return {};
    int sgn = n < 0 ? -1 : 1;
    int m = n * sgn;
    std::map<int, Rational> t;
    for (int k = 0; k < m; ++k) t[d * (m - 1 - 2 * k)] += sgn;
    return FieldElem(LaurentPoly::from_terms(t));
}

inline FieldElem q_factorial(int n, int d = 1) {
    if (n < 0) throw FieldError("q_factorial of a negative integer");
    FieldElem r(1);
    for (int k = 2; k <= n; ++k) r *= q_int(k, d);
    return r;
}

inline FieldElem q_binom(int n, int t, int d = 1) {
    if (t < 0 || t > n) throw FieldError("q_binom needs 0 <= t <= n");
    FieldElem r = q_factorial(n, d) / (q_factorial(t, d) * q_factorial(n - t, d));
    if (!r.is_poly()) throw FieldError("q_binom did not reduce to a Laurent polynomial");
    return r;
}

struct NumScalar {
    std::complex<double> value;
    Rational origin_q;
};

inline void check_q0(const Rational& q0) {
    if (!(q0 > 0 && q0 < 1)) throw FieldError("q0 must lie in (0,1), got " + q0.get_str());
}

inline NumScalar eval_at(const FieldElem& x, const Rational& q0) {
    check_q0(q0);
    return {std::complex<double>(x.eval_exact(q0).get_d(), 0.0), q0};
}

inline double eval_real(const FieldElem& x, const Rational& q0) { return x.eval_exact(q0).get_d(); }

inline std::ostream& operator<<(std::ostream& os, const FieldElem& x) { return os << x.str(); }
inline std::ostream& operator<<(std::ostream& os, const LaurentPoly& x) { return os << x.str(); }

}  // namespace qkm
