#pragma once
#include <map>
#include <memory>
#include <sstream>
#include <vector>

#include "bvr/monomial.hpp"
#include "bvr/ring.hpp"
#include "bvr/superspace.hpp"

namespace bvr {

// Double-graded truncation: hbar order i <= Imax, field degree k <= kcap[i].
struct Trunc {
    int Imax = 0;
    std::vector<int> kcap;

    static Trunc rect(int I, int K) {
        Trunc t;
        t.Imax = I;
        t.kcap.assign(size_t(I) + 1, K);
        return t;
    }
    // Storage bound for the RG flow: k <= K + 2 (I - i).  Any intermediate
    // outside this window cannot reach a retained (i,k) since closing an
    // edge spends one unit of genus per two units of degree.
    static Trunc triangular(int I, int K) {
        Trunc t;
        t.Imax = I;
        for (int i = 0; i <= I; ++i) t.kcap.push_back(K + 2 * (I - i));
        return t;
    }
    bool admits(int i, int k) const {
        return i >= 0 && i <= Imax && k <= kcap[size_t(i)];
    }
    Trunc meet(const Trunc& o) const {
        Trunc t;
        t.Imax = std::min(Imax, o.Imax);
        for (int i = 0; i <= t.Imax; ++i)
            t.kcap.push_back(std::min(kcap[size_t(i)], o.kcap[size_t(i)]));
        return t;
    }
};

// Truncated formal functional: sum over hbar order i and graded monomials.
// Coefficients live in a commutative (purely even) ring R; all odd structure
// is carried by the monomial variables, including auxiliary odd parameters.
template <class R>
class Functional {
  public:
    std::shared_ptr<const VarTable> tab;
    Trunc tr;
    std::vector<std::map<Mono, R>> orders;  // orders[i]: monomial -> coefficient

    Functional() = default;
    Functional(std::shared_ptr<const VarTable> t, Trunc trunc)
        : tab(std::move(t)), tr(std::move(trunc)), orders(size_t(tr.Imax) + 1) {}

    static Functional zero(std::shared_ptr<const VarTable> t, const Trunc& trunc) {
        return Functional(t, trunc);
    }

    bool is_zero() const {
        for (const auto& m : orders)
            if (!m.empty()) return false;
        return true;
    }

    void add_term(int i, const Mono& m, const R& c) {
        if (RingOps<R>::is_zero(c)) return;
        if (!tr.admits(i, mono_field_degree(*tab, m))) return;
        auto& slot = orders[size_t(i)][m];
        slot = slot + c;
        if (RingOps<R>::is_zero(slot)) orders[size_t(i)].erase(m);
    }

    Functional& operator+=(const Functional& o) {
        for (int i = 0; i <= o.tr.Imax && i <= tr.Imax; ++i)
            for (const auto& [m, c] : o.orders[size_t(i)]) add_term(i, m, c);
        return *this;
    }
    Functional& operator-=(const Functional& o) {
        for (int i = 0; i <= o.tr.Imax && i <= tr.Imax; ++i)
            for (const auto& [m, c] : o.orders[size_t(i)]) add_term(i, m, R(-c));
        return *this;
    }
    friend Functional operator+(Functional a, const Functional& b) { return a += b; }
    friend Functional operator-(Functional a, const Functional& b) { return a -= b; }
    friend Functional operator-(const Functional& a) {
        Functional r(a.tab, a.tr);
        for (int i = 0; i <= a.tr.Imax; ++i)
            for (const auto& [m, c] : a.orders[size_t(i)]) r.orders[size_t(i)][m] = -c;
        return r;
    }

    Functional scaled(const R& s) const {
        Functional r(tab, tr);
        if (RingOps<R>::is_zero(s)) return r;
        for (int i = 0; i <= tr.Imax; ++i)
            for (const auto& [m, c] : orders[size_t(i)]) r.add_term(i, m, c * s);
        return r;
    }

    Functional hbar_shifted(int s) const {
        Functional r(tab, tr);
        for (int i = 0; i <= tr.Imax; ++i)
            for (const auto& [m, c] : orders[size_t(i)])
                if (i + s >= 0) r.add_term(i + s, m, c);
        return r;
    }

    Functional pruned(const Trunc& target) const {
        Functional r(tab, target);
        for (int i = 0; i <= tr.Imax && i <= target.Imax; ++i)
            for (const auto& [m, c] : orders[size_t(i)]) r.add_term(i, m, c);
        return r;
    }

    // Homogeneous (i,k) component.
    Functional component(int i, int k) const {
        Functional r(tab, tr);
        if (i <= tr.Imax)
            for (const auto& [m, c] : orders[size_t(i)])
                if (mono_field_degree(*tab, m) == k) r.add_term(i, m, c);
        return r;
    }

    bool at_least_cubic_mod_hbar() const {
        if (tr.Imax < 0) return true;
        for (const auto& [m, c] : orders[0])
            if (mono_field_degree(*tab, m) <= 2) return false;
        return true;
    }

    friend bool operator==(const Functional& a, const Functional& b) {
        int I = std::max(a.tr.Imax, b.tr.Imax);
        for (int i = 0; i <= I; ++i) {
            const auto ea = i <= a.tr.Imax ? a.orders[size_t(i)] : std::map<Mono, R>{};
            const auto eb = i <= b.tr.Imax ? b.orders[size_t(i)] : std::map<Mono, R>{};
            if (ea != eb) return false;
        }
        return true;
    }

    double max_abs() const {
        double v = 0;
        for (const auto& om : orders)
            for (const auto& [m, c] : om) v = std::max(v, std::abs(RingOps<R>::approx(c)));
        return v;
    }
};

template <class R>
Functional<R> mul(const Functional<R>& f, const Functional<R>& g) {
    Functional<R> r(f.tab, f.tr.meet(g.tr));
    const VarTable& t = *f.tab;
    Mono out;
    int sign;
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [mf, cf] : f.orders[size_t(i)])
            for (int j = 0; j + i <= r.tr.Imax && j <= g.tr.Imax; ++j)
                for (const auto& [mg, cg] : g.orders[size_t(j)]) {
                    if (!mono_mul(t, mf, mg, out, sign)) continue;
                    R c = cf * cg;
                    if (sign < 0) c = -c;
                    r.add_term(i + j, out, c);
                }
    return r;
}

// Left partial derivative with respect to a single variable.
template <class R>
Functional<R> derive_var(const Functional<R>& f, int v) {
    Functional<R> r(f.tab, f.tr);
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [m, c] : f.orders[size_t(i)]) {
            MonoDeriv d = mono_derive(*f.tab, m, v);
            if (!d.nonzero) continue;
            R cc = c * RingOps<R>::from_rat(Rat(d.sign * d.mult));
            r.add_term(i, d.m, cc);
        }
    return r;
}

// Derivative along a vector e = sum_a coeffs[a] e_a (field variables only).
template <class R>
Functional<R> derive_vector(const Functional<R>& f, const std::vector<R>& coeffs) {
    Functional<R> r(f.tab, f.tr);
    for (int a = 0; a < f.tab->n_field; ++a) {
        if (RingOps<R>::is_zero(coeffs[size_t(a)])) continue;
        r += derive_var(f, a).scaled(coeffs[size_t(a)]);
    }
    return r;
}

// Derivation extending a linear operator A on the field variables:
// (D_A f)(x) = d/deps f(x + eps A x).  parity_A must match A's block
// structure.  D_A z_v = sum_b A(v,b) z_b.
template <class R>
Functional<R> op_derivation(const Functional<R>& f, const Mat<R>& A) {
    const VarTable& t = *f.tab;
    Functional<R> r(f.tab, f.tr);
    Mono out;
    int sign;
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [m, c] : f.orders[size_t(i)])
            for (int v = 0; v < t.n_field; ++v) {
                if (!m[size_t(v)]) continue;
                MonoDeriv d = mono_derive(t, m, v);
                for (int b = 0; b < t.n_field; ++b) {
                    const R& avb = A(v, b);
                    if (RingOps<R>::is_zero(avb)) continue;
                    if (!mono_mul(t, mono_var(t, b), d.m, out, sign)) continue;
                    R cc = c * avb * RingOps<R>::from_rat(Rat(d.sign * d.mult * sign));
                    r.add_term(i, out, cc);
                }
            }
    return r;
}

inline Mat<Rat> const& rat_mat_id(const Mat<Rat>& m) { return m; }

template <class R>
Mat<R> mat_from_rat(const MatQ& A) {
    Mat<R> out(A.n_rows, A.n_cols);
    for (size_t i = 0; i < A.a.size(); ++i) out.a[i] = RingOps<R>::from_rat(A.a[i]);
    return out;
}

// Second order contraction operator of a kernel:  del_K = 1/2 sum K(a,b)
// del_b del_a, optionally premultiplied by an auxiliary prefix monomial
// (used for odd insertions like delta K_eps and interval forms).
template <class R>
Functional<R> second_order(const Functional<R>& f, const Mat<R>& K, const Mono* prefix = nullptr,
                           const R* prefix_coeff = nullptr) {
    const VarTable& t = *f.tab;
    Functional<R> r(f.tab, f.tr);
    Mono out;
    int sign;
    for (int a = 0; a < t.n_field; ++a)
        for (int b = 0; b < t.n_field; ++b) {
            const R& kab = K(a, b);
            if (RingOps<R>::is_zero(kab)) continue;
            for (int i = 0; i <= f.tr.Imax; ++i)
                for (const auto& [m, c] : f.orders[size_t(i)]) {
                    MonoDeriv da = mono_derive(t, m, a);
                    if (!da.nonzero) continue;
                    MonoDeriv db = mono_derive(t, da.m, b);
                    if (!db.nonzero) continue;
                    long mult = da.mult * db.mult;
                    int sgn = da.sign * db.sign;
                    Rat half(sgn * mult, 2);
                    half.canonicalize();
                    R cc = c * kab * RingOps<R>::from_rat(half);
                    if (prefix) {
                        if (!mono_mul(t, *prefix, db.m, out, sign)) continue;
                        if (sign < 0) cc = -cc;
                        if (prefix_coeff) cc = cc * *prefix_coeff;
                        r.add_term(i, out, cc);
                    } else {
                        r.add_term(i, db.m, cc);
                    }
                }
        }
    return r;
}

// Cross term of the kernel contraction on a product:
// {f,g}_K = sum K(a,b) (-1)^{|b| (|f| + |a|)} (del_a f)(del_b g),
// evaluated monomial by monomial, optionally with an auxiliary prefix.
template <class R>
Functional<R> cross_bracket(const Functional<R>& f, const Functional<R>& g, const Mat<R>& K,
                            const Trunc& target, const Mono* prefix = nullptr,
                            const R* prefix_coeff = nullptr) {
    const VarTable& t = *f.tab;
    Functional<R> r(f.tab, target);
    Mono out, out2;
    int sign, sign2;
    for (int a = 0; a < t.n_field; ++a)
        for (int b = 0; b < t.n_field; ++b) {
            const R& kab = K(a, b);
            if (RingOps<R>::is_zero(kab)) continue;
            int pb = t.odd(b) ? 1 : 0;
            int pa = t.odd(a) ? 1 : 0;
            for (int i = 0; i <= f.tr.Imax; ++i)
                for (const auto& [mf, cf] : f.orders[size_t(i)]) {
                    MonoDeriv da = mono_derive(t, mf, a);
                    if (!da.nonzero) continue;
                    int pf = mono_parity(t, mf);
                    int ksign = (pb && ((pf + pa) & 1)) ? -1 : 1;
                    for (int j = 0; i + j <= target.Imax && j <= g.tr.Imax; ++j)
                        for (const auto& [mg, cg] : g.orders[size_t(j)]) {
                            MonoDeriv db = mono_derive(t, mg, b);
                            if (!db.nonzero) continue;
                            if (!mono_mul(t, da.m, db.m, out, sign)) continue;
                            long mult = da.mult * db.mult;
                            int sgn = ksign * da.sign * db.sign * sign;
                            R cc = cf * cg * kab * RingOps<R>::from_rat(Rat(sgn * mult));
                            if (prefix) {
                                if (!mono_mul(t, *prefix, out, out2, sign2)) continue;
                                if (sign2 < 0) cc = -cc;
                                if (prefix_coeff) cc = cc * *prefix_coeff;
                                r.add_term(i + j, out2, cc);
                            } else {
                                r.add_term(i + j, out, cc);
                            }
                        }
                }
        }
    return r;
}

// Linear substitution z_a -> sum_r C(a,r) y_r into a (possibly different)
// variable table; parities of image variables must match.
template <class R>
Functional<R> substitute_linear(const Functional<R>& f, std::shared_ptr<const VarTable> target,
                                const Mat<R>& C, const Trunc& tr_out) {
    const VarTable& ts = *f.tab;
    const VarTable& tt = *target;
    // images of source variables as (mono, coeff) lists over the target
    std::vector<std::vector<std::pair<Mono, R>>> img(size_t(ts.size()));
    for (int a = 0; a < ts.size(); ++a) {
        if (a < ts.n_field) {
            for (int rr = 0; rr < C.n_cols; ++rr)
                if (!RingOps<R>::is_zero(C(a, rr)))
                    img[size_t(a)].push_back({mono_var(tt, rr), C(a, rr)});
        } else {
            // aux variables map to the same-named aux variable if present
            int v = tt.find(ts.vars[size_t(a)].name);
            img[size_t(a)].push_back({mono_var(tt, v), RingOps<R>::one()});
        }
    }
    Functional<R> r(target, tr_out);
    Mono out;
    int sign;
    for (int i = 0; i <= f.tr.Imax && i <= tr_out.Imax; ++i)
        for (const auto& [m, c] : f.orders[size_t(i)]) {
            // expand factor by factor in canonical order
            std::vector<std::pair<Mono, R>> acc = {{mono_unit(tt), c}};
            for (int v = 0; v < ts.size(); ++v)
                for (int e = 0; e < m[size_t(v)]; ++e) {
                    std::vector<std::pair<Mono, R>> next;
                    for (const auto& [ma, ca] : acc)
                        for (const auto& [mi, ci] : img[size_t(v)]) {
                            if (!mono_mul(tt, ma, mi, out, sign)) continue;
                            R cc = ca * ci;
                            if (sign < 0) cc = -cc;
                            next.push_back({out, cc});
                        }
                    acc = std::move(next);
                }
            for (const auto& [mm, cc] : acc) r.add_term(i, mm, cc);
        }
    return r;
}

// Sets an even auxiliary variable to a rational constant and an odd one to
// zero when value 0 is passed for it.
template <class R>
Functional<R> substitute_aux(const Functional<R>& f, int var, const Rat& value) {
    Functional<R> r(f.tab, f.tr);
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [m, c] : f.orders[size_t(i)]) {
            int e = m[size_t(var)];
            if (e == 0) {
                r.add_term(i, m, c);
                continue;
            }
            if (value == 0) continue;
            Rat scale(1);
            for (int q = 0; q < e; ++q) scale *= value;
            Mono mm = m;
            mm[size_t(var)] = 0;
            r.add_term(i, mm, c * RingOps<R>::from_rat(scale));
        }
    return r;
}

// Coefficient of an odd auxiliary variable: the left derivative d/d(var).
template <class R>
Functional<R> aux_coefficient(const Functional<R>& f, int var) {
    return derive_var(f, var);
}

// d_DR on interval forms: f -> dt * (d f / d t).
template <class R>
Functional<R> de_rham_d(const Functional<R>& f, int t_var, int dt_var) {
    Functional<R> df = derive_var(f, t_var);
    Functional<R> r(f.tab, f.tr);
    Mono out;
    int sign;
    Mono dt = mono_var(*f.tab, dt_var);
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [m, c] : df.orders[size_t(i)]) {
            if (!mono_mul(*f.tab, dt, m, out, sign)) continue;
            r.add_term(i, out, sign < 0 ? R(-c) : c);
        }
    return r;
}

template <class R2, class R1>
Functional<R2> convert(const Functional<R1>& f) {
    Functional<R2> r(f.tab, f.tr);
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [m, c] : f.orders[size_t(i)]) r.orders[size_t(i)][m] = R2(c);
    return r;
}

inline Functional<ExpRing> rat_to_exp(const Functional<Rat>& f) {
    Functional<ExpRing> r(f.tab, f.tr);
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [m, c] : f.orders[size_t(i)]) r.orders[size_t(i)][m] = ExpRing(c);
    return r;
}

// --- serialization: lines of "i | monomial | coefficient" ------------------

inline std::string coeff_str(const Rat& c) { return c.get_str(); }
inline std::string coeff_str(double c) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", c);
    return buf;
}
inline std::string coeff_str(const ExpRing& c) { return c.str(); }

template <class R>
std::string serialize(const Functional<R>& f) {
    std::string s;
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [m, c] : f.orders[size_t(i)])
            s += std::to_string(i) + " | " + mono_str(*f.tab, m) + " | " + coeff_str(c) + "\n";
    return s;
}

inline Rat coeff_parse_rat(const std::string& s) { return rat_parse(s); }

template <class R>
Functional<R> parse_functional(std::shared_ptr<const VarTable> tab, const Trunc& tr,
                               const std::string& text);

template <>
inline Functional<Rat> parse_functional<Rat>(std::shared_ptr<const VarTable> tab, const Trunc& tr,
                                             const std::string& text) {
    Functional<Rat> f(tab, tr);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t p1 = line.find('|');
        size_t p2 = line.find('|', p1 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos)
            throw std::invalid_argument("parse_functional: bad line '" + line + "'");
        auto strip = [](std::string v) {
            size_t a = v.find_first_not_of(" \t");
            size_t b = v.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
        };
        int i = std::stoi(strip(line.substr(0, p1)));
        Mono m = mono_parse(*tab, strip(line.substr(p1 + 1, p2 - p1 - 1)));
        Rat c = rat_parse(strip(line.substr(p2 + 1)));
        f.add_term(i, m, c);
    }
    return f;
}

}  // namespace bvr
