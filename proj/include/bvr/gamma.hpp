#pragma once
#include <cstdio>

#include "bvr/functional.hpp"

namespace bvr {

// One contraction slot of the flow operator: a kernel on the field
// variables, optionally premultiplied by an auxiliary monomial (odd
// insertions delta K_eps, interval forms).  The combined operator
// prefix * del_K must be even.
template <class R>
struct KernelOp {
    Mat<R> K;
    bool has_prefix = false;
    Mono prefix;
    R prefix_coeff = RingOps<R>::one();

    static KernelOp plain(Mat<R> k) { return KernelOp{std::move(k), false, {}, RingOps<R>::one()}; }
    static KernelOp prefixed(Mat<R> k, Mono p, R c) {
        return KernelOp{std::move(k), true, std::move(p), std::move(c)};
    }
};

namespace detail {

template <class R>
Functional<R> apply_second_order(const Functional<R>& f, const std::vector<KernelOp<R>>& ops) {
    Functional<R> r(f.tab, f.tr);
    for (const auto& op : ops)
        r += second_order(f, op.K, op.has_prefix ? &op.prefix : nullptr,
                          op.has_prefix ? &op.prefix_coeff : nullptr);
    return r;
}

template <class R>
Functional<R> apply_cross(const Functional<R>& f, const Functional<R>& g,
                          const std::vector<KernelOp<R>>& ops, const Trunc& target) {
    Functional<R> r(f.tab, target);
    for (const auto& op : ops)
        r += cross_bracket(f, g, op.K, target, op.has_prefix ? &op.prefix : nullptr,
                           op.has_prefix ? &op.prefix_coeff : nullptr);
    return r;
}

inline Rat binom(long n, long k) {
    mpz_class r(1);
    for (long j = 1; j <= k; ++j) {
        r *= (n - k + j);
        r /= j;
    }
    return Rat(r);
}

}  // namespace detail

// Gamma(P, S) = hbar log( exp(hbar del_P) exp(S/hbar) ), computed by
// integrating the flow dW/dsigma = hbar del_P W + 1/2 {W,W}_P from W(0) = S
// to sigma = 1.  W is polynomial in sigma at any truncation, so the Picard
// stages terminate; stage m collects exactly the m-edge contributions.
// The result is stored on the triangular window k <= K + 2 (I - i), on
// which every coefficient is exact.
template <class R>
Functional<R> gamma(const std::vector<KernelOp<R>>& ops, const Functional<R>& S, int I, int K) {
    if (!S.at_least_cubic_mod_hbar())
        throw domain_error("gamma: action must be at least cubic modulo hbar");
    Trunc tw = Trunc::triangular(I, K);
    std::vector<Functional<R>> W;
    W.push_back(S.pruned(tw));
    Functional<R> G = W[0];
    mpz_class factorial(1);
    const int stage_cap = 400;
    for (int m = 0;; ++m) {
        if (m > stage_cap) throw std::runtime_error("gamma: flow did not terminate");
        Functional<R> next = detail::apply_second_order(W[size_t(m)], ops).hbar_shifted(1);
        for (int j = 0; j <= m; ++j) {
            Functional<R> br = detail::apply_cross(W[size_t(j)], W[size_t(m - j)], ops, tw);
            Rat c = detail::binom(m, j) / 2;
            next += br.scaled(RingOps<R>::from_rat(c));
        }
        if (next.is_zero()) break;
        factorial *= (m + 1);
        G += next.scaled(RingOps<R>::from_rat(Rat(1) / Rat(factorial)));
        W.push_back(std::move(next));
    }
    return G;
}

template <class R>
Functional<R> gamma(const Mat<R>& P, const Functional<R>& S, int I, int K) {
    return gamma(std::vector<KernelOp<R>>{KernelOp<R>::plain(P)}, S, I, K);
}

// --- space-aware Batalin-Vilkovisky operations ------------------------------

inline std::shared_ptr<VarTable> field_table(const OddSymplecticSpace& sp) {
    std::vector<VarInfo> fs;
    for (int v = 0; v < sp.n_even; ++v) fs.push_back({"x" + std::to_string(v), false, VarKind::Field, 0});
    for (int v = 0; v < sp.n_odd; ++v) fs.push_back({"q" + std::to_string(v), true, VarKind::Field, 0});
    return VarTable::fields(fs);
}

// Q acting on functionals as the derivation extending the operator Q.
template <class R>
Functional<R> q_action(const OddSymplecticSpace& sp, const Functional<R>& f) {
    return op_derivation(f, mat_from_rat<R>(sp.Q));
}

// BV Laplacian of a scale kernel: Delta_K = -del_K.
template <class R>
Functional<R> bv_laplacian(const Functional<R>& f, const Kernel<R>& K) {
    return -second_order(f, K.C);
}

// Scale bracket, normalized so that
//   Delta_K(fg) = Delta_K(f) g + (-1)^{|f|} f Delta_K(g) + (-1)^{|f|} {f,g}_K ,
// which gives the odd-bracket antisymmetry
//   {f,g} = -(-1)^{(|f|+1)(|g|+1)} {g,f}.
template <class R>
Functional<R> scale_bracket(const Functional<R>& f, const Functional<R>& g, const Kernel<R>& K,
                            const Trunc& target) {
    Functional<R> fe(f.tab, f.tr), fo(f.tab, f.tr);
    for (int i = 0; i <= f.tr.Imax; ++i)
        for (const auto& [m, c] : f.orders[size_t(i)])
            (mono_parity(*f.tab, m) ? fo : fe).add_term(i, m, c);
    return -cross_bracket(fe, g, K.C, target) + cross_bracket(fo, g, K.C, target);
}

// Poisson bracket of the odd symplectic structure (scale-0 bracket).
template <class R>
Functional<R> poisson_bracket(const OddSymplecticSpace& sp, const Functional<R>& f,
                              const Functional<R>& g) {
    Kernel<R> K0 = kernel_from_rat<R>(identity_kernel(sp));
    return scale_bracket(f, g, K0, f.tr.meet(g.tr));
}

// Residual of the scale-K quantum master equation:
//   Q S + 1/2 {S,S}_K + hbar Delta_K S   (+ d_DR S for interval families).
template <class R>
Functional<R> qme_residual(const OddSymplecticSpace& sp, const Functional<R>& S,
                           const Kernel<R>& K, int t_var = -1, int dt_var = -1) {
    Functional<R> r = q_action(sp, S);
    r += scale_bracket(S, S, K, S.tr).scaled(RingOps<R>::from_rat(Rat(1, 2)));
    r += bv_laplacian(S, K).hbar_shifted(1);
    if (t_var >= 0) r += de_rham_d(S, t_var, dt_var);
    return r;
}

// Restriction onto Ker H: substitutes 0 for the Im Q + Im QGF directions.
// Returns the functional on the cohomology variable table.
template <class R>
struct Restriction {
    OddSymplecticSpace space;  // cohomology as a space with Q = QGF = 0
    std::shared_ptr<VarTable> tab;
    Functional<R> f;
};

template <class R>
Restriction<R> restrict_to_cohomology(const OddSymplecticSpace& sp, const Functional<R>& f) {
    CohomologySpace c = cohomology_basis(sp);
    int r = c.r_even + c.r_odd;
    OddSymplecticSpace sub(c.r_even, c.r_odd, c.pairing, MatQ(r, r), MatQ(r, r));
    auto tab = field_table(sub);
    // carry over aux variables
    for (int v = f.tab->n_field; v < f.tab->size(); ++v) {
        const auto& vi = f.tab->vars[size_t(v)];
        tab->add_aux(vi.name, vi.odd, vi.cap);
    }
    // dual change of coordinates: z_a -> sum_r B(a,r) y_r is wrong in
    // general; the correct substitution uses the coordinate projection.
    // Writing x = iota(y) + (complement), coordinates pull back by
    // z_a(iota(y)) = sum_r basis(a,r) y_r.
    Mat<R> C = mat_from_rat<R>(c.basis);
    Restriction<R> out{std::move(sub), tab, {}};
    out.f = substitute_linear(f, tab, C, f.tr);
    return out;
}

// Extends a QME solution s on Ker H to the full space as s . pi, where pi is
// the spectral projection onto Ker H.  (Composition with pi preserves the
// QME because the bracket and Laplacian restrict along Ker H.)
template <class R>
Functional<R> pullback_through_projection(const OddSymplecticSpace& sp,
                                          const Functional<R>& s_on_coh,
                                          std::shared_ptr<const VarTable> full_tab) {
    // pi in cohomology coordinates: y_r(pi x) = sum_a D(r,a) z_a where D is a
    // left inverse of the basis matrix supported on Ker H.
    CohomologySpace c = cohomology_basis(sp);
    int n = sp.dim(), r = c.r_even + c.r_odd;
    // Solve basis * D = P0 (projector onto Ker H along Im Q + Im QGF): the
    // spectral projector at eigenvalue 0.
    MatQ P0(n, n);
    for (size_t j = 0; j < sp.spectral().eigenvalues.size(); ++j)
        if (sp.spectral().eigenvalues[j] == 0) P0 = sp.spectral().projectors[j];
    // D(r,a): coordinates of P0 columns in the kernel basis.  Solve
    // c.basis * D = P0 column by column.
    MatQ D(r, n);
    for (int col = 0; col < n; ++col) {
        std::vector<Rat> rhs(static_cast<size_t>(n), Rat(0));
        for (int i = 0; i < n; ++i) rhs[size_t(i)] = P0(i, col);
        std::vector<Rat> x = solve(c.basis, rhs);
        for (int i = 0; i < r; ++i) D(i, col) = x[size_t(i)];
    }
    // substitution y_r -> sum_a D(r,a) z_a; source index first
    Mat<R> C = mat_from_rat<R>(D);
    return substitute_linear(s_on_coh, full_tab, C, s_on_coh.tr);
}

// Builds a solution of the chain-level QME through the given truncation by
// lexicographic induction: at each (i,k) the defect is Q-exact and gets
// cancelled by a primitive solved for exactly.
template <class R>
Functional<R> lift_qme_solution(const OddSymplecticSpace& sp, Functional<R> S,
                                const Kernel<R>& K_scale, int I, int K) {
    const VarTable& t = *S.tab;
    for (int i = 0; i <= I; ++i)
        for (int k = 0; k <= K; ++k) {
            Functional<R> res = qme_residual(sp, S, K_scale);
            Functional<R> rho = res.component(i, k);
            if (rho.is_zero()) continue;
            // monomial basis of field degree k (no aux variables)
            std::vector<Mono> basis;
            std::map<Mono, int> index;
            {
                // enumerate monomials of total field degree k
                std::vector<Mono> cur = {mono_unit(t)};
                for (int step = 0; step < k; ++step) {
                    std::vector<Mono> next;
                    for (const auto& m : cur)
                        for (int v = 0; v < t.n_field; ++v) {
                            Mono mm = m;
                            if (t.odd(v) && mm[size_t(v)] >= 1) continue;
                            mm[size_t(v)] = char(mm[size_t(v)] + 1);
                            next.push_back(mm);
                        }
                    std::sort(next.begin(), next.end());
                    next.erase(std::unique(next.begin(), next.end()), next.end());
                    cur = std::move(next);
                }
                basis = cur;
                for (size_t b = 0; b < basis.size(); ++b) index[basis[b]] = int(b);
            }
            if (!std::is_same_v<R, Rat>)
                throw std::runtime_error("lift_qme_solution: exact ring required");
            MatQ A(int(basis.size()), int(basis.size()));
            for (size_t col = 0; col < basis.size(); ++col) {
                Functional<R> e(S.tab, S.tr);
                e.add_term(i, basis[col], RingOps<R>::one());
                Functional<R> qe = q_action(sp, e);
                for (const auto& [m, c] : qe.orders[size_t(i)]) {
                    if constexpr (std::is_same_v<R, Rat>) A(index.at(m), int(col)) = c;
                }
            }
            std::vector<Rat> rhs(basis.size(), Rat(0));
            for (const auto& [m, c] : rho.orders[size_t(i)]) {
                if constexpr (std::is_same_v<R, Rat>) rhs[size_t(index.at(m))] = -c;
            }
            if constexpr (std::is_same_v<R, Rat>) {
                std::vector<Rat> x = solve(A, rhs);  // throws if not exact
                for (size_t b = 0; b < basis.size(); ++b)
                    if (x[b] != 0) S.add_term(i, basis[b], x[b]);
            }
        }
    return S;
}

}  // namespace bvr
