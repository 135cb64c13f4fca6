#pragma once
#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvr/exp_ring.hpp"
#include "bvr/linalg.hpp"

namespace bvr {

struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raised when H has no exact rational eigendecomposition; callers fall back
// to the double-precision path.
struct exact_spectral_unavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite-dimensional odd symplectic space with differential Q and gauge
// fixing QGF.  Basis convention: indices [0, n_even) are even vectors,
// [n_even, dim) are odd.  Operators act by columns: A e_j = sum_i A(i,j) e_i.
// Construction validates all structural axioms eagerly.
class OddSymplecticSpace {
  public:
    int n_even = 0, n_odd = 0;
    MatQ g;    // pairing matrix g(a,b) = <e_a, e_b>
    MatQ Q;    // odd differential, Q^2 = 0, skew self-adjoint
    MatQ QGF;  // odd gauge fixing, QGF^2 = 0, self-adjoint
    MatQ H;    // [Q, QGF] = Q QGF + QGF Q

    OddSymplecticSpace(int ne, int no, MatQ pairing, MatQ q, MatQ qgf)
        : n_even(ne), n_odd(no), g(std::move(pairing)), Q(std::move(q)), QGF(std::move(qgf)) {
        validate();
        H = Q * QGF + QGF * Q;
        check_decomposition();
    }

    int dim() const { return n_even + n_odd; }
    bool odd(int v) const { return v >= n_even; }
    int parity(int v) const { return v >= n_even ? 1 : 0; }

    struct Spectral {
        std::vector<Rat> eigenvalues;  // distinct
        std::vector<MatQ> projectors;  // same order
    };

    // Exact rational eigendecomposition of H; throws
    // exact_spectral_unavailable when the spectrum is not rational or H is
    // defective.
    const Spectral& spectral() const {
        if (!spec_) spec_ = compute_spectral();
        return *spec_;
    }

  private:
    mutable std::optional<Spectral> spec_;

    void require(bool cond, const std::string& what) const {
        if (!cond) throw validation_error("OddSymplecticSpace: " + what);
    }

    void validate() const {
        int n = dim();
        require(n_even >= 0 && n_odd >= 0 && n > 0, "empty space");
        require(g.n_rows == n && g.n_cols == n, "pairing has wrong shape");
        require(Q.n_rows == n && Q.n_cols == n, "Q has wrong shape");
        require(QGF.n_rows == n && QGF.n_cols == n, "QGF has wrong shape");
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (parity(a) == parity(b))
                    require(g(a, b) == 0, "pairing is not odd");
                else
                    require(g(a, b) == -g(b, a), "pairing is not antisymmetric");
            }
        require(rank(g) == n, "pairing is degenerate");

        auto check_op = [&](const MatQ& A, const std::string& name) {
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    if (parity(a) == parity(b))
                        require(A(a, b) == 0, name + " is not odd");
            require((A * A).is_zero(), name + " does not square to zero");
        };
        check_op(Q, "Q");
        check_op(QGF, "QGF");

        // <Qa,b> + (-1)^{|a|} <a,Qb> = 0   and   <QGFa,b> - (-1)^{|a|} <a,QGFb> = 0
        MatQ qg = Q.transpose() * g, gq = g * Q;
        MatQ fg = QGF.transpose() * g, gf = g * QGF;
        for (int a = 0; a < n; ++a) {
            Rat s = parity(a) ? Rat(-1) : Rat(1);
            for (int b = 0; b < n; ++b) {
                require(qg(a, b) + s * gq(a, b) == 0, "Q is not skew self-adjoint");
                require(fg(a, b) - s * gf(a, b) == 0, "QGF is not self-adjoint");
            }
        }
    }

    void check_decomposition() const {
        require((H * Q - Q * H).is_zero(), "[H,Q] != 0");
        require((H * QGF - QGF * H).is_zero(), "[H,QGF] != 0");
        int n = dim();
        int rq = rank(Q), rf = rank(QGF);
        int kh = n - rank(H);
        require(rq + rf + kh == n, "rank arithmetic fails for Im Q + Im QGF + Ker H");
        // The three pieces must also be independent: stack column spaces.
        MatQ ker = nullspace(H);
        MatQ stack(n, 2 * n + ker.n_cols);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                stack(i, j) = Q(i, j);
                stack(i, n + j) = QGF(i, j);
            }
            for (int j = 0; j < ker.n_cols; ++j) stack(i, 2 * n + j) = ker(i, j);
        }
        require(rank(stack) == n, "Im Q + Im QGF + Ker H does not span");
    }

    static void divisors_up_to(const mpz_class& v, std::vector<mpz_class>& out) {
        mpz_class n = abs(v);
        if (n == 0) return;
        mpz_class i = 1;
        const long cap = 1000000;
        for (; i * i <= n && i <= cap; ++i) {
            if (n % i == 0) {
                out.push_back(i);
                out.push_back(n / i);
            }
        }
        if (i <= cap) return;
        throw exact_spectral_unavailable("charpoly coefficients too large to factor");
    }

    Spectral compute_spectral() const {
        std::vector<Rat> p = charpoly(H);
        // Deflate rational roots until the polynomial is constant.
        std::vector<Rat> roots;
        std::vector<Rat> cur = p;
        while (cur.size() > 1) {
            // strip zero roots
            if (cur.front() == 0) {
                roots.push_back(Rat(0));
                cur.erase(cur.begin());
                continue;
            }
            mpz_class den(1);
            for (const Rat& c : cur) den = lcm(den, c.get_den());
            std::vector<mpz_class> ic;
            for (const Rat& c : cur) ic.push_back(mpz_class(c * Rat(den)));
            std::vector<mpz_class> ph, qh;
            divisors_up_to(ic.front(), ph);
            divisors_up_to(ic.back(), qh);
            bool found = false;
            Rat root;
            for (const auto& pp : ph) {
                for (const auto& qq : qh) {
                    for (int sgn : {1, -1}) {
                        Rat r(sgn * pp, qq);
                        r.canonicalize();
                        Rat val(0);
                        for (size_t k = cur.size(); k-- > 0;) val = val * r + cur[k];
                        if (val == 0) {
                            root = r;
                            found = true;
                            break;
                        }
                    }
                    if (found) break;
                }
                if (found) break;
            }
            if (!found) throw exact_spectral_unavailable("H has irrational eigenvalues");
            roots.push_back(root);
            // synthetic division by (x - root)
            std::vector<Rat> next(cur.size() - 1, Rat(0));
            Rat carry = cur.back();
            for (size_t k = cur.size() - 1; k-- > 0;) {
                next[k] = carry;
                carry = cur[k] + carry * root;
            }
            cur = next;
        }
        // distinct eigenvalues
        std::vector<Rat> eigs;
        for (const Rat& r : roots)
            if (std::find(eigs.begin(), eigs.end(), r) == eigs.end()) eigs.push_back(r);
        // diagonalizability: geometric multiplicities must fill the space
        int n = dim();
        int total = 0;
        for (const Rat& lam : eigs) {
            MatQ shifted = H;
            for (int i = 0; i < n; ++i) shifted(i, i) -= lam;
            total += n - rank(shifted);
        }
        if (total != n) throw exact_spectral_unavailable("H is not diagonalizable over Q");
        // Lagrange projectors
        Spectral s;
        s.eigenvalues = eigs;
        for (size_t j = 0; j < eigs.size(); ++j) {
            MatQ P = MatQ::identity(n);
            for (size_t l = 0; l < eigs.size(); ++l) {
                if (l == j) continue;
                MatQ shifted = H;
                for (int i = 0; i < n; ++i) shifted(i, i) -= eigs[l];
                P = P * shifted;
                P = (1 / (eigs[j] - eigs[l])) * P;
            }
            s.projectors.push_back(P);
        }
        spec_sanity(s);
        return s;
    }

    void spec_sanity(const Spectral& s) const {
        MatQ sum(dim(), dim());
        for (const auto& P : s.projectors) sum = sum + P;
        require(sum == MatQ::identity(dim()), "spectral projectors do not resolve identity");
    }
};

// Element of E (x) E in matrix form: K = sum C(a,b) e_a (x) e_b.
template <class R>
struct Kernel {
    Mat<R> C;
};

using KernelQ = Kernel<Rat>;
using KernelE = Kernel<ExpRing>;
using KernelD = Kernel<double>;

// Parity of a homogeneous kernel; throws if entries mix parities.
template <class R>
int kernel_parity(const OddSymplecticSpace& sp, const Kernel<R>& K) {
    int par = -1;
    for (int a = 0; a < sp.dim(); ++a)
        for (int b = 0; b < sp.dim(); ++b) {
            if (RingOps<R>::is_zero(K.C(a, b))) continue;
            int p = (sp.parity(a) + sp.parity(b)) % 2;
            if (par < 0) par = p;
            if (par != p) throw domain_error("kernel is not parity homogeneous");
        }
    return par < 0 ? 0 : par;
}

// Graded symmetry: K in Sym^2 E  <=>  C(a,b) = (-1)^{|a||b|} C(b,a).
template <class R>
bool kernel_graded_symmetric(const OddSymplecticSpace& sp, const Kernel<R>& K) {
    for (int a = 0; a < sp.dim(); ++a)
        for (int b = 0; b < sp.dim(); ++b) {
            R rhs = (sp.parity(a) && sp.parity(b)) ? R(-K.C(b, a)) : K.C(b, a);
            if (!RingOps<R>::is_zero(K.C(a, b) - rhs)) return false;
        }
    return true;
}

template <class R>
bool kernel_graded_antisymmetric(const OddSymplecticSpace& sp, const Kernel<R>& K) {
    for (int a = 0; a < sp.dim(); ++a)
        for (int b = 0; b < sp.dim(); ++b) {
            R rhs = (sp.parity(a) && sp.parity(b)) ? K.C(b, a) : R(-K.C(b, a));
            if (!RingOps<R>::is_zero(K.C(a, b) - rhs)) return false;
        }
    return true;
}

// Matrix of the convolution operator K*: (K*)e_c = (-1)^{|c|} sum_ab C(a,b) g(b,c) e_a.
template <class R>
Mat<R> convolution_matrix(const OddSymplecticSpace& sp, const Kernel<R>& K) {
    int n = sp.dim();
    Mat<R> M(n, n);
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            R acc = RingOps<R>::zero();
            for (int b = 0; b < n; ++b) {
                if (RingOps<R>::is_zero(K.C(a, b)) || sp.g(b, c) == 0) continue;
                acc = acc + K.C(a, b) * RingOps<R>::from_rat(sp.g(b, c));
            }
            M(a, c) = sp.parity(c) ? R(-acc) : acc;
        }
    return M;
}

// The identity kernel K_0 (convolution acts as the identity map).
inline KernelQ identity_kernel(const OddSymplecticSpace& sp) {
    int n = sp.dim();
    MatQ D(n, n);
    for (int c = 0; c < n; ++c) D(c, c) = sp.parity(c) ? Rat(-1) : Rat(1);
    KernelQ K{D * inverse(sp.g)};
    return K;
}

// Kernel of the operator A, i.e. (A (x) 1) K_0.
template <class R>
Kernel<R> kernel_for_operator(const OddSymplecticSpace& sp, const Mat<R>& A) {
    KernelQ K0 = identity_kernel(sp);
    int n = sp.dim();
    Mat<R> C(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            R acc = RingOps<R>::zero();
            for (int k = 0; k < n; ++k) {
                if (RingOps<R>::is_zero(A(i, k)) || K0.C(k, j) == 0) continue;
                acc = acc + A(i, k) * RingOps<R>::from_rat(K0.C(k, j));
            }
            C(i, j) = acc;
        }
    return Kernel<R>{std::move(C)};
}

// Tensor differential of an odd operator A on E (x) E:
// A(e_a (x) e_b) = Ae_a (x) e_b + (-1)^{|a|} e_a (x) Ae_b.
template <class R>
Kernel<R> tensor_differential(const OddSymplecticSpace& sp, const MatQ& A, const Kernel<R>& K) {
    int n = sp.dim();
    Mat<R> C(n, n);
    for (int c = 0; c < n; ++c)
        for (int b = 0; b < n; ++b) {
            R acc = RingOps<R>::zero();
            for (int a = 0; a < n; ++a)
                if (A(c, a) != 0 && !RingOps<R>::is_zero(K.C(a, b)))
                    acc = acc + RingOps<R>::from_rat(A(c, a)) * K.C(a, b);
            C(c, b) = C(c, b) + acc;
        }
    for (int a = 0; a < n; ++a) {
        Rat sgn = sp.parity(a) ? Rat(-1) : Rat(1);
        for (int d = 0; d < n; ++d) {
            R acc = RingOps<R>::zero();
            for (int b = 0; b < n; ++b)
                if (!RingOps<R>::is_zero(K.C(a, b)) && A(d, b) != 0)
                    acc = acc + K.C(a, b) * RingOps<R>::from_rat(sgn * A(d, b));
            C(a, d) = C(a, d) + acc;
        }
    }
    return Kernel<R>{std::move(C)};
}

// Re-coefficients a rational kernel into any ring.
template <class R2>
Kernel<R2> kernel_from_rat(const KernelQ& K) {
    Kernel<R2> out;
    out.C = Mat<R2>(K.C.n_rows, K.C.n_cols);
    for (size_t i = 0; i < K.C.a.size(); ++i) out.C.a[i] = RingOps<R2>::from_rat(K.C.a[i]);
    return out;
}

// --- heat kernels and propagators, exact path -------------------------------

// K_t with K_t* = exp(-tH), t >= 0 rational (t = 0 gives K_0).
inline KernelE heat_kernel_exact(const OddSymplecticSpace& sp, const Rat& t) {
    if (t < 0) throw domain_error("heat_kernel: t < 0");
    const auto& s = sp.spectral();
    int n = sp.dim();
    Mat<ExpRing> op(n, n);
    for (size_t j = 0; j < s.eigenvalues.size(); ++j) {
        ExpRing w = ExpRing::exp_of(-t * s.eigenvalues[j]);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (s.projectors[j](i, k) != 0)
                    op(i, k) = op(i, k) + w * ExpRing(s.projectors[j](i, k));
    }
    return kernel_for_operator(sp, op);
}

// K_infinity: the projector onto Ker H.  Exact rational.
inline KernelQ heat_kernel_infinity(const OddSymplecticSpace& sp) {
    const auto& s = sp.spectral();
    int n = sp.dim();
    MatQ op(n, n);
    bool seen_zero = false;
    for (size_t j = 0; j < s.eigenvalues.size(); ++j) {
        if (s.eigenvalues[j] == 0) {
            op = s.projectors[j];
            seen_zero = true;
        } else if (s.eigenvalues[j] < 0) {
            throw domain_error("heat_kernel at t=infinity needs H >= 0");
        }
    }
    (void)seen_zero;  // zero matrix when H is invertible
    return kernel_for_operator(sp, op);
}

// P(eps,T) = int_eps^T (QGF (x) 1) K_t dt, exact over the exponential ring.
// eps = 0 is allowed; T = infinity handled by propagator_exact_inf below.
inline KernelE propagator_exact(const OddSymplecticSpace& sp, const Rat& eps, const Rat& T) {
    if (!(eps >= 0 && eps < T)) throw domain_error("propagator: need 0 <= eps < T");
    const auto& s = sp.spectral();
    int n = sp.dim();
    Mat<ExpRing> op(n, n);
    for (size_t j = 0; j < s.eigenvalues.size(); ++j) {
        const Rat& lam = s.eigenvalues[j];
        MatQ block = sp.QGF * s.projectors[j];
        if (lam == 0) {
            // QGF annihilates Ker H, so this block vanishes; keep the
            // (T - eps) coefficient anyway in case of roundoff-free zeros.
            ExpRing w = ExpRing(T - eps);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    if (block(i, k) != 0) op(i, k) = op(i, k) + w * ExpRing(block(i, k));
            continue;
        }
        ExpRing w = ExpRing::exp_of(-eps * lam, 1 / lam) - ExpRing::exp_of(-T * lam, 1 / lam);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (block(i, k) != 0) op(i, k) = op(i, k) + w * ExpRing(block(i, k));
    }
    return kernel_for_operator(sp, op);
}

inline KernelE propagator_exact_inf(const OddSymplecticSpace& sp, const Rat& eps) {
    if (eps < 0) throw domain_error("propagator: eps < 0");
    const auto& s = sp.spectral();
    int n = sp.dim();
    Mat<ExpRing> op(n, n);
    for (size_t j = 0; j < s.eigenvalues.size(); ++j) {
        const Rat& lam = s.eigenvalues[j];
        if (lam == 0) continue;
        if (lam < 0) throw domain_error("propagator to T=infinity needs H >= 0 off Ker H");
        MatQ block = sp.QGF * s.projectors[j];
        ExpRing w = ExpRing::exp_of(-eps * lam, 1 / lam);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (block(i, k) != 0) op(i, k) = op(i, k) + w * ExpRing(block(i, k));
    }
    return kernel_for_operator(sp, op);
}

// P(0,infinity): the exact rational inverse of Q on Im Q.
inline KernelQ propagator_zero_infinity(const OddSymplecticSpace& sp) {
    const auto& s = sp.spectral();
    int n = sp.dim();
    MatQ op(n, n);
    for (size_t j = 0; j < s.eigenvalues.size(); ++j) {
        const Rat& lam = s.eigenvalues[j];
        if (lam == 0) continue;
        if (lam < 0) throw domain_error("propagator to T=infinity needs H >= 0 off Ker H");
        op = op + (1 / lam) * (sp.QGF * s.projectors[j]);
    }
    return kernel_for_operator(sp, op);
}

// Basis of Ker H with the induced pairing.  Columns are homogeneous, even
// vectors first.
struct CohomologySpace {
    MatQ basis;  // dim x r
    int r_even = 0, r_odd = 0;
    MatQ pairing;  // r x r, restriction of the ambient pairing
};

inline CohomologySpace cohomology_basis(const OddSymplecticSpace& sp) {
    int ne = sp.n_even, n = sp.dim();
    // H is even, so it preserves the parity blocks.
    MatQ Hee(ne, ne), Hoo(n - ne, n - ne);
    for (int i = 0; i < ne; ++i)
        for (int j = 0; j < ne; ++j) Hee(i, j) = sp.H(i, j);
    for (int i = ne; i < n; ++i)
        for (int j = ne; j < n; ++j) Hoo(i - ne, j - ne) = sp.H(i, j);
    MatQ ke = nullspace(Hee), ko = nullspace(Hoo);
    CohomologySpace c;
    c.r_even = ke.n_cols;
    c.r_odd = ko.n_cols;
    int r = c.r_even + c.r_odd;
    c.basis = MatQ(n, r);
    for (int j = 0; j < ke.n_cols; ++j)
        for (int i = 0; i < ne; ++i) c.basis(i, j) = ke(i, j);
    for (int j = 0; j < ko.n_cols; ++j)
        for (int i = ne; i < n; ++i) c.basis(i, c.r_even + j) = ko(i - ne, j);
    c.pairing = c.basis.transpose() * sp.g * c.basis;
    if (r > 0 && rank(c.pairing) != r)
        throw validation_error("restricted pairing on Ker H is degenerate");
    return c;
}

}  // namespace bvr
