#pragma once
#include <random>

#include "bvr/superspace.hpp"

namespace bvr {

// Raw block data before validation, used to assemble spaces.
struct SpaceData {
    int n_even = 0, n_odd = 0;
    MatQ g, Q, QGF;
};

// One acyclic Darboux pair: x even, xi odd, <x,xi> = s (default 1),
// Q x = m2 xi, QGF xi = x.  H = m2 * id on the pair.
inline SpaceData acyclic_pair(const Rat& m2, const Rat& pairing_sign = Rat(1)) {
    SpaceData d;
    d.n_even = d.n_odd = 1;
    d.g = MatQ(2, 2);
    d.Q = MatQ(2, 2);
    d.QGF = MatQ(2, 2);
    d.g(0, 1) = pairing_sign;
    d.g(1, 0) = -pairing_sign;
    d.Q(1, 0) = m2;   // Q e0 = m2 e1
    d.QGF(0, 1) = 1;  // QGF e1 = e0
    return d;
}

// A 1|1 block with Q = QGF = 0 (pure cohomology).
inline SpaceData zero_pair() {
    SpaceData d;
    d.n_even = d.n_odd = 1;
    d.g = MatQ(2, 2);
    d.Q = MatQ(2, 2);
    d.QGF = MatQ(2, 2);
    d.g(0, 1) = 1;
    d.g(1, 0) = -1;
    return d;
}

// A p|p block with zero Q/QGF and a prescribed odd pairing block B
// (<x_i, xi_j> = B(i,j)); used for Lie-algebra style cohomology.
inline SpaceData zero_block(const MatQ& B) {
    int p = B.n_rows;
    SpaceData d;
    d.n_even = d.n_odd = p;
    d.g = MatQ(2 * p, 2 * p);
    d.Q = MatQ(2 * p, 2 * p);
    d.QGF = MatQ(2 * p, 2 * p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            d.g(i, p + j) = B(i, j);
            d.g(p + j, i) = -B(i, j);
        }
    return d;
}

// Direct sum, re-sorting the basis so that all evens precede all odds.
inline SpaceData direct_sum(const SpaceData& A, const SpaceData& B) {
    SpaceData d;
    d.n_even = A.n_even + B.n_even;
    d.n_odd = A.n_odd + B.n_odd;
    int n = d.n_even + d.n_odd;
    auto idx = [&](bool fromB, int local) {
        int ne = fromB ? B.n_even : A.n_even;
        if (local < ne) return (fromB ? A.n_even : 0) + local;
        return d.n_even + (fromB ? A.n_odd : 0) + (local - ne);
    };
    d.g = MatQ(n, n);
    d.Q = MatQ(n, n);
    d.QGF = MatQ(n, n);
    auto copy = [&](const SpaceData& S, bool fromB) {
        int m = S.n_even + S.n_odd;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                d.g(idx(fromB, i), idx(fromB, j)) = S.g(i, j);
                d.Q(idx(fromB, i), idx(fromB, j)) = S.Q(i, j);
                d.QGF(idx(fromB, i), idx(fromB, j)) = S.QGF(i, j);
            }
    };
    copy(A, false);
    copy(B, true);
    return d;
}

// Conjugates all structure by an invertible even map M that preserves the
// pairing (M^T g M = g): Q -> M Q M^{-1} etc.  Keeps the spectrum of H and
// leaves g unchanged.
inline SpaceData conjugate(const SpaceData& d, const MatQ& M) {
    if (!(M.transpose() * d.g * M == d.g))
        throw validation_error("conjugate: M does not preserve the pairing");
    MatQ Minv = inverse(M);
    SpaceData out = d;
    out.Q = M * d.Q * Minv;
    out.QGF = M * d.QGF * Minv;
    return out;
}

// Pairing-preserving shear for spaces whose even-odd pairing block is
// diagonal (<x_a, xi_b> = s_a delta_ab):  x_j += c x_i  with the
// compensating  xi_i -= (c s_i / s_j) xi_j.
inline MatQ shear_even(const SpaceData& d, int i, int j, const Rat& c) {
    int n = d.n_even + d.n_odd;
    if (i == j || i >= d.n_even || j >= d.n_even || d.n_even != d.n_odd)
        throw validation_error("shear_even: bad indices");
    Rat si = d.g(i, d.n_even + i), sj = d.g(j, d.n_even + j);
    if (si == 0 || sj == 0)
        throw validation_error("shear_even: pairing block is not diagonal");
    MatQ M = MatQ::identity(n);
    M(i, j) = c;                                        // M x_j = x_j + c x_i
    M(d.n_even + j, d.n_even + i) = -c * si / sj;       // M xi_i = xi_i - (c si/sj) xi_j
    if (!(M.transpose() * d.g * M == d.g))
        throw validation_error("shear_even: pairing not preserved");
    return M;
}

// phi^4 model at a point (one acyclic pair with mass^2 = m2); pairing sign
// chosen so that <x, Qx> is negative definite on the real even slice.
inline OddSymplecticSpace phi4_point(const Rat& m2, bool negative_slice = false) {
    SpaceData d = acyclic_pair(m2, negative_slice ? Rat(-1) : Rat(1));
    return OddSymplecticSpace(d.n_even, d.n_odd, d.g, d.Q, d.QGF);
}

inline OddSymplecticSpace make_space(const SpaceData& d) {
    return OddSymplecticSpace(d.n_even, d.n_odd, d.g, d.Q, d.QGF);
}

// Random valid space: direct sum of acyclic pairs with small integer masses
// and optional zero pairs, conjugated by random pairing-preserving shears.
// The spectrum of H stays rational, so the exact kernel calculus applies.
inline OddSymplecticSpace random_space(std::mt19937_64& rng, int max_pairs = 3,
                                       bool allow_kernel = true, int shears = 4) {
    std::uniform_int_distribution<int> npairs(1, max_pairs);
    std::uniform_int_distribution<int> mass(1, 3);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> shear_c(-2, 2);
    int k = npairs(rng);
    SpaceData d = acyclic_pair(Rat(mass(rng) * mass(rng)));
    for (int i = 1; i < k; ++i) d = direct_sum(d, acyclic_pair(Rat(mass(rng) * mass(rng))));
    if (allow_kernel && coin(rng)) d = direct_sum(d, zero_pair());
    for (int s = 0; s < shears && d.n_even > 1; ++s) {
        int i = std::uniform_int_distribution<int>(0, d.n_even - 1)(rng);
        int j = std::uniform_int_distribution<int>(0, d.n_even - 1)(rng);
        if (i == j) continue;
        Rat c(shear_c(rng));
        if (c == 0) continue;
        d = conjugate(d, shear_even(d, i, j, c));
    }
    return make_space(d);
}

}  // namespace bvr
