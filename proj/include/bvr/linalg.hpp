#pragma once
#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bvr/ring.hpp"

namespace bvr {

template <class R>
class Mat {
  public:
    int n_rows = 0, n_cols = 0;
    std::vector<R> a;

    Mat() = default;
    Mat(int r, int c) : n_rows(r), n_cols(c), a(size_t(r) * c, RingOps<R>::zero()) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = RingOps<R>::one();
        return m;
    }

    R& operator()(int i, int j) { return a[size_t(i) * n_cols + j]; }
    const R& operator()(int i, int j) const { return a[size_t(i) * n_cols + j]; }

    bool is_zero() const {
        for (const R& x : a)
            if (!RingOps<R>::is_zero(x)) return false;
        return true;
    }

    friend Mat operator+(const Mat& x, const Mat& y) {
        assert(x.n_rows == y.n_rows && x.n_cols == y.n_cols);
        Mat r = x;
        for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = r.a[i] + y.a[i];
        return r;
    }
    friend Mat operator-(const Mat& x, const Mat& y) {
        assert(x.n_rows == y.n_rows && x.n_cols == y.n_cols);
        Mat r = x;
        for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = r.a[i] - y.a[i];
        return r;
    }
    friend Mat operator-(const Mat& x) {
        Mat r = x;
        for (auto& v : r.a) v = -v;
        return r;
    }
    friend Mat operator*(const Mat& x, const Mat& y) {
        assert(x.n_cols == y.n_rows);
        Mat r(x.n_rows, y.n_cols);
        for (int i = 0; i < x.n_rows; ++i)
            for (int k = 0; k < x.n_cols; ++k) {
                const R& xik = x(i, k);
                if (RingOps<R>::is_zero(xik)) continue;
                for (int j = 0; j < y.n_cols; ++j) r(i, j) = r(i, j) + xik * y(k, j);
            }
        return r;
    }
    friend Mat operator*(const R& s, const Mat& x) {
        Mat r = x;
        for (auto& v : r.a) v = s * v;
        return r;
    }
    friend bool operator==(const Mat& x, const Mat& y) {
        return x.n_rows == y.n_rows && x.n_cols == y.n_cols && x.a == y.a;
    }

    Mat transpose() const {
        Mat r(n_cols, n_rows);
        for (int i = 0; i < n_rows; ++i)
            for (int j = 0; j < n_cols; ++j) r(j, i) = (*this)(i, j);
        return r;
    }
};

using MatQ = Mat<Rat>;
using MatD = Mat<double>;

// Row-reduces m in place (exact over Rat), returns pivot column list.
inline std::vector<int> rref(MatQ& m) {
    std::vector<int> pivots;
    int row = 0;
    for (int col = 0; col < m.n_cols && row < m.n_rows; ++col) {
        int p = -1;
        for (int i = row; i < m.n_rows; ++i)
            if (m(i, col) != 0) {
                p = i;
                break;
            }
        if (p < 0) continue;
        for (int j = 0; j < m.n_cols; ++j) std::swap(m(p, j), m(row, j));
        Rat inv = 1 / m(row, col);
        for (int j = 0; j < m.n_cols; ++j) m(row, j) *= inv;
        for (int i = 0; i < m.n_rows; ++i) {
            if (i == row || m(i, col) == 0) continue;
            Rat f = m(i, col);
            for (int j = 0; j < m.n_cols; ++j) m(i, j) -= f * m(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

inline int rank(MatQ m) { return int(rref(m).size()); }

// Basis of the right nullspace, one column per basis vector.
inline MatQ nullspace(const MatQ& m0) {
    MatQ m = m0;
    std::vector<int> piv = rref(m);
    std::vector<bool> is_piv(m.n_cols, false);
    for (int c : piv) is_piv[c] = true;
    int nfree = m.n_cols - int(piv.size());
    MatQ basis(m.n_cols, nfree);
    int bcol = 0;
    for (int c = 0; c < m.n_cols; ++c) {
        if (is_piv[c]) continue;
        basis(c, bcol) = 1;
        for (size_t r = 0; r < piv.size(); ++r) basis(piv[r], bcol) = -m(int(r), c);
        ++bcol;
    }
    return basis;
}

inline MatQ inverse(const MatQ& m) {
    if (m.n_rows != m.n_cols) throw std::invalid_argument("inverse: not square");
    int n = m.n_rows;
    MatQ aug(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug(i, j) = m(i, j);
        aug(i, n + i) = 1;
    }
    std::vector<int> piv = rref(aug);
    if (int(piv.size()) != n || piv.back() != n - 1)
        throw std::invalid_argument("inverse: singular matrix");
    MatQ r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = aug(i, n + j);
    return r;
}

// Solves A x = b exactly; throws if inconsistent. When the system is
// underdetermined, free variables are set to zero.
inline std::vector<Rat> solve(const MatQ& A, const std::vector<Rat>& b) {
    MatQ aug(A.n_rows, A.n_cols + 1);
    for (int i = 0; i < A.n_rows; ++i) {
        for (int j = 0; j < A.n_cols; ++j) aug(i, j) = A(i, j);
        aug(i, A.n_cols) = b[size_t(i)];
    }
    std::vector<int> piv = rref(aug);
    if (!piv.empty() && piv.back() == A.n_cols)
        throw std::invalid_argument("solve: inconsistent system");
    std::vector<Rat> x(A.n_cols, Rat(0));
    for (size_t r = 0; r < piv.size(); ++r) x[size_t(piv[r])] = aug(int(r), A.n_cols);
    return x;
}

// Characteristic polynomial coefficients c_0..c_n of det(lambda I - M),
// computed by the Faddeev-LeVerrier recursion (exact).
inline std::vector<Rat> charpoly(const MatQ& M) {
    if (M.n_rows != M.n_cols) throw std::invalid_argument("charpoly: not square");
    int n = M.n_rows;
    std::vector<Rat> c(size_t(n) + 1, Rat(0));
    c[size_t(n)] = 1;
    MatQ Mk = MatQ::identity(n);
    for (int k = 1; k <= n; ++k) {
        Mk = M * Mk;
        Rat tr(0);
        for (int i = 0; i < n; ++i) tr += Mk(i, i);
        Rat ck = -tr / Rat(k);
        c[size_t(n - k)] = ck;
        for (int i = 0; i < n; ++i) Mk(i, i) += ck;
    }
    return c;
}

}  // namespace bvr
