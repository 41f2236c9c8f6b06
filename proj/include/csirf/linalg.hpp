#pragma once

#include <complex>
#include <vector>

#include "csirf/errors.hpp"

namespace csirf {

using cdouble = std::complex<double>;

/// Dense complex matrix, row-major. Sized for the small systems in this
/// project (tap bases are at most 52 x ~40); nothing here is tuned.
struct CMat {
    int rows = 0;
    int cols = 0;
    std::vector<cdouble> a;

    CMat() = default;
    CMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

    cdouble& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const cdouble& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

inline std::vector<cdouble> matvec(const CMat& m, const std::vector<cdouble>& x) {
    if (static_cast<int>(x.size()) != m.cols) throw numeric_error("matvec: dimension mismatch");
    std::vector<cdouble> y(m.rows);
    for (int i = 0; i < m.rows; ++i) {
        cdouble acc = 0.0;
        for (int j = 0; j < m.cols; ++j) acc += m(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

/// Minimum-norm-residual solution of min_x ||A x - b||_2 by Householder QR.
/// Requires rows >= cols and full column rank.
inline std::vector<cdouble> qr_solve_ls(CMat A, std::vector<cdouble> b) {
    const int m = A.rows, n = A.cols;
    if (static_cast<int>(b.size()) != m) throw numeric_error("qr_solve_ls: rhs size mismatch");
    if (m < n) throw numeric_error("qr_solve_ls: underdetermined system");

    for (int k = 0; k < n; ++k) {
        // Householder reflector for column k, rows k..m-1
        double norm = 0.0;
        for (int i = k; i < m; ++i) norm += std::norm(A(i, k));
        norm = std::sqrt(norm);
        if (norm == 0.0) throw numeric_error("qr_solve_ls: rank-deficient matrix");

        cdouble akk = A(k, k);
        double aabs = std::abs(akk);
        cdouble phase = (aabs > 0.0) ? akk / aabs : cdouble(1.0, 0.0);
        cdouble alpha = -phase * norm;

        // v = x - alpha e1, stored in place of the column
        A(k, k) = akk - alpha;
        double vnorm2 = 0.0;
        for (int i = k; i < m; ++i) vnorm2 += std::norm(A(i, k));
        if (vnorm2 == 0.0) throw numeric_error("qr_solve_ls: degenerate reflector");

        // apply H = I - 2 v v^H / (v^H v) to remaining columns and rhs
        for (int j = k + 1; j < n; ++j) {
            cdouble dot = 0.0;
            for (int i = k; i < m; ++i) dot += std::conj(A(i, k)) * A(i, j);
            cdouble f = 2.0 * dot / vnorm2;
            for (int i = k; i < m; ++i) A(i, j) -= f * A(i, k);
        }
        cdouble dotb = 0.0;
        for (int i = k; i < m; ++i) dotb += std::conj(A(i, k)) * b[i];
        cdouble fb = 2.0 * dotb / vnorm2;
        for (int i = k; i < m; ++i) b[i] -= fb * A(i, k);

        A(k, k) = alpha; // diagonal of R
    }

    // back substitution on the n x n upper triangle
    std::vector<cdouble> x(n);
    for (int j = n - 1; j >= 0; --j) {
        cdouble acc = b[j];
        for (int k2 = j + 1; k2 < n; ++k2) acc -= A(j, k2) * x[k2];
        x[j] = acc / A(j, j);
    }
    return x;
}

} // namespace csirf
