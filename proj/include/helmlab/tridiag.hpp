#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "helmlab/numeric.hpp"

namespace helmlab {

/// Complex tridiagonal matrix (lower/diag/upper bands).
struct Tridiagonal {
    std::vector<complexd> lower;  // size n-1
    std::vector<complexd> diag;   // size n
    std::vector<complexd> upper;  // size n-1

    int size() const { return static_cast<int>(diag.size()); }

    std::vector<complexd> apply(const std::vector<complexd>& x) const {
        const int n = size();
        if (static_cast<int>(x.size()) != n) throw std::invalid_argument("Tridiagonal::apply: size mismatch");
        std::vector<complexd> y(n);
        for (int i = 0; i < n; ++i) {
            complexd s = diag[i] * x[i];
            if (i > 0) s += lower[i - 1] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

/// Direct solve by LU with partial pivoting (gtsv-style; the pivoted
/// elimination stores its fill-in in the spare band). Deterministic.
inline std::vector<complexd> solve_tridiagonal(Tridiagonal A, std::vector<complexd> b) {
    const int n = A.size();
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_tridiagonal: size mismatch");
    if (n == 0) return b;
    auto& dl = A.lower;
    auto& d = A.diag;
    auto& du = A.upper;
    std::vector<complexd> du2(std::max(0, n - 2), complexd{0.0, 0.0});

    for (int i = 0; i < n - 1; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == complexd{0.0, 0.0})
                throw std::runtime_error("solve_tridiagonal: singular pivot at row " + std::to_string(i));
            const complexd fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = complexd{0.0, 0.0};
        } else {
            const complexd fact = d[i] / dl[i];
            d[i] = dl[i];
            const complexd temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if (i < n - 2) {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            const complexd tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
    }
    if (d[n - 1] == complexd{0.0, 0.0})
        throw std::runtime_error("solve_tridiagonal: singular pivot at last row");

    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (int i = n - 3; i >= 0; --i)
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    return b;
}

}  // namespace helmlab
