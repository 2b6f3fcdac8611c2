#include "provlab/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace provlab {

LpResult simplex_max(const std::vector<numvec>& a, const numvec& rhs, const numvec& c) {
    const int m = static_cast<int>(a.size());
    const int n = static_cast<int>(c.size());
    if (static_cast<int>(rhs.size()) != m)
        throw std::invalid_argument("simplex_max: rhs size mismatch");
    for (double b : rhs)
        if (b < 0.0) throw std::invalid_argument("simplex_max: rhs must be nonnegative");
    for (const auto& row : a)
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("simplex_max: ragged constraint matrix");
    if (n == 0) return {0.0, {}, 0};

    const double tol = 1e-9;
    const int cols = n + m;  // structural variables then slacks
    std::vector<numvec> t(m, numvec(cols + 1, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) t[i][j] = a[i][j];
        t[i][n + i] = 1.0;
        t[i][cols] = rhs[i];
    }
    numvec z(cols + 1, 0.0);  // reduced costs; z[cols] = -objective
    for (int j = 0; j < n; ++j) z[j] = c[j];
    intvec basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    int iters = 0;
    int degenerate_run = 0;
    const int iter_cap = 2000 + 200 * (m + n);
    while (true) {
        if (++iters > iter_cap) throw std::runtime_error("simplex_max: iteration limit reached");

        int e = -1;
        if (degenerate_run < 30) {  // Dantzig pricing
            double best = tol;
            for (int j = 0; j < cols; ++j)
                if (z[j] > best) {
                    best = z[j];
                    e = j;
                }
        } else {  // Bland: lowest eligible index
            for (int j = 0; j < cols; ++j)
                if (z[j] > tol) {
                    e = j;
                    break;
                }
        }
        if (e < 0) break;  // optimal

        // ratio test; ties go to the smallest basis index
        int r = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            if (t[i][e] > tol) {
                const double ratio = t[i][cols] / t[i][e];
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && (r < 0 || basis[i] < basis[r]))) {
                    best_ratio = ratio;
                    r = i;
                }
            }
        }
        if (r < 0) throw std::runtime_error("simplex_max: unbounded program");
        degenerate_run = (best_ratio < 1e-12) ? degenerate_run + 1 : 0;

        const double piv = t[r][e];
        for (int j = 0; j <= cols; ++j) t[r][j] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == r) continue;
            const double f = t[i][e];
            if (f == 0.0) continue;
            for (int j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
        }
        const double f = z[e];
        for (int j = 0; j <= cols; ++j) z[j] -= f * t[r][j];
        basis[r] = e;
    }

    LpResult res;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) res.x[basis[i]] = t[i][cols];
    res.objective = -z[cols];
    res.iterations = iters;
    return res;
}

}  // namespace provlab
