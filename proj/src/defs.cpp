#include "provlab/defs.hpp"

#include <cmath>
#include <stdexcept>

namespace provlab {

LineFit least_squares(const numvec& x, const numvec& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares: need >= 2 matching points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("least_squares: degenerate x values");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

LineFit loglog_fit(const numvec& x, const numvec& y) {
    numvec lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0)
            throw std::invalid_argument("loglog_fit: entries must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return least_squares(lx, ly);
}

double mean(const numvec& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double t : v) s += t;
    return s / static_cast<double>(v.size());
}

double stddev(const numvec& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0;
    for (double t : v) ss += (t - m) * (t - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace provlab
