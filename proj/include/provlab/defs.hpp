#pragma once

#include <string>
#include <vector>

namespace provlab {

using numvec = std::vector<double>;
using intvec = std::vector<int>;

// Validation tolerances shared across modules.
constexpr double kKernelTol = 1e-12;   // stochastic-row check
constexpr double kCertTol = 1e-12;     // certificate inequality slack
constexpr double kBoundTol = 1e-9;     // bound assertions (regret, metric axioms)

inline double clip01(double t) { return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t); }

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS residual of the fit
};

// Ordinary least squares y = intercept + slope * x.
LineFit least_squares(const numvec& x, const numvec& y);

// Fits log(y) = intercept + slope * log(x); all entries must be positive.
LineFit loglog_fit(const numvec& x, const numvec& y);

double mean(const numvec& v);
double stddev(const numvec& v);

}  // namespace provlab
