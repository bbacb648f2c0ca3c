#pragma once

// Independent brute-force reference implementations used only by tests.
// These deliberately avoid the library's code paths: CDFs are evaluated by
// counting, the integral is accumulated per merged breakpoint, and the
// Epps-Singleton quadratic form is solved through the explicit 4x4 adjugate.

#include <vector>

namespace flowsel::oracle {

// sup |F-G| evaluated at every merged breakpoint, from both sides.
double brute_ks(const std::vector<double>& a, const std::vector<double>& b);

// Exact integral of |F-G| between step functions.
double brute_kr(const std::vector<double>& a, const std::vector<double>& b);

// Jensen-Shannon distance over 10 bins of width 0.1 written straight from
// the formula: additive smoothing 1e-9 per bin, renormalized, base-2 logs.
double brute_js(const std::vector<double>& a, const std::vector<double>& b);

// Epps-Singleton W^2 with t=(0.4, 0.8) scaled by the semi-interquartile
// range of the pooled sample and the small-sample correction. Returns a
// negative value when the 4x4 covariance matrix is numerically singular.
double brute_es(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace flowsel::oracle
