#pragma once

#include <array>
#include <string>

#include "flowsel/score_dist.hpp"

namespace flowsel {

// Score distribution collapsed to 10 probability bins over [0,1]; bin k
// covers [k/10, (k+1)/10), the last bin is closed at 1.0.
struct BinnedDistribution {
    std::array<double, 10> p{};
};

BinnedDistribution bin_scores(const ScoreDistribution& d);

// Kolmogorov-Smirnov: sup |F - G|, exact over the merged sample points.
double ks_distance(const ScoreDistribution& f, const ScoreDistribution& g);

// Kantorovich-Rubinstein (1-d Wasserstein): exact piecewise integral of
// |F - G| between the two step functions.
double kr_distance(const ScoreDistribution& f, const ScoreDistribution& g);

// Epps-Singleton W^2 statistic. Characteristic functions are evaluated at
// t = (0.4, 0.8) scaled by the semi-interquartile range of the pooled
// sample; samples smaller than 25 get the small-sample correction. Requires
// at least 5 samples on each side. Throws DegenerateCovariance when the
// pooled sample is (near-)constant; callers treat that as distance 0.
double es_distance(const ScoreDistribution& f, const ScoreDistribution& g);

// Jensen-Shannon distance between two binned distributions: base-2 KL of
// each against the per-bin average, averaged and square-rooted. Bins are
// smoothed additively (1e-9) and renormalized first, so the result is
// finite, symmetric, in [0,1], and 0 only for equal inputs.
double js_distance(const BinnedDistribution& p, const BinnedDistribution& q);

double js_distance(const ScoreDistribution& f, const ScoreDistribution& g);

enum class DistanceMetric { ks, kr, es, js };

double distance(DistanceMetric metric, const ScoreDistribution& f,
                const ScoreDistribution& g);

const char* metric_name(DistanceMetric m);
DistanceMetric metric_from_name(const std::string& name);

}  // namespace flowsel
