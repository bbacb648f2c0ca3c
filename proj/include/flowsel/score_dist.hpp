#pragma once

#include <cstddef>
#include <vector>

namespace flowsel {

// Empirical distribution of classification scores in [0,1]. Holds the sorted
// sample; the eCDF is F(x) = #(samples <= x) / n. Immutable once built.
class ScoreDistribution {
public:
    ScoreDistribution() = default;
    explicit ScoreDistribution(std::vector<double> samples);

    const std::vector<double>& samples() const { return samples_; }
    size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    double cdf(double x) const;

private:
    std::vector<double> samples_;
};

}  // namespace flowsel
