#include "flowsel/score_dist.hpp"

#include <algorithm>
#include <stdexcept>

namespace flowsel {

ScoreDistribution::ScoreDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
    std::sort(samples_.begin(), samples_.end());
    if (!samples_.empty() && (samples_.front() < 0.0 || samples_.back() > 1.0))
        throw std::invalid_argument("score outside [0,1]");
}

double ScoreDistribution::cdf(double x) const {
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
    return static_cast<double>(it - samples_.begin()) /
           static_cast<double>(samples_.size());
}

}  // namespace flowsel
