#include "flowsel/distances.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "flowsel/errors.hpp"

namespace flowsel {

namespace {

// Walks the merged sorted samples once. At every distinct value both eCDFs
// are examined just before and just after their jumps, which covers the
// supremum for the KS statistic and yields the piecewise-constant segments
// for the KR integral.
template <typename Visitor>
void walk_merged(const std::vector<double>& a, const std::vector<double>& b,
                 Visitor&& visit) {
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    size_t i = 0;
    size_t j = 0;
    double fa = 0.0;
    double fb = 0.0;
    while (i < a.size() || j < b.size()) {
        const double v = [&] {
            if (i == a.size()) return b[j];
            if (j == b.size()) return a[i];
            return std::min(a[i], b[j]);
        }();
        const double fa_before = fa;
        const double fb_before = fb;
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        fa = static_cast<double>(i) / na;
        fb = static_cast<double>(j) / nb;
        visit(v, fa_before, fb_before, fa, fb);
    }
}

void require_non_empty(const ScoreDistribution& f, const ScoreDistribution& g) {
    if (f.empty() || g.empty())
        throw std::invalid_argument("distance over empty score distribution");
}

// Linear interpolation percentile over a sorted sample.
double sorted_percentile(const std::vector<double>& s, double p) {
    const double rank = p / 100.0 * static_cast<double>(s.size() - 1);
    const double lo = std::floor(rank);
    const size_t ilo = static_cast<size_t>(lo);
    const size_t ihi = static_cast<size_t>(std::ceil(rank));
    return s[ilo] + (s[ihi] - s[ilo]) * (rank - lo);
}

// Solves the symmetric 4x4 system via Gaussian elimination with partial
// pivoting. Returns false when a pivot collapses relative to the matrix
// magnitude, i.e. the covariance estimate is singular.
bool solve4(std::array<std::array<double, 4>, 4> m, std::array<double, 4> rhs,
            std::array<double, 4>& out) {
    double scale = 0.0;
    for (const auto& row : m)
        for (double v : row) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) return false;

    int perm[4] = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int best = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(m[perm[r]][col]) > std::fabs(m[perm[best]][col])) best = r;
        std::swap(perm[col], perm[best]);
        const double pivot = m[perm[col]][col];
        if (std::fabs(pivot) <= 1e-12 * scale) return false;
        for (int r = col + 1; r < 4; ++r) {
            const double factor = m[perm[r]][col] / pivot;
            if (factor == 0.0) continue;
            for (int c = col; c < 4; ++c) m[perm[r]][c] -= factor * m[perm[col]][c];
            rhs[perm[r]] -= factor * rhs[perm[col]];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double v = rhs[perm[col]];
        for (int c = col + 1; c < 4; ++c) v -= m[perm[col]][c] * out[c];
        out[col] = v / m[perm[col]][col];
    }
    return true;
}

}  // namespace

double ks_distance(const ScoreDistribution& f, const ScoreDistribution& g) {
    require_non_empty(f, g);
    double sup = 0.0;
    walk_merged(f.samples(), g.samples(),
                [&](double, double fa0, double fb0, double fa1, double fb1) {
                    sup = std::max(sup, std::fabs(fa0 - fb0));
                    sup = std::max(sup, std::fabs(fa1 - fb1));
                });
    return sup;
}

double kr_distance(const ScoreDistribution& f, const ScoreDistribution& g) {
    require_non_empty(f, g);
    double total = 0.0;
    double prev_v = 0.0;
    double prev_gap = 0.0;
    bool first = true;
    walk_merged(f.samples(), g.samples(),
                [&](double v, double, double, double fa1, double fb1) {
                    if (!first) total += prev_gap * (v - prev_v);
                    first = false;
                    prev_v = v;
                    prev_gap = std::fabs(fa1 - fb1);
                });
    return total;
}

double es_distance(const ScoreDistribution& f, const ScoreDistribution& g) {
    const auto& x = f.samples();
    const auto& y = g.samples();
    if (x.size() < 5 || y.size() < 5)
        throw std::invalid_argument("es_distance requires at least 5 samples per side");
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double n = nx + ny;

    std::vector<double> pooled;
    pooled.reserve(x.size() + y.size());
    std::merge(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(pooled));
    const double sigma =
        (sorted_percentile(pooled, 75.0) - sorted_percentile(pooled, 25.0)) / 2.0;
    if (sigma <= 0.0)
        throw DegenerateCovariance("pooled sample is constant; ES undefined");
    const std::array<double, 2> ts = {0.4 / sigma, 0.8 / sigma};

    struct Moments {
        std::array<double, 4> mean{};
        std::array<std::array<double, 4>, 4> cov{};  // population covariance
    };
    auto accumulate = [&](const std::vector<double>& s) {
        Moments m;
        const double inv_n = 1.0 / static_cast<double>(s.size());
        for (double v : s) {
            m.mean[0] += std::cos(ts[0] * v);
            m.mean[1] += std::cos(ts[1] * v);
            m.mean[2] += std::sin(ts[0] * v);
            m.mean[3] += std::sin(ts[1] * v);
        }
        for (double& c : m.mean) c *= inv_n;
        for (double v : s) {
            const std::array<double, 4> d = {std::cos(ts[0] * v) - m.mean[0],
                                             std::cos(ts[1] * v) - m.mean[1],
                                             std::sin(ts[0] * v) - m.mean[2],
                                             std::sin(ts[1] * v) - m.mean[3]};
            for (int r = 0; r < 4; ++r)
                for (int c = r; c < 4; ++c) m.cov[r][c] += d[r] * d[c];
        }
        for (int r = 0; r < 4; ++r)
            for (int c = r; c < 4; ++c) {
                m.cov[r][c] *= inv_n;
                m.cov[c][r] = m.cov[r][c];
            }
        return m;
    };
    const Moments mx = accumulate(x);
    const Moments my = accumulate(y);

    std::array<std::array<double, 4>, 4> omega{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            omega[r][c] = (n / nx) * mx.cov[r][c] + (n / ny) * my.cov[r][c];

    std::array<double, 4> diff{};
    for (int k = 0; k < 4; ++k) diff[k] = mx.mean[k] - my.mean[k];

    std::array<double, 4> solved{};
    if (!solve4(omega, diff, solved))
        throw DegenerateCovariance("ES covariance matrix is singular");

    double w = 0.0;
    for (int k = 0; k < 4; ++k) w += diff[k] * solved[k];
    w *= n;

    if (std::max(x.size(), y.size()) < 25) {
        const double corr = 1.0 / (1.0 + std::pow(n, -0.45) +
                                   10.1 * (std::pow(nx, -1.7) + std::pow(ny, -1.7)));
        w *= corr;
    }
    return std::max(w, 0.0);
}

BinnedDistribution bin_scores(const ScoreDistribution& d) {
    if (d.empty()) throw std::invalid_argument("bin_scores over empty distribution");
    BinnedDistribution out;
    for (double v : d.samples()) {
        int k = static_cast<int>(std::floor(v * 10.0));
        if (k > 9) k = 9;
        out.p[static_cast<size_t>(k)] += 1.0;
    }
    const double n = static_cast<double>(d.size());
    for (double& v : out.p) v /= n;
    return out;
}

double js_distance(const BinnedDistribution& p, const BinnedDistribution& q) {
    std::array<double, 10> ps{};
    std::array<double, 10> qs{};
    double pn = 0.0;
    double qn = 0.0;
    for (size_t i = 0; i < 10; ++i) {
        ps[i] = p.p[i] + 1e-9;
        qs[i] = q.p[i] + 1e-9;
        pn += ps[i];
        qn += qs[i];
    }
    double sum = 0.0;
    for (size_t i = 0; i < 10; ++i) {
        ps[i] /= pn;
        qs[i] /= qn;
        const double m = 0.5 * (ps[i] + qs[i]);
        sum += ps[i] * std::log2(ps[i] / m) + qs[i] * std::log2(qs[i] / m);
    }
    return std::sqrt(std::max(sum, 0.0) / 2.0);
}

double js_distance(const ScoreDistribution& f, const ScoreDistribution& g) {
    require_non_empty(f, g);
    return js_distance(bin_scores(f), bin_scores(g));
}

double distance(DistanceMetric metric, const ScoreDistribution& f,
                const ScoreDistribution& g) {
    switch (metric) {
        case DistanceMetric::ks: return ks_distance(f, g);
        case DistanceMetric::kr: return kr_distance(f, g);
        case DistanceMetric::es: return es_distance(f, g);
        case DistanceMetric::js: return js_distance(f, g);
    }
    throw std::logic_error("unknown metric");
}

const char* metric_name(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::ks: return "ks";
        case DistanceMetric::kr: return "kr";
        case DistanceMetric::es: return "es";
        case DistanceMetric::js: return "js";
    }
    return "?";
}

DistanceMetric metric_from_name(const std::string& name) {
    if (name == "ks") return DistanceMetric::ks;
    if (name == "kr") return DistanceMetric::kr;
    if (name == "es") return DistanceMetric::es;
    if (name == "js") return DistanceMetric::js;
    throw ConfigError("unknown distance metric: " + name);
}

}  // namespace flowsel
