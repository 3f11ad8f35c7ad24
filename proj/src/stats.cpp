#include "upsilon/stats.hpp"

#include "upsilon/rng.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace upsilon {

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        compensation_ += (sum_ - t) + x;
    else
        compensation_ += (x - t) + sum_;
    sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return xs.front();
    return compensated_sum(xs) / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    CompensatedSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return std::sqrt(std::max(0.0, s.value()) / static_cast<double>(xs.size() - 1));
}

double normal_critical_value(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
    const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, 0.5 + confidence / 2.0);
}

std::pair<double, double> percentile_interval(std::vector<double>& samples, double confidence) {
    if (samples.empty()) return {0.0, 0.0};
    std::sort(samples.begin(), samples.end());
    const double alpha = (1.0 - confidence) / 2.0;
    const auto at = [&](double q) {
        const double pos = q * static_cast<double>(samples.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, samples.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return samples[lo] + frac * (samples[hi] - samples[lo]);
    };
    return {at(alpha), at(1.0 - alpha)};
}

MeanInterval mean_interval(std::span<const double> xs, double confidence, std::uint64_t bootstrap_seed) {
    MeanInterval out;
    out.mean = mean_of(xs);
    const std::size_t n = xs.size();
    if (n < 2) return out;
    if (n >= 30) {
        out.half_width = normal_critical_value(confidence) * sample_stddev(xs) / std::sqrt(static_cast<double>(n));
        return out;
    }
    constexpr std::size_t kReplicates = 1000;
    Rng rng(bootstrap_seed);
    std::vector<double> means(kReplicates);
    for (auto& m : means) {
        CompensatedSum s;
        for (std::size_t i = 0; i < n; ++i) s.add(xs[rng.below(n)]);
        m = s.value() / static_cast<double>(n);
    }
    auto [lo, hi] = percentile_interval(means, confidence);
    out.half_width = (hi - lo) / 2.0;
    return out;
}

}  // namespace upsilon
