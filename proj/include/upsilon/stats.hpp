#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace upsilon {

/// Compensated (Neumaier) summation in index order.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> xs);
double mean_of(std::span<const double> xs);
/// Sample standard deviation (n - 1); zero for fewer than two values.
double sample_stddev(std::span<const double> xs);

/// Two-sided normal critical value for the given confidence (0.95 -> 1.95996...).
double normal_critical_value(double confidence);

/// Percentile interval of `samples` (sorted in place).
std::pair<double, double> percentile_interval(std::vector<double>& samples, double confidence);

struct MeanInterval {
    double mean = 0.0;
    double half_width = 0.0;
};

/// Mean with a normal-approximation half-width; for 2 <= n < 30 the
/// half-width comes from a seeded percentile bootstrap instead.
MeanInterval mean_interval(std::span<const double> xs, double confidence, std::uint64_t bootstrap_seed);

}  // namespace upsilon
