#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace froglab {

inline constexpr double kZ95 = 1.959963984540054;

struct MeanCi {
    double mean = 0.0;
    double stderr_ = 0.0;
    double low = 0.0;
    double high = 0.0;
    std::int64_t n = 0;
};

/// Running mean/variance (Welford).
class Accumulator {
public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    void merge(const Accumulator& o);
    [[nodiscard]] std::int64_t count() const { return n_; }
    [[nodiscard]] double mean() const { return mean_; }
    /// Sample variance (n-1 denominator); 0 for fewer than two values.
    [[nodiscard]] double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    [[nodiscard]] double stderr_of_mean() const {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }
    /// Normal-approximation interval mean +/- z * stderr.
    [[nodiscard]] MeanCi ci(double z = kZ95) const;

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

MeanCi mean_ci(std::span<const double> xs, double z = kZ95);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace froglab
