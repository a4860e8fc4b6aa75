#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace smalldev {

// Neumaier compensated accumulator. Keeps the summation error at O(1) ulp
// independent of term count; the result depends only on the order of add()
// calls, which callers keep fixed to stay bit-reproducible.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

[[nodiscard]] inline bool is_power_of_two(std::int64_t v) {
    return v > 0 && (v & (v - 1)) == 0;
}

// Sample quantile with linear interpolation between order statistics
// (the common "type 7" rule). q in [0,1]; data must be sorted ascending.
[[nodiscard]] inline double sorted_quantile(std::span<const double> sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

[[nodiscard]] inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    return (n % 2 == 1) ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

[[nodiscard]] inline double interquartile_range(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return sorted_quantile(v, 0.75) - sorted_quantile(v, 0.25);
}

} // namespace smalldev
