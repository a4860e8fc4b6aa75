#pragma once

// Moving-average models of a stationary Gaussian sequence
//
//     U_k = sum_m a_m X_{k-m},   (X_j) i.i.d. N(0,1),  (a_m) in l2,
//
// their finite coefficient windows, the transfer amplitude
// |a(x)| = |sum_m a_m e^{imx}| on dyadic grids, and the polynomially
// decaying weight sequences d_k applied on top of U.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace smalldev {

// a_0 = a0, all other coefficients zero.
struct IID {
    double a0 = 1.0;
};

// a_m = scale * rho^m for m >= 0; requires |rho| < 1.
struct AR1 {
    double rho = 0.0;
    double scale = 1.0;
};

// Finite window given directly: coeffs[i] = a_{offset+i}.
struct FiniteMA {
    std::vector<double> coeffs;
    int offset = 0;
};

// a_m = scale * rho^|m| for all m; requires rho in (0,1).
struct TwoSidedGeometric {
    double rho = 0.5;
    double scale = 1.0;
};

// Same layout as FiniteMA; kept distinct so configs can state intent.
struct ExplicitCoeffs {
    std::vector<double> coeffs;
    int offset = 0;
};

using MASpec = std::variant<IID, AR1, FiniteMA, TwoSidedGeometric, ExplicitCoeffs>;

[[nodiscard]] std::string spec_kind(const MASpec& spec);

// True when the family guarantees coefficient summability in every l_r, r > 0
// (finite support or geometric decay). Relevant to predictions with p < 1,
// which need slightly more than l2.
[[nodiscard]] bool spec_certifies_lr(const MASpec& spec);

// Finite slice of the coefficient sequence: coeffs[i] = a_{offset+i}.
// tail_mass is an upper bound on sum of a_m^2 over the dropped indices.
struct CoefficientWindow {
    std::vector<double> coeffs;
    int offset = 0;
    double tail_mass = 0.0;

    [[nodiscard]] int length() const { return static_cast<int>(coeffs.size()); }
    [[nodiscard]] int min_index() const { return offset; }
    [[nodiscard]] int max_index() const { return offset + length() - 1; }

    // Smallest L with support(a) contained in [-L, L].
    [[nodiscard]] int half_width() const;

    // a_m, zero outside the window.
    [[nodiscard]] double at(int m) const;

    [[nodiscard]] double l2_norm_sq() const;
};

// Weights d_k = d(sgn k) * |k|^{-p} with d_0 = 0, except where an explicit
// override replaces the homogeneous value.
struct WeightSequence {
    double p = 1.0;
    double d_plus = 1.0;
    double d_minus = 1.0;
    std::map<int, double> prefix_override;
};

// Throws DomainError / ModelError when invariants fail:
// p > 1/2, d_plus >= 0, d_minus >= 0, max(d_plus, d_minus) > 0,
// override values >= 0.
void validate(const WeightSequence& w);

// Amplitudes |a(x_j)| at x_j = 2*pi*j / grid_size, j = 0..grid_size-1.
struct DensityGrid {
    std::int64_t grid_size = 0;
    std::vector<double> amplitudes;
};

// Finite window capturing the spec's coefficients with squared-l2 tail <= tol.
// Throws ModelError for degenerate (all-zero) or out-of-range specs, and
// ResourceError when the required window exceeds max_length.
[[nodiscard]] CoefficientWindow materialize(const MASpec& spec, double tol,
                                            std::int64_t max_length = (1 << 25));

// Transfer amplitude on a dyadic grid. grid_size must be a power of two and
// at least twice the window length. Doubling grid_size re-evaluates the same
// formula at the coarse nodes, so coincident nodes agree bit-for-bit.
[[nodiscard]] DensityGrid density_amplitude(const CoefficientWindow& window,
                                            std::int64_t grid_size);

// gamma(lag) = sum_m a_m a_{m+lag}; symmetric in lag.
[[nodiscard]] double autocovariance(const CoefficientWindow& window, int lag);

// d_k under w, override-aware.
[[nodiscard]] double weight_at(const WeightSequence& w, int k);

} // namespace smalldev
