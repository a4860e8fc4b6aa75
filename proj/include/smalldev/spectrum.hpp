#pragma once

// Finite sections of the weighted moving-average operator and their spectra.
//
// The operator sends (x_j) to ( d_k * sum_m a_m x_{k-m} )_k. Its truncation
// keeps rows k in [-N, N] and columns j in [-(N+L), N+L], where L is the
// window half-width, so no nonzero entry of a kept row is clipped. The
// eigenvalues of M*M^T are the squared singular values whose decay
// lambda_n ~ C * n^{-2p} the rest of the library predicts and consumes.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "smalldev/model.hpp"

namespace smalldev {

struct TruncatedOperator {
    int N = 0;
    int L = 0;
    double tail_mass = 0.0;
    Eigen::MatrixXd M; // (2N+1) x (2(N+L)+1), entry(k,j) = d_k * a_{k-j}

    // The generating data are kept so the Gram matrix can be assembled from
    // window autocovariances: (M M^T)(k,k') = d_k d_k' gamma(k - k'), which
    // makes translated windows yield bit-identical spectra.
    CoefficientWindow window;
    WeightSequence weights;

    [[nodiscard]] int rows() const { return 2 * N + 1; }
    [[nodiscard]] int cols() const { return 2 * (N + L) + 1; }

    // Entry by operator index, k in [-N,N], j in [-(N+L), N+L].
    [[nodiscard]] double entry(int k, int j) const {
        return M(k + N, j + N + L);
    }

    [[nodiscard]] double frobenius_norm_sq() const;
};

struct Spectrum {
    int N = 0;
    int L = 0;
    double tail_mass = 0.0;
    std::vector<double> eigenvalues; // nonincreasing; entries < 1e-14*max clamped to 0

    [[nodiscard]] std::int64_t size() const {
        return static_cast<std::int64_t>(eigenvalues.size());
    }
    [[nodiscard]] double sum() const;
};

struct FitResult {
    double c_hat = 0.0;
    double dispersion = 0.0; // interquartile range of lambda_n * n^{2p}
    int n_lo = 0;
    int n_hi = 0;
    int stride = 1;
    bool edge_warning = false; // fit window reaches into the truncation-biased tail
};

// Builds the dense truncation. Throws ResourceError if the matrix would
// exceed memory_budget bytes.
[[nodiscard]] TruncatedOperator build(const CoefficientWindow& window,
                                      const WeightSequence& w, int N,
                                      std::size_t memory_budget = std::size_t{2} << 30);

// Eigenvalues of M*M^T, sorted nonincreasing, clamped at zero below
// 1e-14 * lambda_1. Checks the trace identity sum(lambda) = ||M||_F^2
// to 1e-10 relative and throws NumericError when it fails.
[[nodiscard]] Spectrum spectrum(const TruncatedOperator& op);

// N(s) = #{ n : sqrt(lambda_n) >= s }, s > 0.
[[nodiscard]] std::int64_t counting_function(const Spectrum& spec, double s);

// Median of lambda_n * n^{2p} over n = n_lo, n_lo+stride, ..., <= n_hi
// (1-based indices into the sorted spectrum); dispersion is the IQR.
[[nodiscard]] FitResult fit_decay_constant(const Spectrum& spec, double p,
                                           int n_lo, int n_hi, int stride = 1);

// Default fit window [N/10, 2N/5]: past the head transient, well clear of
// the truncation edge.
[[nodiscard]] std::pair<int, int> default_fit_window(int N);

} // namespace smalldev
