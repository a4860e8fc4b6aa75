#pragma once

// Estimators of ln P(Q <= eps^2) for Q = sum_n lambda_n xi_n^2, xi i.i.d.
// N(0,1):
//
//   * saddlepoint: solve K(t) = sum lambda_n/(1+2t lambda_n) = eps^2, report
//     t eps^2 + L(t) with L(t) = ln E e^{-tQ} = -1/2 sum ln(1+2t lambda_n);
//     the corrected order subtracts the Gaussian-window term
//     1/2 ln(4 pi t^2 V(t)), V(t) = L''(t) = sum 2 lambda_n^2/(1+2t lambda_n)^2.
//   * tilted_mc: importance sampling under the exponential tilt at t, exact
//     identity P = e^{L(t)+t eps^2} E_t[ e^{t(Q-eps^2)} 1{Q<=eps^2} ].
//   * exact_small_case: closed forms for [l] and [l,l].
//   * direct_sim: simulate the underlying Gaussian sequence and count.
//
// Monte Carlo engines draw every variate from a counter-based stream keyed by
// (seed, sample index) and reduce fixed-size blocks in a fixed order, so
// results are bit-identical for any worker count.

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "smalldev/model.hpp"

namespace smalldev {

enum class SaddleOrder { leading, corrected };

struct SmallDevEstimate {
    double log_prob = 0.0;
    std::optional<double> std_err;          // on the log scale; MC engines only
    std::optional<double> saddle_t;         // tilt parameter when positive
    std::optional<std::int64_t> samples;
    std::optional<std::uint64_t> seed;
    std::string method;
};

// L(t) = -1/2 sum_n ln(1 + 2 t lambda_n), t >= 0.
[[nodiscard]] double log_laplace(std::span<const double> lambdas, double t);

// Saddlepoint approximation. Requires 0 < eps^2 < sum(lambda); the saddle
// equation residual |K(t*) - eps^2| is polished below 1e-12 * eps^2.
[[nodiscard]] SmallDevEstimate saddlepoint_log_prob(std::span<const double> lambdas,
                                                    double eps,
                                                    SaddleOrder order = SaddleOrder::corrected);

// Exponentially tilted Monte Carlo. At the regime boundary eps^2 >= sum(lambda)
// the tilt degenerates to t = 0 (plain Monte Carlo, saddle_t absent).
// Throws EstimateError when no sample lands in the target region.
[[nodiscard]] SmallDevEstimate tilted_mc_log_prob(std::span<const double> lambdas,
                                                  double eps,
                                                  std::int64_t n_samples,
                                                  std::uint64_t seed,
                                                  int workers = 0);

// Closed forms: [l] -> ln(2 Phi(eps/sqrt(l)) - 1); [l,l] -> ln(1 - e^{-eps^2/(2l)}).
// Any other shape throws UnsupportedError.
[[nodiscard]] SmallDevEstimate exact_small_case_log_prob(std::span<const double> lambdas,
                                                         double eps);

// Simulates X on [-(N+L), N+L], forms U by convolution with the window, and
// counts Q_N = sum_{|k|<=N} d_k^2 U_k^2 <= eps^2.
[[nodiscard]] SmallDevEstimate direct_sim_log_prob(const CoefficientWindow& window,
                                                   const WeightSequence& w, int N,
                                                   double eps,
                                                   std::int64_t n_samples,
                                                   std::uint64_t seed,
                                                   int workers = 0);

// Worker count resolution: explicit argument > 0 wins, else the
// SMALLDEV_THREADS environment variable, else hardware concurrency.
[[nodiscard]] int resolve_workers(int requested);

} // namespace smalldev
