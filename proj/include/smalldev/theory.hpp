#pragma once

// Closed-form constants of the small-deviation asymptotics
//
//     ln P( sum_k d_k^2 U_k^2 <= eps^2 )  ~  -B_p * (C / eps^2)^{1/(2p-1)},
//
// with
//
//     B_p = (2p-1)/2 * ( pi / (2p sin(pi/(2p))) )^{2p/(2p-1)},
//     C   = ( (1/2pi) Int_0^{2pi} |a(x)|^{1/p} dx )^{2p} * (d_-^{1/p} + d_+^{1/p})^{2p},
//
// the eigenvalue prediction lambda_n ~ C n^{-2p}, and the counting-function
// slope Delta_mu with C = Delta_mu^{2p}.

#include <cstdint>

#include "smalldev/model.hpp"

namespace smalldev {

struct Quadrature {
    std::int64_t grid = 0;     // final dyadic grid size
    double rel_change = 0.0;   // relative change at the last doubling
};

struct CResult {
    double value = 0.0;
    Quadrature quadrature;
};

struct TheoryConstants {
    double p = 0.0;
    double B_p = 0.0;
    double C = 0.0;
    double delta_mu = 0.0;
    double sd_exponent = 0.0;  // 2/(2p-1), the power of 1/eps in ln P
    Quadrature quadrature;
    // p < 1 needs coefficient summability slightly stronger than l2; set when
    // the model family cannot certify it.
    bool heavy_tail_warning = false;
};

// Throws DomainError for p <= 1/2.
[[nodiscard]] double constant_Bp(double p);

// Periodic trapezoid quadrature of |a(x)|^{1/p} on dyadic grids, doubled until
// the relative change is <= rel_tol. Throws NumericError (with the achieved
// change in the message) when max_grid is reached first. Prefix overrides of
// w do not enter C.
[[nodiscard]] CResult constant_C(const CoefficientWindow& window,
                                 const WeightSequence& w,
                                 double rel_tol = 1e-10,
                                 std::int64_t max_grid = std::int64_t{1} << 24);

[[nodiscard]] CResult delta_mu(const CoefficientWindow& window,
                               const WeightSequence& w,
                               double rel_tol = 1e-10,
                               std::int64_t max_grid = std::int64_t{1} << 24);

[[nodiscard]] double predicted_eigenvalue(std::int64_t n, double C, double p);

[[nodiscard]] double predicted_log_smalldev(double p, double C, double eps);

[[nodiscard]] TheoryConstants theory_constants(const CoefficientWindow& window,
                                               const WeightSequence& w,
                                               double rel_tol = 1e-10,
                                               bool coeffs_certified_lr = true);

} // namespace smalldev
