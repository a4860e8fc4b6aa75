// Guards the frozen constants: every value in frozen.hpp is re-derived here
// by the reference integrators, so a drifting oracle or a stale freeze fails
// loudly before any library test consumes it.

#include <doctest.h>

#include <cmath>

#include "frozen.hpp"
#include "oracle.hpp"

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("frozen ratio-1/2 amplitude mean matches adaptive quadrature") {
    const auto f = [](double x) { return 1.0 / std::sqrt(1.25 - std::cos(x)); };
    const double I = oracle::adaptive_simpson(f, 0.0, 2.0 * kPi, 1e-15) / (2.0 * kPi);
    CHECK(std::abs(I - frozen::I_ar1_half) <= 1e-13 * frozen::I_ar1_half);
    CHECK(std::abs(4.0 * I * I - frozen::C_ar1_half) <= 1e-12 * frozen::C_ar1_half);
    CHECK(std::abs(2.0 * I - frozen::delta_ar1_half) <= 1e-12 * frozen::delta_ar1_half);
}

TEST_CASE("frozen amplitude mean matches an AGM elliptic-integral route") {
    // (1/2pi) Int dx / sqrt(a - cos x) = (2/pi) K(k) / sqrt(a+1),
    // k^2 = 2/(a+1); K through the arithmetic-geometric mean.
    const double a = 1.25;
    const double k2 = 2.0 / (a + 1.0);
    double am = 1.0, gm = std::sqrt(1.0 - k2);
    for (int i = 0; i < 8; ++i) {
        const double next = 0.5 * (am + gm);
        gm = std::sqrt(am * gm);
        am = next;
    }
    const double K = kPi / (2.0 * am);
    const double I = (2.0 / kPi) * K / std::sqrt(a + 1.0);
    CHECK(std::abs(I - frozen::I_ar1_half) <= 1e-13 * frozen::I_ar1_half);
}

TEST_CASE("frozen single-mode tails match the density quadrature") {
    CHECK(std::abs(oracle::log_chisq1_tail(1.0, 0.1) - frozen::log_tail_1d_eps01) <= 1e-12);
    CHECK(std::abs(oracle::log_chisq1_tail(1.0, 1.0) - frozen::log_tail_1d_eps10) <= 1e-12);
    CHECK(std::abs(oracle::log_chisq2_tail(1.0, 0.1) - frozen::log_tail_2d_eps01) <= 1e-12);
    CHECK(std::abs(oracle::log_chisq2_tail(1.0, 1.0) - frozen::log_tail_2d_eps10) <= 1e-12);
}

TEST_CASE("oracle eigensolver reproduces a known diagonal spectrum") {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(7, 7);
    const double diag[7] = {1.0, 1.0, 0.25, 0.25, 1.0 / 9.0, 1.0 / 9.0, 0.0};
    for (int i = 0; i < 7; ++i) G(i, i) = diag[i];
    const auto top = oracle::top_eigenvalues(G, 3);
    CHECK(std::abs(top[0] - 1.0) <= 1e-10);
    CHECK(std::abs(top[1] - 1.0) <= 1e-10);
    CHECK(std::abs(top[2] - 0.25) <= 1e-10);
}
