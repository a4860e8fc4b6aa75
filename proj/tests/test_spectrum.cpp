#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "frozen.hpp"
#include "oracle.hpp"
#include "smalldev/errors.hpp"
#include "smalldev/spectrum.hpp"
#include "smalldev/theory.hpp"

using namespace smalldev;

namespace {
const WeightSequence kUnitWeights{1.0, 1.0, 1.0, {}};

Spectrum make_spectrum(const MASpec& model, const WeightSequence& w, int N) {
    const CoefficientWindow win = materialize(model, 1e-12);
    return spectrum(build(win, w, N));
}
} // namespace

TEST_CASE("build: white-noise truncation is the weight diagonal") {
    const CoefficientWindow win = materialize(IID{1.0}, 1e-12);
    const TruncatedOperator op = build(win, kUnitWeights, 2);
    CHECK(op.L == 0);
    CHECK(op.rows() == 5);
    CHECK(op.cols() == 5);
    const double want[5] = {0.5, 1.0, 0.0, 1.0, 0.5};
    for (int k = -2; k <= 2; ++k) {
        for (int j = -2; j <= 2; ++j)
            CHECK(op.entry(k, j) == (j == k ? want[k + 2] : 0.0));
    }
}

TEST_CASE("build: two-tap window fills along the diagonal band") {
    const CoefficientWindow win = materialize(FiniteMA{{1.0, 1.0}, 0}, 1e-12);
    const TruncatedOperator op = build(win, kUnitWeights, 1);
    CHECK(op.L == 1);
    CHECK(op.rows() == 3);
    CHECK(op.cols() == 5);
    // row k = 1: d_1 = 1, entries a_{1-j} at j = 0, 1
    CHECK(op.entry(1, 0) == 1.0);
    CHECK(op.entry(1, 1) == 1.0);
    CHECK(op.entry(1, 2) == 0.0);
    CHECK(op.entry(1, -1) == 0.0);
    // row k = 0 vanishes with d_0 = 0
    for (int j = -2; j <= 2; ++j) CHECK(op.entry(0, j) == 0.0);
}

TEST_CASE("build: memory budget enforced") {
    const CoefficientWindow win = materialize(IID{1.0}, 1e-12);
    CHECK_THROWS_AS((void)build(win, kUnitWeights, 2000, 1024), ResourceError);
}

TEST_CASE("spectrum: white-noise eigenvalues are the squared weights") {
    const Spectrum spec = make_spectrum(IID{1.0}, kUnitWeights, 3);
    const std::vector<double> want = {1.0, 1.0, 0.25, 0.25, 1.0 / 9.0, 1.0 / 9.0, 0.0};
    REQUIRE(spec.size() == 7);
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(std::abs(spec.eigenvalues[i] - want[i]) <= 1e-14 * std::max(want[i], 1.0));
    CHECK(std::is_sorted(spec.eigenvalues.rbegin(), spec.eigenvalues.rend()));
}

TEST_CASE("spectrum: matches singular values of the dense truncation") {
    // Independent route: eigenvalues of M M^T computed on the explicit matrix
    // by the reference block power iteration.
    const CoefficientWindow win = materialize(AR1{0.5, 1.0}, 1e-12);
    const TruncatedOperator op = build(win, kUnitWeights, 40);
    const Spectrum spec = spectrum(op);
    const Eigen::MatrixXd G = op.M * op.M.transpose();
    const auto top = oracle::top_eigenvalues(G, 4, 400);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(spec.eigenvalues[static_cast<std::size_t>(i)] - top[static_cast<std::size_t>(i)]) <=
              1e-9 * top[0]);
}

TEST_CASE("spectrum: dependent top eigenvalue matches the power-iteration oracle") {
    const CoefficientWindow win = materialize(AR1{0.5, 1.0}, 1e-12);
    const TruncatedOperator op = build(win, kUnitWeights, 200);
    const Spectrum spec = spectrum(op);
    const Eigen::MatrixXd G = op.M * op.M.transpose();
    const auto top = oracle::top_eigenvalues(G, 1, 500);
    CHECK(std::abs(spec.eigenvalues[0] - top[0]) <= 1e-8 * top[0]);
}

TEST_CASE("spectrum: trace identity against the Frobenius norm") {
    const CoefficientWindow win = materialize(AR1{0.5, 1.0}, 1e-12);
    const TruncatedOperator op = build(win, kUnitWeights, 150);
    const Spectrum spec = spectrum(op);
    const double fro = op.frobenius_norm_sq();
    CHECK(std::abs(spec.sum() - fro) <= 1e-10 * fro);
}

TEST_CASE("spectrum: exact shift invariance") {
    const std::vector<double> c = {1.0, 2.0, 3.0};
    const Spectrum base = make_spectrum(ExplicitCoeffs{c, 0}, kUnitWeights, 25);
    for (int shift : {-5, -2, 7}) {
        const Spectrum moved = make_spectrum(ExplicitCoeffs{c, shift}, kUnitWeights, 25);
        REQUIRE(moved.size() == base.size());
        for (std::size_t i = 0; i < base.eigenvalues.size(); ++i)
            CHECK(moved.eigenvalues[i] == base.eigenvalues[i]);
    }
}

TEST_CASE("spectrum: exact reversal invariance") {
    const std::vector<double> c = {0.5, -1.0, 2.0, 0.25};
    std::vector<double> r(c.rbegin(), c.rend());
    const Spectrum a = make_spectrum(ExplicitCoeffs{c, 0}, kUnitWeights, 20);
    const Spectrum b = make_spectrum(ExplicitCoeffs{r, 0}, kUnitWeights, 20);
    for (std::size_t i = 0; i < a.eigenvalues.size(); ++i)
        CHECK(a.eigenvalues[i] == b.eigenvalues[i]);
}

TEST_CASE("spectrum: exact scale equivariance by a dyadic factor") {
    const std::vector<double> c = {0.5, -1.0, 2.0, 0.25};
    std::vector<double> doubled;
    for (double x : c) doubled.push_back(2.0 * x);
    const Spectrum base = make_spectrum(ExplicitCoeffs{c, 0}, kUnitWeights, 20);
    const Spectrum scaled = make_spectrum(ExplicitCoeffs{doubled, 0}, kUnitWeights, 20);
    for (std::size_t i = 0; i < base.eigenvalues.size(); ++i)
        CHECK(scaled.eigenvalues[i] == 4.0 * base.eigenvalues[i]);
}

TEST_CASE("spectrum: eigenvalues grow with N") {
    const Spectrum small = make_spectrum(AR1{0.5, 1.0}, kUnitWeights, 40);
    const Spectrum large = make_spectrum(AR1{0.5, 1.0}, kUnitWeights, 60);
    const double slack = 1e-12 * large.eigenvalues[0];
    for (std::size_t i = 0; i < small.eigenvalues.size(); ++i)
        CHECK(large.eigenvalues[i] >= small.eigenvalues[i] - slack);
}

TEST_CASE("counting_function: staircase against known spectrum") {
    const Spectrum spec = make_spectrum(IID{1.0}, kUnitWeights, 2);
    // eigenvalues {1, 1, 1/4, 1/4, 0}
    CHECK(counting_function(spec, 0.6) == 2);
    CHECK(counting_function(spec, 1.5) == 0);
    CHECK(counting_function(spec, 0.5) == 4); // threshold inclusive: sqrt(1/4) >= 0.5
    CHECK(counting_function(spec, 1e-9) == 4);
    CHECK_THROWS_AS((void)counting_function(spec, 0.0), DomainError);
}

TEST_CASE("counting_function: duality with the eigenvalue fit") {
    const Spectrum spec = make_spectrum(AR1{0.5, 1.0}, kUnitWeights, 400);
    const auto [lo, hi] = default_fit_window(400);
    const FitResult fit = fit_decay_constant(spec, 1.0, lo, hi);
    // With lambda_n ~ c n^{-2}, N(sqrt(lambda_n)) * lambda_n^{1/2} ~ c^{1/2}.
    for (int n : {60, 100, 140}) {
        const double s = std::sqrt(spec.eigenvalues[static_cast<std::size_t>(n - 1)]);
        const double v = static_cast<double>(counting_function(spec, s)) * s;
        CHECK(std::abs(v / std::sqrt(fit.c_hat) - 1.0) <= 0.05);
    }
}

TEST_CASE("fit_decay_constant: exact on even indices of the white-noise case") {
    const Spectrum spec = make_spectrum(IID{1.0}, kUnitWeights, 400);
    const FitResult fit = fit_decay_constant(spec, 1.0, 2, 320, 2);
    CHECK(std::abs(fit.c_hat - 4.0) <= 1e-13 * 4.0);
    CHECK(fit.dispersion <= 1e-12);
    CHECK_FALSE(fit.edge_warning);
}

TEST_CASE("fit_decay_constant: all-index fit approaches the constant") {
    const Spectrum spec = make_spectrum(IID{1.0}, kUnitWeights, 1000);
    const FitResult fit = fit_decay_constant(spec, 1.0, 100, 400);
    CHECK(std::abs(fit.c_hat / 4.0 - 1.0) <= 0.02);
}

TEST_CASE("fit_decay_constant: window validation and edge warning") {
    const Spectrum spec = make_spectrum(IID{1.0}, kUnitWeights, 50);
    CHECK_THROWS_AS((void)fit_decay_constant(spec, 1.0, 0, 10), DomainError);
    CHECK_THROWS_AS((void)fit_decay_constant(spec, 1.0, 10, 5), DomainError);
    CHECK_THROWS_AS((void)fit_decay_constant(spec, 1.0, 1, 102), DomainError);
    CHECK_THROWS_AS((void)fit_decay_constant(spec, 1.0, 1, 10, 0), DomainError);
    CHECK(fit_decay_constant(spec, 1.0, 80, 101).edge_warning);
}

TEST_CASE("default_fit_window: past the head, clear of the edge") {
    const auto [lo, hi] = default_fit_window(1000);
    CHECK(lo == 100);
    CHECK(hi == 400);
    const auto [lo2, hi2] = default_fit_window(5);
    CHECK(lo2 >= 1);
    CHECK(hi2 > lo2);
}

TEST_CASE("fit vs theory: dependent model at moderate N") {
    const Spectrum spec = make_spectrum(AR1{0.5, 1.0}, kUnitWeights, 500);
    const auto [lo, hi] = default_fit_window(500);
    const FitResult fit = fit_decay_constant(spec, 1.0, lo, hi);
    CHECK(std::abs(fit.c_hat / frozen::C_ar1_half - 1.0) <= 0.05);
}
