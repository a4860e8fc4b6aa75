#include "smalldev/theory.hpp"

#include <cmath>

#include "smalldev/errors.hpp"
#include "smalldev/numeric.hpp"

namespace smalldev {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Mean of |a(x)|^(1/p) over a dyadic grid of one period, compensated.
double grid_mean(const CoefficientWindow& window, std::int64_t grid, double inv_p) {
    const DensityGrid g = density_amplitude(window, grid);
    CompensatedSum s;
    for (double a : g.amplitudes) s.add(std::pow(a, inv_p));
    return s.value() / static_cast<double>(grid);
}

// Periodic trapezoid mean of |a|^(1/p) on doubling dyadic grids until the
// relative change drops below rel_tol.  For trigonometric-polynomial data the
// rule is spectrally accurate, so the loop exits after a few doublings.
double amplitude_mean(const CoefficientWindow& window, double p, double rel_tol,
                      std::int64_t max_grid, Quadrature& meta) {
    if (!(rel_tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
    const double inv_p = 1.0 / p;
    std::int64_t grid = 64;
    const std::int64_t min_grid = 2 * static_cast<long long>(window.coeffs.size());
    while (grid < min_grid) grid *= 2;
    if (grid > max_grid) throw ResourceError("quadrature grid budget too small for window");

    double prev = grid_mean(window, grid, inv_p);
    while (true) {
        if (grid * 2 > max_grid)
            throw NumericError("quadrature did not converge within grid budget");
        grid *= 2;
        const double cur = grid_mean(window, grid, inv_p);
        const double denom = std::abs(cur) > 0.0 ? std::abs(cur) : 1.0;
        const double change = std::abs(cur - prev) / denom;
        prev = cur;
        if (change <= rel_tol) {
            meta.grid = grid;
            meta.rel_change = change;
            return cur;
        }
    }
}

double weight_amplitude_factor(const WeightSequence& w) {
    const double inv_p = 1.0 / w.p;
    const double dm = w.d_minus > 0.0 ? std::pow(w.d_minus, inv_p) : 0.0;
    const double dp = w.d_plus > 0.0 ? std::pow(w.d_plus, inv_p) : 0.0;
    return dm + dp;
}

// x^(2p), by exact binary exponentiation when 2p is a small integer so that
// dyadic rescalings of the window commute with the final power bitwise.
double power_2p(double x, double p) {
    const double e = 2.0 * p;
    const double r = std::nearbyint(e);
    if (r == e && r >= 1.0 && r <= 64.0) {
        auto n = static_cast<unsigned>(r);
        double base = x;
        double acc = 1.0;
        while (n != 0) {
            if (n & 1u) acc *= base;
            base *= base;
            n >>= 1u;
        }
        return acc;
    }
    return std::pow(x, e);
}

} // namespace

double constant_Bp(double p) {
    if (!std::isfinite(p) || !(p > 0.5))
        throw DomainError("decay exponent p must exceed 1/2");
    const double u = kPi / (2.0 * p);
    const double base = kPi / (2.0 * p * std::sin(u));
    return 0.5 * (2.0 * p - 1.0) * std::pow(base, 2.0 * p / (2.0 * p - 1.0));
}

CResult constant_C(const CoefficientWindow& window, const WeightSequence& w,
                   double rel_tol, std::int64_t max_grid) {
    validate(w);
    Quadrature meta{};
    const double mean = amplitude_mean(window, w.p, rel_tol, max_grid, meta);
    const double factor = weight_amplitude_factor(w);
    return {power_2p(mean * factor, w.p), meta};
}

CResult delta_mu(const CoefficientWindow& window, const WeightSequence& w,
                 double rel_tol, std::int64_t max_grid) {
    validate(w);
    Quadrature meta{};
    const double mean = amplitude_mean(window, w.p, rel_tol, max_grid, meta);
    return {mean * weight_amplitude_factor(w), meta};
}

double predicted_eigenvalue(std::int64_t n, double C, double p) {
    if (n < 1) throw DomainError("eigenvalue index must be >= 1");
    if (!(C > 0.0) || !std::isfinite(C)) throw DomainError("decay constant must be positive");
    return C * std::pow(static_cast<double>(n), -2.0 * p);
}

double predicted_log_smalldev(double p, double C, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("radius must be positive");
    if (!(C > 0.0) || !std::isfinite(C)) throw DomainError("decay constant must be positive");
    const double B = constant_Bp(p);
    return -B * std::pow(C / (eps * eps), 1.0 / (2.0 * p - 1.0));
}

TheoryConstants theory_constants(const CoefficientWindow& window, const WeightSequence& w,
                                 double rel_tol, bool coeffs_certified_lr) {
    validate(w);
    TheoryConstants out{};
    out.p = w.p;
    out.B_p = constant_Bp(w.p);
    Quadrature meta{};
    const double mean = amplitude_mean(window, w.p, rel_tol, 1LL << 24, meta);
    const double factor = weight_amplitude_factor(w);
    out.delta_mu = mean * factor;
    out.C = power_2p(out.delta_mu, w.p);
    out.sd_exponent = 2.0 / (2.0 * w.p - 1.0);
    out.quadrature = meta;
    out.heavy_tail_warning = (w.p < 1.0) && !coeffs_certified_lr;
    if (!(out.C > 0.0) || !std::isfinite(out.C))
        throw NumericError("decay constant evaluated nonpositive or nonfinite");
    return out;
}

} // namespace smalldev
