#include "smalldev/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smalldev/errors.hpp"
#include "smalldev/numeric.hpp"

namespace smalldev {

namespace {

bool all_zero(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw ModelError(std::string(what) + " must be finite");
}

// Smallest L >= 0 with tail(L) <= tol for a geometric coefficient tail whose
// squared mass beyond lag L is  factor * q^(L+1) / (1 - q),  q = rho^2.
long long geometric_cutoff(double rho, double factor, double tol) {
    const double q = rho * rho;
    auto tail = [&](long long L) {
        return factor * std::pow(q, static_cast<double>(L + 1)) / (1.0 - q);
    };
    long long L = 0;
    const double t0 = tail(0);
    if (t0 > tol) {
        // log-scale estimate, then settle exactly by stepping.
        L = static_cast<long long>(std::ceil(std::log(tol / t0) / std::log(q)));
        if (L < 0) L = 0;
    }
    while (tail(L) > tol) ++L;
    while (L > 0 && tail(L - 1) <= tol) --L;
    return L;
}

} // namespace

std::string spec_kind(const MASpec& spec) {
    struct Visitor {
        std::string operator()(const IID&) const { return "iid"; }
        std::string operator()(const AR1&) const { return "ar1"; }
        std::string operator()(const FiniteMA&) const { return "finite_ma"; }
        std::string operator()(const TwoSidedGeometric&) const { return "two_sided_geometric"; }
        std::string operator()(const ExplicitCoeffs&) const { return "explicit"; }
    };
    return std::visit(Visitor{}, spec);
}

bool spec_certifies_lr(const MASpec& spec) {
    // Every built-in family has finitely many or geometrically decaying
    // coefficients, which lie in every l_r, r > 0.
    (void)spec;
    return true;
}

double CoefficientWindow::at(int m) const {
    const long long i = static_cast<long long>(m) - offset;
    if (i < 0 || i >= static_cast<long long>(coeffs.size())) return 0.0;
    return coeffs[static_cast<std::size_t>(i)];
}

int CoefficientWindow::half_width() const {
    const int lo = min_index();
    const int hi = max_index();
    return std::max(std::abs(lo), std::abs(hi));
}

double CoefficientWindow::l2_norm_sq() const {
    CompensatedSum s;
    for (double c : coeffs) s.add(c * c);
    return s.value();
}

CoefficientWindow materialize(const MASpec& spec, double tol, std::int64_t max_length) {
    if (!(tol > 0.0) || !std::isfinite(tol))
        throw ModelError("truncation tolerance must be positive and finite");

    CoefficientWindow win;

    if (const auto* m = std::get_if<IID>(&spec)) {
        if (!std::isfinite(m->a0) || m->a0 == 0.0)
            throw ModelError("iid coefficient must be nonzero and finite");
        win.coeffs = {m->a0};
        win.offset = 0;
        win.tail_mass = 0.0;
    } else if (const auto* m = std::get_if<AR1>(&spec)) {
        if (!std::isfinite(m->rho) || std::abs(m->rho) >= 1.0)
            throw ModelError("ar1 ratio must satisfy |rho| < 1");
        if (!std::isfinite(m->scale) || m->scale == 0.0)
            throw ModelError("ar1 scale must be nonzero and finite");
        if (m->rho == 0.0) {
            win.coeffs = {m->scale};
            win.offset = 0;
            win.tail_mass = 0.0;
        } else {
            const double factor = m->scale * m->scale;
            const long long L = geometric_cutoff(m->rho, factor, tol);
            if (L + 1 > max_length)
                throw ResourceError("coefficient window exceeds length budget");
            win.coeffs.resize(static_cast<std::size_t>(L + 1));
            for (long long i = 0; i <= L; ++i)
                win.coeffs[static_cast<std::size_t>(i)] =
                    m->scale * std::pow(m->rho, static_cast<double>(i));
            win.offset = 0;
            const double q = m->rho * m->rho;
            win.tail_mass = factor * std::pow(q, static_cast<double>(L + 1)) / (1.0 - q);
        }
    } else if (const auto* m = std::get_if<FiniteMA>(&spec)) {
        if (m->coeffs.empty()) throw ModelError("finite_ma needs at least one coefficient");
        require_finite(m->coeffs, "finite_ma coefficients");
        if (all_zero(m->coeffs)) throw ModelError("finite_ma coefficients are all zero");
        if (static_cast<long long>(m->coeffs.size()) > max_length)
            throw ResourceError("coefficient window exceeds length budget");
        win.coeffs = m->coeffs;
        win.offset = m->offset;
        win.tail_mass = 0.0;
    } else if (const auto* m = std::get_if<TwoSidedGeometric>(&spec)) {
        if (!std::isfinite(m->rho) || m->rho <= 0.0 || m->rho >= 1.0)
            throw ModelError("two_sided_geometric ratio must satisfy 0 < rho < 1");
        if (!std::isfinite(m->scale) || m->scale == 0.0)
            throw ModelError("two_sided_geometric scale must be nonzero and finite");
        const double factor = 2.0 * m->scale * m->scale; // two symmetric tails
        const long long L = geometric_cutoff(m->rho, factor, tol);
        if (2 * L + 1 > max_length)
            throw ResourceError("coefficient window exceeds length budget");
        win.coeffs.resize(static_cast<std::size_t>(2 * L + 1));
        for (long long i = 0; i < 2 * L + 1; ++i) {
            const long long mm = i - L;
            win.coeffs[static_cast<std::size_t>(i)] =
                m->scale * std::pow(m->rho, static_cast<double>(std::llabs(mm)));
        }
        win.offset = static_cast<int>(-L);
        const double q = m->rho * m->rho;
        win.tail_mass = factor * std::pow(q, static_cast<double>(L + 1)) / (1.0 - q);
    } else if (const auto* m = std::get_if<ExplicitCoeffs>(&spec)) {
        if (m->coeffs.empty()) throw ModelError("explicit model needs at least one coefficient");
        require_finite(m->coeffs, "explicit coefficients");
        if (all_zero(m->coeffs)) throw ModelError("explicit coefficients are all zero");
        if (static_cast<long long>(m->coeffs.size()) > max_length)
            throw ResourceError("coefficient window exceeds length budget");
        win.coeffs = m->coeffs;
        win.offset = m->offset;
        win.tail_mass = 0.0;
    } else {
        throw ModelError("unrecognized model");
    }

    return win;
}

DensityGrid density_amplitude(const CoefficientWindow& window, std::int64_t grid_size) {
    if (window.coeffs.empty()) throw ModelError("empty coefficient window");
    if (grid_size <= 0 || !is_power_of_two(grid_size))
        throw DomainError("grid size must be a positive power of two");
    if (grid_size < 2 * static_cast<long long>(window.coeffs.size()))
        throw DomainError("grid size must be at least twice the window length");

    DensityGrid grid;
    grid.grid_size = grid_size;
    grid.amplitudes.resize(static_cast<std::size_t>(grid_size));

    // |a(x)|^2 = gamma(0) + 2 sum_h gamma(h) cos(hx). The form depends on the
    // window only through its autocovariances, so translates and reversals of
    // the same window produce bitwise-identical amplitudes.
    const int len = static_cast<int>(window.coeffs.size());
    std::vector<double> gamma(static_cast<std::size_t>(len));
    for (int h = 0; h < len; ++h) gamma[static_cast<std::size_t>(h)] = autocovariance(window, h);

    const double two_pi = 2.0 * 3.14159265358979323846;
    for (long long j = 0; j < grid_size; ++j) {
        // x_j = 2*pi * (j / grid_size); j/grid_size is exact for dyadic grids,
        // so coarse-grid nodes recur bitwise when the grid doubles.
        const double x = two_pi * (static_cast<double>(j) / static_cast<double>(grid_size));
        CompensatedSum s;
        s.add(gamma[0]);
        for (int h = 1; h < len; ++h)
            s.add(2.0 * gamma[static_cast<std::size_t>(h)] *
                  std::cos(static_cast<double>(h) * x));
        grid.amplitudes[static_cast<std::size_t>(j)] = std::sqrt(std::max(0.0, s.value()));
    }
    return grid;
}

double autocovariance(const CoefficientWindow& window, int lag) {
    const long long len = static_cast<long long>(window.coeffs.size());
    const long long h = std::llabs(static_cast<long long>(lag));
    if (h >= len) return 0.0;
    const auto prod = [&](long long i) {
        return window.coeffs[static_cast<std::size_t>(i)] *
               window.coeffs[static_cast<std::size_t>(i + h)];
    };
    // Fold index-mirrored pairs first: reversing the window maps each pair to
    // itself with the addends swapped, so the value is bitwise reversal-stable.
    const long long terms = len - h;
    CompensatedSum s;
    for (long long i = 0; 2 * i + 1 < terms; ++i)
        s.add(prod(i) + prod(terms - 1 - i));
    if (terms % 2 == 1) s.add(prod(terms / 2));
    return s.value();
}

void validate(const WeightSequence& w) {
    if (!std::isfinite(w.p) || !(w.p > 0.5))
        throw DomainError("decay exponent p must exceed 1/2");
    if (!std::isfinite(w.d_plus) || !std::isfinite(w.d_minus) ||
        w.d_plus < 0.0 || w.d_minus < 0.0)
        throw ModelError("weight amplitudes must be nonnegative and finite");
    if (w.d_plus == 0.0 && w.d_minus == 0.0 && w.prefix_override.empty())
        throw ModelError("weight sequence is identically zero");
    for (const auto& [k, v] : w.prefix_override)
        if (!std::isfinite(v) || v < 0.0)
            throw ModelError("weight overrides must be nonnegative and finite");
}

double weight_at(const WeightSequence& w, int k) {
    if (const auto it = w.prefix_override.find(k); it != w.prefix_override.end())
        return it->second;
    if (k == 0) return 0.0;
    const double d = k > 0 ? w.d_plus : w.d_minus;
    return d * std::pow(static_cast<double>(std::abs(static_cast<long long>(k))), -w.p);
}

} // namespace smalldev
