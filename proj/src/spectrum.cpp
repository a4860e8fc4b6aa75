#include "smalldev/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "smalldev/errors.hpp"
#include "smalldev/numeric.hpp"

namespace smalldev {

double TruncatedOperator::frobenius_norm_sq() const {
    CompensatedSum s;
    for (Eigen::Index c = 0; c < M.cols(); ++c)
        for (Eigen::Index r = 0; r < M.rows(); ++r) {
            const double v = M(r, c);
            s.add(v * v);
        }
    return s.value();
}

double Spectrum::sum() const {
    CompensatedSum s;
    for (double l : eigenvalues) s.add(l);
    return s.value();
}

TruncatedOperator build(const CoefficientWindow& window, const WeightSequence& w,
                        int N, std::size_t memory_budget) {
    validate(w);
    if (N < 1) throw DomainError("truncation order must be >= 1");
    if (window.coeffs.empty()) throw ModelError("empty coefficient window");

    TruncatedOperator op;
    op.N = N;
    op.L = window.half_width();
    op.tail_mass = window.tail_mass;
    op.window = window;
    op.weights = w;

    const long long rows = 2LL * N + 1;
    const long long cols = 2LL * (N + op.L) + 1;
    const unsigned long long bytes =
        static_cast<unsigned long long>(rows) * static_cast<unsigned long long>(cols) * 8ULL;
    if (bytes > memory_budget)
        throw ResourceError("truncated operator exceeds memory budget");

    op.M = Eigen::MatrixXd::Zero(rows, cols);
    const int len = static_cast<int>(window.coeffs.size());
    for (int k = -N; k <= N; ++k) {
        const double d = weight_at(w, k);
        if (d == 0.0) continue;
        for (int i = 0; i < len; ++i) {
            const int m = window.offset + i;
            const int j = k - m; // within [-(N+L), N+L] by the choice of L
            op.M(k + N, j + N + op.L) = d * window.coeffs[static_cast<std::size_t>(i)];
        }
    }
    return op;
}

Spectrum spectrum(const TruncatedOperator& op) {
    const int N = op.N;
    const long long n = 2LL * N + 1;

    // Gram matrix via autocovariances; banded with bandwidth = window length.
    const int len = static_cast<int>(op.window.coeffs.size());
    std::vector<double> gamma(static_cast<std::size_t>(len));
    for (int h = 0; h < len; ++h) gamma[static_cast<std::size_t>(h)] = autocovariance(op.window, h);

    std::vector<double> d(static_cast<std::size_t>(n));
    for (int k = -N; k <= N; ++k)
        d[static_cast<std::size_t>(k + N)] = weight_at(op.weights, k);

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (long long r = 0; r < n; ++r) {
        const long long hi = std::min(n - 1, r + len - 1);
        for (long long c = r; c <= hi; ++c) {
            const double v = d[static_cast<std::size_t>(r)] * d[static_cast<std::size_t>(c)] *
                             gamma[static_cast<std::size_t>(c - r)];
            G(r, c) = v;
            G(c, r) = v;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("symmetric eigensolver failed to converge");

    Spectrum out;
    out.N = N;
    out.L = op.L;
    out.tail_mass = op.tail_mass;
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    const auto& ev = solver.eigenvalues(); // ascending
    for (long long i = 0; i < n; ++i)
        out.eigenvalues[static_cast<std::size_t>(i)] = ev(n - 1 - i);

    const double lmax = out.eigenvalues.empty() ? 0.0 : std::max(out.eigenvalues.front(), 0.0);
    const double floor = 1e-14 * lmax;
    for (double& l : out.eigenvalues)
        if (l < floor) l = 0.0;

    const double trace = out.sum();
    const double fro = op.frobenius_norm_sq();
    if (fro > 0.0 && std::abs(trace - fro) > 1e-10 * fro)
        throw NumericError("eigenvalue sum deviates from trace beyond 1e-10 relative");

    return out;
}

std::int64_t counting_function(const Spectrum& spec, double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("threshold must be positive");
    const double s2 = s * s;
    const auto& ev = spec.eigenvalues;
    const auto it = std::partition_point(ev.begin(), ev.end(),
                                         [&](double l) { return l >= s2; });
    return static_cast<std::int64_t>(it - ev.begin());
}

FitResult fit_decay_constant(const Spectrum& spec, double p, int n_lo, int n_hi,
                             int stride) {
    const long long size = spec.size();
    if (stride < 1) throw DomainError("fit stride must be >= 1");
    if (n_lo < 1 || n_hi < n_lo || n_hi > size)
        throw DomainError("fit window out of range");

    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>((n_hi - n_lo) / stride + 1));
    for (int nn = n_lo; nn <= n_hi; nn += stride) {
        const double l = spec.eigenvalues[static_cast<std::size_t>(nn - 1)];
        vals.push_back(l * std::pow(static_cast<double>(nn), 2.0 * p));
    }

    FitResult fit;
    fit.n_lo = n_lo;
    fit.n_hi = n_hi;
    fit.stride = stride;
    fit.c_hat = median(vals);
    fit.dispersion = interquartile_range(vals);
    fit.edge_warning = 5LL * n_hi > 3LL * size; // window reaches past 60% of the spectrum
    return fit;
}

std::pair<int, int> default_fit_window(int N) {
    const int lo = std::max(1, N / 10);
    const int hi = std::max(lo + 1, (2 * N) / 5);
    return {lo, hi};
}

} // namespace smalldev
