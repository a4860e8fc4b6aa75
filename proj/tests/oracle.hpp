#pragma once

// Test-side reference computations, kept independent of the library code:
// an adaptive Simpson integrator used to pre-register quadrature constants,
// a block power iteration for the top eigenvalues of a symmetric matrix, and
// closed-form tail probabilities for one- and two-term spectra.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace oracle {

inline double simpson_panel(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fb,
                                   double fm, double whole, double tol,
                                   int depth) {
    if (depth > 60) throw std::runtime_error("adaptive simpson: depth exceeded");
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_panel(f, a, fa, m, fm, flm);
    const double right = simpson_panel(f, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, fm, flm, left, 0.5 * tol, depth + 1) +
           adaptive_simpson_rec(f, m, b, fm, fb, frm, right, 0.5 * tol, depth + 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = simpson_panel(f, a, fa, b, fb, fm);
    return adaptive_simpson_rec(f, a, b, fa, fb, fm, whole, tol, 0);
}

// Top eigenvalues of a symmetric matrix by block power iteration with
// Rayleigh-Ritz extraction; robust to (near-)degenerate leading pairs.
inline std::vector<double> top_eigenvalues(const Eigen::MatrixXd& G, int want,
                                           int iters = 300) {
    const int n = static_cast<int>(G.rows());
    const int block = want + 2;
    Eigen::MatrixXd V(n, block);
    std::uint64_t state = 0x9E3779B97F4A7C15ULL;
    for (int j = 0; j < block; ++j)
        for (int i = 0; i < n; ++i) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            V(i, j) = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
        }
    auto orthonormalize = [&](Eigen::MatrixXd& W) {
        for (int j = 0; j < W.cols(); ++j) {
            for (int rep = 0; rep < 2; ++rep)
                for (int i = 0; i < j; ++i)
                    W.col(j) -= W.col(i).dot(W.col(j)) * W.col(i);
            W.col(j) /= W.col(j).norm();
        }
    };
    orthonormalize(V);
    for (int it = 0; it < iters; ++it) {
        Eigen::MatrixXd W = G * V;
        orthonormalize(W);
        V = W;
    }
    const Eigen::MatrixXd R = V.transpose() * (G * V); // block x block
    // Jacobi eigenvalue iteration on the small Ritz matrix.
    Eigen::MatrixXd A = R;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < block; ++i)
            for (int j = i + 1; j < block; ++j) off += A(i, j) * A(i, j);
        if (off < 1e-30 * A.squaredNorm()) break;
        for (int i = 0; i < block; ++i)
            for (int j = i + 1; j < block; ++j) {
                if (A(i, j) == 0.0) continue;
                const double theta = 0.5 * std::atan2(2.0 * A(i, j), A(j, j) - A(i, i));
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                for (int k = 0; k < block; ++k) {
                    const double aik = A(i, k);
                    const double ajk = A(j, k);
                    A(i, k) = c * aik - s * ajk;
                    A(j, k) = s * aik + c * ajk;
                }
                for (int k = 0; k < block; ++k) {
                    const double aki = A(k, i);
                    const double akj = A(k, j);
                    A(k, i) = c * aki - s * akj;
                    A(k, j) = s * aki + c * akj;
                }
            }
    }
    std::vector<double> ev(block);
    for (int i = 0; i < block; ++i) ev[i] = A(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    ev.resize(want);
    return ev;
}

// ln P(l * chi2_1 <= eps^2) through the normal CDF, evaluated by quadrature of
// the density rather than erf, to stay independent of the library route.
inline double log_chisq1_tail(double lambda, double eps) {
    const double z = eps / std::sqrt(lambda);
    const auto phi = [](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    };
    return std::log(2.0 * adaptive_simpson(phi, 0.0, z, 1e-16));
}

// ln P(l * chi2_2 <= eps^2) by quadrature of the chi2_2 density.
inline double log_chisq2_tail(double lambda, double eps) {
    const double q = eps * eps / lambda;
    const auto dens = [](double x) { return 0.5 * std::exp(-0.5 * x); };
    return std::log(adaptive_simpson(dens, 0.0, q, 1e-16));
}

} // namespace oracle
