#include "smalldev/smallball.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

#include "smalldev/errors.hpp"
#include "smalldev/numeric.hpp"
#include "smalldev/rng.hpp"

namespace smalldev {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::int64_t kBlock = 4096; // reduction granularity, fixed for reproducibility

void check_lambdas(std::span<const double> lambdas) {
    if (lambdas.empty()) throw DomainError("spectrum is empty");
    for (double l : lambdas)
        if (!std::isfinite(l) || l < 0.0)
            throw DomainError("eigenvalues must be nonnegative and finite");
}

double check_radius(double eps) {
    if (!std::isfinite(eps) || !(eps > 0.0)) throw DomainError("radius must be positive");
    return eps * eps;
}

double lambda_sum(std::span<const double> lambdas) {
    CompensatedSum s;
    for (double l : lambdas) s.add(l);
    return s.value();
}

// K(t) = -L'(t) = sum lambda/(1+2t lambda): strictly decreasing from sum(lambda) to 0.
double cgf_K(std::span<const double> lambdas, double t) {
    CompensatedSum s;
    for (double l : lambdas) s.add(l / (1.0 + 2.0 * t * l));
    return s.value();
}

// V(t) = L''(t) = sum 2 lambda^2/(1+2t lambda)^2.
double cgf_V(std::span<const double> lambdas, double t) {
    CompensatedSum s;
    for (double l : lambdas) {
        const double r = l / (1.0 + 2.0 * t * l);
        s.add(2.0 * r * r);
    }
    return s.value();
}

// Solves K(t) = eps2 for t > 0. Bisection in ln t down to relative bracket
// width 1e-12, then Newton polish on the residual. Every intermediate is
// built from products and quotients of the inputs, so scaling all lambdas by
// 4 and eps by 2 reproduces t/4 bit-for-bit.
double solve_saddle(std::span<const double> lambdas, double eps2, double total) {
    double lmax = 0.0;
    for (double l : lambdas) lmax = std::max(lmax, l);

    double t0 = (total / eps2 - 1.0) / (2.0 * lmax);
    if (!(t0 > 0.0)) t0 = 1.0 / (2.0 * lmax);

    double lo = t0;
    while (cgf_K(lambdas, lo) <= eps2) lo *= 0.5;
    double hi = std::max(t0, 2.0 * lo);
    while (cgf_K(lambdas, hi) > eps2) hi *= 2.0;

    while (hi - lo > 1e-12 * hi) {
        const double mid = std::sqrt(lo * hi);
        if (cgf_K(lambdas, mid) > eps2)
            lo = mid;
        else
            hi = mid;
    }

    double t = std::sqrt(lo * hi);
    for (int iter = 0; iter < 8; ++iter) {
        const double g = cgf_K(lambdas, t) - eps2;
        if (std::abs(g) <= 1e-13 * eps2) break;
        const double V = cgf_V(lambdas, t);
        if (!(V > 0.0)) break;
        const double step = g / V;
        const double next = t + step;
        if (!(next > 0.0)) break;
        t = next;
    }

    if (std::abs(cgf_K(lambdas, t) - eps2) > 1e-12 * eps2)
        throw NumericError("saddle equation residual exceeds tolerance");
    return t;
}

struct BlockStats {
    CompensatedSum sum_w;
    CompensatedSum sum_w2;
    std::int64_t hits = 0;
};

// Runs `fn(block_index, stats)` over ceil(n/kBlock) blocks with the requested
// worker count, then folds the per-block partials in block order. The fold
// order is independent of the worker count, so results are bit-stable.
template <typename Fn>
BlockStats run_blocks(std::int64_t n_samples, int workers, Fn&& fn) {
    const std::int64_t n_blocks = (n_samples + kBlock - 1) / kBlock;
    std::vector<BlockStats> partial(static_cast<std::size_t>(n_blocks));

    const int W = static_cast<int>(
        std::max<std::int64_t>(1, std::min<std::int64_t>(workers, n_blocks)));
    if (W == 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b)
            fn(b, partial[static_cast<std::size_t>(b)]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(W));
        for (int wkr = 0; wkr < W; ++wkr)
            pool.emplace_back([&, wkr] {
                for (std::int64_t b = wkr; b < n_blocks; b += W)
                    fn(b, partial[static_cast<std::size_t>(b)]);
            });
        for (auto& th : pool) th.join();
    }

    BlockStats total;
    for (const auto& blk : partial) {
        total.sum_w.add(blk.sum_w.value());
        total.sum_w2.add(blk.sum_w2.value());
        total.hits += blk.hits;
    }
    return total;
}

} // namespace

double log_laplace(std::span<const double> lambdas, double t) {
    check_lambdas(lambdas);
    if (!std::isfinite(t) || t < 0.0) throw DomainError("tilt parameter must be >= 0");
    CompensatedSum s;
    for (double l : lambdas) s.add(std::log1p(2.0 * t * l));
    return -0.5 * s.value();
}

SmallDevEstimate saddlepoint_log_prob(std::span<const double> lambdas, double eps,
                                      SaddleOrder order) {
    check_lambdas(lambdas);
    const double eps2 = check_radius(eps);
    const double total = lambda_sum(lambdas);
    if (!(total > 0.0)) throw DomainError("spectrum is identically zero");
    if (eps2 >= total)
        throw RegimeError("radius squared must lie below the spectrum sum");

    const double t = solve_saddle(lambdas, eps2, total);
    const double L = log_laplace(lambdas, t);

    SmallDevEstimate est;
    est.saddle_t = t;
    est.log_prob = t * eps2 + L;
    if (order == SaddleOrder::corrected) {
        const double V = cgf_V(lambdas, t);
        est.log_prob -= 0.5 * std::log(4.0 * kPi * t * t * V);
        est.method = "saddlepoint_corrected";
    } else {
        est.method = "saddlepoint_leading";
    }
    return est;
}

SmallDevEstimate tilted_mc_log_prob(std::span<const double> lambdas, double eps,
                                    std::int64_t n_samples, std::uint64_t seed,
                                    int workers) {
    check_lambdas(lambdas);
    const double eps2 = check_radius(eps);
    if (n_samples < 1) throw DomainError("sample count must be >= 1");
    const double total = lambda_sum(lambdas);
    if (!(total > 0.0)) throw DomainError("spectrum is identically zero");

    // Beyond the regime boundary the zero tilt makes this plain Monte Carlo.
    const double t = eps2 < total ? solve_saddle(lambdas, eps2, total) : 0.0;

    const std::size_t dim = lambdas.size();
    std::vector<double> sigma(dim); // tilted stddev per coordinate
    for (std::size_t i = 0; i < dim; ++i)
        sigma[i] = 1.0 / std::sqrt(1.0 + 2.0 * t * lambdas[i]);

    const int W = resolve_workers(workers);
    const BlockStats total_stats = run_blocks(n_samples, W, [&](std::int64_t b, BlockStats& out) {
        const std::int64_t begin = b * kBlock;
        const std::int64_t end = std::min(begin + kBlock, n_samples);
        for (std::int64_t i = begin; i < end; ++i) {
            double q = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double z = sigma[c] * standard_normal(seed, 0,
                                                            static_cast<std::uint64_t>(i),
                                                            static_cast<std::uint32_t>(c));
                q += lambdas[c] * z * z;
            }
            if (q <= eps2) {
                const double w = std::exp(t * (q - eps2)); // in (0, 1]
                out.sum_w.add(w);
                out.sum_w2.add(w * w);
                out.hits += 1;
            }
        }
    });

    if (total_stats.hits == 0)
        throw EstimateError("no sample fell inside the target region");

    const double n = static_cast<double>(n_samples);
    const double mean = total_stats.sum_w.value() / n;
    double var = total_stats.sum_w2.value() / n - mean * mean;
    var = std::max(var, 0.0) * (n / std::max(n - 1.0, 1.0));

    SmallDevEstimate est;
    est.log_prob = t * eps2 + log_laplace(lambdas, t) + std::log(mean);
    est.std_err = std::sqrt(var / n) / mean; // delta method on the log scale
    if (t > 0.0) est.saddle_t = t;
    est.samples = n_samples;
    est.seed = seed;
    est.method = "tilted_mc";
    return est;
}

SmallDevEstimate exact_small_case_log_prob(std::span<const double> lambdas, double eps) {
    check_lambdas(lambdas);
    const double eps2 = check_radius(eps);

    SmallDevEstimate est;
    est.method = "exact_small_case";

    if (lambdas.size() == 1) {
        const double l = lambdas[0];
        if (!(l > 0.0)) throw DomainError("eigenvalue must be positive");
        est.log_prob = std::log(std::erf(eps / std::sqrt(2.0 * l)));
        return est;
    }
    if (lambdas.size() == 2) {
        const double l1 = lambdas[0];
        const double l2 = lambdas[1];
        if (!(l1 > 0.0) || !(l2 > 0.0)) throw DomainError("eigenvalues must be positive");
        if (std::abs(l1 - l2) > 1e-12 * std::max(l1, l2))
            throw UnsupportedError("two-mode closed form needs equal eigenvalues");
        const double l = 0.5 * (l1 + l2);
        est.log_prob = std::log(-std::expm1(-eps2 / (2.0 * l)));
        return est;
    }
    throw UnsupportedError("closed forms cover one mode or an equal pair only");
}

SmallDevEstimate direct_sim_log_prob(const CoefficientWindow& window,
                                     const WeightSequence& w, int N, double eps,
                                     std::int64_t n_samples, std::uint64_t seed,
                                     int workers) {
    validate(w);
    if (N < 1) throw DomainError("truncation order must be >= 1");
    if (window.coeffs.empty()) throw ModelError("empty coefficient window");
    const double eps2 = check_radius(eps);
    if (n_samples < 1) throw DomainError("sample count must be >= 1");

    const int L = window.half_width();
    const int x_len = 2 * (N + L) + 1; // driving noise indices -(N+L) .. N+L
    const int len = static_cast<int>(window.coeffs.size());

    std::vector<double> dk(static_cast<std::size_t>(2 * N + 1));
    for (int k = -N; k <= N; ++k) dk[static_cast<std::size_t>(k + N)] = weight_at(w, k);

    const int W = resolve_workers(workers);
    std::vector<std::vector<double>> scratch(static_cast<std::size_t>(std::max(1, W)));

    const std::int64_t n_blocks = (n_samples + kBlock - 1) / kBlock;
    std::vector<std::int64_t> hits(static_cast<std::size_t>(n_blocks), 0);

    auto run_range = [&](int wkr, int stride) {
        auto& x = scratch[static_cast<std::size_t>(wkr)];
        x.resize(static_cast<std::size_t>(x_len));
        for (std::int64_t b = wkr; b < n_blocks; b += stride) {
            const std::int64_t begin = b * kBlock;
            const std::int64_t end = std::min(begin + kBlock, n_samples);
            std::int64_t h = 0;
            for (std::int64_t i = begin; i < end; ++i) {
                for (int c = 0; c < x_len; ++c)
                    x[static_cast<std::size_t>(c)] =
                        standard_normal(seed, 1, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint32_t>(c));
                double q = 0.0;
                for (int k = -N; k <= N; ++k) {
                    const double d = dk[static_cast<std::size_t>(k + N)];
                    if (d == 0.0) continue;
                    double u = 0.0;
                    for (int ci = 0; ci < len; ++ci) {
                        const int m = window.offset + ci;
                        u += window.coeffs[static_cast<std::size_t>(ci)] *
                             x[static_cast<std::size_t>(k - m + N + L)];
                    }
                    q += d * d * u * u;
                }
                if (q <= eps2) ++h;
            }
            hits[static_cast<std::size_t>(b)] = h;
        }
    };

    const int W_eff = static_cast<int>(std::max<std::int64_t>(
        1, std::min<std::int64_t>(W, n_blocks)));
    if (W_eff == 1) {
        run_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(W_eff));
        for (int wkr = 0; wkr < W_eff; ++wkr)
            pool.emplace_back(run_range, wkr, W_eff);
        for (auto& th : pool) th.join();
    }

    std::int64_t total_hits = 0;
    for (std::int64_t h : hits) total_hits += h;
    if (total_hits == 0)
        throw EstimateError("no sample fell inside the target region");

    const double n = static_cast<double>(n_samples);
    const double p_hat = static_cast<double>(total_hits) / n;

    SmallDevEstimate est;
    est.log_prob = std::log(p_hat);
    est.std_err = std::sqrt(static_cast<double>(n_samples - total_hits) /
                            (n * static_cast<double>(total_hits)));
    est.samples = n_samples;
    est.seed = seed;
    est.method = "direct_sim";
    return est;
}

int resolve_workers(int requested) {
    if (requested > 0) return std::min(requested, 256);
    if (const char* env = std::getenv("SMALLDEV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 256u));
}

} // namespace smalldev
