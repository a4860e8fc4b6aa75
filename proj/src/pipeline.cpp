#include "smalldev/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <vector>

#include "smalldev/io.hpp"
#include "smalldev/smallball.hpp"
#include "smalldev/spectrum.hpp"
#include "smalldev/theory.hpp"
#include "smalldev/version.hpp"

namespace smalldev {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e.what());
    }
}

json provenance(const RunConfig& cfg, const char* command) {
    return json{{"command", command},
                {"config_hash", config_hash(cfg)},
                {"seed", cfg.seed},
                {"version", version}};
}

struct TheoryBundle {
    CoefficientWindow window;
    TheoryConstants tc;
    double matched_iid_C = 0.0;
    Quadrature matched_iid_quad;
};

TheoryBundle compute_theory(const RunConfig& cfg) {
    TheoryBundle b;
    b.window = materialize(cfg.model, cfg.window_tol);
    b.tc = theory_constants(b.window, cfg.weights, cfg.quad_rel_tol,
                            spec_certifies_lr(cfg.model));
    // White-noise reference with the same marginal variance; its constant
    // separates genuinely dependent models from their matched i.i.d. twin.
    const double var0 = autocovariance(b.window, 0);
    const CoefficientWindow iid_win = materialize(IID{std::sqrt(var0)}, cfg.window_tol);
    const CResult ref = constant_C(iid_win, cfg.weights, cfg.quad_rel_tol);
    b.matched_iid_C = ref.value;
    b.matched_iid_quad = ref.quadrature;
    return b;
}

json quadrature_json(const Quadrature& q) {
    return json{{"grid", q.grid}, {"rel_change", q.rel_change}};
}

json constants_json(const RunConfig& cfg, const TheoryBundle& b) {
    return json{{"model", {{"kind", spec_kind(cfg.model)},
                           {"window_length", b.window.length()},
                           {"window_offset", b.window.offset},
                           {"tail_mass", b.window.tail_mass}}},
                {"p", b.tc.p},
                {"B_p", b.tc.B_p},
                {"C", b.tc.C},
                {"delta_mu", b.tc.delta_mu},
                {"sd_exponent", b.tc.sd_exponent},
                {"quadrature", quadrature_json(b.tc.quadrature)},
                {"heavy_tail_warning", b.tc.heavy_tail_warning},
                {"matched_iid_C", b.matched_iid_C},
                {"matched_iid_quadrature", quadrature_json(b.matched_iid_quad)}};
}

void write_theory_artifacts(const RunConfig& cfg, const TheoryBundle& b, const json& env) {
    const fs::path dir(cfg.output_dir);
    atomic_write_file(dir / "constants.json", env.dump(2) + "\n");
    atomic_write_file(dir / "window.csv", window_csv(b.window));
}

// Deterministic geometric threshold ladder between the extreme nonzero
// singular values, for the counting-function export.
std::vector<double> counting_thresholds(const Spectrum& spec) {
    double lmax = 0.0, lmin = 0.0;
    for (double l : spec.eigenvalues)
        if (l > 0.0) {
            if (lmax == 0.0) lmax = l;
            lmin = l;
        }
    std::vector<double> out;
    if (lmax <= 0.0) return out;
    const int J = 25;
    const double shi = std::sqrt(lmax);
    const double slo = std::sqrt(lmin);
    for (int j = 0; j < J; ++j)
        out.push_back(shi * std::pow(slo / shi, static_cast<double>(j) /
                                                    static_cast<double>(J - 1)));
    return out;
}

struct SpectrumRow {
    Spectrum spec;
    FitResult fit;
    double gap = 0.0;
};

SpectrumRow spectrum_for(const RunConfig& cfg, const TheoryBundle& b, int N) {
    const TruncatedOperator op = build(b.window, cfg.weights, N);
    SpectrumRow row;
    row.spec = spectrum(op);
    const auto [lo, hi] = default_fit_window(N);
    row.fit = fit_decay_constant(row.spec, cfg.weights.p, lo, hi);
    row.gap = std::abs(row.fit.c_hat / b.tc.C - 1.0);
    return row;
}

json spectrum_row_json(const SpectrumRow& row) {
    return json{{"N", row.spec.N},
                {"L", row.spec.L},
                {"tail_mass", row.spec.tail_mass},
                {"modes", row.spec.size()},
                {"lambda_1", row.spec.eigenvalues.empty() ? 0.0 : row.spec.eigenvalues[0]},
                {"trace", row.spec.sum()},
                {"fit", {{"c_hat", row.fit.c_hat},
                         {"dispersion", row.fit.dispersion},
                         {"n_lo", row.fit.n_lo},
                         {"n_hi", row.fit.n_hi},
                         {"stride", row.fit.stride},
                         {"edge_warning", row.fit.edge_warning}}},
                {"gap", row.gap}};
}

void write_spectrum_artifacts(const RunConfig& cfg, const SpectrumRow& row, bool plots) {
    const fs::path dir(cfg.output_dir);
    const std::string tag = std::to_string(row.spec.N);
    atomic_write_file(dir / ("spectrum_N" + tag + ".csv"),
                      spectrum_csv(row.spec, cfg.weights.p));
    atomic_write_file(dir / ("counting_N" + tag + ".csv"),
                      counting_csv(row.spec, counting_thresholds(row.spec)));
    if (plots) {
        std::ostringstream dat;
        dat << "# n  lambda_n * n^(2p)\n";
        for (std::int64_t n = 1; n <= row.spec.size(); ++n) {
            const double l = row.spec.eigenvalues[static_cast<std::size_t>(n - 1)];
            dat << n << " "
                << format_double(l * std::pow(static_cast<double>(n), 2.0 * cfg.weights.p))
                << "\n";
        }
        atomic_write_file(dir / "plots" / ("lambda_scaled_N" + tag + ".dat"), dat.str());
    }
}

struct SmallballOutcome {
    std::vector<SmallballRow> rows;
    json regime_skipped = json::array();
    json failed = json::array();
};

SmallballOutcome run_estimates(const RunConfig& cfg, const TheoryBundle& b,
                               const std::vector<std::pair<int, const Spectrum*>>& spectra) {
    SmallballOutcome out;
    for (const auto& [N, spec] : spectra) {
        const double total = spec->sum();
        for (double eps : cfg.eps_grid) {
            const double predicted =
                predicted_log_smalldev(cfg.weights.p, b.tc.C, eps);
            for (const std::string& method : cfg.methods) {
                try {
                    SmallDevEstimate est;
                    if (method == "saddlepoint") {
                        if (eps * eps >= total) {
                            out.regime_skipped.push_back(
                                json{{"N", N}, {"eps", eps}, {"method", method}});
                            continue;
                        }
                        est = saddlepoint_log_prob(spec->eigenvalues, eps,
                                                   SaddleOrder::corrected);
                    } else if (method == "tilted_mc") {
                        est = tilted_mc_log_prob(spec->eigenvalues, eps, cfg.samples,
                                                 cfg.seed);
                    } else if (method == "direct_sim") {
                        est = direct_sim_log_prob(b.window, cfg.weights, N, eps,
                                                  cfg.samples, cfg.seed);
                    } else {
                        throw UsageError("unknown method: " + method);
                    }
                    out.rows.push_back(
                        SmallballRow{N, eps, est, predicted, est.log_prob / predicted});
                } catch (const EstimateError& e) {
                    out.failed.push_back(json{{"N", N},
                                              {"eps", eps},
                                              {"method", method},
                                              {"error", e.what()}});
                }
            }
        }
    }
    return out;
}

json smallball_rows_json(const SmallballOutcome& out) {
    json rows = json::array();
    for (const auto& row : out.rows) {
        json r{{"N", row.N},
               {"eps", row.eps},
               {"method", row.estimate.method},
               {"log_prob", row.estimate.log_prob},
               {"predicted_log", row.predicted_log},
               {"ratio", row.ratio}};
        if (row.estimate.std_err) r["std_err"] = *row.estimate.std_err;
        if (row.estimate.saddle_t) r["saddle_t"] = *row.estimate.saddle_t;
        if (row.estimate.samples) r["samples"] = *row.estimate.samples;
        if (row.estimate.seed) r["seed"] = *row.estimate.seed;
        rows.push_back(std::move(r));
    }
    return rows;
}

void require(bool ok, const char* msg) {
    if (!ok) throw UsageError(msg);
}

json flag(bool applicable, bool pass, json details = json::object()) {
    details["applicable"] = applicable;
    details["pass"] = applicable ? pass : true;
    return details;
}

json compute_flags(const RunConfig& cfg, const TheoryBundle& b,
                   const std::vector<SpectrumRow>& spectra,
                   const SmallballOutcome& sb) {
    json flags;

    // spectrum_gap / gap_monotone
    if (!spectra.empty()) {
        std::vector<double> gaps;
        for (const auto& row : spectra) gaps.push_back(row.gap);
        flags["spectrum_gap"] =
            flag(true, gaps.back() <= 0.05, json{{"gap", gaps.back()}, {"limit", 0.05}});
        bool mono = true;
        // Slack keeps rounding-level wiggle on exactly solvable models from
        // masquerading as divergence.
        for (std::size_t i = 1; i < gaps.size(); ++i)
            if (gaps[i] > gaps[i - 1] + 1e-12) mono = false;
        flags["gap_monotone"] = flag(gaps.size() >= 2, mono, json{{"gaps", gaps}});
    }

    // identity_c_delta: C recomputed from the slope constant.
    {
        const double from_delta = std::pow(b.tc.delta_mu, 2.0 * b.tc.p);
        const double diff = std::abs(b.tc.C - from_delta);
        flags["identity_c_delta"] =
            flag(true, diff <= 1e-10 * b.tc.C,
                 json{{"C", b.tc.C}, {"delta_mu_pow", from_delta}, {"abs_diff", diff}});
    }

    // dependence_distinct: only meaningful for genuinely dependent windows.
    {
        const bool applicable = b.window.length() > 1;
        const double sep = std::abs(b.tc.C - b.matched_iid_C);
        const double tol = 5.0 * cfg.quad_rel_tol * (b.tc.C + b.matched_iid_C);
        flags["dependence_distinct"] =
            flag(applicable, sep > tol,
                 json{{"C", b.tc.C},
                      {"matched_iid_C", b.matched_iid_C},
                      {"separation", sep},
                      {"threshold", tol}});
    }

    // ratio flags over corrected-saddlepoint rows at the largest N.
    {
        std::vector<std::pair<double, double>> eps_ratio; // (eps, R), eps decreasing
        for (const auto& row : sb.rows)
            if (row.estimate.method == "saddlepoint_corrected")
                eps_ratio.emplace_back(row.eps, row.ratio);
        std::sort(eps_ratio.begin(), eps_ratio.end(),
                  [](const auto& a, const auto& b2) { return a.first > b2.first; });

        json seq = json::array();
        for (const auto& [e, r] : eps_ratio) seq.push_back(json{{"eps", e}, {"ratio", r}});

        bool mono = true;
        for (std::size_t i = 1; i < eps_ratio.size(); ++i)
            if (std::abs(eps_ratio[i].second - 1.0) >
                std::abs(eps_ratio[i - 1].second - 1.0))
                mono = false;
        flags["ratio_monotone"] = flag(eps_ratio.size() >= 2, mono, json{{"rows", seq}});

        const bool have = !eps_ratio.empty();
        const double last = have ? std::abs(eps_ratio.back().second - 1.0) : 0.0;
        flags["ratio_close"] =
            flag(have, last <= 0.15,
                 json{{"abs_ratio_gap", last},
                      {"limit", 0.15},
                      {"eps", have ? eps_ratio.back().first : 0.0}});
    }

    // engines_agree over (N, eps) pairs where both Monte Carlo engines ran.
    {
        json pairs = json::array();
        bool all_ok = true;
        bool any = false;
        for (const auto& row : sb.rows) {
            if (row.estimate.method != "tilted_mc") continue;
            for (const auto& other : sb.rows) {
                if (other.estimate.method != "direct_sim") continue;
                if (other.N != row.N || other.eps != row.eps) continue;
                const double se = std::sqrt(*row.estimate.std_err * *row.estimate.std_err +
                                            *other.estimate.std_err * *other.estimate.std_err);
                const double diff = std::abs(row.estimate.log_prob - other.estimate.log_prob);
                const bool ok = diff <= 3.0 * se;
                any = true;
                all_ok = all_ok && ok;
                pairs.push_back(json{{"N", row.N},
                                     {"eps", row.eps},
                                     {"diff", diff},
                                     {"combined_se", se},
                                     {"pass", ok}});
            }
        }
        flags["engines_agree"] = flag(any, all_ok, json{{"pairs", pairs}});
    }

    return flags;
}

} // namespace

bool all_flags_pass(const json& report) {
    if (!report.contains("flags")) return false;
    for (const auto& [name, fl] : report.at("flags").items()) {
        (void)name;
        if (fl.value("applicable", false) && !fl.value("pass", false)) return false;
    }
    return true;
}

json run_theory(const RunConfig& cfg) {
    const TheoryBundle b = stage("theory", [&] { return compute_theory(cfg); });
    json env{{"provenance", provenance(cfg, "theory")},
             {"constants", constants_json(cfg, b)}};
    stage("theory", [&] { write_theory_artifacts(cfg, b, env); return 0; });
    return env;
}

json run_spectrum(const RunConfig& cfg) {
    require(!cfg.N_list.empty(), "run.N_list is required for the spectrum command");
    const TheoryBundle b = stage("theory", [&] { return compute_theory(cfg); });
    json env{{"provenance", provenance(cfg, "spectrum")},
             {"constants", constants_json(cfg, b)}};
    stage("theory", [&] { write_theory_artifacts(cfg, b, env); return 0; });

    json rows = json::array();
    stage("spectrum", [&] {
        for (int N : cfg.N_list) {
            const SpectrumRow row = spectrum_for(cfg, b, N);
            write_spectrum_artifacts(cfg, row, /*plots=*/false);
            rows.push_back(spectrum_row_json(row));
        }
        return 0;
    });
    env["spectrum"] = std::move(rows);
    stage("spectrum", [&] {
        atomic_write_file(fs::path(cfg.output_dir) / "spectrum_summary.json",
                          env.dump(2) + "\n");
        return 0;
    });
    return env;
}

json run_smallball(const RunConfig& cfg) {
    require(!cfg.N_list.empty(), "run.N_list is required for the smallball command");
    require(!cfg.eps_grid.empty(), "run.eps_grid is required for the smallball command");
    require(!cfg.methods.empty(), "run.methods is required for the smallball command");

    const TheoryBundle b = stage("theory", [&] { return compute_theory(cfg); });
    json env{{"provenance", provenance(cfg, "smallball")},
             {"constants", constants_json(cfg, b)}};
    stage("theory", [&] { write_theory_artifacts(cfg, b, env); return 0; });

    std::vector<std::pair<int, Spectrum>> spectra;
    stage("spectrum", [&] {
        for (int N : cfg.N_list) {
            const TruncatedOperator op = build(b.window, cfg.weights, N);
            spectra.emplace_back(N, spectrum(op));
        }
        return 0;
    });

    SmallballOutcome out = stage("smallball", [&] {
        std::vector<std::pair<int, const Spectrum*>> view;
        view.reserve(spectra.size());
        for (const auto& [N, spec] : spectra) view.emplace_back(N, &spec);
        auto res = run_estimates(cfg, b, view);
        if (!res.rows.empty() || cfg.eps_grid.empty()) return res;
        if (res.failed.empty()) return res; // everything regime-skipped is legitimate
        throw EstimateError("every requested estimate failed");
    });

    env["rows"] = smallball_rows_json(out);
    env["regime_skipped"] = out.regime_skipped;
    env["failed"] = out.failed;
    stage("smallball", [&] {
        atomic_write_file(fs::path(cfg.output_dir) / "smallball.csv",
                          smallball_csv(out.rows));
        atomic_write_file(fs::path(cfg.output_dir) / "smallball.json", env.dump(2) + "\n");
        return 0;
    });
    return env;
}

json run_verify(const RunConfig& cfg) {
    require(cfg.N_list.size() >= 2, "verify needs at least two run.N_list entries");
    require(cfg.eps_grid.size() >= 3, "verify needs at least three run.eps_grid entries");
    require(!cfg.methods.empty(), "run.methods is required for the verify command");

    const TheoryBundle b = stage("theory", [&] { return compute_theory(cfg); });
    json env{{"provenance", provenance(cfg, "verify")},
             {"constants", constants_json(cfg, b)}};
    stage("theory", [&] { write_theory_artifacts(cfg, b, env); return 0; });

    std::vector<SpectrumRow> spectra;
    stage("spectrum", [&] {
        for (int N : cfg.N_list) {
            spectra.push_back(spectrum_for(cfg, b, N));
            write_spectrum_artifacts(cfg, spectra.back(), /*plots=*/true);
        }
        return 0;
    });
    json spec_rows = json::array();
    for (const auto& row : spectra) spec_rows.push_back(spectrum_row_json(row));
    env["spectrum"] = std::move(spec_rows);

    const SmallballOutcome out = stage("smallball", [&] {
        // Estimates run against the finest available truncation.
        std::vector<std::pair<int, const Spectrum*>> view{
            {spectra.back().spec.N, &spectra.back().spec}};
        return run_estimates(cfg, b, view);
    });
    env["rows"] = smallball_rows_json(out);
    env["regime_skipped"] = out.regime_skipped;
    env["failed"] = out.failed;

    stage("smallball", [&] {
        atomic_write_file(fs::path(cfg.output_dir) / "smallball.csv",
                          smallball_csv(out.rows));
        std::ostringstream dat;
        dat << "# eps  log_prob/predicted_log (corrected saddlepoint)\n";
        for (const auto& row : out.rows)
            if (row.estimate.method == "saddlepoint_corrected")
                dat << format_double(row.eps) << " " << format_double(row.ratio) << "\n";
        atomic_write_file(fs::path(cfg.output_dir) / "plots" / "ratio.dat", dat.str());
        return 0;
    });

    env["flags"] = stage("flags", [&] { return compute_flags(cfg, b, spectra, out); });
    env["all_pass"] = all_flags_pass(env);
    stage("flags", [&] {
        atomic_write_file(fs::path(cfg.output_dir) / "report.json", env.dump(2) + "\n");
        return 0;
    });
    return env;
}

} // namespace smalldev
