#pragma once

// Command orchestration: theory -> spectrum -> smallball -> verification
// flags. Artifacts are written into cfg.output_dir as each stage completes,
// so a failing stage leaves everything before it on disk. Stage failures are
// rethrown as StageError with the stage name attached.
//
// Verification flags (all must pass for exit status 0):
//   spectrum_gap        |c_hat/C - 1| <= 0.05 at the largest N
//   gap_monotone        that gap does not grow as N increases
//   identity_c_delta    C and delta_mu^{2p} agree within quadrature error
//   dependence_distinct C differs from the variance-matched i.i.d. C by more
//                       than 5x the combined quadrature tolerance
//   ratio_monotone      |R(eps) - 1| non-increasing as eps decreases
//                       (saddlepoint rows), R = log_prob / predicted_log
//   ratio_close         |R(eps_min) - 1| <= 0.15
//   engines_agree       tilted_mc and direct_sim within 3 combined std errors
//                       (only when both methods ran)
// Rows with eps^2 >= sum(lambda) are flagged "regime" and skipped without
// failing the run.

#include <string>

#include <json.hpp>

#include "smalldev/config.hpp"
#include "smalldev/errors.hpp"

namespace smalldev {

struct StageError : Error {
    StageError(std::string stage_, const std::string& what_)
        : Error(what_), stage(std::move(stage_)) {}
    std::string stage;
};

// Each command returns its result envelope and writes its artifacts.
nlohmann::json run_theory(const RunConfig& cfg);
nlohmann::json run_spectrum(const RunConfig& cfg);
nlohmann::json run_smallball(const RunConfig& cfg);
nlohmann::json run_verify(const RunConfig& cfg);

// True when every flag in a verify report passed.
[[nodiscard]] bool all_flags_pass(const nlohmann::json& report);

} // namespace smalldev
