#pragma once

// Flat "section.key = value" run configuration, shared by every CLI command.
//
//   model.kind = ar1          # iid | ar1 | finite_ma | two_sided_geometric | explicit
//   model.rho = 0.5
//   model.scale = 1.0
//   weights.p = 1.0
//   weights.d_plus = 1.0
//   weights.d_minus = 1.0
//   weights.override = 1:0.5, -2:0   # optional k:value list
//   run.N_list = 500, 2000
//   run.eps_grid = 0.4, 0.3, 0.2
//   run.methods = saddlepoint, tilted_mc
//   run.samples = 100000
//   run.seed = 1
//   tolerances.window_tol = 1e-12
//   tolerances.quad_rel_tol = 1e-10
//   output.dir = out
//
// '#' starts a comment; blank lines are ignored.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smalldev/model.hpp"

namespace smalldev {

struct RunConfig {
    MASpec model = IID{1.0};
    WeightSequence weights;
    std::vector<int> N_list;           // ascending
    std::vector<double> eps_grid;      // strictly decreasing, positive
    std::vector<std::string> methods;  // subset of saddlepoint | tilted_mc | direct_sim
    std::int64_t samples = 100000;
    std::uint64_t seed = 1;
    double window_tol = 1e-12;
    double quad_rel_tol = 1e-10;
    std::string output_dir = "out";
};

// Parse and validate. Throws Error with a line-tagged message on bad input.
[[nodiscard]] RunConfig parse_config(const std::string& text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse(serialize(cfg)) round-trips.
[[nodiscard]] std::string serialize_config(const RunConfig& cfg);

// FNV-1a 64-bit hash of the canonical serialization, for provenance.
[[nodiscard]] std::uint64_t fnv1a64(const std::string& text);
[[nodiscard]] std::string config_hash(const RunConfig& cfg);

} // namespace smalldev
