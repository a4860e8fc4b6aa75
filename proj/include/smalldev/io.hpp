#pragma once

// File emission helpers. All writers go through an atomic replace (write to a
// temporary sibling, then rename) and format doubles with enough digits to
// round-trip, so identical runs produce byte-identical files.

#include <filesystem>
#include <string>

#include "smalldev/smallball.hpp"
#include "smalldev/spectrum.hpp"

namespace smalldev {

[[nodiscard]] std::string format_double(double v);

void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// Columns: m, a_m.
[[nodiscard]] std::string window_csv(const CoefficientWindow& window);

// Columns: n, lambda_n, lambda_n * n^{2p}.
[[nodiscard]] std::string spectrum_csv(const Spectrum& spec, double p);

// Columns: s, count, at the given thresholds.
[[nodiscard]] std::string counting_csv(const Spectrum& spec,
                                       const std::vector<double>& thresholds);

// One row per estimate; empty cells for absent optionals.
// Columns: N, eps, method, log_prob, std_err, saddle_t, samples, seed,
//          predicted_log, ratio.
struct SmallballRow {
    int N = 0;
    double eps = 0.0;
    SmallDevEstimate estimate;
    double predicted_log = 0.0;
    double ratio = 0.0;
};
[[nodiscard]] std::string smallball_csv(const std::vector<SmallballRow>& rows);

} // namespace smalldev
