#include "smalldev/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "smalldev/errors.hpp"

namespace smalldev {

std::string format_double(double v) {
    char buf[64];
    // Shortest representation that parses back to the same double.
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec == std::errc())
        return std::string(buf, res.ptr);
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string window_csv(const CoefficientWindow& window) {
    std::ostringstream out;
    out << "m,a_m\n";
    for (int i = 0; i < window.length(); ++i)
        out << (window.offset + i) << ","
            << format_double(window.coeffs[static_cast<std::size_t>(i)]) << "\n";
    return out.str();
}

std::string spectrum_csv(const Spectrum& spec, double p) {
    std::ostringstream out;
    out << "n,lambda_n,lambda_n_scaled\n";
    for (std::int64_t n = 1; n <= spec.size(); ++n) {
        const double l = spec.eigenvalues[static_cast<std::size_t>(n - 1)];
        const double scaled = l * std::pow(static_cast<double>(n), 2.0 * p);
        out << n << "," << format_double(l) << "," << format_double(scaled) << "\n";
    }
    return out.str();
}

std::string counting_csv(const Spectrum& spec, const std::vector<double>& thresholds) {
    std::ostringstream out;
    out << "s,count\n";
    for (double s : thresholds)
        out << format_double(s) << "," << counting_function(spec, s) << "\n";
    return out.str();
}

std::string smallball_csv(const std::vector<SmallballRow>& rows) {
    std::ostringstream out;
    out << "N,eps,method,log_prob,std_err,saddle_t,samples,seed,predicted_log,ratio\n";
    for (const auto& row : rows) {
        const auto& e = row.estimate;
        out << row.N << "," << format_double(row.eps) << "," << e.method << ","
            << format_double(e.log_prob) << ",";
        if (e.std_err) out << format_double(*e.std_err);
        out << ",";
        if (e.saddle_t) out << format_double(*e.saddle_t);
        out << ",";
        if (e.samples) out << *e.samples;
        out << ",";
        if (e.seed) out << *e.seed;
        out << "," << format_double(row.predicted_log) << "," << format_double(row.ratio)
            << "\n";
    }
    return out.str();
}

} // namespace smalldev
