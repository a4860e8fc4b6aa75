#include "smalldev/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "smalldev/errors.hpp"
#include "smalldev/io.hpp"

namespace smalldev {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw Error("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& s, int line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        fail(line, "expected a finite number, got '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, int line) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        fail(line, "expected an integer, got '" + s + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& s, int line) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || s.front() == '-')
        fail(line, "expected a nonnegative integer, got '" + s + "'");
    return v;
}

struct RawEntry {
    std::string value;
    int line = 0;
};

} // namespace

RunConfig parse_config(const std::string& text) {
    static const std::set<std::string> known = {
        "model.kind", "model.rho", "model.scale", "model.a0", "model.coeffs",
        "model.offset", "weights.p", "weights.d_plus", "weights.d_minus",
        "weights.override", "run.N_list", "run.eps_grid", "run.methods",
        "run.samples", "run.seed", "tolerances.window_tol",
        "tolerances.quad_rel_tol", "output.dir"};

    std::map<std::string, RawEntry> kv;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known.count(key)) fail(line_no, "unknown key '" + key + "'");
        if (kv.count(key)) fail(line_no, "duplicate key '" + key + "'");
        kv[key] = {value, line_no};
    }

    auto has = [&](const char* k) { return kv.count(k) != 0; };
    auto get = [&](const char* k) -> const RawEntry& { return kv.at(k); };

    RunConfig cfg;

    // --- model ---
    const bool any_model = std::any_of(kv.begin(), kv.end(), [](const auto& e) {
        return e.first.rfind("model.", 0) == 0;
    });
    if (any_model) {
        if (!has("model.kind")) throw Error("config: model.* given without model.kind");
        const std::string kind = get("model.kind").value;
        auto reject_other = [&](std::initializer_list<const char*> allowed) {
            for (const auto& [k, e] : kv) {
                if (k.rfind("model.", 0) != 0 || k == "model.kind") continue;
                if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                        return k == a;
                    }) == allowed.end())
                    fail(e.line, "'" + k + "' is not valid for model.kind = " + kind);
            }
        };
        auto parse_coeff_list = [&](const char* key) {
            const auto& e = get(key);
            std::vector<double> out;
            for (const auto& tok : split(e.value, ','))
                out.push_back(parse_double(tok, e.line));
            return out;
        };
        if (kind == "iid") {
            reject_other({"model.a0"});
            IID m;
            if (has("model.a0")) m.a0 = parse_double(get("model.a0").value, get("model.a0").line);
            cfg.model = m;
        } else if (kind == "ar1") {
            reject_other({"model.rho", "model.scale"});
            AR1 m;
            if (has("model.rho")) m.rho = parse_double(get("model.rho").value, get("model.rho").line);
            if (has("model.scale"))
                m.scale = parse_double(get("model.scale").value, get("model.scale").line);
            cfg.model = m;
        } else if (kind == "two_sided_geometric") {
            reject_other({"model.rho", "model.scale"});
            TwoSidedGeometric m;
            if (has("model.rho")) m.rho = parse_double(get("model.rho").value, get("model.rho").line);
            if (has("model.scale"))
                m.scale = parse_double(get("model.scale").value, get("model.scale").line);
            cfg.model = m;
        } else if (kind == "finite_ma" || kind == "explicit") {
            reject_other({"model.coeffs", "model.offset"});
            if (!has("model.coeffs"))
                throw Error("config: model.kind = " + kind + " requires model.coeffs");
            std::vector<double> coeffs = parse_coeff_list("model.coeffs");
            int offset = 0;
            if (has("model.offset"))
                offset = static_cast<int>(parse_int(get("model.offset").value,
                                                    get("model.offset").line));
            if (kind == "finite_ma")
                cfg.model = FiniteMA{std::move(coeffs), offset};
            else
                cfg.model = ExplicitCoeffs{std::move(coeffs), offset};
        } else {
            fail(get("model.kind").line, "unknown model.kind '" + kind + "'");
        }
    }

    // --- weights ---
    if (has("weights.p"))
        cfg.weights.p = parse_double(get("weights.p").value, get("weights.p").line);
    if (has("weights.d_plus"))
        cfg.weights.d_plus = parse_double(get("weights.d_plus").value, get("weights.d_plus").line);
    if (has("weights.d_minus"))
        cfg.weights.d_minus =
            parse_double(get("weights.d_minus").value, get("weights.d_minus").line);
    if (has("weights.override")) {
        const auto& e = get("weights.override");
        for (const auto& tok : split(e.value, ',')) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) fail(e.line, "override entries are k:value");
            const long long k = parse_int(trim(tok.substr(0, colon)), e.line);
            const double v = parse_double(trim(tok.substr(colon + 1)), e.line);
            cfg.weights.prefix_override[static_cast<int>(k)] = v;
        }
    }
    validate(cfg.weights);

    // --- run ---
    if (has("run.N_list")) {
        const auto& e = get("run.N_list");
        for (const auto& tok : split(e.value, ',')) {
            const long long v = parse_int(tok, e.line);
            if (v < 1) fail(e.line, "truncation orders must be >= 1");
            cfg.N_list.push_back(static_cast<int>(v));
        }
        if (!std::is_sorted(cfg.N_list.begin(), cfg.N_list.end()) ||
            std::adjacent_find(cfg.N_list.begin(), cfg.N_list.end()) != cfg.N_list.end())
            fail(e.line, "run.N_list must be strictly increasing");
    }
    if (has("run.eps_grid")) {
        const auto& e = get("run.eps_grid");
        for (const auto& tok : split(e.value, ',')) {
            const double v = parse_double(tok, e.line);
            if (!(v > 0.0)) fail(e.line, "radii must be positive");
            cfg.eps_grid.push_back(v);
        }
        for (std::size_t i = 1; i < cfg.eps_grid.size(); ++i)
            if (!(cfg.eps_grid[i] < cfg.eps_grid[i - 1]))
                fail(e.line, "run.eps_grid must be strictly decreasing");
    }
    if (has("run.methods")) {
        const auto& e = get("run.methods");
        static const std::set<std::string> allowed = {"saddlepoint", "tilted_mc", "direct_sim"};
        for (const auto& tok : split(e.value, ',')) {
            if (!allowed.count(tok)) fail(e.line, "unknown method '" + tok + "'");
            if (std::find(cfg.methods.begin(), cfg.methods.end(), tok) != cfg.methods.end())
                fail(e.line, "method '" + tok + "' repeated");
            cfg.methods.push_back(tok);
        }
    }
    if (has("run.samples")) {
        const auto& e = get("run.samples");
        const long long v = parse_int(e.value, e.line);
        if (v < 1) fail(e.line, "run.samples must be >= 1");
        cfg.samples = v;
    }
    if (has("run.seed")) cfg.seed = parse_uint(get("run.seed").value, get("run.seed").line);

    const bool any_mc =
        std::find(cfg.methods.begin(), cfg.methods.end(), "tilted_mc") != cfg.methods.end() ||
        std::find(cfg.methods.begin(), cfg.methods.end(), "direct_sim") != cfg.methods.end();
    if (any_mc && cfg.samples < 1000)
        throw Error("config: run.samples must be >= 1000 when a Monte Carlo method is selected");

    // --- tolerances / output ---
    if (has("tolerances.window_tol")) {
        const auto& e = get("tolerances.window_tol");
        cfg.window_tol = parse_double(e.value, e.line);
        if (!(cfg.window_tol > 0.0)) fail(e.line, "window_tol must be positive");
    }
    if (has("tolerances.quad_rel_tol")) {
        const auto& e = get("tolerances.quad_rel_tol");
        cfg.quad_rel_tol = parse_double(e.value, e.line);
        if (!(cfg.quad_rel_tol > 0.0)) fail(e.line, "quad_rel_tol must be positive");
    }
    if (has("output.dir")) {
        cfg.output_dir = get("output.dir").value;
        if (cfg.output_dir.empty()) fail(get("output.dir").line, "output.dir must be nonempty");
    }

    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "model.kind = " << spec_kind(cfg.model) << "\n";
    if (const auto* m = std::get_if<IID>(&cfg.model)) {
        out << "model.a0 = " << format_double(m->a0) << "\n";
    } else if (const auto* m = std::get_if<AR1>(&cfg.model)) {
        out << "model.rho = " << format_double(m->rho) << "\n";
        out << "model.scale = " << format_double(m->scale) << "\n";
    } else if (const auto* m = std::get_if<TwoSidedGeometric>(&cfg.model)) {
        out << "model.rho = " << format_double(m->rho) << "\n";
        out << "model.scale = " << format_double(m->scale) << "\n";
    } else if (const auto* m = std::get_if<FiniteMA>(&cfg.model)) {
        out << "model.coeffs = ";
        for (std::size_t i = 0; i < m->coeffs.size(); ++i)
            out << (i ? ", " : "") << format_double(m->coeffs[i]);
        out << "\n" << "model.offset = " << m->offset << "\n";
    } else if (const auto* m = std::get_if<ExplicitCoeffs>(&cfg.model)) {
        out << "model.coeffs = ";
        for (std::size_t i = 0; i < m->coeffs.size(); ++i)
            out << (i ? ", " : "") << format_double(m->coeffs[i]);
        out << "\n" << "model.offset = " << m->offset << "\n";
    }
    out << "weights.p = " << format_double(cfg.weights.p) << "\n";
    out << "weights.d_plus = " << format_double(cfg.weights.d_plus) << "\n";
    out << "weights.d_minus = " << format_double(cfg.weights.d_minus) << "\n";
    if (!cfg.weights.prefix_override.empty()) {
        out << "weights.override = ";
        bool first = true;
        for (const auto& [k, v] : cfg.weights.prefix_override) {
            out << (first ? "" : ", ") << k << ":" << format_double(v);
            first = false;
        }
        out << "\n";
    }
    if (!cfg.N_list.empty()) {
        out << "run.N_list = ";
        for (std::size_t i = 0; i < cfg.N_list.size(); ++i)
            out << (i ? ", " : "") << cfg.N_list[i];
        out << "\n";
    }
    if (!cfg.eps_grid.empty()) {
        out << "run.eps_grid = ";
        for (std::size_t i = 0; i < cfg.eps_grid.size(); ++i)
            out << (i ? ", " : "") << format_double(cfg.eps_grid[i]);
        out << "\n";
    }
    if (!cfg.methods.empty()) {
        out << "run.methods = ";
        for (std::size_t i = 0; i < cfg.methods.size(); ++i)
            out << (i ? ", " : "") << cfg.methods[i];
        out << "\n";
    }
    out << "run.samples = " << cfg.samples << "\n";
    out << "run.seed = " << cfg.seed << "\n";
    out << "tolerances.window_tol = " << format_double(cfg.window_tol) << "\n";
    out << "tolerances.quad_rel_tol = " << format_double(cfg.quad_rel_tol) << "\n";
    out << "output.dir = " << cfg.output_dir << "\n";
    return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& cfg) {
    // The hash identifies the computation. Where the artifacts land is
    // delivery plumbing and must not change the identity of a run.
    RunConfig keyed = cfg;
    keyed.output_dir = "out";
    const std::uint64_t h = fnv1a64(serialize_config(keyed));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace smalldev
