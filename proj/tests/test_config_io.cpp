#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "smalldev/config.hpp"
#include "smalldev/errors.hpp"
#include "smalldev/io.hpp"
#include "smalldev/spectrum.hpp"

using namespace smalldev;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kFullConfig = R"(# dependent reference run
model.kind = ar1
model.rho = 0.5
model.scale = 1.0

weights.p = 1.0
weights.d_plus = 1.0
weights.d_minus = 1.0
weights.override = 1:0.5, -2:0

run.N_list = 500, 2000
run.eps_grid = 0.4, 0.3, 0.2
run.methods = saddlepoint, tilted_mc
run.samples = 100000
run.seed = 7
tolerances.window_tol = 1e-12
tolerances.quad_rel_tol = 1e-10
output.dir = out_dir
)";

} // namespace

TEST_CASE("parse_config: full example") {
    const RunConfig cfg = parse_config(kFullConfig);
    const auto* m = std::get_if<AR1>(&cfg.model);
    REQUIRE(m != nullptr);
    CHECK(m->rho == 0.5);
    CHECK(m->scale == 1.0);
    CHECK(cfg.weights.p == 1.0);
    CHECK(cfg.weights.prefix_override.at(1) == 0.5);
    CHECK(cfg.weights.prefix_override.at(-2) == 0.0);
    CHECK(cfg.N_list == std::vector<int>{500, 2000});
    CHECK(cfg.eps_grid == std::vector<double>{0.4, 0.3, 0.2});
    CHECK(cfg.methods == std::vector<std::string>{"saddlepoint", "tilted_mc"});
    CHECK(cfg.samples == 100000);
    CHECK(cfg.seed == 7);
    CHECK(cfg.window_tol == 1e-12);
    CHECK(cfg.quad_rel_tol == 1e-10);
    CHECK(cfg.output_dir == "out_dir");
}

TEST_CASE("parse_config: defaults when keys are absent") {
    const RunConfig cfg = parse_config("weights.p = 2.0\n");
    CHECK(std::holds_alternative<IID>(cfg.model));
    CHECK(cfg.weights.p == 2.0);
    CHECK(cfg.N_list.empty());
    CHECK(cfg.methods.empty());
    CHECK(cfg.samples == 100000);
    CHECK(cfg.output_dir == "out");
}

TEST_CASE("parse_config: serialize round-trips") {
    const RunConfig cfg = parse_config(kFullConfig);
    const std::string canon = serialize_config(cfg);
    const RunConfig again = parse_config(canon);
    CHECK(serialize_config(again) == canon);
    CHECK(config_hash(again) == config_hash(cfg));
}

TEST_CASE("parse_config: line-tagged diagnostics") {
    auto message_of = [](const std::string& text) {
        try {
            (void)parse_config(text);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string{};
    };
    CHECK(message_of("model.kind = iid\nbogus.key = 3\n").find("config line 2") == 0);
    CHECK(message_of("run.seed = 1\nrun.seed = 2\n").find("duplicate key") != std::string::npos);
    CHECK(message_of("weights.p = fast\n").find("expected a finite number") != std::string::npos);
    CHECK(message_of("model.kind = iid\nmodel.rho = 0.5\n").find("not valid for model.kind") !=
          std::string::npos);
    CHECK(message_of("model.kind = arma\n").find("unknown model.kind") != std::string::npos);
    CHECK(message_of("model.rho = 0.5\n").find("without model.kind") != std::string::npos);
    CHECK(message_of("run.methods = quadrature\n").find("unknown method") != std::string::npos);
    CHECK(message_of("run.methods = tilted_mc, tilted_mc\n").find("repeated") !=
          std::string::npos);
    CHECK(message_of("run.methods = tilted_mc\nrun.samples = 500\n").find(">= 1000") !=
          std::string::npos);
    CHECK(message_of("run.eps_grid = 0.2, 0.3\n").find("strictly decreasing") !=
          std::string::npos);
    CHECK(message_of("run.eps_grid = 0.2, -0.1\n").find("positive") != std::string::npos);
    CHECK(message_of("run.N_list = 100, 100\n").find("strictly increasing") !=
          std::string::npos);
    CHECK(message_of("run.N_list = 0\n").find(">= 1") != std::string::npos);
    CHECK(message_of("weights.override = 1=0.5\n").find("k:value") != std::string::npos);
    CHECK(message_of("output.dir =\n").find("nonempty") != std::string::npos);
}

TEST_CASE("parse_config: weight invariants enforced at parse time") {
    CHECK_THROWS_AS((void)parse_config("weights.p = 0.4\n"), DomainError);
    CHECK_THROWS_AS((void)parse_config("weights.d_plus = -1\n"), Error);
    CHECK_THROWS_AS((void)parse_config("weights.d_plus = 0\nweights.d_minus = 0\n"), Error);
}

TEST_CASE("config_hash: canonical under formatting, sensitive to content") {
    const RunConfig a = parse_config(kFullConfig);
    const RunConfig b = parse_config(
        "model.kind=ar1\nmodel.scale=1\nmodel.rho=0.5\nweights.p=1\n"
        "weights.d_plus=1\nweights.d_minus=1\nweights.override=-2:0,1:0.5\n"
        "run.N_list=500,2000\nrun.eps_grid=0.4,0.3,0.2\n"
        "run.methods=saddlepoint,tilted_mc\nrun.samples=100000\nrun.seed=7\n"
        "tolerances.window_tol=1e-12\ntolerances.quad_rel_tol=1e-10\n"
        "output.dir=out_dir\n");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);

    RunConfig c = a;
    c.seed = 8;
    CHECK(config_hash(c) != config_hash(a));

    RunConfig d = a;
    d.output_dir = "elsewhere";
    CHECK(config_hash(d) == config_hash(a));
}

TEST_CASE("fnv1a64: reference vector") {
    // Published FNV-1a test vector.
    CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
    CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
}

TEST_CASE("format_double: shortest round-trip") {
    for (double v : {0.1, 1.0 / 3.0, -0.25, 12345.0, 1e-300, 6.02e23, 0.0}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("load_config and atomic_write_file") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "smalldev_io_test";
    fs::remove_all(dir);

    const fs::path cfg_path = dir / "nested" / "run.conf";
    atomic_write_file(cfg_path, kFullConfig);
    CHECK(read_file(cfg_path) == kFullConfig);
    CHECK_FALSE(fs::exists(cfg_path.string() + ".tmp"));

    const RunConfig cfg = load_config(cfg_path);
    CHECK(cfg.seed == 7);
    CHECK_THROWS_AS((void)load_config(dir / "missing.conf"), Error);

    atomic_write_file(cfg_path, "run.seed = 9\n");
    CHECK(read_file(cfg_path) == "run.seed = 9\n");

    fs::remove_all(dir);
}

TEST_CASE("csv writers: shapes and optional cells") {
    CoefficientWindow win;
    win.coeffs = {2.0, -1.0};
    win.offset = -1;
    CHECK(window_csv(win) == "m,a_m\n-1,2\n0,-1\n");

    Spectrum spec;
    spec.N = 1;
    spec.eigenvalues = {4.0, 1.0};
    CHECK(spectrum_csv(spec, 1.0) == "n,lambda_n,lambda_n_scaled\n1,4,4\n2,1,4\n");
    CHECK(counting_csv(spec, {1.5, 0.5}) == "s,count\n1.5,1\n0.5,2\n");

    SmallballRow sp;
    sp.N = 10;
    sp.eps = 0.5;
    sp.estimate.method = "saddlepoint_corrected";
    sp.estimate.log_prob = -2.0;
    sp.estimate.saddle_t = 3.0;
    sp.predicted_log = -2.5;
    sp.ratio = 0.8;

    SmallballRow mc;
    mc.N = 10;
    mc.eps = 0.5;
    mc.estimate.method = "tilted_mc";
    mc.estimate.log_prob = -2.25;
    mc.estimate.std_err = 0.03125;
    mc.estimate.saddle_t = 3.0;
    mc.estimate.samples = 1000;
    mc.estimate.seed = 7;
    mc.predicted_log = -2.5;
    mc.ratio = 0.9;

    const std::string csv = smallball_csv({sp, mc});
    CHECK(csv ==
          "N,eps,method,log_prob,std_err,saddle_t,samples,seed,predicted_log,ratio\n"
          "10,0.5,saddlepoint_corrected,-2,,3,,,-2.5,0.8\n"
          "10,0.5,tilted_mc,-2.25,0.03125,3,1000,7,-2.5,0.9\n");
}
