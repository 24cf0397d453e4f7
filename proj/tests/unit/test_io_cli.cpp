#include "support.hpp"

#include "wavekernel/cli.hpp"
#include "wavekernel/errors.hpp"
#include "wavekernel/goursat_kernel.hpp"
#include "wavekernel/io.hpp"
#include "wavekernel/propagator.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace wavekernel;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
    fs::path dir;

    Sandbox() {
        std::random_device rd;
        dir = fs::temp_directory_path() / ("wavekernel-test-" + std::to_string(rd()));
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    fs::path put(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return dir / name;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const char* kUnitConfig =
    "potential = unit.pot\n"
    "T = 1\n"
    "h = 0.01\n"
    "N = 100\n"
    "tol = 1e-10\n"
    "seed = 7\n"
    "trials = 20\n"
    "cert_nodes = 64\n"
    "output = out\n";

}  // namespace

TEST_CASE("complex parsing") {
    CHECK(io::parse_complex("0.5+0.5i") == cplx(0.5, 0.5));
    CHECK(io::parse_complex("-i") == cplx(0.0, -1.0));
    CHECK(io::parse_complex("1e-3") == cplx(1e-3, 0.0));
    CHECK(io::parse_complex("2.5e1-1E-1i") == cplx(25.0, -0.1));
    CHECK_THROWS_AS(io::parse_complex("1+"), InputError);
    CHECK_THROWS_AS(io::parse_complex("abc"), InputError);
    CHECK(io::parse_complex_vector("1, 2i 3").size() == 3);
    const Matrix m = io::parse_complex_matrix("1 i; -i 2");
    CHECK(m.rows() == 2);
    CHECK(m(1, 0) == cplx(0.0, -1.0));
    CHECK_THROWS_AS(io::parse_complex_matrix("1 2; 3"), InputError);
}

TEST_CASE("key value files") {
    const auto kv = io::parse_key_values("# note\na = 1\n\nb=two # trailing\n", "text");
    CHECK(kv.at("a") == "1");
    CHECK(kv.at("b") == "two");
    CHECK_THROWS_AS(io::parse_key_values("a = 1\na = 2\n", "text"), InputError);
    CHECK_THROWS_AS(io::parse_key_values("just words\n", "text"), InputError);
}

TEST_CASE("format_double round-trips and normalizes negative zero") {
    CHECK(io::format_double(-0.0) == "0");
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23}) CHECK(std::stod(io::format_double(v)) == v);
}

TEST_CASE("kernel dump reloads to the same values") {
    Sandbox sb;
    const PotentialGrid p = PotentialGrid::preset("coupled2", 1.0, 0.01);
    const KernelField f = solve_goursat(p, 1.0, 0.02, 1e-10);
    io::write_kernel_csv(sb.dir / "k.csv", f);
    const KernelField g = io::read_kernel_csv(sb.dir / "k.csv", p);
    CHECK(g.horizon() == doctest::Approx(1.0));
    CHECK(g.lattice_size() == f.lattice_size());
    CHECK(max_distance(f.v(), g.v()) == 0.0);
    CHECK(io::kernel_csv(g) == io::kernel_csv(f));
}

TEST_CASE("malformed inputs exit with code 1") {
    Sandbox sb;
    sb.put("unit.pot", "kind = constant\nmatrix = 1\n");
    const auto cfg = sb.put("run.ini", kUnitConfig);

    CHECK(run({"kernel"}).code == cli::kExitInput);
    CHECK(run({"frobnicate", "--config", cfg.string()}).code == cli::kExitInput);
    CHECK(run({"kernel", "--config", (sb.dir / "missing.ini").string()}).code == cli::kExitInput);

    sb.put("bad.ini", std::string(kUnitConfig) + "colour = blue\n");
    CHECK(run({"kernel", "--config", (sb.dir / "bad.ini").string()}).code == cli::kExitInput);

    sb.put("herm.pot", "kind = constant\nmatrix = 1 1; 0 1\n");
    sb.put("herm.ini", "potential = herm.pot\nT = 1\nh = 0.01\noutput = out\n");
    const Outcome o = run({"kernel", "--config", (sb.dir / "herm.ini").string()});
    CHECK(o.code == cli::kExitInput);
    CHECK(o.err.find("error:") != std::string::npos);

    sb.put("step.ini", "potential = unit.pot\nT = 1\nh = 0.03\noutput = out\n");
    CHECK(run({"kernel", "--config", (sb.dir / "step.ini").string()}).code == cli::kExitInput);

    sb.put("nodump.ini", std::string(kUnitConfig) + "kernel = nowhere.csv\n");
    const Outcome nd = run({"propagate", "--config", (sb.dir / "nodump.ini").string()});
    CHECK(nd.code == cli::kExitInput);
    CHECK(nd.err.find("kernel dump not found") != std::string::npos);
}

TEST_CASE("zero potential kernel run") {
    Sandbox sb;
    sb.put("z.pot", "kind = zero\ndimension = 2\n");
    sb.put("run.ini", "potential = z.pot\nT = 1\nh = 0.02\n");
    REQUIRE(run({"kernel", "--config", (sb.dir / "run.ini").string(), "--out", (sb.dir / "out").string()}).code == 0);
    const json s = json::parse(slurp(sb.dir / "out" / "kernel_summary.json"));
    CHECK(s["iterations"] == 1);
    for (const char* b : {"b1", "b2", "b3", "b4"}) CHECK(s[b].get<double>() == 0.0);
    CHECK(fs::exists(sb.dir / "out" / "manifest.json"));
}

TEST_CASE("propagate matches the library bit for bit and reruns are identical") {
    Sandbox sb;
    sb.put("unit.pot", "kind = constant\nmatrix = 1\n");
    const auto cfg = sb.put("run.ini", kUnitConfig);
    REQUIRE(run({"propagate", "--config", cfg.string()}).code == 0);
    const std::string first = slurp(sb.dir / "out" / "snapshot.csv");

    const PotentialGrid p = io::load_potential(sb.dir / "unit.pot", 1.0, 0.005);
    const KernelField field = solve_goursat(p, 1.0, 0.01, 1e-10);
    const Control f = Control::bump(1.0, 0.1, 0.9, Vector::Ones(1));
    CHECK(io::snapshot_csv(propagate(p, field, f, 1.0, 100)) == first);

    REQUIRE(run({"propagate", "--config", cfg.string()}).code == 0);
    CHECK(slurp(sb.dir / "out" / "snapshot.csv") == first);

    const json m = json::parse(slurp(sb.dir / "out" / "manifest.json"));
    CHECK(m["command"] == "propagate");
    CHECK(m["seed"] == 7);
    CHECK(m["config"]["N"] == "100");
}

TEST_CASE("invert recovers the control from a snapshot") {
    Sandbox sb;
    sb.put("unit.pot", "kind = constant\nmatrix = 1\n");
    const auto cfg = sb.put("run.ini", kUnitConfig);
    REQUIRE(run({"kernel", "--config", cfg.string()}).code == 0);
    sb.put("reuse.ini", std::string(kUnitConfig) + "kernel = out/kernel.csv\n");
    const auto reuse = (sb.dir / "reuse.ini").string();
    REQUIRE(run({"propagate", "--config", reuse}).code == 0);
    const auto snap = (sb.dir / "out" / "snapshot.csv").string();
    REQUIRE(run({"invert", "--config", reuse, snap}).code == 0);
    const json s = json::parse(slurp(sb.dir / "out" / "invert_summary.json"));
    CHECK(s["roundtrip_rel_l2"].get<double>() <= 1e-10);
    CHECK(s["residual"].get<double>() <= 1e-12);

    sb.put("long.ini", std::string(kUnitConfig).replace(std::string(kUnitConfig).find("N = 100"), 7, "N = 120"));
    CHECK(run({"invert", "--config", (sb.dir / "long.ini").string(), snap}).code == cli::kExitInput);
    CHECK(run({"invert", "--config", reuse}).code == cli::kExitInput);
}

TEST_CASE("validate passes by default and exits 3 when a threshold is violated") {
    Sandbox sb;
    sb.put("unit.pot", "kind = constant\nmatrix = 1\n");
    const auto cfg = sb.put("run.ini", kUnitConfig);
    const Outcome ok = run({"validate", "--config", cfg.string()});
    CHECK(ok.code == 0);
    const json v = json::parse(slurp(sb.dir / "out" / "validate.json"));
    CHECK(v["passed"] == true);

    sb.put("strict.ini", std::string(kUnitConfig) + "max_cond = 1.0\n");
    const Outcome bad = run({"validate", "--config", (sb.dir / "strict.ini").string()});
    CHECK(bad.code == cli::kExitValidation);
    CHECK(bad.err.find("cond") != std::string::npos);
}

TEST_CASE("bounds and oracle outputs") {
    Sandbox sb;
    sb.put("unit.pot", "kind = constant\nmatrix = 1\n");
    const auto cfg = sb.put("run.ini", kUnitConfig);
    REQUIRE(run({"bounds", "--config", cfg.string(), "--seed", "11"}).code == 0);
    const json r = json::parse(slurp(sb.dir / "out" / "report.json"));
    CHECK(r["violations"] == 0);
    CHECK(r["seed"] == 11);
    const std::string first = slurp(sb.dir / "out" / "report.json");
    REQUIRE(run({"bounds", "--config", cfg.string(), "--seed", "11"}).code == 0);
    CHECK(slurp(sb.dir / "out" / "report.json") == first);

    REQUIRE(run({"oracle", "--config", cfg.string(), "--out", (sb.dir / "o").string()}).code == 0);
    const json o = json::parse(slurp(sb.dir / "o" / "oracle.json"));
    CHECK(o["rel_l2"].get<double>() <= 1e-3);
}

TEST_CASE("a runaway Picard iteration exits with code 2") {
    Sandbox sb;
    sb.put("big.pot", "kind = constant\nmatrix = 400\n");
    sb.put("run.ini", "potential = big.pot\nT = 1\nh = 0.05\ntol = 1e-14\n");
    const Outcome o = run({"kernel", "--config", (sb.dir / "run.ini").string(), "--out", (sb.dir / "out").string()});
    CHECK(o.code == cli::kExitConvergence);
}
