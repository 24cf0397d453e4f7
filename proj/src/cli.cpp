#include "wavekernel/cli.hpp"

#include "wavekernel/control_op.hpp"
#include "wavekernel/errors.hpp"
#include "wavekernel/io.hpp"
#include "wavekernel/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#ifndef WAVEKERNEL_VERSION
#define WAVEKERNEL_VERSION "0.0.0"
#endif

namespace wavekernel::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class ValidationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InputError("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

std::size_t to_count(const std::string& key, const std::string& v) {
    const double d = to_real(key, v);
    if (!(d >= 1.0) || d != std::floor(d)) throw InputError("config: '" + key + "' expects a positive integer");
    return static_cast<std::size_t>(d);
}

std::uint64_t to_seed(const std::string& v) {
    try {
        std::size_t used = 0;
        const unsigned long long s = std::stoull(v, &used);
        if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
        return s;
    } catch (const std::exception&) {
        throw InputError("config: 'seed' expects a nonnegative integer, got '" + v + "'");
    }
}

fs::path resolve(const fs::path& base, const std::string& v) {
    fs::path p = v;
    return p.is_relative() ? (base / p).lexically_normal() : p;
}

std::string fmt(double v) { return io::format_double(v); }

struct Context {
    RunConfig cfg;
    std::string command;
    fs::path out_dir;
    std::vector<std::string> outputs;

    void write(const std::string& name, const std::string& text) {
        io::write_text(out_dir / name, text);
        outputs.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
};

PotentialGrid potential_for(const RunConfig& cfg) {
    if (cfg.potential.empty()) throw InputError("config: missing 'potential'");
    return io::load_potential(cfg.potential, cfg.T, 0.5 * cfg.h);
}

Control control_for(const RunConfig& cfg, std::size_t n) {
    if (cfg.control == "zero") return Control::zero(n, cfg.T);
    if (cfg.control == "bump") {
        Vector amp = Vector::Ones(static_cast<Eigen::Index>(n));
        if (!cfg.control_amplitude.empty()) amp = io::parse_complex_vector(cfg.control_amplitude);
        if (static_cast<std::size_t>(amp.size()) != n)
            throw InputError("config: control_amplitude has " + std::to_string(amp.size()) + " entries, expected " +
                             std::to_string(n));
        const double start = cfg.control_start > 0.0 ? cfg.control_start : 0.1 * cfg.T;
        const double end = cfg.control_end > 0.0 ? cfg.control_end : 0.9 * cfg.T;
        return Control::bump(std::max(cfg.T, end), start, end, amp);
    }
    if (cfg.control == "samples") {
        if (cfg.control_samples.empty()) throw InputError("config: control = samples needs 'control_samples'");
        double horizon = 0.0;
        const Eigen::MatrixXcd s = io::read_control_samples(cfg.control_samples, n, horizon);
        if (horizon < cfg.T * (1.0 - 1e-12)) throw InputError("config: control samples end before T");
        return Control::from_samples(horizon, s, cfg.control_support_start);
    }
    throw InputError("config: unknown control '" + cfg.control + "'");
}

KernelField field_for(const RunConfig& cfg, const PotentialGrid& p) {
    if (cfg.kernel) {
        if (!fs::exists(*cfg.kernel)) throw InputError("kernel dump not found: " + cfg.kernel->string());
        KernelField f = io::read_kernel_csv(*cfg.kernel, p);
        if (std::abs(f.horizon() - cfg.T) > 1e-9 * cfg.T)
            throw InputError("kernel dump horizon " + fmt(f.horizon()) + " differs from T = " + fmt(cfg.T));
        return f;
    }
    return solve_goursat(p, cfg.T, cfg.h, cfg.tol);
}

json constants_json(const KernelConstants& kc) {
    return json{{"b1", kc.b1}, {"b2", kc.b2}, {"b3", kc.b3}, {"b4", kc.b4}};
}

json sobolev_json(const SobolevReport& r) {
    return json{{"a1", r.a1},
                {"a2", r.a2},
                {"b1", r.b1},
                {"b2", r.b2},
                {"b3", r.b3},
                {"b4", r.b4},
                {"bounds", {{"i", r.bound_i}, {"ii", r.bound_ii}, {"ii_c", r.bound_ii0}, {"iii", r.bound_iii},
                            {"h2", r.bound_h2}}},
                {"ratios", {{"i", r.ratio_i}, {"ii", r.ratio_ii}, {"ii_c", r.ratio_ii0}, {"iii", r.ratio_iii}}},
                {"empirical_ratio", r.empirical_ratio},
                {"trials", r.trials},
                {"violations", r.violations},
                {"seed", r.seed}};
}

std::size_t dense_nodes(const RunConfig& cfg) { return std::min(cfg.N, kDenseSvdCap); }

void cmd_kernel(Context& ctx) {
    const PotentialGrid p = potential_for(ctx.cfg);
    const KernelField field = solve_goursat(p, ctx.cfg.T, ctx.cfg.h, ctx.cfg.tol);
    const KernelConstants kc = kernel_constants(p, field);
    ctx.write("kernel.csv", io::kernel_csv(field));
    json summary = constants_json(kc);
    summary["T"] = field.horizon();
    summary["h"] = field.step();
    summary["n"] = field.dimension();
    summary["iterations"] = field.iterations();
    summary["tail_bound"] = field.tail_bound();
    summary["last_change"] = field.last_change();
    summary["tol"] = ctx.cfg.tol;
    ctx.write_json("kernel_summary.json", summary);
}

void cmd_propagate(Context& ctx) {
    const PotentialGrid p = potential_for(ctx.cfg);
    const KernelField field = field_for(ctx.cfg, p);
    const Control f = control_for(ctx.cfg, p.dimension());
    ctx.write("snapshot.csv", io::snapshot_csv(propagate(p, field, f, ctx.cfg.T, ctx.cfg.N)));
}

void cmd_apply(Context& ctx) {
    const PotentialGrid p = potential_for(ctx.cfg);
    const KernelField field = field_for(ctx.cfg, p);
    const Control f = control_for(ctx.cfg, p.dimension());
    ctx.write("apply.csv", io::sampled_csv(apply_W(p, field, f, ctx.cfg.T, ctx.cfg.N), "x"));
}

void cmd_invert(Context& ctx) {
    if (!ctx.cfg.snapshot) throw InputError("invert: no snapshot given (positional argument or 'snapshot' key)");
    const PotentialGrid p = potential_for(ctx.cfg);
    const SampledFunction u = io::read_snapshot_u(*ctx.cfg.snapshot, p.dimension());
    if (u.intervals() != ctx.cfg.N)
        throw InputError("invert: snapshot has " + std::to_string(u.intervals() + 1) + " nodes, config expects N + 1 = " +
                         std::to_string(ctx.cfg.N + 1));
    if (std::abs(u.T - ctx.cfg.T) > 1e-9 * ctx.cfg.T) throw InputError("invert: snapshot horizon differs from T");
    const KernelField field = field_for(ctx.cfg, p);
    const VolterraSystem sys = build_volterra(field, ctx.cfg.T, ctx.cfg.N);
    const SampledFunction g = invert_W(sys, u);
    const SampledFunction f = reflect(g);
    ctx.write("control.csv", io::sampled_csv(f, "t"));

    const NeumannResult neu = invert_W_neumann(sys, u);
    json summary{{"N", ctx.cfg.N},
                 {"T", ctx.cfg.T},
                 {"neumann_terms", neu.terms},
                 {"neumann_tail", neu.tail},
                 {"neumann_max_difference", (neu.g.values - g.values).cwiseAbs().maxCoeff()},
                 {"residual", (sys.apply(g.values) - u.values).cwiseAbs().maxCoeff()}};
    try {
        const Control ref = control_for(ctx.cfg, p.dimension());
        const Eigen::MatrixXcd fs = ref.sample(ctx.cfg.N);
        const double den = fs.norm();
        summary["roundtrip_rel_l2"] = den > 0.0 ? (f.values - fs).norm() / den : (f.values - fs).norm();
    } catch (const InputError&) {
        summary["roundtrip_rel_l2"] = nullptr;
    }
    ctx.write_json("invert_summary.json", summary);
}

void cmd_bounds(Context& ctx) {
    const PotentialGrid p = potential_for(ctx.cfg);
    const KernelField field = field_for(ctx.cfg, p);
    const SobolevReport rep = certify_h2_bound(p, field, ctx.cfg.T, ctx.cfg.trials, ctx.cfg.seed, ctx.cfg.cert_nodes);
    const ConditionEstimate ce = condition_estimate(build_volterra(field, ctx.cfg.T, dense_nodes(ctx.cfg)));
    json j = sobolev_json(rep);
    j["sigma_min"] = ce.sigma_min;
    j["sigma_max"] = ce.sigma_max;
    j["cond"] = ce.cond;
    ctx.write_json("report.json", j);
}

void cmd_oracle(Context& ctx) {
    const PotentialGrid p = potential_for(ctx.cfg);
    const KernelField field = field_for(ctx.cfg, p);
    const Control f = control_for(ctx.cfg, p.dimension());
    FDConfig fd;
    fd.N_x = ctx.cfg.fd_nodes > 0 ? ctx.cfg.fd_nodes : ctx.cfg.N;
    fd.cfl = ctx.cfg.fd_cfl;
    fd.T = ctx.cfg.T;
    const WaveSnapshot b = fd_solve(p, f, fd);
    const WaveSnapshot a = propagate(p, field, f, ctx.cfg.T, ctx.cfg.N);
    const Comparison c = compare(a, b);
    ctx.write("fd_snapshot.csv", io::snapshot_csv(b));
    ctx.write_json("oracle.json", json{{"l2", c.l2}, {"max", c.max}, {"rel_l2", c.rel_l2}, {"fd_nodes", fd.N_x},
                                       {"cfl", fd.cfl}});
}

void cmd_validate(Context& ctx, std::ostream& err) {
    const RunConfig& cfg = ctx.cfg;
    const PotentialGrid p = potential_for(cfg);
    const KernelField field = field_for(cfg, p);
    const Control f = control_for(cfg, p.dimension());

    json checks = json::array();
    std::vector<std::string> failed;
    auto check = [&](const std::string& name, double value, double threshold, bool upper) {
        const bool pass = upper ? value <= threshold : value >= threshold;
        checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold},
                          {"kind", upper ? "max" : "min"}, {"pass", pass}});
        if (!pass) failed.push_back(name);
    };

    const GoursatResiduals gr = check_goursat(p, field);
    check("goursat_diagonal", gr.diagonal, 0.0, true);
    check("goursat_edge", gr.edge, cfg.max_edge_residual, true);
    check("apriori_excess", apriori_bound_excess(p, field), cfg.max_apriori_excess, true);

    FDConfig fd;
    fd.N_x = cfg.fd_nodes > 0 ? cfg.fd_nodes : cfg.N;
    fd.cfl = cfg.fd_cfl;
    fd.T = cfg.T;
    const Comparison oc = compare(propagate(p, field, f, cfg.T, cfg.N), fd_solve(p, f, fd));
    check("oracle_rel_l2", oc.rel_l2, cfg.max_oracle_rel_l2, true);

    const SobolevReport rep = certify_h2_bound(p, field, cfg.T, cfg.trials, cfg.seed, cfg.cert_nodes);
    check("h2_violations", rep.violations, 0.0, true);

    const std::vector<double> steps = cfg.dq_steps.empty()
                                          ? std::vector<double>{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256,
                                                                1.0 / 512}
                                          : cfg.dq_steps;
    const double t = cfg.dq_time > 0.0 ? cfg.dq_time : 0.5 * cfg.T;
    const DifferenceQuotientTable dq = difference_quotient_test(field, f, t, steps, std::max<std::size_t>(cfg.N, 64));
    const bool dq_trivial = std::all_of(dq.error.begin(), dq.error.end(), [](double e) { return e == 0.0; });
    check("dq_slope", dq_trivial ? cfg.min_dq_slope : dq.slope, cfg.min_dq_slope, false);

    const VolterraSystem sys = build_volterra(field, cfg.T, dense_nodes(cfg));
    const ConditionEstimate ce = condition_estimate(sys);
    check("cond", ce.cond, cfg.max_cond, true);

    const SampledFunction u = apply_W(p, field, f, cfg.T, dense_nodes(cfg));
    const Eigen::MatrixXcd back = reflect(invert_W(sys, u)).values;
    const Eigen::MatrixXcd fs = f.sample(dense_nodes(cfg));
    const double rt = fs.norm() > 0.0 ? (back - fs).norm() / fs.norm() : (back - fs).norm();
    check("roundtrip_rel", rt, cfg.max_roundtrip_rel, true);

    json report{{"goursat", {{"diagonal", gr.diagonal}, {"edge", gr.edge}, {"interior", gr.interior}}},
                {"kernel", {{"iterations", field.iterations()}, {"tail_bound", field.tail_bound()}}},
                {"oracle", {{"l2", oc.l2}, {"max", oc.max}, {"rel_l2", oc.rel_l2}}},
                {"sobolev", sobolev_json(rep)},
                {"difference_quotient", {{"t", t}, {"h", dq.h}, {"error", dq.error}, {"slope", dq.slope}}},
                {"condition", {{"sigma_min", ce.sigma_min}, {"sigma_max", ce.sigma_max}, {"cond", ce.cond}}},
                {"roundtrip_rel", rt},
                {"checks", checks},
                {"passed", failed.empty()}};
    ctx.write_json("validate.json", report);
    if (!failed.empty()) {
        std::string names;
        for (const auto& n : failed) names += (names.empty() ? "" : ", ") + n;
        err << "validation failed: " << names << "\n";
        throw ValidationFailed(names);
    }
}

void write_manifest(Context& ctx) {
    json j{{"tool", "wavekernel"},
           {"version", WAVEKERNEL_VERSION},
           {"command", ctx.command},
           {"config", ctx.cfg.resolved},
           {"seed", ctx.cfg.seed},
           {"threads", ctx.cfg.threads},
           {"outputs", ctx.outputs}};
    io::write_text(ctx.out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace

RunConfig load_config(const fs::path& path) {
    const auto kv = io::read_key_value_file(path);
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    RunConfig cfg;
    for (const auto& [key, v] : kv) {
        if (key == "potential") cfg.potential = resolve(base, v);
        else if (key == "T") cfg.T = to_real(key, v);
        else if (key == "h") cfg.h = to_real(key, v);
        else if (key == "N") cfg.N = to_count(key, v);
        else if (key == "tol") cfg.tol = to_real(key, v);
        else if (key == "control") cfg.control = v;
        else if (key == "control_start") cfg.control_start = to_real(key, v);
        else if (key == "control_end") cfg.control_end = to_real(key, v);
        else if (key == "control_amplitude") cfg.control_amplitude = v;
        else if (key == "control_samples") cfg.control_samples = resolve(base, v);
        else if (key == "control_support_start") cfg.control_support_start = to_real(key, v);
        else if (key == "kernel") cfg.kernel = resolve(base, v);
        else if (key == "snapshot") cfg.snapshot = resolve(base, v);
        else if (key == "output") cfg.output = resolve(base, v);
        else if (key == "seed") cfg.seed = to_seed(v);
        else if (key == "threads") cfg.threads = static_cast<int>(to_count(key, v));
        else if (key == "trials") cfg.trials = static_cast<int>(to_count(key, v));
        else if (key == "cert_nodes") cfg.cert_nodes = to_count(key, v);
        else if (key == "fd_nodes") cfg.fd_nodes = to_count(key, v);
        else if (key == "fd_cfl") cfg.fd_cfl = to_real(key, v);
        else if (key == "dq_time") cfg.dq_time = to_real(key, v);
        else if (key == "dq_steps") {
            std::istringstream ss(v);
            std::string tok;
            while (ss >> tok) cfg.dq_steps.push_back(to_real(key, tok));
        }
        else if (key == "max_edge_residual") cfg.max_edge_residual = to_real(key, v);
        else if (key == "max_apriori_excess") cfg.max_apriori_excess = to_real(key, v);
        else if (key == "max_oracle_rel_l2") cfg.max_oracle_rel_l2 = to_real(key, v);
        else if (key == "min_dq_slope") cfg.min_dq_slope = to_real(key, v);
        else if (key == "max_roundtrip_rel") cfg.max_roundtrip_rel = to_real(key, v);
        else if (key == "max_cond") cfg.max_cond = to_real(key, v);
        else throw InputError(path.string() + ": unknown key '" + key + "'");
    }
    if (!(cfg.T > 0.0) || !(cfg.h > 0.0) || !(cfg.tol > 0.0)) throw InputError("config: T, h and tol must be positive");
    return cfg;
}

namespace {

void fill_resolved(RunConfig& cfg) {
    auto& r = cfg.resolved;
    r.clear();
    r["potential"] = cfg.potential.string();
    r["T"] = fmt(cfg.T);
    r["h"] = fmt(cfg.h);
    r["N"] = std::to_string(cfg.N);
    r["tol"] = fmt(cfg.tol);
    r["control"] = cfg.control;
    r["control_start"] = fmt(cfg.control_start > 0.0 ? cfg.control_start : 0.1 * cfg.T);
    r["control_end"] = fmt(cfg.control_end > 0.0 ? cfg.control_end : 0.9 * cfg.T);
    r["control_amplitude"] = cfg.control_amplitude;
    r["control_samples"] = cfg.control_samples.string();
    r["control_support_start"] = fmt(cfg.control_support_start);
    r["kernel"] = cfg.kernel ? cfg.kernel->string() : "";
    r["snapshot"] = cfg.snapshot ? cfg.snapshot->string() : "";
    r["output"] = cfg.output.string();
    r["seed"] = std::to_string(cfg.seed);
    r["threads"] = std::to_string(cfg.threads);
    r["trials"] = std::to_string(cfg.trials);
    r["cert_nodes"] = std::to_string(cfg.cert_nodes);
    r["fd_nodes"] = std::to_string(cfg.fd_nodes > 0 ? cfg.fd_nodes : cfg.N);
    r["fd_cfl"] = fmt(cfg.fd_cfl);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transmutation kernels and boundary control for u_tt - u_xx + q u = 0", "wavekernel"};
    app.require_subcommand(1);
    app.set_version_flag("--version", WAVEKERNEL_VERSION);

    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string snapshot;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"kernel", "solve the Goursat problem, write kernel.csv and kernel_summary.json"},
        {"propagate", "evaluate u(., T) and its x-derivatives, write snapshot.csv"},
        {"apply", "apply the control operator, write apply.csv"},
        {"invert", "recover the control from a snapshot, write control.csv"},
        {"bounds", "H2 certification and condition numbers, write report.json"},
        {"validate", "run every check against the configured thresholds, write validate.json"},
        {"oracle", "finite-difference solution and its distance to propagate, write oracle.json"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "run configuration (key = value)")->required();
        sub->add_option("--out", out_dir, "output directory, overrides 'output'");
        sub->add_option("--seed", seed, "seed for randomized trials, overrides 'seed'");
        sub->add_option("--threads", threads, "recorded in the manifest; computations are sequential");
        if (name == "invert") sub->add_option("snapshot", snapshot, "snapshot CSV, overrides 'snapshot'");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    Context ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    try {
        ctx.cfg = load_config(config);
        if (!out_dir.empty()) ctx.cfg.output = out_dir;
        if (seed) ctx.cfg.seed = *seed;
        if (threads) {
            if (*threads < 1) throw InputError("--threads must be positive");
            ctx.cfg.threads = *threads;
        }
        if (!snapshot.empty()) ctx.cfg.snapshot = fs::path(snapshot);
        fill_resolved(ctx.cfg);
        ctx.out_dir = ctx.cfg.output;
        fs::create_directories(ctx.out_dir);

        if (ctx.command == "kernel") cmd_kernel(ctx);
        else if (ctx.command == "propagate") cmd_propagate(ctx);
        else if (ctx.command == "apply") cmd_apply(ctx);
        else if (ctx.command == "invert") cmd_invert(ctx);
        else if (ctx.command == "bounds") cmd_bounds(ctx);
        else if (ctx.command == "validate") cmd_validate(ctx, err);
        else if (ctx.command == "oracle") cmd_oracle(ctx);
        write_manifest(ctx);
        out << ctx.command << ": wrote";
        for (const auto& o : ctx.outputs) out << ' ' << (ctx.out_dir / o).string();
        out << '\n';
        return kExitOk;
    } catch (const ValidationFailed&) {
        write_manifest(ctx);
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const SingularError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace wavekernel::cli
