// zklab: batch driver for the spectral wave-turbulence laboratory.
//
// Subcommands: simulate | expand | count | compare.  Shared flags:
//   --config PATH   key=value config file (dotted sections, '#' comments)
//   --set KEY=VAL   override a single config key (repeatable)
//   --out DIR       output directory (default ".", env ZKLAB_OUT overrides)
//   --seed U64      RNG master seed
//   --threads N     worker threads (timing only; results are identical)
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 budget exceeded.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zklab/counting.hpp"
#include "zklab/errors.hpp"
#include "zklab/expansion.hpp"
#include "zklab/io.hpp"
#include "zklab/kinetic.hpp"
#include "zklab/lattice.hpp"
#include "zklab/random_data.hpp"
#include "zklab/solver.hpp"
#include "zklab/trees.hpp"

namespace {

namespace fs = std::filesystem;
using zk::io::format_double;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

KeyValues defaults_for(const std::string& command) {
    KeyValues kv = {
        {"model.dim", "3"},       {"model.L", "8"},
        {"model.radius", "1"},    {"model.lambda", "0.1"},
        {"model.nu", "0"},        {"data.diameter", "2"},
        {"data.amplitude", "1"},  {"data.center_radius", "0"},
        {"seed", "1"},            {"threads", "1"},
    };
    if (command == "simulate") {
        kv["sim.t_final"] = "1";
        kv["sim.dt"] = "0.01";
        kv["sim.scheme"] = "etdrk4";
        kv["sim.members"] = "64";
    } else if (command == "expand") {
        kv["expand.order"] = "2";
        kv["expand.t_final"] = "1";
        kv["expand.time_steps"] = "32";
    } else if (command == "count") {
        kv["count.kx"] = "1";
        kv["count.ky"] = "0";
        kv["count.kz"] = "0";
        kv["count.sigma"] = "0";
        kv["count.window_T"] = "8";
        kv["count.theta"] = "0.1";
    } else if (command == "compare") {
        kv["compare.stats"] = "";
        kv["compare.t"] = "1";
        kv["quad.slices"] = "64";
        kv["quad.sphere_order"] = "16";
        kv["quad.mollifier"] = "coarea";
        kv["quad.eta"] = "0.01";
        kv["quad.grid"] = "48";
    }
    return kv;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void apply_line(KeyValues& kv, const std::string& key, const std::string& value,
                const std::string& origin) {
    if (!kv.count(key))
        throw ConfigError(origin + ": unknown key '" + key + "'");
    kv[key] = value;
}

void load_config_file(KeyValues& kv, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key = value");
        apply_line(kv, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                   path + ":" + std::to_string(lineno));
    }
}

double get_double(const KeyValues& kv, const std::string& key) {
    const std::string& s = kv.at(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
    }
}

long long get_int(const KeyValues& kv, const std::string& key) {
    const std::string& s = kv.at(key);
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
    }
}

std::uint64_t get_u64(const KeyValues& kv, const std::string& key) {
    const std::string& s = kv.at(key);
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" +
                          s + "'");
    }
}

zk::LatticeSpec lattice_spec(const KeyValues& kv) {
    const auto dim = get_int(kv, "model.dim");
    const double L = get_double(kv, "model.L");
    const double r = get_double(kv, "model.radius");
    try {
        return zk::LatticeSpec(static_cast<int>(dim), L, r);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model.*: ") + e.what());
    }
}

zk::ModelParams model_params(const KeyValues& kv) {
    zk::ModelParams p;
    p.dim = static_cast<int>(get_int(kv, "model.dim"));
    p.L = get_double(kv, "model.L");
    p.lambda = get_double(kv, "model.lambda");
    p.nu = get_double(kv, "model.nu");
    if (p.nu < 0) throw ConfigError("model.nu: must be >= 0");
    return p;
}

zk::SpectrumProfile profile(const KeyValues& kv) {
    const double D = get_double(kv, "data.diameter");
    const double A = get_double(kv, "data.amplitude");
    const double c = get_double(kv, "data.center_radius");
    if (D <= 0) throw ConfigError("data.diameter: must be > 0");
    if (A < 0) throw ConfigError("data.amplitude: must be >= 0");
    if (c < 0 || c >= D / 2) throw ConfigError("data.center_radius: in [0, D/2)");
    return zk::smooth_bump(D, A, c);
}

struct StageClock {
    zk::io::RunManifest* manifest;
    std::string stage;
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    ~StageClock() {
        manifest->stage_seconds.emplace_back(
            stage, std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count());
    }
};

void write_manifest(const fs::path& dir, const zk::io::RunManifest& m) {
    std::ofstream os(dir / "manifest.json");
    os << zk::io::manifest_to_json(m).dump(2) << '\n';
}

int run_simulate(const KeyValues& kv, const fs::path& out,
                 zk::io::RunManifest& manifest) {
    const auto spec = lattice_spec(kv);
    const auto params = model_params(kv);
    const auto prof = profile(kv);
    zk::solver::SolverConfig cfg{spec, params};
    cfg.dt = get_double(kv, "sim.dt");
    if (cfg.dt <= 0) throw ConfigError("sim.dt: must be > 0");
    const std::string scheme = kv.at("sim.scheme");
    if (scheme == "etdrk4")
        cfg.scheme = zk::solver::Scheme::etdrk4;
    else if (scheme == "etdrk2")
        cfg.scheme = zk::solver::Scheme::etdrk2;
    else
        throw ConfigError("sim.scheme: expected etdrk4 or etdrk2");
    const double t_final = get_double(kv, "sim.t_final");
    if (t_final < 0) throw ConfigError("sim.t_final: must be >= 0");
    const auto members = get_int(kv, "sim.members");
    if (members < 2) throw ConfigError("sim.members: must be >= 2");
    const auto seed = get_u64(kv, "seed");
    const auto threads = static_cast<int>(get_int(kv, "threads"));
    if (threads < 1) throw ConfigError("threads: must be >= 1");

    zk::BallIndex ball(spec);
    StageClock clock{&manifest, "ensemble"};
    auto stats = zk::solver::ensemble_spectrum(
        prof, ball, cfg, static_cast<std::size_t>(members), seed, t_final,
        threads);
    stats.config_digest = manifest.config_digest();
    std::ofstream os(out / "stats.jsonl");
    zk::io::write_stats_jsonl(os, stats);
    std::cout << "simulate: " << members << " members, " << ball.size()
              << " modes -> " << (out / "stats.jsonl").string() << '\n';
    return 0;
}

int run_expand(const KeyValues& kv, const fs::path& out,
               zk::io::RunManifest& manifest) {
    const auto spec = lattice_spec(kv);
    const auto params = model_params(kv);
    const auto prof = profile(kv);
    const auto N = static_cast<int>(get_int(kv, "expand.order"));
    if (N < 0 || N > 6) throw ConfigError("expand.order: in [0, 6]");
    zk::TimeGrid grid;
    grid.t_final = get_double(kv, "expand.t_final");
    grid.steps = static_cast<int>(get_int(kv, "expand.time_steps"));
    if (grid.t_final <= 0) throw ConfigError("expand.t_final: must be > 0");
    if (grid.steps < 3) throw ConfigError("expand.time_steps: must be >= 3");

    zk::BallIndex ball(spec);
    zk::ExpansionContext ctx(ball, params, grid);
    const zk::SeededGaussianSource src{get_u64(kv, "seed"), 0};
    const auto xi = zk::sample_initial_data(prof, ball, src);

    StageClock clock{&manifest, "expansion"};
    std::ofstream trees_csv(out / "trees.csv");
    trees_csv << "tree,branches,sup_norm\n";
    for (int l = 0; l <= N; ++l) {
        for (const auto& T : zk::diag::trees_with_branches(l)) {
            const auto J = ctx.tree_term(T, xi);
            double sup = 0.0;
            for (const auto& z : J.values) sup = std::max(sup, std::abs(z));
            trees_csv << zk::tree_key(T) << ',' << l << ','
                      << format_double(sup) << '\n';
        }
    }
    std::ofstream res_csv(out / "residual.csv");
    res_csv << "order,residual_sup\n";
    for (int n = 0; n <= N; ++n) {
        const auto err = ctx.residual(n, xi);
        double sup = 0.0;
        for (const auto& z : err.values) sup = std::max(sup, std::abs(z));
        res_csv << n << ',' << format_double(sup) << '\n';
    }
    std::cout << "expand: orders 0.." << N << " -> " << (out / "trees.csv").string()
              << ", " << (out / "residual.csv").string() << '\n';
    return 0;
}

int run_count(const KeyValues& kv, const fs::path& out,
              zk::io::RunManifest& manifest) {
    const auto spec = lattice_spec(kv);
    zk::counting::ResonanceQuery q{
        /*K=*/{}, get_double(kv, "count.sigma"),
        get_double(kv, "count.window_T"), 1.0, spec,
        zk::AnisotropyCoefficients::isotropic(spec.dim)};
    q.K.dim = spec.dim;
    q.K[0] = static_cast<std::int32_t>(get_int(kv, "count.kx"));
    q.K[1] = static_cast<std::int32_t>(get_int(kv, "count.ky"));
    q.K[2] = static_cast<std::int32_t>(get_int(kv, "count.kz"));
    if (q.K.is_zero()) throw ConfigError("count.k*: k must be nonzero");
    if (q.window_T <= 0) throw ConfigError("count.window_T: must be > 0");
    const double theta = get_double(kv, "count.theta");

    zk::BallIndex ball(spec);
    StageClock clock{&manifest, "counting"};
    const auto report = zk::counting::verify_onenode_bound(q, ball, theta);
    std::ofstream csv(out / "count.csv");
    csv << "kx,ky,kz,sigma,window_T,theta,count,bound,ratio,exceeded\n";
    csv << q.K[0] << ',' << q.K[1] << ',' << q.K[2] << ','
        << format_double(q.sigma) << ',' << format_double(q.window_T) << ','
        << format_double(theta) << ',' << report.count << ','
        << format_double(report.bound) << ',' << format_double(report.ratio)
        << ',' << (report.exceeded ? 1 : 0) << '\n';
    std::cout << "count: " << report.count << " solutions, ratio "
              << format_double(report.ratio) << " -> "
              << (out / "count.csv").string() << '\n';
    return 0;
}

int run_compare(const KeyValues& kv, const fs::path& out,
                zk::io::RunManifest& manifest) {
    const auto spec = lattice_spec(kv);
    const auto params = model_params(kv);
    const auto prof = profile(kv);
    const std::string stats_path = kv.at("compare.stats");
    if (stats_path.empty() || !fs::exists(stats_path))
        throw ConfigError("missing stats input (compare.stats): run `zklab "
                          "simulate` first and point compare.stats at its "
                          "stats.jsonl");
    const double t = get_double(kv, "compare.t");
    if (t <= 0) throw ConfigError("compare.t: must be > 0");
    zk::kinetic::CollisionQuadrature quad;
    quad.slice_count = static_cast<int>(get_int(kv, "quad.slices"));
    quad.sphere_order = static_cast<int>(get_int(kv, "quad.sphere_order"));
    quad.eta = get_double(kv, "quad.eta");
    quad.gaussian_grid = static_cast<int>(get_int(kv, "quad.grid"));
    const std::string mol = kv.at("quad.mollifier");
    if (mol == "coarea")
        quad.mollifier = zk::kinetic::Mollifier::exact_coarea;
    else if (mol == "gaussian")
        quad.mollifier = zk::kinetic::Mollifier::gaussian;
    else
        throw ConfigError("quad.mollifier: expected coarea or gaussian");

    zk::BallIndex ball(spec);
    std::ifstream is(stats_path);
    const auto stats = zk::io::read_stats_jsonl(is, ball);
    StageClock clock{&manifest, "compare"};
    const auto cmp = zk::kinetic::compare_spectra(stats, prof, t, params, quad);
    std::ofstream csv(out / "comparison.csv");
    zk::io::write_comparison_csv(csv, cmp);
    std::cout << "compare: " << cmp.rows.size() << " modes, |z| median "
              << format_double(cmp.z_median) << ", p95 "
              << format_double(cmp.z_p95) << " -> "
              << (out / "comparison.csv").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zklab: spectral wave-turbulence laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    std::string seed_flag, threads_flag;
    for (const char* name : {"simulate", "expand", "count", "compare"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file (key = value)");
        sub->add_option("--set", overrides, "override KEY=VALUE (repeatable)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_flag, "RNG master seed");
        sub->add_option("--threads", threads_flag,
                        "worker threads (never affects results)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();

    try {
        KeyValues kv = defaults_for(command);
        if (!config_path.empty()) load_config_file(kv, config_path);
        for (const auto& ov : overrides) {
            const auto eq = ov.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set: expected KEY=VALUE, got '" + ov + "'");
            apply_line(kv, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)),
                       "--set");
        }
        if (!seed_flag.empty()) kv["seed"] = seed_flag;
        if (!threads_flag.empty()) kv["threads"] = threads_flag;

        fs::path out = ".";
        if (const char* env = std::getenv("ZKLAB_OUT"); env && *env) out = env;
        if (!out_dir.empty()) out = out_dir;
        fs::create_directories(out);

        zk::io::RunManifest manifest;
        manifest.command = command;
        manifest.config = kv;
        manifest.seed = get_u64(kv, "seed");

        const auto t0 = std::chrono::steady_clock::now();
        int rc = 0;
        if (command == "simulate") rc = run_simulate(kv, out, manifest);
        else if (command == "expand") rc = run_expand(kv, out, manifest);
        else if (command == "count") rc = run_count(kv, out, manifest);
        else rc = run_compare(kv, out, manifest);
        manifest.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        write_manifest(out, manifest);
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const zk::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 4;
    } catch (const zk::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
