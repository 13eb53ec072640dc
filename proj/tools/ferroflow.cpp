// ferroflow command-line driver: single runs, relaxation sweeps, and the
// built-in verification battery.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ferroflow/config.hpp"
#include "ferroflow/diagnostics.hpp"
#include "ferroflow/snapshot.hpp"
#include "ferroflow/stepper.hpp"
#include "ferroflow/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

ferroflow::RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ferroflow::parse_config(ss.str());
}

int cmd_run(const std::string& config_path) {
    using namespace ferroflow;
    RunConfig cfg = load_config(config_path);
    std::filesystem::create_directories(cfg.output_dir);

    RunHooks hooks;
    auto snapshot_path = [&](int step) {
        std::ostringstream name;
        name << cfg.output_dir << "/snapshot_" << step << ".fflw";
        return name.str();
    };

    DiagnosticsSeries series;
    if (cfg.params.mode == SystemMode::Limit) {
        LimitStepper stepper(cfg.grid, cfg.params, cfg.stepper);
        LimitState s0 = stepper.prepare_initial(cfg.initial.velocity(cfg.grid),
                                                cfg.initial.spin(cfg.grid));
        hooks.on_limit_snapshot = [&](const LimitState& s, int step) {
            State full(cfg.grid);
            full.u = s.U;
            full.w = s.W;
            full.m = s.magnetization(cfg.params.kappa0);
            full.h = s.H;
            full.phi = s.Phi;
            full.p = s.P;
            full.time = s.time;
            write_snapshot(snapshot_path(step), full);
        };
        LimitTrajectory traj = run_limit(s0, cfg.params, cfg.stepper, cfg.diagnostics_every,
                                         cfg.snapshot_every, false, hooks);
        series = traj.series;
    } else {
        FullStepper stepper(cfg.grid, cfg.params, cfg.stepper);
        NeumannPoissonSolver pois(cfg.grid, cfg.stepper.poisson_tol);
        PotentialSolution lim =
            solve_limit_potential(cfg.grid, cfg.params.applied_field, cfg.params.kappa0, 0.0, pois);
        VectorField m0 =
            cfg.initial.magnetization(cfg.grid, lim.h, cfg.params.kappa0, cfg.m_deviation());
        State s0 = stepper.prepare_initial(cfg.initial.velocity(cfg.grid),
                                           cfg.initial.spin(cfg.grid), m0);
        hooks.on_full_snapshot = [&](const State& s, int step) {
            write_snapshot(snapshot_path(step), s);
        };
        Trajectory traj = run_full(s0, cfg.params, cfg.stepper, cfg.diagnostics_every,
                                   cfg.snapshot_every, hooks);
        series = traj.series;
    }
    write_diagnostics_csv(cfg.output_dir + "/diagnostics.csv", series);
    std::cout << "wrote " << cfg.output_dir << "/diagnostics.csv (" << series.size()
              << " samples)\n";
    return kExitOk;
}

std::vector<double> parse_taus(const std::string& arg) {
    std::vector<double> taus;
    std::istringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        taus.push_back(std::stod(tok));
    }
    return taus;
}

int cmd_sweep(const std::string& config_path, const std::string& taus_arg,
              const std::string& out_path) {
    using namespace ferroflow;
    RunConfig cfg = load_config(config_path);
    std::vector<double> taus = parse_taus(taus_arg);
    if (taus.size() < 4) {
        std::cerr << "error: need >= 4 taus\n";
        return kExitUsage;
    }
    SweepConfig sweep;
    sweep.grid = cfg.grid;
    sweep.params = cfg.params;
    sweep.stepper = cfg.stepper;
    sweep.initial = cfg.initial;
    sweep.diagnostics_every = cfg.diagnostics_every;
    SweepReport report = relaxation_sweep(sweep, taus);

    std::string path = out_path;
    if (path.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        path = cfg.output_dir + "/sweep.csv";
    }
    write_sweep_csv(path, report);
    std::cout << "wrote " << path << "\n";
    for (const SweepEntry& e : report.entries)
        std::cout << "  tau " << e.tau << "  sup sqrt(E) " << e.sup_sqrt_re << "\n";
    std::cout << "fitted slope " << report.fit.slope << "  r^2 " << report.fit.r_squared << "\n";
    return kExitOk;
}

int cmd_check(const std::string& config_path) {
    using namespace ferroflow;
    RunConfig cfg = load_config(config_path);
    std::vector<CheckResult> results = run_check_battery(cfg.params, cfg.stepper);
    bool all_pass = true;
    for (const CheckResult& r : results) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  (" << r.detail << ")\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ferroflow: 2D finite-difference Rosensweig ferrofluid solver"};
    app.require_subcommand(1);

    std::string run_config, sweep_config, sweep_taus, sweep_out, check_config;

    CLI::App* run = app.add_subcommand("run", "run a single simulation");
    run->add_option("config", run_config, "configuration file")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "relaxation-limit sweep over tau");
    sweep->add_option("config", sweep_config, "configuration file")->required();
    sweep->add_option("--taus", sweep_taus, "comma-separated relaxation times")->required();
    sweep->add_option("--out", sweep_out, "output CSV path (default <output_dir>/sweep.csv)");

    CLI::App* check = app.add_subcommand("check", "run the built-in verification battery");
    check->add_option("config", check_config, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_config);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_taus, sweep_out);
        if (check->parsed()) return cmd_check(check_config);
    } catch (const ferroflow::detail::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}
