// qrc: command-line front end for trajectory generation, bifurcation scans,
// forecasting runs, hyperparameter sweeps and Lyapunov estimates.

#include "qrc/config.hpp"
#include "qrc/dynsys/analysis.hpp"
#include "qrc/io.hpp"
#include "qrc/pipeline.hpp"
#include "qrc/readout.hpp"
#include "qrc/sweep.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef QRC_VERSION
#define QRC_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qrc;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int)
{
    g_interrupted.store(true);
}

struct Overrides
{
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> system;
    std::optional<double> forcing;
    std::optional<std::string> variant;
    std::optional<std::string> axes;
};

// Precedence: defaults < config file < command-line flags.
config::RunConfig resolve(const Overrides& o, const std::string& command)
{
    auto c = o.config_path.empty() ? config::from_json(json::object()) : config::load(o.config_path);
    if (o.out)
        c.out = *o.out;
    if (o.seed) {
        c.seed = *o.seed;
        c.sweep.master_seed = *o.seed;
    }
    if (o.workers)
        c.workers = *o.workers;
    if (o.system)
        c.system = config::parse_system(*o.system);
    if (o.forcing) {
        if (command == "bifurcation")
            c.bifurcation.forcing = {*o.forcing};
        else
            c.ns5.system.forcing = *o.forcing;
    }
    if (o.variant)
        c.ns5.system.variant = dynsys::parse_ns5_variant(*o.variant);
    if (o.axes) {
        const auto comma = o.axes->find(',');
        if (comma == std::string::npos)
            throw InvalidArgument("--axes expects two comma-separated names, e.g. dt1,dt2");
        c.heatmap.axes = {o.axes->substr(0, comma), o.axes->substr(comma + 1)};
        for (const auto& a : c.heatmap.axes)
            (void)sweep::axis_value(sweep::CellParams{}, a);
    }
    c.validate();
    return c;
}

std::vector<std::string> component_names(const config::RunConfig& c, Eigen::Index dim)
{
    std::vector<std::string> names;
    if (c.system == config::SystemKind::lorenz63 && dim == 3)
        return {"x", "y", "z"};
    const std::string prefix = (c.system == config::SystemKind::ns5 && dim == 5) ? "u" : "c";
    for (Eigen::Index i = 0; i < dim; ++i)
        names.push_back(prefix + std::to_string(i + 1));
    return names;
}

dynsys::Trajectory simulate(const config::RunConfig& c, Eigen::Index n_samples)
{
    const double dt = c.dt_sample();
    const double t0 = c.trajectory.transient;
    const double t_end = t0 + static_cast<double>(n_samples - 1) * dt;
    if (c.system == config::SystemKind::ns5) {
        const auto y0 = dynsys::ns5_initial_condition(c.ns5.system, c.ns5.perturbation, c.ns5.ic_seed);
        return dynsys::integrate(c.ns5.system, y0, t_end, c.integrator, dt, t0);
    }
    const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(c.lorenz63.initial_state.data(), 3);
    return dynsys::integrate(c.lorenz63.system, y0, t_end, c.integrator, dt, t0);
}

dynsys::Trajectory source_trajectory(const config::RunConfig& c)
{
    if (!c.trajectory.input.empty())
        return io::read_trajectory_csv(c.trajectory.input);
    const auto s = c.split();
    return simulate(c, s.n_washout + s.n_train + s.n_test);
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    writer(os);
    os.flush();
    if (!os)
        throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j)
{
    write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

json manifest(const config::RunConfig& c, const std::string& command, json derived)
{
    json m = config::to_json(c);
    derived["version"] = QRC_VERSION;
    derived["command"] = command;
    m["manifest"] = std::move(derived);
    return m;
}

json to_array(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

std::optional<double> lyapunov_time(const config::RunConfig& c)
{
    if (c.metric.lyapunov_time > 0.0)
        return c.metric.lyapunov_time;
    if (c.metric.lyapunov_from.empty())
        return std::nullopt;
    std::ifstream in(c.metric.lyapunov_from);
    if (!in)
        throw InvalidArgument("cannot open Lyapunov manifest '" + c.metric.lyapunov_from + "'");
    const json j = json::parse(in);
    const auto& lt = j.at("manifest").at("lyapunov_time");
    if (lt.is_null())
        return std::nullopt;
    return lt.get<double>();
}

int cmd_generate(const config::RunConfig& c)
{
    const auto s = c.split();
    const auto traj = simulate(c, s.n_washout + s.n_train + s.n_test);
    fs::create_directories(c.out);
    write_file(fs::path(c.out) / "trajectory.csv",
               [&](std::ostream& os) { io::write_trajectory_csv(os, traj, component_names(c, traj.dim())); });
    write_json(fs::path(c.out) / "manifest_generate.json",
               manifest(c, "generate", {{"n_samples", traj.size()}, {"dt_sample", traj.dt_sample}}));
    std::cout << "wrote " << traj.size() << " samples to " << (fs::path(c.out) / "trajectory.csv").string() << '\n';
    return 0;
}

int cmd_bifurcation(const config::RunConfig& c)
{
    const auto forcing = c.bifurcation_forcing();
    const auto cols = dynsys::bifurcation_map(forcing, c.bifurcation_config(), c.workers);
    json failures = json::array();
    for (const auto& col : cols) {
        if (col.failure) {
            std::cerr << "warning: F = " << io::fmt(col.forcing) << ": " << *col.failure << '\n';
            failures.push_back({{"F", col.forcing}, {"error", *col.failure}});
        } else if (col.extrema.empty()) {
            std::cerr << "warning: F = " << io::fmt(col.forcing) << ": no extrema (steady state)\n";
        }
    }
    fs::create_directories(c.out);
    write_file(fs::path(c.out) / "bifurcation.csv", [&](std::ostream& os) { io::write_bifurcation_csv(os, cols); });
    write_json(fs::path(c.out) / "manifest_bifurcation.json",
               manifest(c, "bifurcation", {{"n_forcing", forcing.size()}, {"failures", failures}}));
    std::cout << "scanned " << forcing.size() << " forcing values\n";
    return 0;
}

json model_json(const pipeline::ForecastModel& m)
{
    json couplings = json::array();
    for (Eigen::Index i = 0; i < m.hamiltonian.couplings.rows(); ++i)
        couplings.push_back(to_array(m.hamiltonian.couplings.row(i).transpose()));
    return {
        {"seed", m.seed},
        {"n_qubits", m.hamiltonian.n_qubits},
        {"couplings", couplings},
        {"transverse_field", m.hamiltonian.transverse_field},
        {"times", m.evolution.times},
        {"reservoir", {{"gamma", m.reservoir.gamma}, {"shift", m.reservoir.shift}, {"length", m.reservoir.length}}},
        {"normalization", {{"min", to_array(m.normalization.lo)}, {"max", to_array(m.normalization.hi)}}},
        {"final_state", to_array(m.final_state)},
        {"readout", readout::to_json(m.readout)},
    };
}

int cmd_train_forecast(const config::RunConfig& c)
{
    const auto traj = source_trajectory(c);
    const auto data = pipeline::make_dataset(traj, c.split());
    const auto res = pipeline::run(data, c.model_config(), c.seed, c.metric.epsilon);

    const auto lt = lyapunov_time(c);
    std::optional<Eigen::VectorXd> t_nl;
    const auto train_rows = data.split.n_washout + data.split.n_train;
    if (train_rows >= dynsys::kMinSpectralSamples) {
        dynsys::Trajectory head{traj.times.head(train_rows), traj.states.topRows(train_rows), traj.dt_sample};
        t_nl = dynsys::nonlinear_times(head);
    } else {
        std::cerr << "warning: fewer than " << dynsys::kMinSpectralSamples
                  << " training samples; nonlinear times not estimated\n";
    }
    const auto report =
        pipeline::rescale_vpt(res.vpt_steps, traj.dt_sample, lt, t_nl ? std::optional(t_nl->maxCoeff()) : std::nullopt);

    Eigen::VectorXd t(res.prediction.rows());
    for (Eigen::Index k = 0; k < t.size(); ++k)
        t(k) = traj.times(data.test_begin() + k);

    fs::create_directories(c.out);
    const auto names = component_names(c, traj.dim());
    write_file(fs::path(c.out) / "forecast.csv",
               [&](std::ostream& os) { io::write_forecast_csv(os, res.prediction, res.truth, t, names); });
    write_json(fs::path(c.out) / "model.json", model_json(res.model));

    json vpt{{"steps", report.steps}, {"physical_time", report.physical_time}};
    vpt["lyapunov_times"] = report.lyapunov_times ? json(*report.lyapunov_times) : json(nullptr);
    vpt["nonlinear_times"] = report.nonlinear_times ? json(*report.nonlinear_times) : json(nullptr);
    json derived{
        {"vpt", vpt},
        {"sigmas", to_array(res.metric.sigmas)},
        {"sigma_source", "test segment ground truth, population standard deviation"},
        {"training_rmse", to_array(res.model.training_rmse)},
        {"dt_sample", traj.dt_sample},
    };
    derived["lyapunov_time"] = lt ? json(*lt) : json(nullptr);
    derived["nonlinear_times"] = t_nl ? to_array(*t_nl) : json(nullptr);
    write_json(fs::path(c.out) / "manifest_train_forecast.json", manifest(c, "train-forecast", derived));

    std::cout << "VPT " << report.steps << " steps, " << io::fmt(report.physical_time) << " time units";
    if (report.lyapunov_times)
        std::cout << ", " << io::fmt(*report.lyapunov_times) << " LT";
    if (report.nonlinear_times)
        std::cout << ", " << io::fmt(*report.nonlinear_times) << " T_nl";
    std::cout << '\n';
    return 0;
}

int cmd_sweep(const config::RunConfig& c)
{
    const auto traj = source_trajectory(c);
    sweep::SweepTask task{pipeline::make_dataset(traj, c.split()), c.model_config(), c.metric.epsilon};
    auto grid = c.sweep;
    grid.master_seed = c.seed;

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto table = sweep::run_sweep(grid, task, c.workers, &g_interrupted);
    const bool partial = g_interrupted.load();

    std::vector<sweep::SweepCell> done;
    for (const auto& cell : table)
        if (cell.complete())
            done.push_back(cell);

    fs::create_directories(c.out);
    write_file(fs::path(c.out) / "sweep.csv", [&](std::ostream& os) { io::write_sweep_csv(os, done); });

    json derived{{"n_cells", table.size()},
                 {"n_complete", done.size()},
                 {"partial", partial},
                 {"rel_err", "population std(VPT) / mean(VPT) over successful realizations"}};
    const bool any_valid = std::any_of(done.begin(), done.end(), [](const auto& x) { return !x.missing(); });
    if (any_valid) {
        const auto& best = sweep::select_best(done);
        derived["best"] = {{"gamma", best.params.gamma},
                           {"J", best.params.j},
                           {"h", best.params.h},
                           {"dt1", best.params.dt1},
                           {"dt2", best.params.dt2 ? json(*best.params.dt2) : json(nullptr)},
                           {"mean_vpt", *best.mean_vpt},
                           {"rel_err", *best.rel_err}};
        std::cout << "best cell: gamma=" << io::fmt(best.params.gamma) << " J=" << io::fmt(best.params.j)
                  << " h=" << io::fmt(best.params.h) << " dt1=" << io::fmt(best.params.dt1)
                  << " dt2=" << io::fmt(best.params.dt2) << " mean_vpt=" << io::fmt(best.mean_vpt)
                  << " rel_err=" << io::fmt(best.rel_err) << '\n';
    } else {
        std::cerr << "warning: no sweep cell produced a nonzero VPT\n";
    }
    write_json(fs::path(c.out) / "manifest_sweep.json", manifest(c, "sweep", derived));
    if (partial) {
        std::cerr << "interrupted: wrote " << done.size() << " of " << table.size() << " cells\n";
        return 130;
    }

    const auto& a = c.heatmap.axes;
    const std::string stem = "heatmap_" + a[0] + "_" + a[1];
    for (auto metric : {sweep::HeatmapMetric::mean_vpt, sweep::HeatmapMetric::rel_err}) {
        const auto hm = sweep::export_heatmap(done, a[0], a[1], c.heatmap.slice, metric);
        const std::string suffix = metric == sweep::HeatmapMetric::mean_vpt ? "_mean_vpt.csv" : "_rel_err.csv";
        write_file(fs::path(c.out) / (stem + suffix), [&](std::ostream& os) { io::write_heatmap_csv(os, hm); });
    }
    return 0;
}

int cmd_lyapunov(const config::RunConfig& c)
{
    double lambda = 0.0;
    if (c.system == config::SystemKind::ns5) {
        lambda = dynsys::lyapunov_exponent(
            c.ns5.system, dynsys::ns5_initial_condition(c.ns5.system, c.ns5.perturbation, c.ns5.ic_seed), c.lyapunov);
    } else {
        const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(c.lorenz63.initial_state.data(), 3);
        lambda = dynsys::lyapunov_exponent(c.lorenz63.system, y0, c.lyapunov);
    }
    json derived{{"lyapunov_exponent", lambda}};
    if (lambda > 0.0) {
        derived["lyapunov_time"] = 1.0 / lambda;
        std::cout << "lambda_L = " << io::fmt(lambda) << ", LT = " << io::fmt(1.0 / lambda) << '\n';
    } else {
        derived["lyapunov_time"] = nullptr;
        std::cout << "lambda_L = " << io::fmt(lambda) << '\n';
        std::cerr << "warning: non-positive exponent, Lyapunov time is undefined\n";
    }
    fs::create_directories(c.out);
    write_json(fs::path(c.out) / "lyapunov.json", manifest(c, "lyapunov", derived));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantum reservoir forecaster for chaotic benchmark systems"};
    app.set_version_flag("--version", std::string(QRC_VERSION));
    app.require_subcommand(1);

    Overrides o;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out, system, variant, axes;
    double forcing = 0.0;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"generate", "integrate the configured system and write its trajectory"},
        {"bifurcation", "record kinetic-energy extrema of NS5 over a forcing range"},
        {"train-forecast", "train the reservoir, forecast the test segment and report VPT"},
        {"sweep", "grid search over gamma, J, h and the evolution times"},
        {"lyapunov", "estimate the leading Lyapunov exponent"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--system", system, "ns5 or lorenz63")->check(CLI::IsMember({"ns5", "lorenz63"}));
        sub->add_option("--forcing", forcing, "NS5 forcing F");
        sub->add_option("--variant", variant, "NS5 variant")->check(CLI::IsMember({"as_written", "conserving"}));
        sub->add_option("--axes", axes, "heatmap axes, e.g. dt1,dt2");
    }

    CLI11_PARSE(app, argc, argv);
    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    if (sub->count("--out"))
        o.out = out;
    if (sub->count("--seed"))
        o.seed = seed;
    if (sub->count("--workers"))
        o.workers = workers;
    if (sub->count("--system"))
        o.system = system;
    if (sub->count("--forcing"))
        o.forcing = forcing;
    if (sub->count("--variant"))
        o.variant = variant;
    if (sub->count("--axes"))
        o.axes = axes;

    try {
        const auto c = resolve(o, command);
        if (command == "generate")
            return cmd_generate(c);
        if (command == "bifurcation")
            return cmd_bifurcation(c);
        if (command == "train-forecast")
            return cmd_train_forecast(c);
        if (command == "sweep")
            return cmd_sweep(c);
        return cmd_lyapunov(c);
    } catch (const qrc::IntegrationError& e) {
        std::cerr << "error: " << e.what() << " (last accepted t = " << e.last_time() << ")\n";
    } catch (const qrc::ForecastDiverged& e) {
        std::cerr << "error: " << e.what() << " (step " << e.step() << ")\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return 1;
}
