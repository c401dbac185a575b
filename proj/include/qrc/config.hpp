#pragma once

// Declarative run configuration shared by every CLI command. A config is a
// single JSON object; every field has a default and unknown keys are errors.
// A manifest written by the CLI is the resolved config plus a "manifest"
// section, and can be fed back as a config unchanged.

#include "qrc/dynsys/analysis.hpp"
#include "qrc/dynsys/integrator.hpp"
#include "qrc/dynsys/systems.hpp"
#include "qrc/error.hpp"
#include "qrc/pipeline.hpp"
#include "qrc/sweep.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace qrc::config {

using nlohmann::json;

enum class SystemKind
{
    ns5,
    lorenz63,
};

[[nodiscard]] inline std::string to_string(SystemKind s)
{
    return s == SystemKind::ns5 ? "ns5" : "lorenz63";
}

[[nodiscard]] inline SystemKind parse_system(const std::string& s)
{
    if (s == "ns5")
        return SystemKind::ns5;
    if (s == "lorenz63")
        return SystemKind::lorenz63;
    throw InvalidArgument("unknown system '" + s + "' (expected ns5 or lorenz63)");
}

struct Ns5Section
{
    dynsys::Ns5System system{};
    double perturbation = 1e-2;
    std::uint64_t ic_seed = 1;
};

struct LorenzSection
{
    dynsys::Lorenz63System system{};
    std::vector<double> initial_state{1.0, 1.0, 1.0};
};

struct TrajectorySection
{
    double transient = 100.0;
    /// Zero selects the system default (0.01 for ns5, 0.02 for lorenz63).
    double dt_sample = 0.0;
    /// Optional CSV to read instead of integrating (train-forecast only).
    std::string input;
};

struct DatasetSection
{
    long n_washout = 100;
    long n_train = 5000;
    /// Zero selects the system default (2500 for ns5, 500 for lorenz63).
    long n_test = 0;
};

struct MetricSection
{
    double epsilon = 0.3;
    /// Lyapunov time used to rescale VPT; zero means "not known".
    double lyapunov_time = 0.0;
    /// Path to a lyapunov manifest whose lyapunov_time is used when the field above is zero.
    std::string lyapunov_from;
};

struct BifurcationSection
{
    double f_min = 22.0;
    double f_max = 35.0;
    double f_step = 0.1;
    /// Explicit forcing list; overrides the range when non-empty.
    std::vector<double> forcing;
    double transient = 200.0;
    double window = 200.0;
    double dt_sample = 0.01;
    double perturbation = 1e-2;
    std::uint64_t seed = 1;
};

struct HeatmapSection
{
    std::vector<std::string> axes{"dt1", "dt2"};
    std::map<std::string, double> slice;
};

struct RunConfig
{
    SystemKind system = SystemKind::lorenz63;
    Ns5Section ns5;
    LorenzSection lorenz63;
    dynsys::IntegratorConfig integrator{};
    TrajectorySection trajectory;
    DatasetSection dataset;
    /// Empty times select the system default: (2, 1) for ns5, (0.5, 2) for lorenz63.
    pipeline::ModelConfig model{.times = {}};
    MetricSection metric;
    BifurcationSection bifurcation;
    dynsys::LyapunovConfig lyapunov{};
    sweep::SweepGrid sweep{};
    HeatmapSection heatmap;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out = "out";

    [[nodiscard]] double dt_sample() const
    {
        if (trajectory.dt_sample > 0.0)
            return trajectory.dt_sample;
        return system == SystemKind::ns5 ? 0.01 : 0.02;
    }

    [[nodiscard]] long n_test() const
    {
        if (dataset.n_test > 0)
            return dataset.n_test;
        return system == SystemKind::ns5 ? 2500 : 500;
    }

    [[nodiscard]] pipeline::DatasetSplit split() const { return {dataset.n_washout, dataset.n_train, n_test()}; }

    [[nodiscard]] pipeline::ModelConfig model_config() const
    {
        auto m = model;
        if (m.times.empty())
            m.times = system == SystemKind::ns5 ? std::vector<double>{2.0, 1.0} : std::vector<double>{0.5, 2.0};
        return m;
    }

    [[nodiscard]] std::vector<double> bifurcation_forcing() const
    {
        if (!bifurcation.forcing.empty())
            return bifurcation.forcing;
        if (!(bifurcation.f_step > 0.0) || bifurcation.f_max < bifurcation.f_min)
            throw InvalidArgument("bifurcation range needs f_step > 0 and f_max >= f_min");
        std::vector<double> f;
        const auto n = static_cast<long>(std::floor((bifurcation.f_max - bifurcation.f_min) / bifurcation.f_step + 1e-9));
        for (long i = 0; i <= n; ++i)
            f.push_back(bifurcation.f_min + static_cast<double>(i) * bifurcation.f_step);
        return f;
    }

    [[nodiscard]] dynsys::BifurcationConfig bifurcation_config() const
    {
        return {bifurcation.transient, bifurcation.window, bifurcation.dt_sample, bifurcation.perturbation,
                bifurcation.seed,      ns5.system.variant, integrator};
    }

    void validate() const
    {
        integrator.validate();
        if (!(trajectory.transient >= 0.0))
            throw InvalidArgument("trajectory.transient must be non-negative");
        if (!(trajectory.dt_sample >= 0.0))
            throw InvalidArgument("trajectory.dt_sample must be non-negative");
        if (lorenz63.initial_state.size() != 3)
            throw InvalidArgument("lorenz63.initial_state must have three entries");
        if (!(metric.epsilon > 0.0))
            throw InvalidArgument("metric.epsilon must be positive");
        if (workers < 1)
            throw InvalidArgument("workers must be at least 1");
        if (heatmap.axes.size() != 2)
            throw InvalidArgument("heatmap.axes must name exactly two axes");
        sweep.validate();
    }
};

namespace detail {

/// Walks one JSON object, rejecting keys that no reader claimed.
class Reader
{
  public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw InvalidArgument("config: '" + path_ + "' must be an object");
    }

    template <typename T>
    void get(const char* key, T& out)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw InvalidArgument("config: '" + where(key) + "' has the wrong type (" + e.what() + ")");
        }
    }

    [[nodiscard]] const json* section(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void ignore(const char* key) { seen_.insert(key); }

    [[nodiscard]] std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw InvalidArgument("config: unknown key '" + where(item.key()) + "'");
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void read_section(Reader& parent, const char* key, Fn&& fn)
{
    if (const json* s = parent.section(key)) {
        Reader r(*s, parent.where(key));
        fn(r);
        r.finish();
    }
}

} // namespace detail

[[nodiscard]] inline RunConfig from_json(const json& j)
{
    RunConfig c;
    detail::Reader r(j, "");
    r.ignore("manifest");

    std::string system = to_string(c.system);
    r.get("system", system);
    c.system = parse_system(system);

    detail::read_section(r, "ns5", [&](detail::Reader& s) {
        std::string variant{dynsys::to_string(c.ns5.system.variant)};
        s.get("forcing", c.ns5.system.forcing);
        s.get("variant", variant);
        s.get("dissipative", c.ns5.system.dissipative);
        s.get("perturbation", c.ns5.perturbation);
        s.get("ic_seed", c.ns5.ic_seed);
        c.ns5.system.variant = dynsys::parse_ns5_variant(variant);
    });
    detail::read_section(r, "lorenz63", [&](detail::Reader& s) {
        s.get("sigma", c.lorenz63.system.sigma);
        s.get("rho", c.lorenz63.system.rho);
        s.get("beta", c.lorenz63.system.beta);
        s.get("initial_state", c.lorenz63.initial_state);
    });
    detail::read_section(r, "integrator", [&](detail::Reader& s) {
        s.get("abs_tol", c.integrator.abs_tol);
        s.get("rel_tol", c.integrator.rel_tol);
        s.get("max_step", c.integrator.max_step);
        s.get("initial_step", c.integrator.initial_step);
    });
    detail::read_section(r, "trajectory", [&](detail::Reader& s) {
        s.get("transient", c.trajectory.transient);
        s.get("dt_sample", c.trajectory.dt_sample);
        s.get("input", c.trajectory.input);
    });
    detail::read_section(r, "dataset", [&](detail::Reader& s) {
        s.get("n_washout", c.dataset.n_washout);
        s.get("n_train", c.dataset.n_train);
        s.get("n_test", c.dataset.n_test);
    });
    detail::read_section(r, "model", [&](detail::Reader& s) {
        s.get("n_qubits", c.model.n_qubits);
        s.get("J", c.model.coupling_scale);
        s.get("h", c.model.transverse_field);
        s.get("times", c.model.times);
        s.get("gamma", c.model.gamma);
        s.get("shift", c.model.shift);
        s.get("reservoir_length", c.model.reservoir_length);
        s.get("ridge_lambda", c.model.ridge_lambda);
    });
    detail::read_section(r, "metric", [&](detail::Reader& s) {
        s.get("epsilon", c.metric.epsilon);
        s.get("lyapunov_time", c.metric.lyapunov_time);
        s.get("lyapunov_from", c.metric.lyapunov_from);
    });
    detail::read_section(r, "bifurcation", [&](detail::Reader& s) {
        s.get("f_min", c.bifurcation.f_min);
        s.get("f_max", c.bifurcation.f_max);
        s.get("f_step", c.bifurcation.f_step);
        s.get("forcing", c.bifurcation.forcing);
        s.get("transient", c.bifurcation.transient);
        s.get("window", c.bifurcation.window);
        s.get("dt_sample", c.bifurcation.dt_sample);
        s.get("perturbation", c.bifurcation.perturbation);
        s.get("seed", c.bifurcation.seed);
    });
    detail::read_section(r, "lyapunov", [&](detail::Reader& s) {
        s.get("horizon", c.lyapunov.horizon);
        s.get("renorm_dt", c.lyapunov.renorm_dt);
        s.get("d0", c.lyapunov.d0);
        s.get("transient", c.lyapunov.transient);
        s.get("min_renormalizations", c.lyapunov.min_renormalizations);
    });
    detail::read_section(r, "sweep", [&](detail::Reader& s) {
        s.get("gamma", c.sweep.gamma_values);
        s.get("J", c.sweep.j_values);
        s.get("h", c.sweep.h_values);
        s.get("dt1", c.sweep.dt1_values);
        s.get("dt2", c.sweep.dt2_values);
        s.get("multiplexed", c.sweep.multiplexed);
        s.get("n_realizations", c.sweep.n_realizations);
    });
    detail::read_section(r, "heatmap", [&](detail::Reader& s) {
        s.get("axes", c.heatmap.axes);
        s.get("slice", c.heatmap.slice);
    });
    r.get("seed", c.seed);
    r.get("workers", c.workers);
    r.get("out", c.out);
    r.finish();

    // The sweep master seed is the run seed; keeping one source avoids two
    // knobs that silently disagree.
    c.sweep.master_seed = c.seed;
    c.validate();
    return c;
}

[[nodiscard]] inline json to_json(const RunConfig& c)
{
    return json{
        {"system", to_string(c.system)},
        {"ns5",
         {{"forcing", c.ns5.system.forcing},
          {"variant", std::string(dynsys::to_string(c.ns5.system.variant))},
          {"dissipative", c.ns5.system.dissipative},
          {"perturbation", c.ns5.perturbation},
          {"ic_seed", c.ns5.ic_seed}}},
        {"lorenz63",
         {{"sigma", c.lorenz63.system.sigma},
          {"rho", c.lorenz63.system.rho},
          {"beta", c.lorenz63.system.beta},
          {"initial_state", c.lorenz63.initial_state}}},
        {"integrator",
         {{"abs_tol", c.integrator.abs_tol},
          {"rel_tol", c.integrator.rel_tol},
          {"max_step", c.integrator.max_step},
          {"initial_step", c.integrator.initial_step}}},
        {"trajectory",
         {{"transient", c.trajectory.transient}, {"dt_sample", c.trajectory.dt_sample}, {"input", c.trajectory.input}}},
        {"dataset", {{"n_washout", c.dataset.n_washout}, {"n_train", c.dataset.n_train}, {"n_test", c.dataset.n_test}}},
        {"model",
         {{"n_qubits", c.model.n_qubits},
          {"J", c.model.coupling_scale},
          {"h", c.model.transverse_field},
          {"times", c.model.times},
          {"gamma", c.model.gamma},
          {"shift", c.model.shift},
          {"reservoir_length", c.model.reservoir_length},
          {"ridge_lambda", c.model.ridge_lambda}}},
        {"metric",
         {{"epsilon", c.metric.epsilon},
          {"lyapunov_time", c.metric.lyapunov_time},
          {"lyapunov_from", c.metric.lyapunov_from}}},
        {"bifurcation",
         {{"f_min", c.bifurcation.f_min},
          {"f_max", c.bifurcation.f_max},
          {"f_step", c.bifurcation.f_step},
          {"forcing", c.bifurcation.forcing},
          {"transient", c.bifurcation.transient},
          {"window", c.bifurcation.window},
          {"dt_sample", c.bifurcation.dt_sample},
          {"perturbation", c.bifurcation.perturbation},
          {"seed", c.bifurcation.seed}}},
        {"lyapunov",
         {{"horizon", c.lyapunov.horizon},
          {"renorm_dt", c.lyapunov.renorm_dt},
          {"d0", c.lyapunov.d0},
          {"transient", c.lyapunov.transient},
          {"min_renormalizations", c.lyapunov.min_renormalizations}}},
        {"sweep",
         {{"gamma", c.sweep.gamma_values},
          {"J", c.sweep.j_values},
          {"h", c.sweep.h_values},
          {"dt1", c.sweep.dt1_values},
          {"dt2", c.sweep.dt2_values},
          {"multiplexed", c.sweep.multiplexed},
          {"n_realizations", c.sweep.n_realizations}}},
        {"heatmap", {{"axes", c.heatmap.axes}, {"slice", c.heatmap.slice}}},
        {"seed", c.seed},
        {"workers", c.workers},
        {"out", c.out},
    };
}

[[nodiscard]] inline RunConfig load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidArgument("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

} // namespace qrc::config
