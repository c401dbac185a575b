#pragma once

// End-to-end forecaster: normalization, teacher-forced training of the ridge
// readout over quantum features with classical memory, closed-loop
// autoregressive forecasting and the valid prediction time.

#include "qrc/dynsys/integrator.hpp"
#include "qrc/error.hpp"
#include "qrc/qdyn.hpp"
#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qrc::pipeline {

using dynsys::Trajectory;

/// Per-component affine map of [lo, hi] onto [0, 1].
struct Normalization
{
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    [[nodiscard]] static Normalization fit(const Eigen::Ref<const Eigen::MatrixXd>& samples)
    {
        if (samples.rows() < 1)
            throw InvalidArgument("cannot fit a normalization to zero samples");
        Normalization n{samples.colwise().minCoeff().transpose(), samples.colwise().maxCoeff().transpose()};
        for (Eigen::Index c = 0; c < n.lo.size(); ++c)
            if (!(n.hi(c) > n.lo(c)))
                throw InvalidArgument("component " + std::to_string(c) + " is constant on the training segment");
        return n;
    }

    [[nodiscard]] Eigen::MatrixXd normalize(const Eigen::Ref<const Eigen::MatrixXd>& x) const
    {
        return (x.rowwise() - lo.transpose()).array().rowwise() / (hi - lo).transpose().array();
    }

    [[nodiscard]] Eigen::MatrixXd denormalize(const Eigen::Ref<const Eigen::MatrixXd>& s) const
    {
        return (s.array().rowwise() * (hi - lo).transpose().array()).rowwise() + lo.transpose().array();
    }
};

struct DatasetSplit
{
    Eigen::Index n_washout = 100;
    Eigen::Index n_train = 5000;
    Eigen::Index n_test = 500;
};

/// Consecutive segments [washout | train | test] of one trajectory, normalized
/// with statistics of the training segment.
struct DatasetSpec
{
    Trajectory source;
    DatasetSplit split;
    Normalization normalization;
    Eigen::MatrixXd normalized; // first washout + train + test rows of source

    [[nodiscard]] Eigen::Index dim() const noexcept { return normalized.cols(); }
    [[nodiscard]] Eigen::Index train_begin() const noexcept { return split.n_washout; }
    [[nodiscard]] Eigen::Index test_begin() const noexcept { return split.n_washout + split.n_train; }

    /// Ground truth of the test segment in physical units.
    [[nodiscard]] Eigen::MatrixXd test_truth() const
    {
        return source.states.middleRows(test_begin(), split.n_test);
    }
};

[[nodiscard]] inline DatasetSpec make_dataset(const Trajectory& traj, const DatasetSplit& split)
{
    if (split.n_washout < 0 || split.n_train < 2 || split.n_test < 0)
        throw InvalidArgument("need n_washout >= 0, n_train >= 2, n_test >= 0");
    const auto total = split.n_washout + split.n_train + split.n_test;
    if (total > traj.size())
        throw InvalidArgument("segments need " + std::to_string(total) + " samples but the trajectory has " +
                              std::to_string(traj.size()));
    DatasetSpec data;
    data.source = traj;
    data.split = split;
    data.normalization = Normalization::fit(traj.states.middleRows(split.n_washout, split.n_train));
    data.normalized = data.normalization.normalize(traj.states.topRows(total));
    return data;
}

/// Hyperparameters of one forecaster; couplings are drawn from the seed at training time.
struct ModelConfig
{
    int n_qubits = 5;
    double coupling_scale = 0.01;  // J
    double transverse_field = 0.1; // h
    std::vector<double> times{0.5, 2.0};
    double gamma = 0.6;
    long shift = 1;
    /// Zero selects three slots per feature entry.
    Eigen::Index reservoir_length = 0;
    double ridge_lambda = 1e-6;
};

struct ForecastModel
{
    qdyn::HamiltonianSpec hamiltonian;
    qdyn::EvolutionConfig evolution;
    reservoir::ReservoirConfig reservoir;
    readout::ReadoutModel readout;
    Normalization normalization;
    Eigen::VectorXd final_state;   // reservoir state after the last training input
    Eigen::VectorXd training_rmse; // one-step-ahead, per component, normalized units
    std::uint64_t seed = 0;
};

/// Quantum features of one normalized input, clamped to the encoding domain [0, 1].
[[nodiscard]] inline Eigen::VectorXd encode(const qdyn::HamiltonianSpec& spec, const qdyn::EvolutionConfig& evo,
                                            const Eigen::Ref<const Eigen::VectorXd>& s)
{
    const Eigen::VectorXd clamped = s.cwiseMax(0.0).cwiseMin(1.0);
    return qdyn::multiplex_features(spec, clamped, evo);
}

/// Teacher-forced training. Inputs s_0 .. s_{w+n-1} drive the reservoir; states
/// r_k for k in [w, w+n-2] are regressed on s_{k+1}, so every target lies in
/// the training segment. The state after s_{w+n-1} starts the forecast.
[[nodiscard]] inline ForecastModel train(const DatasetSpec& data, const ModelConfig& cfg, std::uint64_t seed)
{
    const auto d = data.dim();
    ForecastModel model;
    model.seed = seed;
    model.normalization = data.normalization;
    model.hamiltonian = qdyn::HamiltonianSpec::standard(
        cfg.n_qubits, d, qdyn::sample_couplings(cfg.n_qubits, cfg.coupling_scale, seed), cfg.transverse_field);
    model.evolution = {cfg.times, qdyn::StateVector::zero(cfg.n_qubits)};
    model.evolution.validate();
    const auto feat_len = qdyn::feature_length(cfg.n_qubits, static_cast<Eigen::Index>(cfg.times.size()));
    model.reservoir = {cfg.gamma, cfg.shift, cfg.reservoir_length > 0 ? cfg.reservoir_length : 3 * feat_len};
    model.reservoir.validate(feat_len);

    const auto w = data.split.n_washout;
    const auto n = data.split.n_train;
    readout::TrainingSet ts{Eigen::MatrixXd(n - 1, model.reservoir.length), Eigen::MatrixXd(n - 1, d)};
    Eigen::VectorXd r = Eigen::VectorXd::Zero(model.reservoir.length);
    for (Eigen::Index k = 0; k < w + n; ++k) {
        const Eigen::VectorXd m = encode(model.hamiltonian, model.evolution, data.normalized.row(k).transpose());
        r = reservoir::update(r, m, model.reservoir);
        if (k >= w && k < w + n - 1) {
            ts.design.row(k - w) = r.transpose();
            ts.targets.row(k - w) = data.normalized.row(k + 1);
        }
    }
    model.final_state = r;

    const Eigen::RowVectorXd mean = ts.design.colwise().mean();
    const double spread = (ts.design.rowwise() - mean).cwiseAbs().maxCoeff();
    if (!(spread > 1e-12 * std::max(1.0, ts.design.cwiseAbs().maxCoeff())))
        throw IllConditioned("reservoir states are constant over the training window; the readout is undetermined");

    model.readout = readout::fit(ts, cfg.ridge_lambda);
    const Eigen::MatrixXd resid = ts.design * model.readout.weights - ts.targets;
    model.training_rmse = (resid.colwise().squaredNorm() / static_cast<double>(resid.rows())).cwiseSqrt().transpose();
    return model;
}

/// Closed-loop forecast in normalized units. Each prediction is fed back as
/// the next input (clamped only for encoding); row k predicts test sample k.
[[nodiscard]] inline Eigen::MatrixXd forecast(const ForecastModel& model, Eigen::Index n_steps)
{
    if (n_steps < 0)
        throw InvalidArgument("n_steps must be non-negative");
    Eigen::MatrixXd out(n_steps, model.readout.output_dim());
    Eigen::VectorXd r = model.final_state;
    for (Eigen::Index k = 0; k < n_steps; ++k) {
        const Eigen::VectorXd y = readout::predict(model.readout, r);
        if (!y.allFinite())
            throw ForecastDiverged("non-finite prediction", static_cast<long>(k));
        out.row(k) = y.transpose();
        if (k + 1 < n_steps)
            r = reservoir::update(r, encode(model.hamiltonian, model.evolution, y), model.reservoir);
    }
    return out;
}

struct MetricConfig
{
    double epsilon = 0.3;
    Eigen::VectorXd sigmas;

    /// sigma_i from the population standard deviation of `truth`.
    [[nodiscard]] static MetricConfig from_truth(const Eigen::Ref<const Eigen::MatrixXd>& truth, double epsilon = 0.3)
    {
        if (truth.rows() < 1)
            throw InvalidArgument("cannot estimate sigmas from an empty series");
        const Eigen::RowVectorXd mean = truth.colwise().mean();
        const Eigen::VectorXd var =
            ((truth.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(truth.rows())).transpose();
        for (Eigen::Index c = 0; c < var.size(); ++c)
            if (!(var(c) > 0.0))
                throw InvalidArgument("component " + std::to_string(c) + " of the truth series has zero spread");
        return {epsilon, var.cwiseSqrt()};
    }
};

/// Per-step sigma-normalized RMS deviation across components.
[[nodiscard]] inline Eigen::VectorXd normalized_error(const Eigen::Ref<const Eigen::MatrixXd>& pred,
                                                     const Eigen::Ref<const Eigen::MatrixXd>& truth,
                                                     const Eigen::Ref<const Eigen::VectorXd>& sigmas)
{
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw DimensionMismatch("prediction and truth shapes differ");
    if (sigmas.size() != pred.cols())
        throw DimensionMismatch("one sigma per component is required");
    for (Eigen::Index c = 0; c < sigmas.size(); ++c)
        if (!(sigmas(c) > 0.0))
            throw InvalidArgument("sigma of component " + std::to_string(c) + " is not positive");
    const Eigen::MatrixXd z = (pred - truth).array().rowwise() / sigmas.transpose().array();
    return (z.rowwise().squaredNorm() / static_cast<double>(pred.cols())).cwiseSqrt();
}

/// Number of leading steps whose normalized error stays within epsilon.
[[nodiscard]] inline long vpt(const Eigen::Ref<const Eigen::MatrixXd>& pred,
                              const Eigen::Ref<const Eigen::MatrixXd>& truth, const MetricConfig& cfg)
{
    if (!(cfg.epsilon > 0.0))
        throw InvalidArgument("epsilon must be positive");
    const Eigen::VectorXd e = normalized_error(pred, truth, cfg.sigmas);
    long steps = 0;
    while (steps < e.size() && e(steps) <= cfg.epsilon)
        ++steps;
    return steps;
}

/// VPT expressed in the units reported alongside the step count.
struct VptReport
{
    long steps = 0;
    double physical_time = 0.0;
    std::optional<double> lyapunov_times;  // physical time / LT
    std::optional<double> nonlinear_times; // physical time / max_i T_i
};

[[nodiscard]] inline VptReport rescale_vpt(long steps, double dt_sample, std::optional<double> lyapunov_time,
                                           std::optional<double> max_nonlinear_time)
{
    VptReport rep{steps, static_cast<double>(steps) * dt_sample, std::nullopt, std::nullopt};
    if (lyapunov_time && *lyapunov_time > 0.0)
        rep.lyapunov_times = rep.physical_time / *lyapunov_time;
    if (max_nonlinear_time && *max_nonlinear_time > 0.0)
        rep.nonlinear_times = rep.physical_time / *max_nonlinear_time;
    return rep;
}

/// Train, forecast the whole test segment and score it.
struct RunResult
{
    ForecastModel model;
    Eigen::MatrixXd prediction; // physical units
    Eigen::MatrixXd truth;      // physical units
    MetricConfig metric;
    long vpt_steps = 0;
};

[[nodiscard]] inline RunResult run(const DatasetSpec& data, const ModelConfig& cfg, std::uint64_t seed,
                                   double epsilon = 0.3)
{
    RunResult res;
    res.model = train(data, cfg, seed);
    res.prediction = data.normalization.denormalize(forecast(res.model, data.split.n_test));
    res.truth = data.test_truth();
    res.metric = MetricConfig::from_truth(res.truth, epsilon);
    res.vpt_steps = vpt(res.prediction, res.truth, res.metric);
    return res;
}

} // namespace qrc::pipeline
