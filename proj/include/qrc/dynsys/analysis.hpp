#pragma once

// Diagnostics built on the integrator: bifurcation maps of the NS5 kinetic
// energy, Benettin Lyapunov exponents and spectral characteristic periods.

#include "qrc/dynsys/integrator.hpp"
#include "qrc/dynsys/systems.hpp"
#include "qrc/error.hpp"
#include "qrc/parallel.hpp"
#include "qrc/random.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace qrc::dynsys {

/// Indices i with x[i] strictly above or strictly below both neighbours.
/// Plateau points never qualify.
[[nodiscard]] inline std::vector<Eigen::Index> local_extrema(const Eigen::Ref<const Eigen::VectorXd>& x)
{
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 1; i + 1 < x.size(); ++i) {
        const bool max = x(i) > x(i - 1) && x(i) > x(i + 1);
        const bool min = x(i) < x(i - 1) && x(i) < x(i + 1);
        if (max || min)
            idx.push_back(i);
    }
    return idx;
}

/// Initial condition near the laminar state (0, 0, 0, F/5, 0), perturbed by
/// `amplitude` times a seeded uniform vector in [-1, 1]^5.
[[nodiscard]] inline Eigen::VectorXd ns5_initial_condition(const Ns5System& sys, double amplitude, std::uint64_t seed)
{
    Eigen::VectorXd u = sys.laminar_fixed_point();
    Rng rng(seed);
    for (Eigen::Index i = 0; i < u.size(); ++i)
        u(i) += amplitude * rng.uniform(-1.0, 1.0);
    return u;
}

struct BifurcationConfig
{
    double transient = 200.0;
    double window = 200.0;
    double dt_sample = 0.01;
    double perturbation = 1e-2;
    std::uint64_t seed = 1;
    Ns5Variant variant = Ns5Variant::conserving;
    IntegratorConfig integrator{};
};

struct BifurcationColumn
{
    double forcing = 0.0;
    std::vector<double> extrema; // E_k local maxima and minima, in time order
    std::optional<std::string> failure;
};

[[nodiscard]] inline BifurcationColumn bifurcation_column(double forcing, const BifurcationConfig& cfg)
{
    BifurcationColumn col{forcing, {}, std::nullopt};
    const Ns5System sys{forcing, cfg.variant, true};
    try {
        const auto traj = integrate(sys, ns5_initial_condition(sys, cfg.perturbation, cfg.seed),
                                    cfg.transient + cfg.window, cfg.integrator, cfg.dt_sample, cfg.transient);
        Eigen::VectorXd energy(traj.size());
        for (Eigen::Index i = 0; i < traj.size(); ++i)
            energy(i) = 0.5 * traj.states.row(i).squaredNorm();
        for (auto i : local_extrema(energy))
            col.extrema.push_back(energy(i));
    } catch (const std::exception& e) {
        col.failure = e.what();
    }
    return col;
}

/// One column of E_k extrema per forcing value, in input order. Integration
/// failures are recorded per column and do not stop the scan.
[[nodiscard]] inline std::vector<BifurcationColumn> bifurcation_map(const std::vector<double>& f_values,
                                                                    const BifurcationConfig& cfg, int workers = 1)
{
    if (!(cfg.transient > 0.0) || !(cfg.window > 0.0))
        throw InvalidArgument("transient and window must be positive");
    std::vector<BifurcationColumn> out(f_values.size());
    parallel_for(f_values.size(), workers,
                 [&](std::size_t i) { out[i] = bifurcation_column(f_values[i], cfg); });
    return out;
}

/// Number of groups after sorting and merging neighbours closer than `tol`.
[[nodiscard]] inline std::size_t count_clusters(std::vector<double> values, double tol)
{
    if (values.empty())
        return 0;
    std::sort(values.begin(), values.end());
    std::size_t n = 1;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] - values[i - 1] > tol)
            ++n;
    return n;
}

struct LyapunovConfig
{
    double horizon = 2000.0;
    double renorm_dt = 0.5;
    double d0 = 1e-8;
    /// Time integrated before averaging starts.
    double transient = 50.0;
    /// Fewer renormalizations than this is refused.
    long min_renormalizations = 100;
    IntegratorConfig integrator{};
};

/// Leading Lyapunov exponent by the two-trajectory Benettin method: a
/// fiducial and a perturbed copy are integrated together and their separation
/// is rescaled to d0 every renorm_dt.
template <typename Rhs>
[[nodiscard]] double lyapunov_exponent(Rhs rhs, const Eigen::VectorXd& y0, const LyapunovConfig& cfg)
{
    if (!(cfg.renorm_dt > 0.0) || !(cfg.d0 > 0.0) || !(cfg.horizon > 0.0) || !(cfg.transient >= 0.0))
        throw InvalidArgument("Lyapunov horizon, renorm_dt and d0 must be positive");
    const auto n_renorm = static_cast<long>(std::floor(cfg.horizon / cfg.renorm_dt + 1e-9));
    if (n_renorm < cfg.min_renormalizations)
        throw InvalidArgument("horizon too short: " + std::to_string(n_renorm) + " renormalizations, at least " +
                              std::to_string(cfg.min_renormalizations) + " required");

    const auto n = y0.size();
    auto pair_rhs = [rhs, n](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        Eigen::VectorXd a = y.head(n), b = y.tail(n), da(n), db(n);
        rhs(t, a, da);
        rhs(t, b, db);
        dy.head(n) = da;
        dy.tail(n) = db;
    };

    Eigen::VectorXd y(2 * n);
    y.head(n) = y0;
    y.tail(n) = y0 + Eigen::VectorXd::Constant(n, cfg.d0 / std::sqrt(static_cast<double>(n)));
    DormandPrince stepper(pair_rhs, y, 0.0, cfg.integrator);

    const auto n_transient = static_cast<long>(std::floor(cfg.transient / cfg.renorm_dt + 1e-9));
    double log_sum = 0.0;
    long counted = 0;
    for (long k = 1; k <= n_transient + n_renorm; ++k) {
        const double t_target = static_cast<double>(k) * cfg.renorm_dt;
        while (stepper.time() < t_target)
            stepper.step(t_target);
        y = stepper.state();
        const Eigen::VectorXd sep = y.tail(n) - y.head(n);
        const double d = sep.norm();
        if (!std::isfinite(d) || d <= 0.0)
            throw std::runtime_error("separation " + std::string(d <= 0.0 ? "underflow" : "overflow") +
                                     " at t = " + std::to_string(t_target));
        if (k > n_transient) {
            log_sum += std::log(d / cfg.d0);
            ++counted;
        }
        y.tail(n) = y.head(n) + sep * (cfg.d0 / d);
        stepper.reset(y, t_target);
    }
    return log_sum / (static_cast<double>(counted) * cfg.renorm_dt);
}

inline constexpr Eigen::Index kMinSpectralSamples = 4096;

/// Period of the dominant power-spectrum peak of one series (mean removed,
/// Hann window). Resolution is one frequency bin.
[[nodiscard]] inline double dominant_period(const Eigen::Ref<const Eigen::VectorXd>& x, double dt)
{
    const auto n = x.size();
    if (n < kMinSpectralSamples)
        throw InvalidArgument("spectral estimate needs at least " + std::to_string(kMinSpectralSamples) +
                              " samples");
    const double mean = x.mean();
    std::vector<double> w(static_cast<std::size_t>(n));
    double scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                 static_cast<double>(n - 1));
        w[static_cast<std::size_t>(i)] = hann * (x(i) - mean);
        scale = std::max(scale, std::abs(x(i) - mean));
    }
    if (!(scale > 1e-12 * std::max(1.0, std::abs(mean))))
        throw InvalidArgument("flat spectrum: series is constant");

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, w);
    std::size_t best = 1;
    double best_power = -1.0;
    for (std::size_t k = 1; k <= static_cast<std::size_t>(n) / 2; ++k) {
        const double p = std::norm(spec[k]);
        if (p > best_power) {
            best_power = p;
            best = k;
        }
    }
    return static_cast<double>(n) * dt / static_cast<double>(best);
}

/// Characteristic (nonlinear) time of every component: its dominant spectral period.
[[nodiscard]] inline Eigen::VectorXd nonlinear_times(const Trajectory& traj)
{
    Eigen::VectorXd out(traj.dim());
    for (Eigen::Index c = 0; c < traj.dim(); ++c)
        out(c) = dominant_period(traj.states.col(c), traj.dt_sample);
    return out;
}

} // namespace qrc::dynsys
