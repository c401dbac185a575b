#pragma once

// Adaptive Dormand-Prince 5(4) integrator with PI step-size control and the
// standard 4th-order continuous extension, used to sample trajectories on a
// uniform output grid.

#include "qrc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace qrc::dynsys {

struct IntegratorConfig
{
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double max_step = 0.1;
    /// Non-positive selects the step automatically.
    double initial_step = 0.0;

    void validate() const
    {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw InvalidArgument("integrator tolerances must be positive");
        if (!(max_step > 0.0))
            throw InvalidArgument("max_step must be positive");
    }
};

/// Uniformly sampled multivariate series; row i of `states` is the state at times[i].
struct Trajectory
{
    Eigen::VectorXd times;
    Eigen::MatrixXd states;
    double dt_sample = 0.0;

    [[nodiscard]] Eigen::Index size() const noexcept { return states.rows(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return states.cols(); }
};

namespace dopri {

// Butcher tableau (Dormand & Prince 1980) and dense-output weights (Hairer's DOPRI5).
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants.
inline constexpr double kBeta = 0.04;
inline constexpr double kExpo = 0.2 - kBeta * 0.75;
inline constexpr double kSafety = 0.9;
inline constexpr double kMinFactor = 0.2;  // largest shrink is h / 5
inline constexpr double kMaxFactor = 10.0; // largest growth is 10 h

} // namespace dopri

/// Stateful stepper. `rhs(t, y, dy)` must write dy for a state y.
template <typename Rhs>
class DormandPrince
{
  public:
    using Vec = Eigen::VectorXd;

    DormandPrince(Rhs rhs, Vec y0, double t0, IntegratorConfig cfg)
        : rhs_(std::move(rhs)), cfg_(cfg), t_(t0), y_(std::move(y0))
    {
        cfg_.validate();
        const auto n = y_.size();
        for (Vec* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &err_})
            v->resize(n);
        for (Vec* v : {&r1_, &r2_, &r3_, &r4_, &r5_})
            v->resize(n);
        reset(y_, t0);
    }

    [[nodiscard]] double time() const noexcept { return t_; }
    [[nodiscard]] const Vec& state() const noexcept { return y_; }
    [[nodiscard]] double step_size() const noexcept { return h_; }
    [[nodiscard]] long accepted_steps() const noexcept { return n_accepted_; }

    /// Replaces the current state (e.g. after renormalization); keeps the step size.
    void reset(const Vec& y, double t)
    {
        y_ = y;
        t_ = t;
        rhs_(t_, y_, k1_);
        reject_last_ = false;
        facold_ = 1e-4;
        if (h_ <= 0.0)
            h_ = cfg_.initial_step > 0.0 ? std::min(cfg_.initial_step, cfg_.max_step) : initial_step();
    }

    /// Takes one accepted step, never past `t_limit`. Returns the step taken.
    double step(double t_limit)
    {
        using namespace dopri;
        if (!(t_limit > t_))
            throw InvalidArgument("step target must lie ahead of the current time");
        const double proposed = std::min(h_, cfg_.max_step);
        const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_limit));
        double h = proposed;
        for (;;) {
            // Steps that would stop within hmin of t_limit are stretched onto it.
            const bool lands = t_ + h >= t_limit - hmin;
            if (lands)
                h = t_limit - t_;
            if (h < hmin || !std::isfinite(h))
                throw IntegrationError("step size underflow", t_);
            stages(h);
            double err = 0.0;
            for (Eigen::Index i = 0; i < y_.size(); ++i) {
                const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_(i)), std::abs(ynew_(i)));
                const double q = err_(i) / sc;
                err += q * q;
            }
            err = std::sqrt(err / static_cast<double>(y_.size()));
            if (!std::isfinite(err))
                err = std::numeric_limits<double>::max();

            const double fac11 = std::pow(err, kExpo);
            if (err <= 1.0) {
                double fac = fac11 / std::pow(facold_, kBeta);
                fac = std::clamp(fac / kSafety, 1.0 / kMaxFactor, 1.0 / kMinFactor);
                double hnew = h / fac;
                if (reject_last_)
                    hnew = std::min(hnew, h);
                facold_ = std::max(err, 1e-4);
                reject_last_ = false;
                const bool clipped = lands && h < proposed;
                accept(h, lands ? t_limit : t_ + h);
                // A step shortened to land on t_limit keeps the earlier proposal.
                h_ = std::min(clipped ? std::max(hnew, proposed) : hnew, cfg_.max_step);
                return h;
            }
            h = h / std::min(1.0 / kMinFactor, fac11 / kSafety);
            reject_last_ = true;
        }
    }

    /// Continuous extension on the last accepted step, theta in [0, 1].
    [[nodiscard]] Vec dense(double t) const
    {
        const double theta = (t - told_) / hold_;
        const double theta1 = 1.0 - theta;
        return r1_ + theta * (r2_ + theta1 * (r3_ + theta * (r4_ + theta1 * r5_)));
    }

    [[nodiscard]] double last_step_start() const noexcept { return told_; }

  private:
    void stages(double h)
    {
        using namespace dopri;
        const double t = t_;
        ytmp_ = y_ + h * a21 * k1_;
        rhs_(t + c2 * h, ytmp_, k2_);
        ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
        rhs_(t + c3 * h, ytmp_, k3_);
        ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs_(t + c4 * h, ytmp_, k4_);
        ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(t + c5 * h, ytmp_, k5_);
        ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(t + h, ytmp_, k6_);
        ynew_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        rhs_(t + h, ynew_, k7_);
        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    }

    // t_new is passed in so a step clipped to t_limit lands on it exactly.
    void accept(double h, double t_new)
    {
        using namespace dopri;
        r1_ = y_;
        r2_ = ynew_ - y_;
        r3_ = h * k1_ - r2_;
        r4_ = r2_ - h * k7_ - r3_;
        r5_ = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
        told_ = t_;
        hold_ = h;
        t_ = t_new;
        y_.swap(ynew_);
        k1_.swap(k7_);
        ++n_accepted_;
    }

    /// Hairer's starting-step heuristic for a 5th-order method.
    double initial_step()
    {
        const auto n = static_cast<double>(y_.size());
        const auto scale = [&](const Vec& v) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_(i));
                acc += (v(i) / sc) * (v(i) / sc);
            }
            return std::sqrt(acc / n);
        };
        const double dnf = scale(k1_), dny = scale(y_);
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
        h = std::min(h, cfg_.max_step);
        ytmp_ = y_ + h * k1_;
        rhs_(t_ + h, ytmp_, k2_);
        Vec diff = k2_ - k1_;
        const double der2 = scale(diff) / h;
        const double der12 = std::max(std::abs(der2), dnf);
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        return std::min({100.0 * h, h1, cfg_.max_step});
    }

    Rhs rhs_;
    IntegratorConfig cfg_;
    double t_ = 0.0;
    double h_ = 0.0;
    double told_ = 0.0;
    double hold_ = 1.0;
    double facold_ = 1e-4;
    bool reject_last_ = false;
    long n_accepted_ = 0;
    Vec y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, err_;
    Vec r1_, r2_, r3_, r4_, r5_;
};

template <typename Rhs>
DormandPrince(Rhs, Eigen::VectorXd, double, IntegratorConfig) -> DormandPrince<Rhs>;

/// Integrates from t = 0 to `t_end` and samples the dense output at
/// record_from + i * dt_sample for every grid point not beyond t_end.
template <typename Rhs>
[[nodiscard]] Trajectory integrate(Rhs rhs, const Eigen::VectorXd& y0, double t_end, const IntegratorConfig& cfg,
                                   double dt_sample, double record_from = 0.0)
{
    if (!(t_end > 0.0))
        throw InvalidArgument("t_end must be positive");
    if (!(dt_sample > 0.0))
        throw InvalidArgument("dt_sample must be positive");
    if (!(record_from >= 0.0) || record_from > t_end)
        throw InvalidArgument("record_from must lie in [0, t_end]");
    if (y0.size() < 1 || !y0.allFinite())
        throw InvalidArgument("initial state must be non-empty and finite");

    const auto n_samples = static_cast<Eigen::Index>(std::floor((t_end - record_from) / dt_sample + 1e-9)) + 1;
    Trajectory traj;
    traj.dt_sample = dt_sample;
    traj.times.resize(n_samples);
    traj.states.resize(n_samples, y0.size());
    for (Eigen::Index i = 0; i < n_samples; ++i)
        traj.times(i) = record_from + static_cast<double>(i) * dt_sample;
    const double t_stop = traj.times(n_samples - 1);

    DormandPrince stepper(std::move(rhs), y0, 0.0, cfg);
    Eigen::Index next = 0;
    if (traj.times(0) == 0.0) {
        traj.states.row(0) = y0.transpose();
        next = 1;
    }
    while (next < n_samples) {
        stepper.step(t_stop);
        if (!stepper.state().allFinite())
            throw IntegrationError("solution became non-finite", stepper.last_step_start());
        while (next < n_samples && traj.times(next) <= stepper.time()) {
            if (traj.times(next) == stepper.time())
                traj.states.row(next) = stepper.state().transpose();
            else
                traj.states.row(next) = stepper.dense(traj.times(next)).transpose();
            ++next;
        }
    }
    return traj;
}

} // namespace qrc::dynsys
