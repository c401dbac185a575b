#pragma once

// CSV emitters and the trajectory reader. Numbers are printed with 17
// significant digits so that repeated runs compare byte-for-byte.

#include "qrc/dynsys/analysis.hpp"
#include "qrc/dynsys/integrator.hpp"
#include "qrc/error.hpp"
#include "qrc/sweep.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace qrc::io {

[[nodiscard]] inline std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

[[nodiscard]] inline std::string fmt(const std::optional<double>& x)
{
    return x ? fmt(*x) : std::string{};
}

inline void write_trajectory_csv(std::ostream& os, const dynsys::Trajectory& traj,
                                 const std::vector<std::string>& names)
{
    if (static_cast<Eigen::Index>(names.size()) != traj.dim())
        throw DimensionMismatch("one column name per component is required");
    os << "t";
    for (const auto& n : names)
        os << ',' << n;
    os << '\n';
    for (Eigen::Index i = 0; i < traj.size(); ++i) {
        os << fmt(traj.times(i));
        for (Eigen::Index c = 0; c < traj.dim(); ++c)
            os << ',' << fmt(traj.states(i, c));
        os << '\n';
    }
}

/// Reads a `t,c1,...` CSV written by write_trajectory_csv.
[[nodiscard]] inline dynsys::Trajectory read_trajectory_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("t,", 0) != 0)
        throw InvalidArgument("trajectory CSV must start with a 't,...' header");
    const auto n_cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        Eigen::Index col = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            try {
                v = std::stod(cell);
            } catch (const std::exception&) {
                throw InvalidArgument("malformed number '" + cell + "' in trajectory CSV");
            }
            (col == 0 ? times : values).push_back(v);
            ++col;
        }
        if (col != n_cols + 1)
            throw InvalidArgument("ragged row in trajectory CSV");
    }
    if (times.size() < 2)
        throw InvalidArgument("trajectory CSV needs at least two rows");
    dynsys::Trajectory traj;
    traj.times = Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
    traj.states = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), static_cast<Eigen::Index>(times.size()), n_cols);
    traj.dt_sample = (traj.times(traj.size() - 1) - traj.times(0)) / static_cast<double>(traj.size() - 1);
    for (Eigen::Index i = 1; i < traj.size(); ++i)
        if (std::abs(traj.times(i) - traj.times(i - 1) - traj.dt_sample) > 1e-9 * std::max(1.0, traj.dt_sample))
            throw InvalidArgument("trajectory times are not uniformly spaced");
    return traj;
}

[[nodiscard]] inline dynsys::Trajectory read_trajectory_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open trajectory file '" + path + "'");
    return read_trajectory_csv(in);
}

inline void write_bifurcation_csv(std::ostream& os, const std::vector<dynsys::BifurcationColumn>& cols)
{
    os << "F,extremum\n";
    for (const auto& c : cols)
        for (double e : c.extrema)
            os << fmt(c.forcing) << ',' << fmt(e) << '\n';
}

/// step,t,comp_1_pred,comp_1_true,... in physical units.
inline void write_forecast_csv(std::ostream& os, const Eigen::Ref<const Eigen::MatrixXd>& pred,
                               const Eigen::Ref<const Eigen::MatrixXd>& truth, const Eigen::Ref<const Eigen::VectorXd>& t,
                               const std::vector<std::string>& names)
{
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols() || t.size() != pred.rows() ||
        static_cast<Eigen::Index>(names.size()) != pred.cols())
        throw DimensionMismatch("forecast, truth, time and name shapes disagree");
    os << "step,t";
    for (const auto& n : names)
        os << ',' << n << "_pred," << n << "_true";
    os << '\n';
    for (Eigen::Index k = 0; k < pred.rows(); ++k) {
        os << k << ',' << fmt(t(k));
        for (Eigen::Index c = 0; c < pred.cols(); ++c)
            os << ',' << fmt(pred(k, c)) << ',' << fmt(truth(k, c));
        os << '\n';
    }
}

inline void write_sweep_csv(std::ostream& os, const std::vector<sweep::SweepCell>& table)
{
    os << "gamma,J,h,dt1,dt2,mean_vpt,rel_err,n_ok\n";
    for (const auto& c : table) {
        const auto& p = c.params;
        os << fmt(p.gamma) << ',' << fmt(p.j) << ',' << fmt(p.h) << ',' << fmt(p.dt1) << ',' << fmt(p.dt2) << ','
           << fmt(c.mean_vpt) << ',' << fmt(c.rel_err) << ',' << c.n_ok << '\n';
    }
}

/// First row: "<row_axis>\<col_axis>" then column-axis values; first column:
/// row-axis values. Missing entries are empty fields.
inline void write_heatmap_csv(std::ostream& os, const sweep::Heatmap& hm)
{
    os << hm.row_axis << '\\' << hm.col_axis;
    for (double v : hm.col_values)
        os << ',' << fmt(v);
    os << '\n';
    for (std::size_t i = 0; i < hm.row_values.size(); ++i) {
        os << fmt(hm.row_values[i]);
        for (const auto& v : hm.values[i])
            os << ',' << fmt(v);
        os << '\n';
    }
}

} // namespace qrc::io
