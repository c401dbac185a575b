#pragma once

// Ridge-regression readout, w = (R^T R + lambda I)^{-1} R^T y, one column per
// output component over a shared design matrix.

#include "qrc/error.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace qrc::readout {

/// Reciprocal condition estimates below this are treated as singular.
inline constexpr double kMinReciprocalCondition = 1e-15;

struct TrainingSet
{
    Eigen::MatrixXd design;  // N_tr x l_r
    Eigen::MatrixXd targets; // N_tr x d_out
};

struct ReadoutModel
{
    Eigen::MatrixXd weights; // l_r x d_out
    double ridge_lambda = 0.0;

    [[nodiscard]] Eigen::Index input_dim() const noexcept { return weights.rows(); }
    [[nodiscard]] Eigen::Index output_dim() const noexcept { return weights.cols(); }
};

[[nodiscard]] inline ReadoutModel fit(const TrainingSet& train, double lambda)
{
    const auto& r = train.design;
    const auto& y = train.targets;
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("ridge lambda must be finite and non-negative");
    if (r.rows() < 1)
        throw InvalidArgument("training set is empty");
    if (r.rows() != y.rows())
        throw DimensionMismatch("design and target row counts differ");
    if (!r.allFinite() || !y.allFinite())
        throw InvalidArgument("training data contains non-finite values");

    const auto p = r.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(r.transpose());
    gram.diagonal().array() += lambda;
    const Eigen::MatrixXd rhs = r.transpose() * y;

    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
    if (llt.info() != Eigen::Success || !(llt.rcond() >= kMinReciprocalCondition))
        throw IllConditioned("regularized normal equations are singular to working precision (rcond " +
                             std::to_string(llt.info() == Eigen::Success ? llt.rcond() : 0.0) + ")");
    ReadoutModel model{llt.solve(rhs), lambda};
    if (!model.weights.allFinite())
        throw IllConditioned("ridge solve produced non-finite weights");
    return model;
}

template <typename Derived>
[[nodiscard]] Eigen::VectorXd predict(const ReadoutModel& model, const Eigen::MatrixBase<Derived>& r)
{
    if (r.size() != model.input_dim())
        throw DimensionMismatch("reservoir state length " + std::to_string(r.size()) +
                                " does not match readout rows " + std::to_string(model.input_dim()));
    return model.weights.transpose() * r;
}

// JSON layout: row-major weight array with explicit shape.

[[nodiscard]] inline nlohmann::json to_json(const ReadoutModel& model)
{
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(model.weights.size()));
    for (Eigen::Index i = 0; i < model.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < model.weights.cols(); ++j)
            flat.push_back(model.weights(i, j));
    return {{"format", "qrc-readout"},
            {"version", 1},
            {"layout", "row-major"},
            {"rows", model.weights.rows()},
            {"cols", model.weights.cols()},
            {"ridge_lambda", model.ridge_lambda},
            {"weights", flat}};
}

[[nodiscard]] inline ReadoutModel from_json(const nlohmann::json& j)
{
    if (j.value("format", "") != "qrc-readout" || j.value("layout", "") != "row-major")
        throw InvalidArgument("not a row-major qrc-readout document");
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto flat = j.at("weights").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw DimensionMismatch("weight array does not match declared shape");
    ReadoutModel model;
    model.ridge_lambda = j.at("ridge_lambda").get<double>();
    model.weights.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2)
            model.weights(i, j2) = flat[static_cast<std::size_t>(i * cols + j2)];
    if (!model.weights.allFinite())
        throw InvalidArgument("weights must be finite");
    return model;
}

} // namespace qrc::readout
