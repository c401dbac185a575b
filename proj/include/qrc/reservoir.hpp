#pragma once

// Classical fading-memory layer: r_k = gamma * S_n r_{k-1} + B m_k, with S_n
// a cyclic shift and B a uniform zero-interleaving embedding.

#include "qrc/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace qrc::reservoir {

struct ReservoirConfig
{
    double gamma = 0.0;
    long shift = 1;
    Eigen::Index length = 0;

    /// Throws unless `length` is a positive multiple of `feature_len`.
    void validate(Eigen::Index feature_len) const
    {
        if (!(gamma >= 0.0 && gamma <= 1.0))
            throw InvalidArgument("gamma must lie in [0, 1]");
        if (length <= 0)
            throw InvalidArgument("reservoir length must be positive");
        if (feature_len <= 0 || length < feature_len || length % feature_len != 0)
            throw InvalidArgument("reservoir length " + std::to_string(length) +
                                  " is not a multiple of feature length " + std::to_string(feature_len));
    }

    /// Default length is three slots per feature entry.
    [[nodiscard]] static ReservoirConfig with_default_length(double gamma, long shift, Eigen::Index feature_len)
    {
        return ReservoirConfig{gamma, shift, 3 * feature_len};
    }
};

/// Places m_i at slot q*i of a length-l_r vector, q = l_r / len(m).
[[nodiscard]] inline Eigen::VectorXd embed(const Eigen::Ref<const Eigen::VectorXd>& m, Eigen::Index length)
{
    const auto n = m.size();
    if (n == 0 || length < n || length % n != 0)
        throw InvalidArgument("embedding length " + std::to_string(length) + " is not a multiple of " +
                              std::to_string(n));
    const auto q = length / n;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(length);
    for (Eigen::Index i = 0; i < n; ++i)
        out(q * i) = m(i);
    return out;
}

/// out_i = r_{(i + n) mod l_r}; negative n shifts the other way.
[[nodiscard]] inline Eigen::VectorXd shift(const Eigen::Ref<const Eigen::VectorXd>& r, long n)
{
    const auto len = r.size();
    Eigen::VectorXd out(len);
    if (len == 0)
        return out;
    const auto off = ((n % len) + len) % len;
    for (Eigen::Index i = 0; i < len; ++i)
        out(i) = r((i + off) % len);
    return out;
}

[[nodiscard]] inline Eigen::VectorXd update(const Eigen::Ref<const Eigen::VectorXd>& prev,
                                            const Eigen::Ref<const Eigen::VectorXd>& m,
                                            const ReservoirConfig& cfg)
{
    cfg.validate(m.size());
    if (prev.size() != cfg.length)
        throw DimensionMismatch("previous reservoir state has length " + std::to_string(prev.size()) +
                                ", expected " + std::to_string(cfg.length));
    const auto len = cfg.length;
    const auto q = len / m.size();
    const auto off = ((cfg.shift % len) + len) % len;
    Eigen::VectorXd out(len);
    for (Eigen::Index i = 0; i < len; ++i)
        out(i) = cfg.gamma * prev((i + off) % len);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        out(q * i) += m(i);
    return out;
}

/// Iterates `update` over the rows of `features`; row k of the result is r_k.
/// An empty `r0` means the zero state.
[[nodiscard]] inline Eigen::MatrixXd run_sequence(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                                  const ReservoirConfig& cfg,
                                                  const Eigen::Ref<const Eigen::VectorXd>& r0 = Eigen::VectorXd())
{
    Eigen::MatrixXd states(features.rows(), cfg.length);
    if (features.rows() == 0)
        return states;
    Eigen::VectorXd r = r0.size() == 0 ? Eigen::VectorXd::Zero(cfg.length) : Eigen::VectorXd(r0);
    for (Eigen::Index k = 0; k < features.rows(); ++k) {
        r = update(r, features.row(k).transpose(), cfg);
        states.row(k) = r.transpose();
    }
    return states;
}

} // namespace qrc::reservoir
