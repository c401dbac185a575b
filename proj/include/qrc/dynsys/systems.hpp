#pragma once

// Benchmark vector fields: the five-mode Galerkin truncation of 2-D
// Navier-Stokes (Re = 1, no drag) and Lorenz-63.

#include "qrc/error.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <string_view>

namespace qrc::dynsys {

/// Retained wavevectors k_1..k_5; their squared norms weight the enstrophy.
inline constexpr std::array<std::array<int, 2>, 5> kNs5Wavevectors{{{0, 1}, {1, 1}, {1, 2}, {2, -1}, {3, 0}}};
inline constexpr std::array<double, 5> kNs5WaveNumberSq{1.0, 2.0, 5.0, 5.0, 9.0};

enum class Ns5Variant
{
    /// Second triad exactly as printed: +4 u5 u5 in du2, +7 u5 u2 in du4.
    as_written,
    /// Second triad corrected to +4 u4 u5 in du2, -7 u2 u5 in du4, so energy and
    /// enstrophy are conserved by every triad.
    conserving,
};

[[nodiscard]] inline std::string_view to_string(Ns5Variant v) noexcept
{
    return v == Ns5Variant::as_written ? "as_written" : "conserving";
}

[[nodiscard]] inline Ns5Variant parse_ns5_variant(std::string_view s)
{
    if (s == "as_written")
        return Ns5Variant::as_written;
    if (s == "conserving")
        return Ns5Variant::conserving;
    throw InvalidArgument("unknown NS5 variant '" + std::string(s) + "'");
}

struct Ns5System
{
    double forcing = 33.0;
    Ns5Variant variant = Ns5Variant::conserving;
    /// Viscous damping -|k|^2 u; switched off for inviscid invariant checks.
    bool dissipative = true;

    static constexpr Eigen::Index dim = 5;

    template <typename In, typename Out>
    void operator()(double /*t*/, const In& u, Out& du) const
    {
        const double u1 = u[0], u2 = u[1], u3 = u[2], u4 = u[3], u5 = u[4];
        const double nu = dissipative ? 1.0 : 0.0;
        du[0] = 3.0 * u3 * u2 - nu * u1;
        du[2] = u1 * u2 - nu * 5.0 * u3;
        du[4] = 3.0 * u2 * u4 - nu * 9.0 * u5;
        if (variant == Ns5Variant::as_written) {
            du[1] = -4.0 * u3 * u1 + 4.0 * u5 * u5 - nu * 2.0 * u2;
            du[3] = 7.0 * u5 * u2 - nu * 5.0 * u4 + forcing;
        } else {
            du[1] = -4.0 * u3 * u1 + 4.0 * u4 * u5 - nu * 2.0 * u2;
            du[3] = -7.0 * u2 * u5 - nu * 5.0 * u4 + forcing;
        }
    }

    /// (0, 0, 0, F/5, 0): steady laminar state for either variant.
    [[nodiscard]] Eigen::VectorXd laminar_fixed_point() const
    {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(dim);
        u(3) = forcing / 5.0;
        return u;
    }
};

[[nodiscard]] inline Eigen::VectorXd ns5_rhs(const Eigen::Ref<const Eigen::VectorXd>& u, const Ns5System& sys)
{
    if (u.size() != Ns5System::dim)
        throw DimensionMismatch("NS5 state must have 5 components");
    Eigen::VectorXd du(Ns5System::dim);
    sys(0.0, u, du);
    return du;
}

struct Lorenz63System
{
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;

    static constexpr Eigen::Index dim = 3;

    template <typename In, typename Out>
    void operator()(double /*t*/, const In& s, Out& ds) const
    {
        ds[0] = sigma * (s[1] - s[0]);
        ds[1] = s[0] * (rho - s[2]) - s[1];
        ds[2] = s[0] * s[1] - beta * s[2];
    }
};

[[nodiscard]] inline Eigen::VectorXd lorenz_rhs(const Eigen::Ref<const Eigen::VectorXd>& s, const Lorenz63System& sys)
{
    if (s.size() != Lorenz63System::dim)
        throw DimensionMismatch("Lorenz-63 state must have 3 components");
    Eigen::VectorXd ds(Lorenz63System::dim);
    sys(0.0, s, ds);
    return ds;
}

/// E = 1/2 sum u_i^2
[[nodiscard]] inline double kinetic_energy(const Eigen::Ref<const Eigen::VectorXd>& u)
{
    if (u.size() != Ns5System::dim)
        throw DimensionMismatch("NS5 state must have 5 components");
    return 0.5 * u.squaredNorm();
}

/// Omega = 1/2 sum |k_i|^2 u_i^2
[[nodiscard]] inline double enstrophy(const Eigen::Ref<const Eigen::VectorXd>& u)
{
    if (u.size() != Ns5System::dim)
        throw DimensionMismatch("NS5 state must have 5 components");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < Ns5System::dim; ++i)
        acc += kNs5WaveNumberSq[static_cast<std::size_t>(i)] * u(i) * u(i);
    return 0.5 * acc;
}

} // namespace qrc::dynsys
