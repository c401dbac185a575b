#pragma once

// Exact state-vector simulation of the input-driven transverse-field Ising
// reservoir: Hamiltonian assembly, spectral time evolution and Pauli
// feature extraction.
//
// Basis convention: qubit 0 is the most significant bit of the amplitude
// index, so |q0 q1 ... q_{N-1}> sits at index sum_i q_i 2^{N-1-i}.

#include "qrc/error.hpp"
#include "qrc/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace qrc::qdyn {

using cplx = std::complex<double>;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kNormCheckTolerance = 1e-8;
inline constexpr double kHermiticityTolerance = 1e-8;
inline constexpr double kImaginaryTolerance = 1e-10;
inline constexpr int kMaxQubits = 14;

[[nodiscard]] constexpr Eigen::Index hilbert_dim(int n_qubits) noexcept
{
    return Eigen::Index{1} << n_qubits;
}

[[nodiscard]] constexpr std::uint32_t site_mask(int n_qubits, int site) noexcept
{
    return std::uint32_t{1} << (n_qubits - 1 - site);
}

/// Length of one measurement block: 3N single-site plus 3N(N-1)/2 pair terms.
[[nodiscard]] constexpr Eigen::Index feature_block_length(int n_qubits) noexcept
{
    return 3 * n_qubits + 3 * n_qubits * (n_qubits - 1) / 2;
}

[[nodiscard]] constexpr Eigen::Index feature_length(int n_qubits, Eigen::Index n_times) noexcept
{
    return n_times * feature_block_length(n_qubits);
}

struct HamiltonianSpec
{
    int n_qubits = 5;
    Eigen::MatrixXd couplings;      // N x N, symmetric, zero diagonal
    double transverse_field = 0.0;  // h
    Eigen::VectorXd input_scales;   // beta, length d
    Eigen::MatrixXd input_coupling; // C, N x d

    [[nodiscard]] Eigen::Index input_dim() const noexcept { return input_scales.size(); }

    /// beta_j = 1 and C_ij = delta_ij for j <= d.
    [[nodiscard]] static HamiltonianSpec standard(int n_qubits, Eigen::Index input_dim,
                                                  Eigen::MatrixXd couplings, double transverse_field)
    {
        HamiltonianSpec spec;
        spec.n_qubits = n_qubits;
        spec.couplings = std::move(couplings);
        spec.transverse_field = transverse_field;
        spec.input_scales = Eigen::VectorXd::Ones(input_dim);
        spec.input_coupling = Eigen::MatrixXd::Identity(n_qubits, input_dim);
        spec.validate();
        return spec;
    }

    void validate() const
    {
        if (n_qubits < 1 || n_qubits > kMaxQubits)
            throw InvalidArgument("n_qubits must lie in [1, " + std::to_string(kMaxQubits) + "]");
        if (input_scales.size() < 1)
            throw InvalidArgument("input dimension must be at least 1");
        if (couplings.rows() != n_qubits || couplings.cols() != n_qubits)
            throw DimensionMismatch("coupling matrix must be N x N");
        if (input_coupling.rows() != n_qubits || input_coupling.cols() != input_scales.size())
            throw DimensionMismatch("input coupling matrix must be N x d");
        for (int i = 0; i < n_qubits; ++i) {
            if (couplings(i, i) != 0.0)
                throw InvalidArgument("coupling matrix must have a zero diagonal");
            for (int j = i + 1; j < n_qubits; ++j)
                if (couplings(i, j) != couplings(j, i))
                    throw InvalidArgument("coupling matrix must be symmetric");
        }
    }
};

/// Normalized pure state on N qubits.
class StateVector
{
  public:
    StateVector() = default;

    explicit StateVector(Eigen::VectorXcd amplitudes) : amplitudes_(std::move(amplitudes))
    {
        const auto dim = amplitudes_.size();
        if (dim < 2 || (dim & (dim - 1)) != 0)
            throw DimensionMismatch("state dimension must be a power of two >= 2");
        if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance)
            throw InvalidArgument("state vector is not normalized");
    }

    [[nodiscard]] static StateVector basis(int n_qubits, Eigen::Index index)
    {
        Eigen::VectorXcd a = Eigen::VectorXcd::Zero(hilbert_dim(n_qubits));
        a(index) = 1.0;
        return StateVector(std::move(a));
    }

    /// |0...0>
    [[nodiscard]] static StateVector zero(int n_qubits) { return basis(n_qubits, 0); }

    [[nodiscard]] const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return amplitudes_.size(); }
    [[nodiscard]] int n_qubits() const noexcept
    {
        int n = 0;
        while ((Eigen::Index{1} << n) < dim())
            ++n;
        return n;
    }

  private:
    Eigen::VectorXcd amplitudes_;
};

struct EvolutionConfig
{
    std::vector<double> times;
    StateVector initial_state;

    void validate() const
    {
        if (times.empty())
            throw InvalidArgument("at least one evolution time is required");
        for (double t : times)
            if (!(t >= 0.0) || !std::isfinite(t))
                throw InvalidArgument("evolution times must be finite and non-negative");
        if (initial_state.dim() == 0)
            throw InvalidArgument("initial state is empty");
    }
};

/// Couplings J_ij ~ U[-j_max, j_max] on the strict upper triangle, mirrored.
[[nodiscard]] inline Eigen::MatrixXd sample_couplings(int n_qubits, double j_max, std::uint64_t seed)
{
    if (!(j_max >= 0.0))
        throw InvalidArgument("coupling scale must be non-negative");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n_qubits, n_qubits);
    Rng rng(seed);
    for (int a = 0; a < n_qubits; ++a)
        for (int b = a + 1; b < n_qubits; ++b) {
            const double v = rng.uniform(-j_max, j_max);
            j(a, b) = v;
            j(b, a) = v;
        }
    return j;
}

/// Per-site longitudinal fields h^i = sum_j beta_j C_ij s_j.
[[nodiscard]] inline Eigen::VectorXd input_fields(const HamiltonianSpec& spec,
                                                  const Eigen::Ref<const Eigen::VectorXd>& input)
{
    if (input.size() != spec.input_dim())
        throw DimensionMismatch("input length " + std::to_string(input.size()) +
                                " does not match spec dimension " + std::to_string(spec.input_dim()));
    return spec.input_coupling * spec.input_scales.cwiseProduct(input);
}

/// H = sum_{i<j} J_ij X_i X_j + h sum_i Z_i + sum_i h^i X_i.
/// Every term is real in the computational basis, so H is real symmetric.
[[nodiscard]] inline Eigen::MatrixXd build_hamiltonian(const HamiltonianSpec& spec,
                                                       const Eigen::Ref<const Eigen::VectorXd>& input)
{
    const Eigen::VectorXd fields = input_fields(spec, input);
    const int n = spec.n_qubits;
    const auto dim = hilbert_dim(n);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);

    for (Eigen::Index b = 0; b < dim; ++b) {
        const auto ub = static_cast<std::uint32_t>(b);
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto mi = site_mask(n, i);
            diag += (ub & mi) ? -spec.transverse_field : spec.transverse_field;
            h(b ^ mi, b) += fields(i);
            for (int j = i + 1; j < n; ++j)
                h(b ^ mi ^ site_mask(n, j), b) += spec.couplings(i, j);
        }
        h(b, b) = diag;
    }
    return h;
}

/// Spectral decomposition H = V diag(E) V^dagger, reused for any number of
/// evolution times under the same Hamiltonian.
template <typename Scalar>
class Propagator
{
  public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    explicit Propagator(const Matrix& h)
    {
        if (h.rows() != h.cols())
            throw DimensionMismatch("Hamiltonian must be square");
        const double residual = (h - h.adjoint()).cwiseAbs().maxCoeff();
        if (residual > kHermiticityTolerance)
            throw InvalidArgument("Hamiltonian is not Hermitian (residual " + std::to_string(residual) + ")");
        Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("Hermitian eigendecomposition failed");
        energies_ = solver.eigenvalues();
        vectors_ = solver.eigenvectors();
    }

    [[nodiscard]] Eigen::Index dim() const noexcept { return energies_.size(); }
    [[nodiscard]] const Eigen::VectorXd& energies() const noexcept { return energies_; }

    /// Coefficients of psi0 in the eigenbasis; pass to evolve_coefficients to
    /// avoid recomputing them for every time.
    [[nodiscard]] Eigen::VectorXcd project(const StateVector& psi0) const
    {
        if (psi0.dim() != dim())
            throw DimensionMismatch("state dimension does not match Hamiltonian");
        if constexpr (std::is_same_v<Scalar, double>) {
            const Eigen::VectorXd re = vectors_.transpose() * psi0.amplitudes().real();
            const Eigen::VectorXd im = vectors_.transpose() * psi0.amplitudes().imag();
            Eigen::VectorXcd out(dim());
            out.real() = re;
            out.imag() = im;
            return out;
        } else {
            return vectors_.adjoint() * psi0.amplitudes();
        }
    }

    [[nodiscard]] Eigen::VectorXcd evolve_coefficients(const Eigen::VectorXcd& coeffs, double dt) const
    {
        Eigen::VectorXcd phased(coeffs.size());
        for (Eigen::Index k = 0; k < coeffs.size(); ++k)
            phased(k) = std::polar(1.0, -energies_(k) * dt) * coeffs(k);
        if constexpr (std::is_same_v<Scalar, double>) {
            Eigen::VectorXcd out(dim());
            out.real() = vectors_ * phased.real();
            out.imag() = vectors_ * phased.imag();
            return out;
        } else {
            return vectors_ * phased;
        }
    }

    /// exp(-i H dt) |psi0>
    [[nodiscard]] StateVector evolve(const StateVector& psi0, double dt) const
    {
        if (!(dt >= 0.0))
            throw InvalidArgument("evolution time must be non-negative");
        if (dt == 0.0)
            return psi0;
        return StateVector(evolve_coefficients(project(psi0), dt));
    }

  private:
    Eigen::VectorXd energies_;
    Matrix vectors_;
};

template <typename Derived>
[[nodiscard]] StateVector evolve(const Eigen::MatrixBase<Derived>& h, const StateVector& psi0, double dt)
{
    using Scalar = typename Derived::Scalar;
    if (!(dt >= 0.0))
        throw InvalidArgument("evolution time must be non-negative");
    Propagator<Scalar> prop(h.eval());
    return prop.evolve(psi0, dt);
}

namespace detail {

inline void check_real(cplx value)
{
    if (std::abs(value.imag()) > kImaginaryTolerance)
        throw std::runtime_error("Pauli expectation has a non-negligible imaginary part");
}

/// Writes one measurement block for `amps` into `out` (length feature_block_length).
inline void measure_into(const Eigen::VectorXcd& amps, int n, std::span<double> out)
{
    const auto dim = amps.size();
    const auto at = [&](std::uint32_t b) { return amps(static_cast<Eigen::Index>(b)); };
    std::size_t pos = 0;

    // Single-site <X_i>, <Y_i>, <Z_i>.
    for (int axis = 0; axis < 3; ++axis)
        for (int i = 0; i < n; ++i) {
            const auto mi = site_mask(n, i);
            cplx acc = 0.0;
            for (std::uint32_t b = 0; b < dim; ++b) {
                const bool one = (b & mi) != 0;
                switch (axis) {
                case 0: acc += std::conj(at(b ^ mi)) * at(b); break;
                case 1: acc += std::conj(at(b ^ mi)) * at(b) * (one ? cplx(0, -1) : cplx(0, 1)); break;
                default: acc += std::norm(at(b)) * (one ? -1.0 : 1.0); break;
                }
            }
            check_real(acc);
            out[pos++] = acc.real();
        }

    // Pair <A_i A_j>, i < j, same axis.
    for (int axis = 0; axis < 3; ++axis)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const auto mi = site_mask(n, i);
                const auto mj = site_mask(n, j);
                const auto mij = mi | mj;
                cplx acc = 0.0;
                for (std::uint32_t b = 0; b < dim; ++b) {
                    const bool same = ((b & mi) != 0) == ((b & mj) != 0);
                    switch (axis) {
                    case 0: acc += std::conj(at(b ^ mij)) * at(b); break;
                    case 1: acc += std::conj(at(b ^ mij)) * at(b) * (same ? -1.0 : 1.0); break;
                    default: acc += std::norm(at(b)) * (same ? 1.0 : -1.0); break;
                    }
                }
                check_real(acc);
                out[pos++] = acc.real();
            }
}

} // namespace detail

/// Single-site and same-axis pair Pauli expectations of `psi`.
/// Layout: [X_1..X_N, Y_1..Y_N, Z_1..Z_N, XX_(i<j), YY_(i<j), ZZ_(i<j)].
[[nodiscard]] inline Eigen::VectorXd measure_features(const StateVector& psi)
{
    const auto& a = psi.amplitudes();
    if (std::abs(a.norm() - 1.0) > kNormCheckTolerance)
        throw InvalidArgument("state is not normalized");
    const int n = psi.n_qubits();
    Eigen::VectorXd out(feature_block_length(n));
    detail::measure_into(a, n, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

/// Evolves |psi0> for each configured time (each restarting from psi0) under
/// H(input) and concatenates the measurement blocks in order.
[[nodiscard]] inline Eigen::VectorXd multiplex_features(const HamiltonianSpec& spec,
                                                        const Eigen::Ref<const Eigen::VectorXd>& input,
                                                        const EvolutionConfig& cfg)
{
    cfg.validate();
    if (cfg.initial_state.dim() != hilbert_dim(spec.n_qubits))
        throw DimensionMismatch("initial state does not match qubit count");
    const Propagator<double> prop(build_hamiltonian(spec, input));
    const Eigen::VectorXcd coeffs = prop.project(cfg.initial_state);
    const auto block = feature_block_length(spec.n_qubits);
    Eigen::VectorXd out(feature_length(spec.n_qubits, static_cast<Eigen::Index>(cfg.times.size())));
    for (std::size_t l = 0; l < cfg.times.size(); ++l) {
        const double dt = cfg.times[l];
        const Eigen::VectorXcd amps =
            dt == 0.0 ? cfg.initial_state.amplitudes() : prop.evolve_coefficients(coeffs, dt);
        if (std::abs(amps.norm() - 1.0) > kNormCheckTolerance)
            throw std::runtime_error("evolution lost normalization");
        detail::measure_into(amps, spec.n_qubits,
                             std::span<double>(out.data() + static_cast<Eigen::Index>(l) * block,
                                               static_cast<std::size_t>(block)));
    }
    return out;
}

} // namespace qrc::qdyn
