#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/Cholesky>

namespace twinwatch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance used when deciding whether a matrix counts as symmetric.
inline constexpr double kSymmetryTol = 1e-9;

/// Multivariate Gaussian belief: mean vector plus covariance matrix.
///
/// The covariance must be symmetric within kSymmetryTol (relative to its
/// norm) and positive semi-definite; it is symmetrized on construction so
/// downstream factorizations see an exactly symmetric matrix.
class Gaussian {
public:
    Gaussian(Vector mean, Matrix covariance);

    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return cov_; }
    Eigen::Index dim() const { return mean_.size(); }

private:
    Vector mean_;
    Matrix cov_;
};

/// Cholesky factor L with L*L^T = m. Throws std::invalid_argument if m is
/// not symmetric within tolerance or not positive definite.
Matrix spd_factor(const Matrix& m);

/// Log-density ln N(x; mean, covariance), evaluated through the Cholesky
/// factor of the covariance (no explicit determinant or inverse).
double mvn_logpdf(const Vector& x, const Gaussian& g);

/// Deterministic sample mean + L*z with z ~ N(0, I) drawn from a PRNG
/// seeded by `seed`. A PSD (possibly singular) covariance is allowed; the
/// factor then comes from a pivoted decomposition with zeroed null modes.
Vector mvn_sample(const Gaussian& g, std::uint64_t seed);

/// (m + m^T)/2 after checking symmetry within tol * ||m||.
Matrix symmetrize_checked(const Matrix& m, double tol = kSymmetryTol);

/// Mixes independent stream coordinates into a single 64-bit seed
/// (splitmix64-style), so sub-streams (seed, k, channel) never collide
/// for distinct inputs in practice.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t k, std::uint64_t channel);

}  // namespace twinwatch
