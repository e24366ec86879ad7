#include "twinwatch/matgauss.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace twinwatch {

Matrix symmetrize_checked(const Matrix& m, double tol) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("symmetrize_checked: matrix is not square");
    const double scale = std::max(m.norm(), 1.0);
    if ((m - m.transpose()).norm() > tol * scale)
        throw std::invalid_argument("symmetrize_checked: matrix is not symmetric within tolerance");
    return 0.5 * (m + m.transpose());
}

Gaussian::Gaussian(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), cov_(symmetrize_checked(std::move(covariance))) {
    if (cov_.rows() != mean_.size())
        throw std::invalid_argument("Gaussian: covariance dimension does not match mean");
    if (mean_.size() < 1) throw std::invalid_argument("Gaussian: empty mean");
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov_, Eigen::EigenvaluesOnly);
    const double floor = -kSymmetryTol * std::max(cov_.norm(), 1.0);
    if (es.eigenvalues().minCoeff() < floor)
        throw std::invalid_argument("Gaussian: covariance is not positive semi-definite");
}

Matrix spd_factor(const Matrix& m) {
    const Matrix sym = symmetrize_checked(m);
    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("spd_factor: matrix is not positive definite");
    return llt.matrixL();
}

double mvn_logpdf(const Vector& x, const Gaussian& g) {
    if (x.size() != g.dim())
        throw std::invalid_argument("mvn_logpdf: dimension mismatch");
    const Matrix L = spd_factor(g.covariance());
    // ln N(x) = -1/2 (n ln 2pi + ln|Sigma| + r^T Sigma^-1 r), via w = L^-1 r.
    const Vector w = L.triangularView<Eigen::Lower>().solve(x - g.mean());
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    const double n = static_cast<double>(g.dim());
    return -0.5 * (n * std::log(2.0 * M_PI) + log_det + w.squaredNorm());
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t k, std::uint64_t channel) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ k) ^ channel);
}

Vector mvn_sample(const Gaussian& g, std::uint64_t seed) {
    // PSD factor via pivoted LDLT so singular covariances (incl. zero) work.
    Eigen::LDLT<Matrix> ldlt(g.covariance());
    if (ldlt.info() != Eigen::Success)
        throw std::invalid_argument("mvn_sample: covariance is not factorizable as PSD");
    Vector d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        d(i) = d(i) > 0.0 ? std::sqrt(d(i)) : 0.0;
    Matrix factor = ldlt.transpositionsP().transpose() *
                    Matrix(Matrix(ldlt.matrixL()) * d.asDiagonal());

    std::mt19937_64 rng(substream_seed(seed, 0x7477ULL, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(g.dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return g.mean() + factor * z;
}

}  // namespace twinwatch
