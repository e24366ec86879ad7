#pragma once

#include <functional>
#include <random>

#include <Eigen/Eigenvalues>

#include "twinwatch/statespace.hpp"

namespace twtest {

using twinwatch::Matrix;
using twinwatch::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

inline Matrix random_spd(std::mt19937_64& rng, int n, double ridge = 0.1) {
    const Matrix a = random_matrix(rng, n, n);
    return a * a.transpose() + ridge * Matrix::Identity(n, n);
}

inline double spectral_radius(const Matrix& a) {
    return a.eigenvalues().cwiseAbs().maxCoeff();
}

/// Random system with spectral radius capped below 1 so long runs stay bounded.
inline twinwatch::LinearDiscreteSystem random_system(std::mt19937_64& rng, int n, int m,
                                                    int p) {
    twinwatch::LinearDiscreteSystem sys;
    sys.A = random_matrix(rng, n, n);
    const double rho = spectral_radius(sys.A);
    if (rho > 0.95) sys.A *= 0.95 / rho;
    sys.B = random_matrix(rng, n, m);
    sys.C = random_matrix(rng, p, n);
    sys.R = random_spd(rng, n, 0.05);
    sys.Q = random_spd(rng, p, 0.05);
    sys.dt = 1.0;
    return sys;
}

inline double rel_err(const Matrix& got, const Matrix& want) {
    const double denom = std::max(want.norm(), 1e-300);
    return (got - want).norm() / denom;
}

inline double rel_err(const Vector& got, const Vector& want) {
    const double denom = std::max(want.norm(), 1e-300);
    return (got - want).norm() / denom;
}

/// Classic RK4 over dx/dt = f(t, x); independent oracle for discretization.
inline Vector rk4_integrate(const std::function<Vector(double, const Vector&)>& f,
                            Vector x, double t0, double t1, int substeps) {
    const double h = (t1 - t0) / substeps;
    double t = t0;
    for (int i = 0; i < substeps; ++i) {
        const Vector k1 = f(t, x);
        const Vector k2 = f(t + h / 2, x + (h / 2) * k1);
        const Vector k3 = f(t + h / 2, x + (h / 2) * k2);
        const Vector k4 = f(t + h, x + h * k3);
        x += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
    }
    return x;
}

}  // namespace twtest
