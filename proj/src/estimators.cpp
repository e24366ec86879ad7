#include "twinwatch/estimators.hpp"

#include <cmath>

#include <Eigen/LU>

namespace twinwatch {

std::vector<Vector> propagate_mean_openloop(const Gaussian& x0_belief,
                                            const LinearDiscreteSystem& sys,
                                            const std::vector<Vector>& inputs) {
    if (x0_belief.dim() != sys.state_dim())
        throw std::invalid_argument("propagate_mean_openloop: belief dimension mismatch");
    std::vector<Vector> means;
    means.reserve(inputs.size());
    Vector x = x0_belief.mean();
    for (const Vector& u : inputs) {
        x = step(sys, x, u);
        means.push_back(x);
    }
    return means;
}

BacksolveResult backsolve_hidden_state(const LinearDiscreteSystem& sys, double t_b0,
                                       const Vector& u1, double y1) {
    if (sys.state_dim() != 2 || sys.input_dim() != 2)
        throw std::invalid_argument("backsolve_hidden_state: expects a 2-state, 2-input system");
    if (sys.C.rows() != 1 || sys.C(0, 0) != 0.0 || sys.C(0, 1) != 1.0)
        throw std::invalid_argument("backsolve_hidden_state: expects C = [0 1]");
    const double a21 = sys.A(1, 0);
    if (std::abs(a21) <= 1e-12)
        throw std::invalid_argument(
            "backsolve_hidden_state: A21 = 0, hidden state unobservable through one measurement");
    const double t_h0 =
        (y1 - sys.A(1, 1) * t_b0 - sys.B(1, 0) * u1(0) - sys.B(1, 1) * u1(1)) / a21;
    Vector x0(2);
    x0 << t_h0, t_b0;
    return {x0, step(sys, x0, u1)};
}

BatchMapResult batch_map_oracle(const LinearDiscreteSystem& sys, const Gaussian& prior,
                                const std::vector<Vector>& inputs,
                                const std::vector<Vector>& measurements) {
    const Eigen::Index n = sys.state_dim();
    const std::size_t horizon = inputs.size();
    if (horizon < 1)
        throw std::invalid_argument("batch_map_oracle: horizon must be >= 1");
    if (measurements.size() != horizon)
        throw std::invalid_argument("batch_map_oracle: inputs/measurements length mismatch");
    if (prior.dim() != n)
        throw std::invalid_argument("batch_map_oracle: prior dimension mismatch");

    // Information matrices. SPD is required here even though the filter
    // itself tolerates PSD R.
    const Matrix r_inv = sys.R.llt().solve(Matrix::Identity(n, n));
    const Matrix q_inv =
        sys.Q.llt().solve(Matrix::Identity(sys.output_dim(), sys.output_dim()));
    const Matrix p0_inv = prior.covariance().llt().solve(Matrix::Identity(n, n));

    const Eigen::Index dim = static_cast<Eigen::Index>(horizon + 1) * n;
    Matrix hessian = Matrix::Zero(dim, dim);
    Vector rhs = Vector::Zero(dim);

    hessian.topLeftCorner(n, n) += p0_inv;
    rhs.head(n) += p0_inv * prior.mean();

    const Matrix at_rinv = sys.A.transpose() * r_inv;
    const Matrix ct_qinv = sys.C.transpose() * q_inv;
    for (std::size_t k = 0; k < horizon; ++k) {
        const Eigen::Index i = static_cast<Eigen::Index>(k) * n;       // block of x_{k}
        const Eigen::Index j = static_cast<Eigen::Index>(k + 1) * n;   // block of x_{k+1}
        const Vector bu = sys.B * inputs[k];
        // Dynamics residual x_{k+1} - A x_k - B u_{k+1}.
        hessian.block(i, i, n, n) += at_rinv * sys.A;
        hessian.block(i, j, n, n) -= at_rinv;
        hessian.block(j, i, n, n) -= at_rinv.transpose();
        hessian.block(j, j, n, n) += r_inv;
        rhs.segment(i, n) -= at_rinv * bu;
        rhs.segment(j, n) += r_inv * bu;
        // Measurement residual y_{k+1} - C x_{k+1}.
        hessian.block(j, j, n, n) += ct_qinv * sys.C;
        rhs.segment(j, n) += ct_qinv * measurements[k];
    }

    Eigen::LDLT<Matrix> solver(hessian);
    if (solver.info() != Eigen::Success)
        throw std::invalid_argument("batch_map_oracle: singular normal equations");
    const Vector solution = solver.solve(rhs);

    // Final marginal covariance: bottom-right block of the inverse Hessian.
    Matrix tail_selector = Matrix::Zero(dim, n);
    tail_selector.bottomRows(n) = Matrix::Identity(n, n);
    Matrix final_cov = (solver.solve(tail_selector)).bottomRows(n);
    final_cov = 0.5 * (final_cov + final_cov.transpose());

    BatchMapResult out{{}, Gaussian(solution.tail(n), final_cov)};
    out.map_trajectory.reserve(horizon + 1);
    for (std::size_t k = 0; k <= horizon; ++k)
        out.map_trajectory.push_back(solution.segment(static_cast<Eigen::Index>(k) * n, n));
    return out;
}

}  // namespace twinwatch
