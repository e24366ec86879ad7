#pragma once

#include <vector>

#include "twinwatch/statespace.hpp"

namespace twinwatch {

/// Open-loop propagation of the belief mean through the deterministic
/// dynamics; for a linear system the mean evolves independently of the
/// covariance. Returns the mean trajectory over the given inputs.
std::vector<Vector> propagate_mean_openloop(const Gaussian& x0_belief,
                                            const LinearDiscreteSystem& sys,
                                            const std::vector<Vector>& inputs);

struct BacksolveResult {
    Vector x0;
    Vector x1;
};

/// Noise-free algebraic recovery of the hidden heater temperature from a
/// single measurement, for a 2-state system with C = [0 1]:
///   T_h0 = (y1 - A22 T_b0 - B21 u1[0] - B22 u1[1]) / A21.
/// Throws when |A21| is too small (hidden state unobservable through one
/// step).
BacksolveResult backsolve_hidden_state(const LinearDiscreteSystem& sys, double t_b0,
                                       const Vector& u1, double y1);

struct BatchMapResult {
    std::vector<Vector> map_trajectory;  // x_0 .. x_k
    Gaussian final;                      // marginal of x_k
};

/// Batch MAP over the full state sequence x_{0:k}: maximizes the joint
/// Gaussian log-posterior
///   ln N(x0; prior) + sum_k [ln N(x_k; A x_{k-1} + B u_k, R)
///                            + ln N(y_k; C x_k, Q)]
/// by solving the block-tridiagonal normal equations of this quadratic.
/// The final covariance is the corresponding marginal block of the
/// inverse Hessian. Requires SPD R and Q.
BatchMapResult batch_map_oracle(const LinearDiscreteSystem& sys, const Gaussian& prior,
                                const std::vector<Vector>& inputs,
                                const std::vector<Vector>& measurements);

}  // namespace twinwatch
