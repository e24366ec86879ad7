#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twinwatch/matgauss.hpp"

namespace twinwatch {

/// x_k = A x_{k-1} + B u_k + eps,  y_k = C x_k + delta,
/// eps ~ N(0, R), delta ~ N(0, Q). Noise covariances are time-invariant.
struct LinearDiscreteSystem {
    Matrix A;   // n x n
    Matrix B;   // n x m
    Matrix C;   // p x n
    Matrix R;   // n x n process noise covariance
    Matrix Q;   // p x p measurement noise covariance
    double dt = 1.0;  // seconds per step

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index input_dim() const { return B.cols(); }
    Eigen::Index output_dim() const { return C.rows(); }

    /// Throws std::invalid_argument on non-conformable dimensions,
    /// non-PSD noise, or dt <= 0.
    void validate() const;
};

struct ContinuousLTI {
    Matrix A_c;  // n x n
    Matrix B_c;  // n x m
};

struct TrajectoryPoint {
    int step = 0;  // 1-based
    Vector state;
    Vector input;
    Vector measurement;
};

using Trajectory = std::vector<TrajectoryPoint>;

enum class DiscretizeMethod { Exact, Euler };

/// Deterministic state transition A x + B u.
Vector step(const LinearDiscreteSystem& sys, const Vector& x_prev, const Vector& u);

/// Measurement map C x.
Vector measure(const LinearDiscreteSystem& sys, const Vector& x);

struct NoisyStep {
    Vector x_next;
    Vector y;
};

/// One noisy transition and measurement. Process noise uses sub-stream
/// (seed, k, 0), measurement noise (seed, k, 1), so results do not depend
/// on evaluation order.
NoisyStep step_noisy(const LinearDiscreteSystem& sys, const Vector& x_prev,
                     const Vector& u, std::uint64_t seed, std::uint64_t k);

struct DiscretizedPair {
    Matrix A;
    Matrix B;
};

/// Zero-order-hold discretization. Exact uses the augmented-matrix
/// exponential exp([[A_c, B_c],[0, 0]] dt) (scaling-and-squaring Pade, via
/// Eigen's MatrixFunctions), which needs no invertibility of A_c.
/// Euler is the first-order approximation A = I + A_c dt, B = B_c dt.
DiscretizedPair discretize(const ContinuousLTI& c, double dt, DiscretizeMethod method);

/// Iterates step (noise-free) or step_noisy (seeded) from x0.
/// Trajectory length equals inputs.size(); step indices run from 1.
Trajectory simulate(const LinearDiscreteSystem& sys, const Vector& x0,
                    const std::vector<Vector>& inputs,
                    std::optional<std::uint64_t> seed = std::nullopt);

/// JSON document with keys {"A","B","C","R","Q","dt"}; matrices are arrays
/// of row arrays. Round-trips exactly for 64-bit float values.
std::string system_to_json(const LinearDiscreteSystem& sys);
LinearDiscreteSystem system_from_json(const std::string& text);

}  // namespace twinwatch
