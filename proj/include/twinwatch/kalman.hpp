#pragma once

#include <optional>
#include <string>

#include "twinwatch/statespace.hpp"

namespace twinwatch {

/// Posterior belief after step k.
struct FilterState {
    Vector mean;        // mu_k
    Matrix covariance;  // Sigma_k, symmetric PSD
    int step = 0;
};

/// Prior belief propagated through the dynamics, before seeing y_k.
struct PredictedState {
    Vector mean;        // mu_bar
    Matrix covariance;  // Sigma_bar
};

struct UpdateResult {
    FilterState posterior;
    Matrix gain;                    // K_k, n x p
    Vector innovation;              // y_k - C mu_bar
    Matrix innovation_covariance;   // S_k = Q + C Sigma_bar C^T
};

/// Prediction phase: mu_bar = B u + A mu, Sigma_bar = R + A Sigma A^T
/// (symmetrized).
PredictedState predict(const FilterState& prev, const LinearDiscreteSystem& sys,
                       const Vector& u);

/// K = Sigma_bar C^T (Q + C Sigma_bar C^T)^-1, obtained by solving the
/// S K^T system rather than forming S^-1.
Matrix gain(const PredictedState& pred, const LinearDiscreteSystem& sys);

/// Measurement phase: mu = mu_bar + K (y - C mu_bar), Sigma = (I - K C)
/// Sigma_bar, symmetrized. Step index in the result is left at 0; kf_step
/// assigns it.
UpdateResult update(const PredictedState& pred, const LinearDiscreteSystem& sys,
                    const Vector& y);

struct StepResult {
    FilterState state;
    std::optional<UpdateResult> update;  // absent for predict-only steps
};

/// Full recursion: predict, then update when a measurement is present.
/// Without y the prediction itself becomes the posterior.
StepResult kf_step(const FilterState& prev, const LinearDiscreteSystem& sys,
                   const Vector& u, const std::optional<Vector>& y);

/// Checkpoint format {"mean":[...], "cov":[[...]], "step":k}.
std::string filter_state_to_json(const FilterState& fs);
FilterState filter_state_from_json(const std::string& text);

}  // namespace twinwatch
