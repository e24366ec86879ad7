#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twinwatch/kalman.hpp"

namespace twinwatch {

/// M-of-N persistence detector over the NIS stream. An event opens when
/// at least window_m of the last window_n values exceed the chi-square
/// threshold, and closes after recovery_n consecutive in-bound values.
struct DetectorConfig {
    double confidence = 0.99;
    int window_m = 3;
    int window_n = 5;
    int recovery_n = 5;

    void validate() const;
};

struct AnomalyEvent {
    int start_step = 0;
    std::optional<int> end_step;  // absent while the event is still open
    double peak_statistic = 0.0;
    double threshold = 0.0;
};

/// Normalized innovation squared nu^T S^-1 nu; chi-square distributed
/// with p degrees of freedom when the filter model matches the plant.
double nis(const UpdateResult& u);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// Chi-square quantile for `dof` degrees of freedom at probability prob,
/// inverted from the regularized incomplete gamma by bisection.
double chi2_quantile(double prob, int dof);

/// Resumable automaton state for streaming detection.
class NisDetector {
public:
    NisDetector(const DetectorConfig& cfg, int measurement_dim);

    /// Feed one (step, nis) sample; returns an event when one closes.
    std::optional<AnomalyEvent> feed(int step, double value);

    /// The event currently open, if any.
    const std::optional<AnomalyEvent>& open_event() const { return open_; }
    double threshold() const { return threshold_; }

private:
    DetectorConfig cfg_;
    double threshold_;
    std::vector<double> window_;  // ring of the last window_n values
    std::size_t window_pos_ = 0;
    std::size_t window_fill_ = 0;
    int in_bound_streak_ = 0;
    std::optional<AnomalyEvent> open_;
};

/// Batch detection over an ordered (step, value) stream. Returns closed
/// events plus a trailing open one if the stream ends mid-event.
std::vector<AnomalyEvent> detect(const std::vector<std::pair<int, double>>& nis_stream,
                                 int measurement_dim, const DetectorConfig& cfg);

/// One JSON line: {"start":k,"end":k|null,"peak":v,"threshold":t}.
std::string anomaly_event_to_json(const AnomalyEvent& e);

}  // namespace twinwatch
