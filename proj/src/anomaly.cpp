#include "twinwatch/anomaly.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace twinwatch {

void DetectorConfig::validate() const {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("detector config: confidence must be in (0, 1)");
    if (window_m < 1 || window_m > window_n)
        throw std::invalid_argument("detector config: need 1 <= window_m <= window_n");
    if (recovery_n < 1)
        throw std::invalid_argument("detector config: recovery_n must be >= 1");
}

double nis(const UpdateResult& u) {
    Eigen::LLT<Matrix> llt(u.innovation_covariance);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("nis: innovation covariance is singular");
    return u.innovation.dot(llt.solve(u.innovation));
}

namespace {

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) = 1 - P(a, x), valid for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be positive");
    if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_contfrac(a, x);
}

double chi2_quantile(double prob, int dof) {
    if (!(prob > 0.0 && prob < 1.0))
        throw std::invalid_argument("chi2_quantile: probability must be in (0, 1)");
    if (dof < 1) throw std::invalid_argument("chi2_quantile: dof must be >= 1");
    const double a = dof / 2.0;
    // chi2 CDF(x) = P(dof/2, x/2); bracket then bisect.
    double lo = 0.0, hi = 1.0;
    while (regularized_gamma_p(a, hi / 2.0) < prob) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (regularized_gamma_p(a, mid / 2.0) < prob)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

NisDetector::NisDetector(const DetectorConfig& cfg, int measurement_dim)
    : cfg_(cfg),
      threshold_(chi2_quantile(cfg.confidence, measurement_dim)),
      window_(static_cast<std::size_t>(cfg.window_n), 0.0) {
    cfg.validate();
}

std::optional<AnomalyEvent> NisDetector::feed(int step, double value) {
    const bool exceeds = value > threshold_;
    window_[window_pos_] = value;
    window_pos_ = (window_pos_ + 1) % window_.size();
    if (window_fill_ < window_.size()) ++window_fill_;

    if (!open_) {
        int count = 0;
        double peak = value;
        for (std::size_t i = 0; i < window_fill_; ++i) {
            if (window_[i] > threshold_) {
                ++count;
                peak = std::max(peak, window_[i]);
            }
        }
        if (count >= cfg_.window_m) {
            open_ = AnomalyEvent{step, std::nullopt, peak, threshold_};
            in_bound_streak_ = 0;
        }
        return std::nullopt;
    }

    open_->peak_statistic = std::max(open_->peak_statistic, value);
    if (exceeds) {
        in_bound_streak_ = 0;
        return std::nullopt;
    }
    if (++in_bound_streak_ >= cfg_.recovery_n) {
        AnomalyEvent done = *open_;
        done.end_step = step;
        open_.reset();
        in_bound_streak_ = 0;
        std::fill(window_.begin(), window_.end(), 0.0);
        window_fill_ = 0;
        window_pos_ = 0;
        return done;
    }
    return std::nullopt;
}

std::vector<AnomalyEvent> detect(const std::vector<std::pair<int, double>>& nis_stream,
                                 int measurement_dim, const DetectorConfig& cfg) {
    cfg.validate();
    NisDetector det(cfg, measurement_dim);
    std::vector<AnomalyEvent> events;
    for (const auto& [step, value] : nis_stream)
        if (auto closed = det.feed(step, value)) events.push_back(*closed);
    if (det.open_event()) events.push_back(*det.open_event());
    return events;
}

std::string anomaly_event_to_json(const AnomalyEvent& e) {
    nlohmann::json j;
    j["start"] = e.start_step;
    if (e.end_step)
        j["end"] = *e.end_step;
    else
        j["end"] = nullptr;
    j["peak"] = e.peak_statistic;
    j["threshold"] = e.threshold;
    return j.dump();
}

}  // namespace twinwatch
