#include "twinwatch/kalman.hpp"

#include <nlohmann/json.hpp>

namespace twinwatch {

PredictedState predict(const FilterState& prev, const LinearDiscreteSystem& sys,
                       const Vector& u) {
    if (prev.mean.size() != sys.state_dim())
        throw std::invalid_argument("predict: state dimension mismatch");
    if (u.size() != sys.input_dim())
        throw std::invalid_argument("predict: input dimension mismatch");
    Vector mean = sys.B * u + sys.A * prev.mean;
    Matrix cov = sys.R + sys.A * prev.covariance * sys.A.transpose();
    cov = 0.5 * (cov + cov.transpose());
    return {std::move(mean), std::move(cov)};
}

Matrix gain(const PredictedState& pred, const LinearDiscreteSystem& sys) {
    const Matrix cross = pred.covariance * sys.C.transpose();  // Sigma_bar C^T
    Matrix s = sys.Q + sys.C * cross;
    s = 0.5 * (s + s.transpose());
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("gain: innovation covariance is singular");
    // K = cross S^-1  <=>  S K^T = cross^T
    return llt.solve(cross.transpose()).transpose();
}

UpdateResult update(const PredictedState& pred, const LinearDiscreteSystem& sys,
                    const Vector& y) {
    if (y.size() != sys.output_dim())
        throw std::invalid_argument("update: measurement dimension mismatch");
    const Matrix k = gain(pred, sys);
    const Vector innovation = y - sys.C * pred.mean;
    Matrix s = sys.Q + sys.C * pred.covariance * sys.C.transpose();
    s = 0.5 * (s + s.transpose());

    Vector mean = pred.mean + k * innovation;
    const Eigen::Index n = sys.state_dim();
    Matrix cov = (Matrix::Identity(n, n) - k * sys.C) * pred.covariance;
    cov = 0.5 * (cov + cov.transpose());
    return {FilterState{std::move(mean), std::move(cov), 0}, k, innovation, s};
}

StepResult kf_step(const FilterState& prev, const LinearDiscreteSystem& sys,
                   const Vector& u, const std::optional<Vector>& y) {
    PredictedState pred = predict(prev, sys, u);
    if (!y)
        return {FilterState{std::move(pred.mean), std::move(pred.covariance), prev.step + 1},
                std::nullopt};
    UpdateResult res = update(pred, sys, *y);
    res.posterior.step = prev.step + 1;
    return {res.posterior, std::move(res)};
}

std::string filter_state_to_json(const FilterState& fs) {
    nlohmann::json j;
    j["mean"] = std::vector<double>(fs.mean.data(), fs.mean.data() + fs.mean.size());
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index i = 0; i < fs.covariance.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < fs.covariance.cols(); ++c)
            row.push_back(fs.covariance(i, c));
        cov.push_back(std::move(row));
    }
    j["cov"] = std::move(cov);
    j["step"] = fs.step;
    return j.dump();
}

FilterState filter_state_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const auto& mean_j = j.at("mean");
    Vector mean(mean_j.size());
    for (std::size_t i = 0; i < mean_j.size(); ++i) mean(i) = mean_j[i].get<double>();
    const auto& cov_j = j.at("cov");
    Matrix cov(cov_j.size(), cov_j.empty() ? 0 : cov_j[0].size());
    for (std::size_t i = 0; i < cov_j.size(); ++i)
        for (std::size_t c = 0; c < cov_j[i].size(); ++c) cov(i, c) = cov_j[i][c].get<double>();
    return {std::move(mean), std::move(cov), j.at("step").get<int>()};
}

}  // namespace twinwatch
