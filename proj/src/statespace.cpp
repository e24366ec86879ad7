#include "twinwatch/statespace.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <nlohmann/json.hpp>

namespace twinwatch {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_psd(const Matrix& m, const char* name) {
    const Matrix sym = symmetrize_checked(m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kSymmetryTol * std::max(sym.norm(), 1.0))
        throw std::invalid_argument(std::string(name) + " is not positive semi-definite");
}

}  // namespace

void LinearDiscreteSystem::validate() const {
    const Eigen::Index n = A.rows(), m = B.cols(), p = C.rows();
    require(n >= 1 && A.cols() == n, "A must be square and non-empty");
    require(B.rows() == n, "B row count must match state dimension");
    require(C.cols() == n, "C column count must match state dimension");
    require(R.rows() == n && R.cols() == n, "R must be n x n");
    require(Q.rows() == p && Q.cols() == p, "Q must be p x p");
    require(m >= 0, "input dimension");
    require(dt > 0.0, "dt must be positive");
    check_psd(R, "R");
    check_psd(Q, "Q");
}

Vector step(const LinearDiscreteSystem& sys, const Vector& x_prev, const Vector& u) {
    require(x_prev.size() == sys.state_dim(), "step: state dimension mismatch");
    require(u.size() == sys.input_dim(), "step: input dimension mismatch");
    return sys.A * x_prev + sys.B * u;
}

Vector measure(const LinearDiscreteSystem& sys, const Vector& x) {
    require(x.size() == sys.state_dim(), "measure: state dimension mismatch");
    return sys.C * x;
}

NoisyStep step_noisy(const LinearDiscreteSystem& sys, const Vector& x_prev,
                     const Vector& u, std::uint64_t seed, std::uint64_t k) {
    Vector x_next = step(sys, x_prev, u);
    const Gaussian process_noise(Vector::Zero(sys.state_dim()), sys.R);
    const Gaussian measurement_noise(Vector::Zero(sys.output_dim()), sys.Q);
    x_next += mvn_sample(process_noise, substream_seed(seed, k, 0));
    Vector y = sys.C * x_next + mvn_sample(measurement_noise, substream_seed(seed, k, 1));
    return {std::move(x_next), std::move(y)};
}

DiscretizedPair discretize(const ContinuousLTI& c, double dt, DiscretizeMethod method) {
    require(dt > 0.0, "discretize: dt must be positive");
    const Eigen::Index n = c.A_c.rows(), m = c.B_c.cols();
    require(c.A_c.cols() == n && c.B_c.rows() == n, "discretize: non-conformable A_c/B_c");

    if (method == DiscretizeMethod::Euler)
        return {Matrix::Identity(n, n) + c.A_c * dt, c.B_c * dt};

    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = c.A_c;
    aug.topRightCorner(n, m) = c.B_c;
    const Matrix phi = (aug * dt).exp();
    return {phi.topLeftCorner(n, n), phi.topRightCorner(n, m)};
}

Trajectory simulate(const LinearDiscreteSystem& sys, const Vector& x0,
                    const std::vector<Vector>& inputs,
                    std::optional<std::uint64_t> seed) {
    Trajectory out;
    out.reserve(inputs.size());
    Vector x = x0;
    int k = 0;
    for (const Vector& u : inputs) {
        ++k;
        Vector y;
        if (seed) {
            NoisyStep s = step_noisy(sys, x, u, *seed, static_cast<std::uint64_t>(k));
            x = std::move(s.x_next);
            y = std::move(s.y);
        } else {
            x = step(sys, x, u);
            y = measure(sys, x);
        }
        out.push_back({k, x, u, y});
    }
    return out;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw std::invalid_argument(std::string("system JSON: ") + name +
                                    " must be an array of row arrays");
    Matrix m(j.size(), j[0].size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != static_cast<std::size_t>(m.cols()))
            throw std::invalid_argument(std::string("system JSON: ragged rows in ") + name);
        for (std::size_t k = 0; k < j[i].size(); ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

}  // namespace

std::string system_to_json(const LinearDiscreteSystem& sys) {
    nlohmann::json j;
    j["A"] = matrix_to_json(sys.A);
    j["B"] = matrix_to_json(sys.B);
    j["C"] = matrix_to_json(sys.C);
    j["R"] = matrix_to_json(sys.R);
    j["Q"] = matrix_to_json(sys.Q);
    j["dt"] = sys.dt;
    return j.dump(2);
}

LinearDiscreteSystem system_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    LinearDiscreteSystem sys;
    sys.A = matrix_from_json(j.at("A"), "A");
    sys.B = matrix_from_json(j.at("B"), "B");
    sys.C = matrix_from_json(j.at("C"), "C");
    sys.R = matrix_from_json(j.at("R"), "R");
    sys.Q = matrix_from_json(j.at("Q"), "Q");
    sys.dt = j.at("dt").get<double>();
    sys.validate();
    return sys;
}

}  // namespace twinwatch
