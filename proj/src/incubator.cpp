#include "twinwatch/incubator.hpp"

#include <limits>

#include <nlohmann/json.hpp>

namespace twinwatch {

void IncubatorParams::validate() const {
    if (!(c_h > 0.0) || !(c_b > 0.0))
        throw std::invalid_argument("incubator params: heat capacities must be positive");
    // Zero conductance is accepted as the decoupled limit.
    if (g_hb < 0.0 || g_br < 0.0)
        throw std::invalid_argument("incubator params: conductances must be non-negative");
    if (p_heat < 0.0) throw std::invalid_argument("incubator params: p_heat must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("incubator params: dt must be positive");
}

Matrix default_process_noise() {
    Matrix r = Matrix::Zero(2, 2);
    r(0, 0) = 1e-3;
    r(1, 1) = 1e-4;
    return r;
}

Matrix default_measurement_noise() {
    Matrix q(1, 1);
    q(0, 0) = 2.5e-3;
    return q;
}

void FaultSchedule::validate() const {
    int prev_end = std::numeric_limits<int>::min();
    for (const auto& f : intervals) {
        if (f.start_step > f.end_step)
            throw std::invalid_argument("fault schedule: interval start exceeds end");
        if (f.start_step < prev_end)
            throw std::invalid_argument("fault schedule: overlapping intervals");
        if (!(f.scale > 0.0))
            throw std::invalid_argument("fault schedule: scale factor must be positive");
        if (f.parameter != "g_br")
            throw std::invalid_argument("fault schedule: unsupported parameter '" + f.parameter + "'");
        prev_end = f.end_step;
    }
}

double FaultSchedule::scale_at(int k) const {
    for (const auto& f : intervals)
        if (k >= f.start_step && k < f.end_step) return f.scale;
    return 1.0;
}

bool FaultSchedule::active_at(int k) const {
    for (const auto& f : intervals)
        if (k >= f.start_step && k < f.end_step && f.scale != 1.0) return true;
    return false;
}

LinearDiscreteSystem build_system_scaled(const IncubatorParams& p, double g_br_scale) {
    p.validate();
    const double g_br = p.g_br * g_br_scale;

    ContinuousLTI c;
    c.A_c = Matrix(2, 2);
    c.A_c << -p.g_hb / p.c_h, p.g_hb / p.c_h,
              p.g_hb / p.c_b, -(p.g_hb + g_br) / p.c_b;
    c.B_c = Matrix(2, 2);
    c.B_c << p.p_heat / p.c_h, 0.0,
             0.0,              g_br / p.c_b;

    const DiscretizedPair d = discretize(c, p.dt, DiscretizeMethod::Exact);
    LinearDiscreteSystem sys;
    sys.A = d.A;
    sys.B = d.B;
    sys.C = Matrix(1, 2);
    sys.C << 0.0, 1.0;
    sys.R = default_process_noise();
    sys.Q = default_measurement_noise();
    sys.dt = p.dt;
    sys.validate();
    return sys;
}

LinearDiscreteSystem build_system(const IncubatorParams& p) {
    return build_system_scaled(p, 1.0);
}

namespace {

// Hysteresis relay on the box-air temperature.
struct Thermostat {
    double low, high;
    bool on;

    explicit Thermostat(double setpoint, double band, double t_box0)
        : low(setpoint - band / 2.0), high(setpoint + band / 2.0), on(t_box0 < setpoint) {}

    bool decide(double t_box) {
        if (t_box < low) on = true;
        else if (t_box > high) on = false;
        return on;
    }
};

}  // namespace

std::vector<Vector> thermostat_inputs(const IncubatorParams& p, double setpoint,
                                      double band, int n) {
    if (!(band > 0.0)) throw std::invalid_argument("thermostat_inputs: band must be positive");
    if (n < 0) throw std::invalid_argument("thermostat_inputs: n must be >= 0");
    const LinearDiscreteSystem sys = build_system(p);
    Vector x(2);
    x << p.t_room, p.t_room;
    Thermostat stat(setpoint, band, x(1));
    std::vector<Vector> inputs;
    inputs.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        Vector u(2);
        u << (stat.decide(x(1)) ? 1.0 : 0.0), p.t_room;
        x = step(sys, x, u);
        inputs.push_back(std::move(u));
    }
    return inputs;
}

IncubatorRun simulate_run(const IncubatorParams& p, const FaultSchedule& faults,
                          double setpoint, double band, int n, std::uint64_t seed) {
    p.validate();
    faults.validate();
    if (!(band > 0.0)) throw std::invalid_argument("simulate_run: band must be positive");

    const LinearDiscreteSystem nominal = build_system(p);
    // Cache per distinct fault scale so each interval costs one discretization.
    std::vector<std::pair<double, LinearDiscreteSystem>> variants;
    auto system_for = [&](double scale) -> const LinearDiscreteSystem& {
        if (scale == 1.0) return nominal;
        for (const auto& v : variants)
            if (v.first == scale) return v.second;
        variants.emplace_back(scale, build_system_scaled(p, scale));
        return variants.back().second;
    };
    for (const auto& f : faults.intervals) system_for(f.scale);

    IncubatorRun run;
    run.trajectory.reserve(static_cast<std::size_t>(n));
    run.telemetry.reserve(static_cast<std::size_t>(n));

    Vector x(2);
    x << p.t_room, p.t_room;
    Thermostat stat(setpoint, band, x(1));
    for (int k = 1; k <= n; ++k) {
        const bool heater = stat.decide(x(1));
        Vector u(2);
        u << (heater ? 1.0 : 0.0), p.t_room;
        const LinearDiscreteSystem& truth = system_for(faults.scale_at(k));
        NoisyStep s = step_noisy(truth, x, u, seed, static_cast<std::uint64_t>(k));
        x = s.x_next;
        run.trajectory.push_back({k, x, u, s.y});
        TelemetryRecord rec;
        rec.timestamp = k * p.dt;
        rec.heater_on = heater;
        rec.t_room = p.t_room;
        rec.t_box = s.y(0);
        rec.t_heater = x(0);
        run.telemetry.push_back(std::move(rec));
    }
    return run;
}

std::string incubator_params_to_json(const IncubatorParams& p) {
    nlohmann::json j;
    j["c_h"] = p.c_h;
    j["c_b"] = p.c_b;
    j["g_hb"] = p.g_hb;
    j["g_br"] = p.g_br;
    j["p_heat"] = p.p_heat;
    j["t_room"] = p.t_room;
    j["dt"] = p.dt;
    return j.dump(2);
}

IncubatorParams incubator_params_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    IncubatorParams p;
    p.c_h = j.at("c_h").get<double>();
    p.c_b = j.at("c_b").get<double>();
    p.g_hb = j.at("g_hb").get<double>();
    p.g_br = j.at("g_br").get<double>();
    p.p_heat = j.at("p_heat").get<double>();
    p.t_room = j.at("t_room").get<double>();
    p.dt = j.at("dt").get<double>();
    p.validate();
    return p;
}

std::string fault_schedule_to_json(const FaultSchedule& f) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& iv : f.intervals) {
        nlohmann::json j;
        j["start_step"] = iv.start_step;
        j["end_step"] = iv.end_step;
        j["parameter"] = iv.parameter;
        j["scale"] = iv.scale;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

FaultSchedule fault_schedule_from_json(const std::string& text) {
    const nlohmann::json arr = nlohmann::json::parse(text);
    FaultSchedule f;
    for (const auto& j : arr) {
        FaultInterval iv;
        iv.start_step = j.at("start_step").get<int>();
        iv.end_step = j.at("end_step").get<int>();
        iv.parameter = j.value("parameter", std::string("g_br"));
        iv.scale = j.at("scale").get<double>();
        f.intervals.push_back(std::move(iv));
    }
    f.validate();
    return f;
}

}  // namespace twinwatch
