// twinwatch: simulate the incubator plant, run the Kalman filter over
// recorded telemetry, and flag anomalies from the innovation statistic.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "twinwatch/anomaly.hpp"
#include "twinwatch/incubator.hpp"
#include "twinwatch/kalman.hpp"
#include "twinwatch/telemetry.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

int log_level() {
    const char* env = std::getenv("TWINWATCH_LOG");
    if (!env) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fault spec mini-grammar: param:xFACTOR:START-END, e.g. gbr:x10:600-660.
twinwatch::FaultInterval parse_fault_spec(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::runtime_error("bad fault spec '" + spec + "', expected param:xFACTOR:START-END");
    const std::string param = spec.substr(0, c1);
    const std::string factor = spec.substr(c1 + 1, c2 - c1 - 1);
    const std::string range = spec.substr(c2 + 1);
    if (param != "gbr" && param != "g_br")
        throw std::runtime_error("bad fault spec: unsupported parameter '" + param + "'");
    if (factor.empty() || factor[0] != 'x')
        throw std::runtime_error("bad fault spec: factor must look like x10");
    const auto dash = range.find('-');
    if (dash == std::string::npos)
        throw std::runtime_error("bad fault spec: range must look like START-END");
    twinwatch::FaultInterval iv;
    iv.parameter = "g_br";
    iv.scale = std::stod(factor.substr(1));
    iv.start_step = std::stoi(range.substr(0, dash));
    iv.end_step = std::stoi(range.substr(dash + 1));
    return iv;
}

int cmd_simulate(const std::string& config_path, int steps,
                 const std::vector<std::string>& fault_specs, std::uint64_t seed,
                 double setpoint, double band, const std::string& out_path) {
    twinwatch::IncubatorParams params;
    twinwatch::FaultSchedule faults;
    try {
        params = twinwatch::incubator_params_from_json(read_file(config_path));
        for (const auto& spec : fault_specs) faults.intervals.push_back(parse_fault_spec(spec));
        faults.validate();
    } catch (const std::exception& e) {
        std::cerr << "twinwatch simulate: " << e.what() << "\n";
        return kExitData;
    }

    log_info("simulating " + std::to_string(steps) + " steps");
    const twinwatch::IncubatorRun run =
        twinwatch::simulate_run(params, faults, setpoint, band, steps, seed);

    try {
        twinwatch::write_csv_file(run.telemetry, out_path);
        nlohmann::json meta;
        meta["params"] = nlohmann::json::parse(twinwatch::incubator_params_to_json(params));
        meta["faults"] = nlohmann::json::parse(twinwatch::fault_schedule_to_json(faults));
        meta["seed"] = seed;
        meta["steps"] = steps;
        meta["setpoint"] = setpoint;
        meta["band"] = band;
        std::ofstream meta_out(out_path.substr(0, out_path.rfind(".csv")) + ".meta.json");
        meta_out << meta.dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "twinwatch simulate: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

int cmd_estimate(const std::string& telemetry_path, const std::string& config_path,
                 const std::string& out_path) {
    std::vector<twinwatch::TelemetryRecord> records;
    twinwatch::LinearDiscreteSystem sys;
    twinwatch::IncubatorParams params;
    try {
        params = twinwatch::incubator_params_from_json(read_file(config_path));
        sys = twinwatch::build_system(params);
        records = twinwatch::read_csv_file(telemetry_path);
    } catch (const std::exception& e) {
        std::cerr << "twinwatch estimate: " << e.what() << "\n";
        return kExitData;
    }
    if (sys.state_dim() != 2) {
        std::cerr << "twinwatch estimate: expected a 2-state incubator system, got n="
                  << sys.state_dim() << "\n";
        return kExitData;
    }

    std::ostringstream out;
    out << "step,timestamp,mu_theater,mu_tbox,var_theater,var_tbox,"
           "innovation,nis,measured_tbox\n";

    twinwatch::FilterState fs{twinwatch::Vector(2), twinwatch::Matrix(2, 2), 0};
    fs.mean << params.t_room, params.t_room;
    fs.covariance << 25.0, 0.0, 0.0, 25.0;

    // Gaps in the telemetry (missing step indices by timestamp) become
    // predict-only steps with the input held from the last record.
    twinwatch::Vector held_u(2);
    held_u << 0.0, params.t_room;
    for (const auto& rec : records) {
        const int target = static_cast<int>(std::llround(rec.timestamp / params.dt));
        while (fs.step + 1 < target) {
            auto r = twinwatch::kf_step(fs, sys, held_u, std::nullopt);
            fs = r.state;
            out << fs.step << ',' << fmt(fs.step * params.dt) << ',' << fmt(fs.mean(0)) << ','
                << fmt(fs.mean(1)) << ',' << fmt(fs.covariance(0, 0)) << ','
                << fmt(fs.covariance(1, 1)) << ",,,\n";
        }
        twinwatch::Vector u(2);
        u << (rec.heater_on ? 1.0 : 0.0), rec.t_room;
        held_u = u;
        twinwatch::Vector y(1);
        y << rec.t_box;
        auto r = twinwatch::kf_step(fs, sys, u, y);
        fs = r.state;
        const double step_nis = twinwatch::nis(*r.update);
        out << fs.step << ',' << fmt(rec.timestamp) << ',' << fmt(fs.mean(0)) << ','
            << fmt(fs.mean(1)) << ',' << fmt(fs.covariance(0, 0)) << ','
            << fmt(fs.covariance(1, 1)) << ',' << fmt(r.update->innovation(0)) << ','
            << fmt(step_nis) << ',' << fmt(rec.t_box) << '\n';
    }

    std::ofstream sink(out_path, std::ios::binary);
    if (!sink) {
        std::cerr << "twinwatch estimate: cannot open output: " << out_path << "\n";
        return kExitData;
    }
    sink << out.str();
    return kExitOk;
}

int cmd_detect(const std::string& estimate_path, double confidence, int window_m,
               int window_n, int recovery_n, const std::string& out_path) {
    std::vector<std::pair<int, double>> nis_stream;
    try {
        std::ifstream in(estimate_path);
        if (!in) throw std::runtime_error("cannot read file: " + estimate_path);
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error("empty estimate CSV");
        if (line.rfind("step,", 0) != 0 || line.find(",nis,") == std::string::npos)
            throw std::runtime_error("estimate CSV header lacks step/nis columns");
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string f;
            while (std::getline(ss, f, ',')) fields.push_back(f);
            if (fields.size() < 8)
                throw std::runtime_error("estimate CSV line " + std::to_string(line_no) +
                                         ": too few fields");
            if (fields[7].empty()) continue;  // predict-only step, no NIS
            nis_stream.emplace_back(std::stoi(fields[0]), std::stod(fields[7]));
        }
    } catch (const std::exception& e) {
        std::cerr << "twinwatch detect: " << e.what() << "\n";
        return kExitData;
    }

    twinwatch::DetectorConfig cfg;
    cfg.confidence = confidence;
    cfg.window_m = window_m;
    cfg.window_n = window_n;
    cfg.recovery_n = recovery_n;
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "twinwatch detect: " << e.what() << "\n";
        return kExitUsage;
    }

    const auto events = twinwatch::detect(nis_stream, 1, cfg);
    log_info(std::to_string(events.size()) + " event(s) detected");
    std::ofstream sink(out_path, std::ios::binary);
    if (!sink) {
        std::cerr << "twinwatch detect: cannot open output: " << out_path << "\n";
        return kExitData;
    }
    for (const auto& e : events) sink << twinwatch::anomaly_event_to_json(e) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"incubator digital-twin monitoring pipeline"};
    app.require_subcommand(1);

    std::string config_path, telemetry_path, estimate_path, out_path;
    int steps = 2000;
    std::vector<std::string> fault_specs;
    std::uint64_t seed = 0;
    double setpoint = 35.0, band = 1.0;
    double confidence = 0.99;
    int window_m = 3, window_n = 5, recovery_n = 5;

    auto* sim = app.add_subcommand("simulate", "closed-loop plant simulation with fault injection");
    sim->add_option("--config", config_path, "incubator params JSON")->required();
    sim->add_option("--steps", steps, "number of steps");
    sim->add_option("--fault", fault_specs, "fault spec param:xFACTOR:START-END (repeatable)");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--setpoint", setpoint, "thermostat setpoint, degC");
    sim->add_option("--band", band, "thermostat hysteresis band, degC");
    sim->add_option("-o,--output", out_path, "telemetry CSV output path")->required();

    auto* est = app.add_subcommand("estimate", "Kalman filter over recorded telemetry");
    est->add_option("--telemetry", telemetry_path, "telemetry CSV")->required();
    est->add_option("--config", config_path, "incubator params JSON")->required();
    est->add_option("-o,--output", out_path, "estimate CSV output path")->required();

    auto* det = app.add_subcommand("detect", "anomaly events from the NIS stream");
    det->add_option("--input", estimate_path, "estimate CSV (from the estimate command)")->required();
    det->add_option("--confidence", confidence, "chi-square confidence level");
    det->add_option("--window-m", window_m, "M of the M-of-N trigger");
    det->add_option("--window-n", window_n, "N of the M-of-N trigger");
    det->add_option("--recovery", recovery_n, "consecutive in-bound steps to close an event");
    det->add_option("-o,--output", out_path, "events JSON-lines output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, steps, fault_specs, seed, setpoint, band, out_path);
        if (est->parsed()) return cmd_estimate(telemetry_path, config_path, out_path);
        if (det->parsed())
            return cmd_detect(estimate_path, confidence, window_m, window_n, recovery_n, out_path);
    } catch (const std::exception& e) {
        std::cerr << "twinwatch: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
