#pragma once

#include <string>
#include <vector>

#include "twinwatch/statespace.hpp"
#include "twinwatch/telemetry.hpp"

namespace twinwatch {

/// Lumped two-state thermal model of the incubator: heater element and
/// box air, heater->box and box->room conductances, on/off heating power.
/// Values are configuration; none are baked into the dynamics code.
struct IncubatorParams {
    double c_h = 300.0;    // heater heat capacity, J/K
    double c_b = 150.0;    // box-air heat capacity, J/K
    double g_hb = 1.0;     // heater<->box conductance, W/K
    double g_br = 0.5;     // box<->room conductance, W/K
    double p_heat = 30.0;  // heater power when on, W
    double t_room = 21.0;  // ambient temperature, degC
    double dt = 3.0;       // sample period, s

    void validate() const;
};

/// Default synthetic noise levels: R = diag(1e-4, 1e-4) K^2,
/// Q = [2.5e-3] K^2 (about 0.05 K sensor std).
Matrix default_process_noise();
Matrix default_measurement_noise();

struct FaultInterval {
    int start_step = 0;      // inclusive
    int end_step = 0;        // exclusive
    std::string parameter = "g_br";
    double scale = 1.0;
};

/// Ordered, non-overlapping fault intervals. Only g_br scaling is
/// supported (lid-open increases box-to-room heat exchange).
struct FaultSchedule {
    std::vector<FaultInterval> intervals;

    void validate() const;
    /// Scale applied to g_br at step k (1.0 outside all intervals).
    double scale_at(int k) const;
    bool active_at(int k) const;
};

/// Continuous model
///   c_h dT_h/dt = P p_heat - g_hb (T_h - T_b)
///   c_b dT_b/dt = g_hb (T_h - T_b) - g_br (T_b - T_r)
/// with state [T_h, T_b] and input [P, T_r], discretized exactly at dt.
/// C = [0 1]: only box-air temperature is measured.
LinearDiscreteSystem build_system(const IncubatorParams& p);

/// build_system with g_br scaled (lid-open plant variant).
LinearDiscreteSystem build_system_scaled(const IncubatorParams& p, double g_br_scale);

/// Bang-bang thermostat over a closed-loop noise-free simulation of the
/// plant: heater on below setpoint - band/2, off above setpoint + band/2,
/// held in between. Returns the n input vectors [P, t_room].
std::vector<Vector> thermostat_inputs(const IncubatorParams& p, double setpoint,
                                      double band, int n);

struct IncubatorRun {
    Trajectory trajectory;                // ground-truth states
    std::vector<TelemetryRecord> telemetry;
};

/// Closed-loop thermostat run with noise and fault injection. The true
/// plant uses the scaled g_br inside fault intervals; telemetry records
/// timestamp k*dt, heater state, room temperature, the noisy T_b
/// measurement and ground-truth T_h.
IncubatorRun simulate_run(const IncubatorParams& p, const FaultSchedule& faults,
                          double setpoint, double band, int n, std::uint64_t seed);

/// JSON round-trip with field names matching the struct members.
std::string incubator_params_to_json(const IncubatorParams& p);
IncubatorParams incubator_params_from_json(const std::string& text);
std::string fault_schedule_to_json(const FaultSchedule& f);
FaultSchedule fault_schedule_from_json(const std::string& text);

}  // namespace twinwatch
