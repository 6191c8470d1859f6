/* Copyright 2026 The tyrt Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
/// \file
/// \brief Stage energy bookkeeping, DVFS sweeps and battery runtime.
///
/// Units: mA, V, mW, ms, mJ, Hz, hours.

#ifndef TYRT_POWER_HPP
#define TYRT_POWER_HPP

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tyrt/planner.hpp"

namespace tyrt {

enum class Stage : uint8_t {
  kInit,
  kCapture,
  kDemosaic,
  kInference,
  kPostprocess,
  kQuiescent,
};

const char* stage_name(Stage s);
Stage parse_stage(const std::string& s);

/// mA * V * ms -> mJ.
double stage_energy(double current_ma, double voltage_v, double time_ms);

struct StageReport {
  Stage stage = Stage::kInference;
  double time_ms = 0.0;
  double current_ma = 0.0;
  double voltage_v = 0.0;
  double power_mw = 0.0;
  double energy_mj = 0.0;

  /// Derives power and energy from a current/voltage/time measurement.
  static StageReport measured(Stage s, double current_ma, double voltage_v,
                              double time_ms);
  /// Throws Error unless power = I*V and energy = P*t within `slack`.
  void check_consistency(double slack = 0.01) const;
};

struct LoopSummary {
  double total_time_ms = 0.0;
  double avg_power_mw = 0.0;
  double loop_energy_mj = 0.0;
  double fps = 0.0;
};

/// Sums over the stages; throws Error on an empty list.
LoopSummary loop_summary(const std::vector<StageReport>& stages);

double battery_runtime_hours(double capacity_mah, double nominal_v,
                             double system_power_mw);
double battery_energy_mwh(double capacity_mah, double nominal_v);

struct OperatingPoint {
  double voltage_v = 0.0;
  double frequency_hz = 0.0;
  double latency_ms = 0.0;
  double power_mw = 0.0;
  double energy_mj = 0.0;
};

/// c_dyn * V^2 * f + V * I_leak(V), in mW.
double dvfs_power_mw(const MachineModel& m, double voltage_v, double frequency_hz);
double leakage_mw(const MachineModel& m, double voltage_v);

/// Sets c_dyn so that the model draws `power_mw` at the model's nominal
/// voltage and frequency. Throws Error when leakage alone exceeds it.
void calibrate_dynamic_power(MachineModel& m, double power_mw);

struct SweepResult {
  std::vector<OperatingPoint> points;
  std::vector<OperatingPoint> frontier;
};

/// Points not dominated in (latency, energy); exact duplicates collapse to
/// one; sorted by latency.
std::vector<OperatingPoint> pareto_frontier(const std::vector<OperatingPoint>& pts);

/// One operating point per (voltage, frequency) pair for a network that
/// needs `cycles` cycles. Throws Error on an empty list.
SweepResult dvfs_sweep(int64_t cycles,
                       const std::vector<std::pair<double, double>>& points,
                       const MachineModel& m);

// Profiles --------------------------------------------------------------------

struct StageSpec {
  double current_ma = 0.0;
  double voltage_v = 0.0;
  std::optional<double> time_ms;  // quiescent draw has no duration
};

/// Stage measurements, declared totals and machine knobs of one platform.
/// Text form: one key=value per line, '#' comments.
struct Profile {
  std::string name;
  std::map<Stage, StageSpec> stages;
  // Totals as published with the measurements; reported next to the sums.
  double declared_loop_current_ma = 0.0;
  double declared_loop_power_mw = 0.0;
  double declared_loop_energy_mj = 0.0;
  double declared_loop_time_ms = 0.0;
  double system_power_mw = 0.0;  // whole device incl. sensor and radio
  double battery_mah = 0.0;
  double battery_v = 0.0;
  double inference_reference_power_mw = 0.0;  // DVFS anchor
  double threshold_voltage_v = 0.4;           // bounds f_max(V)
  MachineModel machine;
  MemBudget budget;

  StageReport report(Stage s) const;
  /// Capture, demosaic, inference and post-processing, in that order.
  std::vector<StageReport> loop_stages() const;
  /// Highest frequency allowed at `voltage_v`, scaling linearly with the
  /// overdrive V - V_th and anchored at the nominal point.
  double max_frequency_hz(double voltage_v) const;
  /// Voltages {0.6 .. nominal} x frequencies in 10 MHz steps up to f_max.
  std::vector<std::pair<double, double>> default_sweep_grid() const;
};

Profile parse_profile(std::istream& in);
Profile parse_profile_text(const std::string& text);
std::string profile_text(const Profile& p);
/// Built-in profile names.
std::vector<std::string> builtin_profiles();
/// A built-in name ("paper-gap9") or a path to a profile file.
Profile load_profile(const std::string& name_or_path);

/// Aligned stage table with the sum row and the declared totals.
void write_stage_table(std::ostream& os, const std::vector<StageReport>& stages,
                       const Profile* declared = nullptr);
void write_sweep_table(std::ostream& os, const SweepResult& r);

}  // namespace tyrt

#endif  // TYRT_POWER_HPP
