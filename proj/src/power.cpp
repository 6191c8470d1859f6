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

#include "tyrt/power.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace tyrt {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kInit: return "init";
    case Stage::kCapture: return "capture";
    case Stage::kDemosaic: return "demosaic";
    case Stage::kInference: return "inference";
    case Stage::kPostprocess: return "postprocess";
    case Stage::kQuiescent: return "quiescent";
  }
  return "?";
}

Stage parse_stage(const std::string& s) {
  for (Stage st : {Stage::kInit, Stage::kCapture, Stage::kDemosaic, Stage::kInference,
                   Stage::kPostprocess, Stage::kQuiescent}) {
    if (s == stage_name(st)) return st;
  }
  throw Error("unknown stage '" + s + "'");
}

double stage_energy(double current_ma, double voltage_v, double time_ms) {
  return current_ma * voltage_v * time_ms / 1000.0;
}

StageReport StageReport::measured(Stage s, double current_ma, double voltage_v,
                                  double time_ms) {
  StageReport r;
  r.stage = s;
  r.current_ma = current_ma;
  r.voltage_v = voltage_v;
  r.time_ms = time_ms;
  r.power_mw = current_ma * voltage_v;
  r.energy_mj = stage_energy(current_ma, voltage_v, time_ms);
  return r;
}

void StageReport::check_consistency(double slack) const {
  auto close = [&](double got, double want) {
    return std::fabs(got - want) <= slack * std::max(std::fabs(want), 1e-12);
  };
  if (!close(power_mw, current_ma * voltage_v)) {
    throw Error(std::string("stage ") + stage_name(stage) + ": power != I*V");
  }
  if (!close(energy_mj, power_mw * time_ms / 1000.0)) {
    throw Error(std::string("stage ") + stage_name(stage) + ": energy != P*t");
  }
}

LoopSummary loop_summary(const std::vector<StageReport>& stages) {
  if (stages.empty()) throw Error("loop summary needs at least one stage");
  LoopSummary s;
  for (const StageReport& r : stages) {
    s.total_time_ms += r.time_ms;
    s.loop_energy_mj += r.energy_mj;
  }
  if (s.total_time_ms > 0.0) {
    s.avg_power_mw = s.loop_energy_mj / s.total_time_ms * 1000.0;
    s.fps = 1000.0 / s.total_time_ms;
  }
  return s;
}

double battery_runtime_hours(double capacity_mah, double nominal_v,
                             double system_power_mw) {
  if (!(capacity_mah > 0 && nominal_v > 0 && system_power_mw > 0)) {
    throw Error("battery runtime needs positive capacity, voltage and power");
  }
  return capacity_mah * nominal_v / system_power_mw;
}

double battery_energy_mwh(double capacity_mah, double nominal_v) {
  return capacity_mah * nominal_v;
}

// DVFS ------------------------------------------------------------------------

double leakage_mw(const MachineModel& m, double voltage_v) {
  return voltage_v * m.leak_ma_ref *
         std::exp(m.leak_slope_per_v * (voltage_v - m.voltage_v));
}

double dvfs_power_mw(const MachineModel& m, double voltage_v, double frequency_hz) {
  return m.c_dyn_f * voltage_v * voltage_v * frequency_hz * 1e3 +
         leakage_mw(m, voltage_v);
}

void calibrate_dynamic_power(MachineModel& m, double power_mw) {
  const double dyn = power_mw - leakage_mw(m, m.voltage_v);
  if (!(dyn > 0.0)) throw Error("leakage exceeds the reference power");
  m.c_dyn_f = dyn * 1e-3 / (m.voltage_v * m.voltage_v * m.frequency_hz);
}

std::vector<OperatingPoint> pareto_frontier(const std::vector<OperatingPoint>& pts) {
  std::vector<OperatingPoint> sorted = pts;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const OperatingPoint& a, const OperatingPoint& b) {
                     if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
                     return a.energy_mj < b.energy_mj;
                   });
  // Scanning by latency, a point survives iff it beats every faster one on
  // energy.
  std::vector<OperatingPoint> out;
  double best = std::numeric_limits<double>::infinity();
  for (const OperatingPoint& p : sorted) {
    if (p.energy_mj < best) {
      out.push_back(p);
      best = p.energy_mj;
    }
  }
  return out;
}

SweepResult dvfs_sweep(int64_t cycles,
                       const std::vector<std::pair<double, double>>& points,
                       const MachineModel& m) {
  if (points.empty()) throw Error("sweep needs at least one operating point");
  if (cycles <= 0) throw Error("sweep needs a positive cycle count");
  SweepResult r;
  for (const auto& [v, f] : points) {
    if (!(v > 0.0 && f > 0.0)) throw Error("operating points must be positive");
    OperatingPoint p;
    p.voltage_v = v;
    p.frequency_hz = f;
    p.latency_ms = static_cast<double>(cycles) / f * 1e3;
    p.power_mw = dvfs_power_mw(m, v, f);
    p.energy_mj = p.power_mw * p.latency_ms / 1e3;
    r.points.push_back(p);
  }
  r.frontier = pareto_frontier(r.points);
  return r;
}

// Profiles --------------------------------------------------------------------

namespace {

// Board-level measurements at the 1.8 V rail; the quiescent row is drawn
// from the 3.3 V domain. Machine knobs are fitted so the planner lands near
// the measured inference efficiency.
constexpr const char* kPaperGap9 = R"(# GAP9 smart-glasses loop
name = paper-gap9
stage.init.current_ma = 11.96
stage.init.voltage_v = 1.8
stage.init.time_ms = 41.44
stage.capture.current_ma = 18.78
stage.capture.voltage_v = 1.8
stage.capture.time_ms = 34.69
stage.demosaic.current_ma = 23.82
stage.demosaic.voltage_v = 1.8
stage.demosaic.time_ms = 4.87
stage.inference.current_ma = 52.27
stage.inference.voltage_v = 1.8
stage.inference.time_ms = 16.86
stage.postprocess.current_ma = 28.26
stage.postprocess.voltage_v = 1.8
stage.postprocess.time_ms = 0.03
stage.quiescent.current_ma = 0.75
stage.quiescent.voltage_v = 3.3
declared.loop_current_ma = 30.0
declared.loop_power_mw = 54.0
declared.loop_energy_mj = 3.05
declared.loop_time_ms = 56.45
system.power_mw = 62.9
battery.capacity_mah = 154
battery.nominal_v = 3.8
machine.frequency_hz = 370e6
machine.voltage_v = 0.8
machine.macs_per_cycle_peak = 52
machine.bpc_l3_l2 = 8
machine.bpc_l2_l1 = 8
machine.bpc_l1_l2 = 8
machine.bpc_l2_l3 = 8
dvfs.reference_power_mw = 94.10
dvfs.leak_ma_ref = 6.0
dvfs.leak_slope_per_v = 3.0
dvfs.threshold_v = 0.4
memory.l1_bytes = 131072
memory.l2_bytes = 1572864
memory.l3_bytes = 8388608
)";

double parse_number(const std::string& key, const std::string& v) {
  size_t used = 0;
  double d;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw Error("profile key " + key + ": '" + v + "' is not a number");
  }
  if (used != v.size()) throw Error("profile key " + key + ": trailing characters in '" + v + "'");
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

StageReport Profile::report(Stage s) const {
  auto it = stages.find(s);
  if (it == stages.end()) throw Error(std::string("profile has no stage ") + stage_name(s));
  if (!it->second.time_ms) {
    throw Error(std::string("stage ") + stage_name(s) + " has no duration");
  }
  return StageReport::measured(s, it->second.current_ma, it->second.voltage_v,
                               *it->second.time_ms);
}

std::vector<StageReport> Profile::loop_stages() const {
  std::vector<StageReport> out;
  for (Stage s : {Stage::kCapture, Stage::kDemosaic, Stage::kInference, Stage::kPostprocess}) {
    out.push_back(report(s));
  }
  return out;
}

double Profile::max_frequency_hz(double voltage_v) const {
  if (voltage_v <= threshold_voltage_v) return 0.0;
  return machine.frequency_hz * (voltage_v - threshold_voltage_v) /
         (machine.voltage_v - threshold_voltage_v);
}

std::vector<std::pair<double, double>> Profile::default_sweep_grid() const {
  std::vector<std::pair<double, double>> out;
  for (int mv = 600; mv <= static_cast<int>(std::lround(machine.voltage_v * 1000)); mv += 50) {
    const double v = mv / 1000.0;
    const double fmax = max_frequency_hz(v);
    for (double f = 50e6; f <= fmax + 1.0; f += 10e6) out.emplace_back(v, f);
  }
  return out;
}

Profile parse_profile(std::istream& in) {
  Profile p;
  double ref_power = 0.0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("profile line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "name") {
      p.name = val;
      continue;
    }
    const double num = parse_number(key, val);
    if (key.rfind("stage.", 0) == 0) {
      const auto dot = key.find('.', 6);
      if (dot == std::string::npos) throw Error("bad stage key " + key);
      StageSpec& s = p.stages[parse_stage(key.substr(6, dot - 6))];
      const std::string field = key.substr(dot + 1);
      if (field == "current_ma") s.current_ma = num;
      else if (field == "voltage_v") s.voltage_v = num;
      else if (field == "time_ms") s.time_ms = num;
      else throw Error("unknown stage field " + key);
    } else if (key == "declared.loop_current_ma") p.declared_loop_current_ma = num;
    else if (key == "declared.loop_power_mw") p.declared_loop_power_mw = num;
    else if (key == "declared.loop_energy_mj") p.declared_loop_energy_mj = num;
    else if (key == "declared.loop_time_ms") p.declared_loop_time_ms = num;
    else if (key == "system.power_mw") p.system_power_mw = num;
    else if (key == "battery.capacity_mah") p.battery_mah = num;
    else if (key == "battery.nominal_v") p.battery_v = num;
    else if (key == "machine.frequency_hz") p.machine.frequency_hz = num;
    else if (key == "machine.voltage_v") p.machine.voltage_v = num;
    else if (key == "machine.macs_per_cycle_peak") p.machine.macs_per_cycle_peak = num;
    else if (key == "machine.bpc_l3_l2") p.machine.bpc_l3_l2 = num;
    else if (key == "machine.bpc_l2_l1") p.machine.bpc_l2_l1 = num;
    else if (key == "machine.bpc_l1_l2") p.machine.bpc_l1_l2 = num;
    else if (key == "machine.bpc_l2_l3") p.machine.bpc_l2_l3 = num;
    else if (key == "dvfs.reference_power_mw") ref_power = num;
    else if (key == "dvfs.leak_ma_ref") p.machine.leak_ma_ref = num;
    else if (key == "dvfs.leak_slope_per_v") p.machine.leak_slope_per_v = num;
    else if (key == "dvfs.threshold_v") p.threshold_voltage_v = num;
    else if (key == "memory.l1_bytes") p.budget.l1_bytes = static_cast<int64_t>(num);
    else if (key == "memory.l2_bytes") p.budget.l2_bytes = static_cast<int64_t>(num);
    else if (key == "memory.l3_bytes") p.budget.l3_bytes = static_cast<int64_t>(num);
    else throw Error("unknown profile key " + key);
  }
  for (const auto& [stage, spec] : p.stages) {
    if (spec.current_ma < 0 || spec.voltage_v < 0 || (spec.time_ms && *spec.time_ms < 0)) {
      throw Error(std::string("stage ") + stage_name(stage) + " has a negative value");
    }
    p.machine.stage_power_mw[stage_name(stage)] = spec.current_ma * spec.voltage_v;
  }
  p.machine.validate();
  p.budget.validate();
  p.inference_reference_power_mw = ref_power;
  if (ref_power > 0.0) calibrate_dynamic_power(p.machine, ref_power);
  return p;
}

Profile parse_profile_text(const std::string& text) {
  std::istringstream in(text);
  return parse_profile(in);
}

std::string profile_text(const Profile& p) {
  std::ostringstream os;
  os.precision(10);
  os << "name = " << p.name << "\n";
  for (const auto& [stage, s] : p.stages) {
    const std::string k = std::string("stage.") + stage_name(stage) + ".";
    os << k << "current_ma = " << s.current_ma << "\n";
    os << k << "voltage_v = " << s.voltage_v << "\n";
    if (s.time_ms) os << k << "time_ms = " << *s.time_ms << "\n";
  }
  os << "declared.loop_current_ma = " << p.declared_loop_current_ma << "\n"
     << "declared.loop_power_mw = " << p.declared_loop_power_mw << "\n"
     << "declared.loop_energy_mj = " << p.declared_loop_energy_mj << "\n"
     << "declared.loop_time_ms = " << p.declared_loop_time_ms << "\n"
     << "system.power_mw = " << p.system_power_mw << "\n"
     << "battery.capacity_mah = " << p.battery_mah << "\n"
     << "battery.nominal_v = " << p.battery_v << "\n"
     << "machine.frequency_hz = " << p.machine.frequency_hz << "\n"
     << "machine.voltage_v = " << p.machine.voltage_v << "\n"
     << "machine.macs_per_cycle_peak = " << p.machine.macs_per_cycle_peak << "\n"
     << "machine.bpc_l3_l2 = " << p.machine.bpc_l3_l2 << "\n"
     << "machine.bpc_l2_l1 = " << p.machine.bpc_l2_l1 << "\n"
     << "machine.bpc_l1_l2 = " << p.machine.bpc_l1_l2 << "\n"
     << "machine.bpc_l2_l3 = " << p.machine.bpc_l2_l3 << "\n"
     << "dvfs.reference_power_mw = " << p.inference_reference_power_mw << "\n"
     << "dvfs.leak_ma_ref = " << p.machine.leak_ma_ref << "\n"
     << "dvfs.leak_slope_per_v = " << p.machine.leak_slope_per_v << "\n"
     << "dvfs.threshold_v = " << p.threshold_voltage_v << "\n"
     << "memory.l1_bytes = " << p.budget.l1_bytes << "\n"
     << "memory.l2_bytes = " << p.budget.l2_bytes << "\n"
     << "memory.l3_bytes = " << p.budget.l3_bytes << "\n";
  return os.str();
}

std::vector<std::string> builtin_profiles() { return {"paper-gap9"}; }

Profile load_profile(const std::string& name_or_path) {
  if (name_or_path == "paper-gap9") return parse_profile_text(kPaperGap9);
  std::ifstream in(name_or_path);
  if (!in) throw Error("unknown profile '" + name_or_path + "' (not built in, no such file)");
  return parse_profile(in);
}

void write_stage_table(std::ostream& os, const std::vector<StageReport>& stages,
                       const Profile* declared) {
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %10s %8s %10s %12s %10s\n", "stage",
                "current_mA", "volt_V", "power_mW", "energy_mJ", "time_ms");
  os << line;
  for (const StageReport& r : stages) {
    std::snprintf(line, sizeof line, "%-14s %10.2f %8.2f %10.2f %12.6f %10.2f\n",
                  stage_name(r.stage), r.current_ma, r.voltage_v, r.power_mw,
                  r.energy_mj, r.time_ms);
    os << line;
  }
  if (stages.empty()) return;
  const LoopSummary s = loop_summary(stages);
  std::snprintf(line, sizeof line, "%-14s %10s %8s %10.2f %12.6f %10.2f\n", "loop(sum)",
                "", "", s.avg_power_mw, s.loop_energy_mj, s.total_time_ms);
  os << line;
  if (declared) {
    std::snprintf(line, sizeof line, "%-14s %10.2f %8s %10.2f %12.6f %10.2f\n",
                  "loop(declared)", declared->declared_loop_current_ma, "",
                  declared->declared_loop_power_mw, declared->declared_loop_energy_mj,
                  declared->declared_loop_time_ms);
    os << line;
    if (declared->declared_loop_energy_mj > 0) {
      std::snprintf(line, sizeof line,
                    "loop energy: sum of stages %.4f mJ vs declared %.4f mJ (%+.2f%%)\n",
                    s.loop_energy_mj, declared->declared_loop_energy_mj,
                    100.0 * (s.loop_energy_mj - declared->declared_loop_energy_mj) /
                        declared->declared_loop_energy_mj);
      os << line;
    }
  }
  std::snprintf(line, sizeof line, "fps %.3f\n", s.fps);
  os << line;
}

void write_sweep_table(std::ostream& os, const SweepResult& r) {
  os << "voltage_v,frequency_mhz,latency_ms,power_mw,energy_mj,pareto\n";
  auto on_frontier = [&](const OperatingPoint& p) {
    for (const OperatingPoint& f : r.frontier) {
      if (f.voltage_v == p.voltage_v && f.frequency_hz == p.frequency_hz) return true;
    }
    return false;
  };
  char line[160];
  for (const OperatingPoint& p : r.points) {
    std::snprintf(line, sizeof line, "%.3f,%.1f,%.4f,%.4f,%.6f,%d\n", p.voltage_v,
                  p.frequency_hz / 1e6, p.latency_ms, p.power_mw, p.energy_mj,
                  on_frontier(p) ? 1 : 0);
    os << line;
  }
}

}  // namespace tyrt
