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

// tyrt command line: build, quantize, plan, run, sweep, eval, report.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad configuration,
// 3 model error, 4 memory planning error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tyrt/detect.hpp"
#include "tyrt/imaging.hpp"
#include "tyrt/planner.hpp"
#include "tyrt/power.hpp"
#include "tyrt/quantizer.hpp"
#include "tyrt/serialize.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tyrt;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;
constexpr int kExitPlanning = 4;

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct BudgetFlags {
  int64_t l1 = 0, l2 = 0, l3 = 0;  // 0 = take from the profile

  MemBudget resolve(const Profile& p) const {
    if (l1 < 0 || l2 < 0 || l3 < 0) throw ConfigError("memory budgets must be positive");
    MemBudget b = p.budget;
    if (l1 > 0) b.l1_bytes = l1;
    if (l2 > 0) b.l2_bytes = l2;
    if (l3 > 0) b.l3_bytes = l3;
    try {
      b.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    return b;
  }
};

void add_budget_flags(CLI::App* cmd, BudgetFlags& b) {
  cmd->add_option("--l1-bytes", b.l1, "L1 budget in bytes (default: profile)");
  cmd->add_option("--l2-bytes", b.l2, "L2 budget in bytes (default: profile)");
  cmd->add_option("--l3-bytes", b.l3, "L3 budget in bytes (default: profile)");
}

Profile get_profile(const std::string& name) {
  try {
    return load_profile(name);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

Model get_model(const std::string& path) {
  if (path.empty()) throw ConfigError("--model is required");
  return load_model(path);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// Doubles are rounded before they reach JSON so reports diff cleanly.
double r6(double v) { return std::round(v * 1e6) / 1e6; }

std::vector<FloatTensor> synthetic_calibration(int count, int resolution,
                                               int classes, uint64_t seed) {
  std::vector<FloatTensor> out;
  for (int i = 0; i < count; ++i) {
    const RgbImage img = synthetic_scene(resolution, resolution,
                                         seed * 7919u + static_cast<uint64_t>(i), classes);
    out.push_back(to_float_input(img, resolution));
  }
  return out;
}

json schedule_json(const TileSchedule& s, const CycleEstimate& e,
                   const MachineModel& m) {
  const TransferTotals t = simulate_transfers(s);
  json j;
  j["budget"] = {{"l1_bytes", s.budget.l1_bytes},
                 {"l2_bytes", s.budget.l2_bytes},
                 {"l3_bytes", s.budget.l3_bytes}};
  size_t tiles = 0;
  for (const LayerSchedule& l : s.layers) tiles += l.tiles.size();
  j["layers"] = s.layers.size();
  j["tiles"] = tiles;
  j["transfers"] = {{"l3_to_l2", t.l3_to_l2},
                    {"l2_to_l1", t.l2_to_l1},
                    {"l1_to_l2", t.l1_to_l2},
                    {"l2_to_l3", t.l2_to_l3}};
  j["macs"] = e.macs;
  j["cycles"] = e.total_cycles;
  j["compute_cycles"] = e.compute_cycles;
  j["stall_cycles"] = e.stall_cycles;
  j["mac_per_cycle"] = r6(e.achieved_macs_per_cycle);
  j["latency_ms"] = r6(e.total_cycles / m.frequency_hz * 1e3);
  return j;
}

json stage_json(const StageReport& r) {
  return {{"stage", stage_name(r.stage)},
          {"time_ms", r6(r.time_ms)},
          {"current_ma", r6(r.current_ma)},
          {"voltage_v", r6(r.voltage_v)},
          {"power_mw", r6(r.power_mw)},
          {"energy_mj", r6(r.energy_mj)}};
}

json loop_json(const LoopSummary& s) {
  return {{"total_time_ms", r6(s.total_time_ms)},
          {"avg_power_mw", r6(s.avg_power_mw)},
          {"loop_energy_mj", r6(s.loop_energy_mj)},
          {"fps", r6(s.fps)}};
}

// Subcommands -----------------------------------------------------------------

struct BuildArgs {
  std::string version = "v8", size = "big", activation = "silu", out, manifest;
  int classes = 20, resolution = 256;
  uint64_t seed = 1;
};

int cmd_build(const BuildArgs& a) {
  if (a.out.empty()) throw ConfigError("--out is required");
  Version v;
  SizeClass s;
  ActKind act;
  try {
    v = parse_version(a.version);
    s = parse_size(a.size);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (a.activation == "silu") act = ActKind::kSiLU;
  else if (a.activation == "leaky" || a.activation == "leakyrelu") act = ActKind::kLeakyReLU;
  else throw ConfigError("unknown activation '" + a.activation + "'");
  Model m;
  try {
    m.graph = build_graph(v, s, a.classes, a.resolution, act);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  m.weights = random_weights(m.graph, a.seed);
  save_model(a.out, m);
  std::ostringstream man;
  write_manifest(man, m);
  write_text(a.manifest.empty() ? a.out + ".manifest.txt" : a.manifest, man.str());
  const Program p = lower(m.graph);
  std::printf("%s: %s, %.4f M params, %.1f M MACs\n", a.out.c_str(),
              m.graph.label().c_str(), p.count_params() / 1e6, p.count_macs() / 1e6);
  return 0;
}

struct QuantizeArgs {
  std::string model, out, report, calib_dir;
  int images = 8;
  uint64_t seed = 1;
};

int cmd_quantize(const QuantizeArgs& a) {
  if (a.out.empty()) throw ConfigError("--out is required");
  Model m = get_model(a.model);
  if (!m.weights.has_master()) throw MissingWeights("model has no float weights to calibrate");
  const int R = m.graph.input_resolution;
  std::vector<FloatTensor> images;
  if (!a.calib_dir.empty()) {
    if (!fs::is_directory(a.calib_dir)) {
      throw ConfigError("calibration directory " + a.calib_dir + " does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.calib_dir)) {
      if (e.path().extension() == ".ppm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) images.push_back(to_float_input(read_ppm(f), R));
  } else {
    if (a.images < 1) throw ConfigError("--images must be >= 1");
    images = synthetic_calibration(a.images, R, m.graph.num_classes, a.seed);
  }
  if (images.empty()) throw ConfigError("no calibration images found");
  Model q{m.graph, quantize_model(m.graph, m.weights, images)};
  save_model(a.out, q);
  const auto errors = quant_error(q.graph, q.weights, images);
  std::ostringstream rep;
  write_calibration_report(rep, q.graph, q.weights, errors);
  write_text(a.report.empty() ? a.out + ".calib.txt" : a.report, rep.str());
  std::ostringstream man;
  write_manifest(man, q);
  write_text(a.out + ".manifest.txt", man.str());
  std::printf("%s: calibrated on %zu images, %zu tensors\n", a.out.c_str(),
              images.size(), q.weights.activations.size());
  return 0;
}

struct PlanArgs {
  std::string model, profile = "paper-gap9", out, json_out;
  BudgetFlags budget;
};

int cmd_plan(const PlanArgs& a) {
  const Profile prof = get_profile(a.profile);
  const MemBudget budget = a.budget.resolve(prof);
  const Model m = get_model(a.model);
  const QuantExecutable exe = compile(m.graph, m.weights);
  const TileSchedule s = plan_tiles(exe, budget);
  validate_schedule(exe.program, s);
  const CycleEstimate e = estimate_cycles(s, prof.machine);
  std::ostringstream rep;
  rep << "# schedule: " << m.graph.label() << "\n";
  write_schedule_report(rep, s, prof.machine);
  if (!a.out.empty()) write_text(a.out, rep.str());
  else std::cout << rep.str();
  if (!a.json_out.empty()) {
    json j = schedule_json(s, e, prof.machine);
    j["model"] = m.graph.label();
    write_text(a.json_out, j.dump(2) + "\n");
  }
  if (!a.out.empty()) {
    std::printf("%s: %zu layers, %.2f MAC/cycle, %.3f ms\n", a.out.c_str(),
                s.layers.size(), e.achieved_macs_per_cycle,
                e.total_cycles / prof.machine.frequency_hz * 1e3);
  }
  return 0;
}

struct RunArgs {
  std::string model, source = "synthetic", profile = "paper-gap9", out_dir = "run_out",
              pattern = "RGGB";
  int frames = 10, width = 320, height = 240;
  double conf = 0.25, iou = 0.45;
  uint64_t seed = 1;
  bool no_images = false, host_timing = false;
  BudgetFlags budget;
};

int cmd_run(const RunArgs& a) {
  const Profile prof = get_profile(a.profile);
  BayerPattern pattern;
  try {
    pattern = parse_pattern(a.pattern);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const MemBudget budget = a.budget.resolve(prof);
  const Model m = get_model(a.model);
  const QuantExecutable exe = compile(m.graph, m.weights);
  const TileSchedule sched = plan_tiles(exe, budget);
  validate_schedule(exe.program, sched);
  const CycleEstimate cyc = estimate_cycles(sched, prof.machine);
  const HeadMeta meta = head_meta(m.graph);
  const int R = m.graph.input_resolution;

  std::unique_ptr<FrameProvider> provider;
  if (a.source == "synthetic") {
    if (a.frames < 0) throw ConfigError("--frames must be >= 0");
    try {
      provider = std::make_unique<SyntheticFrames>(a.width, a.height, pattern, a.seed,
                                                   a.frames, m.graph.num_classes);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  } else {
    if (!fs::is_directory(a.source)) throw ConfigError("source directory " + a.source + " does not exist");
    provider = std::make_unique<DirectoryFrames>(a.source, pattern);
  }

  // Modelled stage times: capture, demosaic and post-processing come from
  // the profile, inference from the planner's cycle estimate.
  const StageReport capture = prof.report(Stage::kCapture);
  const StageReport demosaic = prof.report(Stage::kDemosaic);
  const StageReport post = prof.report(Stage::kPostprocess);
  const double infer_ms = cyc.total_cycles / prof.machine.frequency_hz * 1e3;
  const double infer_ma = prof.stages.at(Stage::kInference).current_ma;
  const double infer_v = prof.stages.at(Stage::kInference).voltage_v;
  const StageReport inference = StageReport::measured(Stage::kInference, infer_ma, infer_v, infer_ms);
  const double processing_ms = demosaic.time_ms + inference.time_ms + post.time_ms;

  fs::create_directories(a.out_dir);
  std::ofstream det_file(fs::path(a.out_dir) / "detections.txt", std::ios::trunc);
  det_file << "# image_id class_id score x1 y1 x2 y2\n";
  DoubleBufferedSource src(std::move(provider), capture.time_ms);
  PostprocessConfig pcfg;
  pcfg.conf = a.conf;
  pcfg.iou = a.iou;

  int frames = 0;
  size_t total_dets = 0;
  json per_frame = json::array();
  double host_ms = 0.0;
  while (const BayerFrame* frame = src.next()) {
    const auto t0 = std::chrono::steady_clock::now();
    const RgbImage rgb = demosaic_bilinear(*frame);
    const QuantTensor in = to_net_input(rgb, R, exe.input_qparams());
    const std::vector<QuantTensor> heads = forward_tiled(exe, sched, in);
    const std::vector<Detection> dets =
        rescale(postprocess(heads, meta, pcfg), R, frame->width, frame->height);
    host_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_predictions(det_file, frames, dets);
    if (!a.no_images) {
      RgbImage annotated = rgb;
      for (const Detection& d : dets) {
        draw_box(annotated, d.box.x1, d.box.y1, d.box.x2, d.box.y2, class_color(d.class_id));
      }
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04d.ppm", frames);
      write_ppm(fs::path(a.out_dir) / name, annotated);
    }
    per_frame.push_back({{"frame", frames},
                         {"delivered_ms", r6(src.now_ms())},
                         {"detections", dets.size()}});
    total_dets += dets.size();
    src.processed(processing_ms);
    ++frames;
  }
  det_file.close();

  const std::vector<StageReport> stages{capture, demosaic, inference, post};
  const LoopSummary seq = loop_summary(stages);
  const double period = std::max(capture.time_ms, processing_ms);

  json j;
  j["model"] = m.graph.label();
  j["source"] = a.source;
  j["frames"] = frames;
  j["detections"] = total_dets;
  j["schedule"] = schedule_json(sched, cyc, prof.machine);
  json st = json::array();
  for (const StageReport& r : stages) st.push_back(stage_json(r));
  j["stages"] = st;
  j["loop_sequential"] = loop_json(seq);
  j["loop_double_buffered"] = {{"period_ms", r6(period)},
                               {"fps", r6(1000.0 / period)},
                               {"bound", capture.time_ms >= processing_ms ? "capture" : "compute"},
                               {"virtual_end_ms", r6(src.now_ms())}};
  j["declared"] = {{"loop_time_ms", prof.declared_loop_time_ms},
                   {"loop_energy_mj", prof.declared_loop_energy_mj},
                   {"loop_power_mw", prof.declared_loop_power_mw}};
  j["per_frame"] = per_frame;
  if (a.host_timing) j["host_wall_clock_ms"] = host_ms;  // not a modelled quantity

  std::ostringstream rep;
  rep << "model " << m.graph.label() << "\nframes " << frames << "\ndetections "
      << total_dets << "\n\n# modelled stages (inference from the planner)\n";
  write_stage_table(rep, stages, &prof);
  rep << "\n# inference\n"
      << "cycles " << cyc.total_cycles << "\nmacs " << cyc.macs << "\n"
      << "mac_per_cycle " << fmt("%.3f", cyc.achieved_macs_per_cycle) << "\n"
      << "latency_ms " << fmt("%.4f", infer_ms) << "\n"
      << "\n# double-buffered capture\n"
      << "period_ms " << fmt("%.4f", period) << " ("
      << (capture.time_ms >= processing_ms ? "capture" : "compute") << "-bound)\n"
      << "fps " << fmt("%.3f", 1000.0 / period) << "\n";
  if (a.host_timing) rep << "\n# host wall clock (not modelled)\nhost_ms " << fmt("%.3f", host_ms) << "\n";
  write_text(fs::path(a.out_dir) / "report.txt", rep.str());
  write_text(fs::path(a.out_dir) / "report.json", j.dump(2) + "\n");
  std::printf("%d frames, %zu detections, sequential %.2f fps, double-buffered %.2f fps -> %s\n",
              frames, total_dets, seq.fps, 1000.0 / period, a.out_dir.c_str());
  return 0;
}

struct SweepArgs {
  std::string model, profile = "paper-gap9", points, out;
  BudgetFlags budget;
};

std::vector<std::pair<double, double>> parse_points(const std::string& s) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("point '" + item + "' must be V:MHz");
    try {
      out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)) * 1e6);
    } catch (const std::exception&) {
      throw ConfigError("point '" + item + "' must be V:MHz");
    }
  }
  if (out.empty()) throw ConfigError("--points is empty");
  return out;
}

int cmd_sweep(const SweepArgs& a) {
  const Profile prof = get_profile(a.profile);
  const MemBudget budget = a.budget.resolve(prof);
  const Model m = get_model(a.model);
  const QuantExecutable exe = compile(m.graph, m.weights);
  const TileSchedule s = plan_tiles(exe, budget);
  const CycleEstimate e = estimate_cycles(s, prof.machine);
  const auto pts = a.points.empty() ? prof.default_sweep_grid() : parse_points(a.points);
  const SweepResult r = dvfs_sweep(e.total_cycles, pts, prof.machine);
  std::ostringstream os;
  write_sweep_table(os, r);
  if (a.out.empty()) std::cout << os.str();
  else write_text(a.out, os.str());
  std::fprintf(stderr, "%s: %zu points, %zu on the Pareto frontier\n",
               m.graph.label().c_str(), r.points.size(), r.frontier.size());
  return 0;
}

struct EvalArgs {
  std::string preds, gt, json_out;
};

int cmd_eval(const EvalArgs& a) {
  if (a.preds.empty() || a.gt.empty()) throw ConfigError("--preds and --gt are required");
  PredictionSet preds;
  GroundTruthSet gts;
  try {
    preds = read_prediction_dir(a.preds);
    gts = read_ground_truth(a.gt);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const MapResult r = eval_map(preds, gts);
  std::printf("mAP@[.50:.95] %.6f\nmAP@.50 %.6f\n", r.map, r.map50);
  for (const auto& [cls, ap] : r.per_class) std::printf("class %d AP %.6f\n", cls, ap);
  if (!a.json_out.empty()) {
    json j;
    j["map"] = r6(r.map);
    j["map50"] = r6(r.map50);
    json pc = json::object();
    for (const auto& [cls, ap] : r.per_class) pc[std::to_string(cls)] = r6(ap);
    j["per_class"] = pc;
    write_text(a.json_out, j.dump(2) + "\n");
  }
  return 0;
}

struct ReportArgs {
  std::string profile = "paper-gap9", json_out;
};

int cmd_report(const ReportArgs& a) {
  const Profile prof = get_profile(a.profile);
  std::vector<StageReport> rows;
  if (prof.stages.count(Stage::kInit)) rows.push_back(prof.report(Stage::kInit));
  const std::vector<StageReport> loop = prof.loop_stages();
  const LoopSummary s = loop_summary(loop);
  std::ostringstream os;
  os << "# profile " << prof.name << "\n";
  for (const StageReport& r : rows) {
    os << "init " << fmt("%.2f", r.time_ms) << " ms, " << fmt("%.2f", r.power_mw) << " mW, "
       << fmt("%.6f", r.energy_mj) << " mJ (once per boot)\n";
  }
  if (auto it = prof.stages.find(Stage::kQuiescent); it != prof.stages.end()) {
    os << "quiescent " << fmt("%.3f", it->second.current_ma * it->second.voltage_v) << " mW\n";
  }
  os << "\n# loop\n";
  write_stage_table(os, loop, &prof);
  os << "\n# battery\n";
  os << "capacity " << fmt("%.1f", prof.battery_mah) << " mAh at " << fmt("%.2f", prof.battery_v)
     << " V = " << fmt("%.1f", battery_energy_mwh(prof.battery_mah, prof.battery_v)) << " mWh\n";
  const double sys_h = battery_runtime_hours(prof.battery_mah, prof.battery_v, prof.system_power_mw);
  const double loop_h = battery_runtime_hours(prof.battery_mah, prof.battery_v, prof.declared_loop_power_mw);
  os << "runtime at system power " << fmt("%.1f", prof.system_power_mw) << " mW: "
     << fmt("%.3f", sys_h) << " h\n";
  os << "runtime at loop power " << fmt("%.1f", prof.declared_loop_power_mw) << " mW: "
     << fmt("%.3f", loop_h) << " h\n";
  std::cout << os.str();
  if (!a.json_out.empty()) {
    json j;
    j["profile"] = prof.name;
    json st = json::array();
    for (const StageReport& r : rows) st.push_back(stage_json(r));
    for (const StageReport& r : loop) st.push_back(stage_json(r));
    j["stages"] = st;
    j["loop_sum"] = loop_json(s);
    j["loop_declared"] = {{"current_ma", prof.declared_loop_current_ma},
                          {"power_mw", prof.declared_loop_power_mw},
                          {"energy_mj", prof.declared_loop_energy_mj},
                          {"time_ms", prof.declared_loop_time_ms}};
    j["battery"] = {{"energy_mwh", r6(battery_energy_mwh(prof.battery_mah, prof.battery_v))},
                    {"runtime_system_h", r6(sys_h)},
                    {"runtime_loop_h", r6(loop_h)}};
    write_text(a.json_out, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tyrt - int8 tiny YOLO runtime and benchmark harness"};
  app.set_config("--config", "", "Read options from a TOML/INI file; flags override");
  app.require_subcommand(1);

  BuildArgs ba;
  auto* build = app.add_subcommand("build", "Build a network with random float weights");
  build->add_option("--version", ba.version, "v1.3 | v5 | v8 | v10")->capture_default_str();
  build->add_option("--size", ba.size, "small | big")->capture_default_str();
  build->add_option("--classes", ba.classes)->capture_default_str();
  build->add_option("--resolution", ba.resolution)->capture_default_str();
  build->add_option("--activation", ba.activation, "silu | leaky")->capture_default_str();
  build->add_option("--seed", ba.seed)->capture_default_str();
  build->add_option("--out", ba.out, "Output .tyrt file");
  build->add_option("--manifest", ba.manifest, "Manifest path (default <out>.manifest.txt)");

  QuantizeArgs qa;
  auto* quant = app.add_subcommand("quantize", "Calibrate and quantize to int8");
  quant->add_option("--model", qa.model, "Float model");
  quant->add_option("--out", qa.out, "Quantized model");
  quant->add_option("--images", qa.images, "Synthetic calibration images")->capture_default_str();
  quant->add_option("--calib-dir", qa.calib_dir, "Directory of PPM calibration images");
  quant->add_option("--report", qa.report, "Calibration report (default <out>.calib.txt)");
  quant->add_option("--seed", qa.seed)->capture_default_str();

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "Tile a quantized model for a memory budget");
  plan->add_option("--model", pa.model);
  plan->add_option("--profile", pa.profile, "Built-in profile or file")->capture_default_str();
  plan->add_option("--out", pa.out, "Schedule report (default stdout)");
  plan->add_option("--json", pa.json_out, "Structured schedule summary");
  add_budget_flags(plan, pa.budget);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Capture, demosaic, infer and post-process frames");
  run->add_option("--model", ra.model);
  run->add_option("--source", ra.source, "'synthetic' or a directory of PGM frames")->capture_default_str();
  run->add_option("--frames", ra.frames, "Synthetic frame count")->capture_default_str();
  run->add_option("--frame-width", ra.width)->capture_default_str();
  run->add_option("--frame-height", ra.height)->capture_default_str();
  run->add_option("--pattern", ra.pattern, "Bayer pattern")->capture_default_str();
  run->add_option("--profile", ra.profile)->capture_default_str();
  run->add_option("--conf", ra.conf)->capture_default_str();
  run->add_option("--iou", ra.iou)->capture_default_str();
  run->add_option("--out-dir", ra.out_dir)->capture_default_str();
  run->add_option("--seed", ra.seed)->capture_default_str();
  run->add_flag("--no-images", ra.no_images, "Skip annotated PPM output");
  run->add_flag("--host-timing", ra.host_timing, "Also report host wall-clock time");
  add_budget_flags(run, ra.budget);

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Voltage/frequency sweep with Pareto frontier");
  sweep->add_option("--model", sa.model);
  sweep->add_option("--profile", sa.profile)->capture_default_str();
  sweep->add_option("--points", sa.points, "Comma list of V:MHz (default: profile grid)");
  sweep->add_option("--out", sa.out, "CSV output (default stdout)");
  add_budget_flags(sweep, sa.budget);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "mAP@[.50:.95] of predictions against ground truth");
  eval->add_option("--preds", ea.preds, "Prediction file or directory of .txt files");
  eval->add_option("--gt", ea.gt, "Ground-truth file");
  eval->add_option("--json", ea.json_out);

  ReportArgs rpa;
  auto* report = app.add_subcommand("report", "Stage energy, loop and battery report");
  report->add_option("--profile", rpa.profile)->capture_default_str();
  report->add_option("--json", rpa.json_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*build) return cmd_build(ba);
    if (*quant) return cmd_quantize(qa);
    if (*plan) return cmd_plan(pa);
    if (*run) return cmd_run(ra);
    if (*sweep) return cmd_sweep(sa);
    if (*eval) return cmd_eval(ea);
    if (*report) return cmd_report(rpa);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const InfeasibleBudget& e) {
    std::fprintf(stderr, "planning error: %s\n", e.what());
    return kExitPlanning;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return kExitModel;
  } catch (const MissingWeights& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return kExitModel;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return kExitModel;
  } catch (const QuantError& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return kExitModel;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  }
  return kExitOther;
}
