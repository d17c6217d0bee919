#include "bubble/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "bubble/frame_io.hpp"

namespace bubble::harness {

namespace {

constexpr double kPenetrationTolMm = 1e-6;

double max_penetration_mm(const sim::MembraneState& s) {
  if (!s.object) return 0.0;
  const auto& m = *s.model;
  const double standoff = m.config().camera_standoff_mm;
  double worst = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const double surf = s.object->surface_mm(m.pixel_to_mm(x, y));
      if (std::isfinite(surf)) worst = std::max(worst, (s.range_mm(x, y) - standoff) - surf);
    }
  return std::max(worst, 0.0);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

bool RunRecord::ok() const {
  if (!abort_reason.empty()) return false;
  for (const auto& a : audits)
    if (!a.passed) return false;
  return true;
}

double mask_iou(const Grid<std::uint8_t>& a, const Grid<std::uint8_t>& b) {
  if (!a.same_shape(b)) throw ContractError("masks differ in size");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]);
    uni += (a[i] || b[i]);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

RunRecord run_scenario(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  RunRecord run;
  const auto model = std::make_shared<const sim::BubbleModel>(scenario.bubble_config());
  const auto object = object_preset(scenario.object);

  pneumatics::PlantProfile plant = options.plant;
  plant.sensor_noise_hpa = scenario.sensor_noise_hpa;
  pneumatics::ControllerConfig controller = options.controller;
  controller.setpoint_hpa = scenario.initial_pressure_hpa;
  pneumatics::PneumaticSystem pneu(plant, controller, 2, scenario.initial_pressure_hpa, scenario.seed);
  long unsafe_steps = 0, pneu_rows = 0;
  run.pneumatics_csv = pneumatics::telemetry_csv_header();
  pneu.set_telemetry_sink([&](const pneumatics::TelemetryRow& r) {
    run.pneumatics_csv += pneumatics::telemetry_csv_row(r);
    ++pneu_rows;
    if (r.pump && r.valve) ++unsafe_steps;
  });

  perception::ShearPipeline pipeline(options.pipeline);
  run.perception_csv = perception::telemetry_csv_header();

  sim::MembraneState state;
  bool grasped = false;
  Vec2 applied_shear{};
  std::uint64_t noise_frame = 0;
  int entry_index = 0;
  double worst_penetration = 0.0;

  auto capture = [&](io::FrameRole role) {
    sim::RenderOptions ro;
    ro.depth_noise_sigma_mm = scenario.depth_noise_mm;
    ro.noise_seed = scenario.seed;
    ro.frame_index = noise_frame++;
    ro.timestamp_s = pneu.time_s();
    io::RecordEntry e;
    e.index = entry_index++;
    e.role = role;
    e.time_s = pneu.time_s();
    e.pressure_hpa = pneu.estimate(0);
    e.depth = sim::render_depth(state, ro);
    e.ir = sim::render_ir(state, ro);
    const std::string bytes = io::encode_record_entry(e);
    run.record += bytes;
    worst_penetration = std::max(worst_penetration, max_penetration_mm(state));
    return io::decode_record(bytes).front();
  };

  auto settle_and_reset = [&](const std::string& step) {
    if (!pneu.run_until_settled(options.settle_timeout_s)) {
      run.abort_reason = step + ": pressure did not settle within " + fmt("%.0f s", options.settle_timeout_s) +
                         "; reference reset impossible";
      return false;
    }
    state = sim::inflate_shape(model, pneu.true_pressure(0));
    grasped = false;
    applied_shear = {};
    const auto ref = capture(io::FrameRole::reference);
    if (pipeline.reset_reference(ref.depth, ref.ir, ref.pressure_hpa, pneu.settled(0)) !=
        perception::ResetStatus::accepted) {
      run.abort_reason = step + ": reference reset rejected while pressure unsettled";
      return false;
    }
    ++run.references;
    run.log.push_back(step + fmt(": settled at %.2f hPa, reference captured", ref.pressure_hpa));
    if (object && scenario.grasp_force_n > 0.0) {
      state = sim::press_object(state, *object, scenario.grasp_force_n);
      grasped = state.contact_area_px() > 0;
      run.log.push_back(std::string("grasp ") + scenario.object + fmt(" at %.1f N: contact %.0f px",
                                                                         scenario.grasp_force_n,
                                                                         static_cast<double>(state.contact_area_px())));
    }
    return true;
  };

  auto handle_event = [&](const ScheduleEvent& e) {
    if (e.kind == ScheduleEvent::Kind::setpoint) {
      pneu.set_setpoint(0, e.hpa);
      pneu.set_setpoint(1, e.hpa);
      run.log.push_back(e.describe() + ": object released, waiting for settle");
      return settle_and_reset(e.describe());
    }
    if (!grasped) {
      run.abort_reason = e.describe() + ": shear requires an established grasp";
      return false;
    }
    state = sim::apply_shear(state, e.shear_mm - applied_shear);
    applied_shear = e.shear_mm;
    run.log.push_back(e.describe() + ": applied");
    return true;
  };

  bool alive = settle_and_reset("initial settle");
  double origin = pneu.time_s();
  std::size_t next_event = 0;
  for (long k = 0; alive; ++k) {
    const double t = static_cast<double>(k) * scenario.frame_period_s;
    if (t > scenario.duration_s + 1e-9) break;
    while (alive && next_event < scenario.events.size() && scenario.events[next_event].time_s <= t + 1e-9) {
      const double before = pneu.time_s();
      alive = handle_event(scenario.events[next_event++]);
      origin += pneu.time_s() - before;  // schedule time pauses while the controller settles
    }
    if (!alive) break;
    const double target = origin + t;
    if (target > pneu.time_s()) pneu.advance(target - pneu.time_s());

    const auto frame = capture(io::FrameRole::frame);
    perception::FrameResult result;
    try {
      result = pipeline.process(frame.depth, frame.ir);
    } catch (const StaleReferenceError& err) {
      run.abort_reason = "frame " + std::to_string(frame.index) + ": " + err.what();
      break;
    }
    run.perception_csv += perception::telemetry_csv_row(frame.index, result.estimate);
    run.contact_truth += io::encode_contact_rle(state.contact);
    run.mask_areas.push_back(result.mask.count());
    run.mask_iou.push_back(mask_iou(result.mask.on, state.contact));
    ++run.frames;
  }

  // Post-hoc audits over the emitted record and telemetry.
  AuditResult reset{"reset-discipline", true, ""};
  {
    const auto entries = io::decode_record(run.record);
    const io::RecordEntry* ref = nullptr;
    int checked = 0;
    for (const auto& e : entries) {
      if (e.role == io::FrameRole::reference) {
        ref = &e;
        continue;
      }
      ++checked;
      if (!ref) {
        reset.passed = false;
        reset.detail = "frame " + std::to_string(e.index) + " has no reference";
        break;
      }
      if (std::abs(e.pressure_hpa - ref->pressure_hpa) > options.pipeline.mask.pressure_tolerance_hpa) {
        reset.passed = false;
        reset.detail = "frame " + std::to_string(e.index) +
                       fmt(" at %.2f hPa against reference at %.2f hPa", e.pressure_hpa, ref->pressure_hpa);
        break;
      }
    }
    if (reset.passed) reset.detail = std::to_string(checked) + " frames checked";
  }
  run.audits.push_back(reset);
  run.audits.push_back({"safety", unsafe_steps == 0,
                        std::to_string(pneu_rows) + " actuation samples, " + std::to_string(unsafe_steps) +
                            " with pump and valve both on"});
  run.audits.push_back({"penetration-free", worst_penetration <= kPenetrationTolMm,
                        fmt("max penetration %.3g mm", worst_penetration)});
  run.audits.push_back({"schedule", run.abort_reason.empty(),
                        run.abort_reason.empty() ? "completed" : run.abort_reason});
  return run;
}

std::string replay(std::string_view record, const perception::PipelineConfig& config) {
  perception::ShearPipeline pipeline(config);
  std::string csv = perception::telemetry_csv_header();
  for (const auto& e : io::decode_record(record)) {
    if (e.role == io::FrameRole::reference) {
      pipeline.reset_reference(e.depth, e.ir, e.pressure_hpa, true);
      continue;
    }
    if (!pipeline.has_reference()) throw FormatError("frame entry before any reference", 0);
    csv += perception::telemetry_csv_row(e.index, pipeline.process(e.depth, e.ir).estimate);
  }
  return csv;
}

void write_run(const RunRecord& run, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  io::write_file((d / "record.bbl").string(), run.record);
  io::write_file((d / "contact.bblc").string(), run.contact_truth);
  io::write_file((d / "perception.csv").string(), run.perception_csv);
  io::write_file((d / "pneumatics.csv").string(), run.pneumatics_csv);
  std::string audit;
  for (const auto& a : run.audits) audit += (a.passed ? "PASS " : "FAIL ") + a.name + ": " + a.detail + "\n";
  for (const auto& l : run.log) audit += "log: " + l + "\n";
  io::write_file((d / "audit.txt").string(), audit);
}

}  // namespace bubble::harness
