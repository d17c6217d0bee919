// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bubble/harness.hpp"
#include "bubble/perception.hpp"
#include "bubble/pneumatics.hpp"
#include "synthetic.hpp"

using namespace bubble;
using testing::median;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const sim::ObjectPrimitive kObjects[] = {sim::ObjectPrimitive::cylinder(22.0), sim::ObjectPrimitive::cylinder(15.0),
                                         sim::ObjectPrimitive::cylinder(5.0)};

Verdict mask_fidelity() {
  const auto model = std::make_shared<const sim::BubbleModel>(sim::BubbleConfig{});
  perception::PipelineConfig cfg;
  std::vector<double> ious;
  double worst_ms = 0.0, total_ms = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto& obj = kObjects[i % 3];
    const double p = 1010.0 + 80.0 * (i / 19.0);
    const auto free_state = sim::inflate_shape(model, p);
    sim::RenderOptions ro;
    ro.depth_noise_sigma_mm = 0.5;
    ro.noise_seed = 100 + static_cast<std::uint64_t>(i);
    ro.frame_index = 0;
    auto ref = sim::render_depth(free_state, ro);
    const auto ref_ir = sim::render_ir(free_state, ro);
    const auto pressed = sim::press_object(free_state, obj, 25.0);
    ro.frame_index = 1;
    auto cur = sim::render_depth(pressed, ro);
    const auto cur_ir = sim::render_ir(pressed, ro);
    ref.pressure_hpa = cur.pressure_hpa = p;

    perception::ShearPipeline pipe(cfg);
    pipe.reset_reference(ref, ref_ir, p, true);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = pipe.process(cur, cur_ir);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    worst_ms = std::max(worst_ms, ms);
    total_ms += ms;
    ious.push_back(harness::mask_iou(r.mask.on, pressed.contact));
  }
  const double med = median(ious);
  const double mn = *std::min_element(ious.begin(), ious.end());
  const double mean_ms = total_ms / 20.0;
  return {med >= 0.9 && mn >= 0.8 && mean_ms < 50.0,
          fmt("IoU median %.3f min %.3f over 20 scenarios; %.1f ms/frame mean, %.1f ms worst", med, mn, mean_ms,
              worst_ms)};
}

Verdict flow_accuracy() {
  // Synthetic translations.
  const int w = 224, h = 171;
  const testing::BlobTexture tex(11);
  const auto first = tex.render(w, h);
  std::vector<double> epe_medians;
  double worst = 0.0;
  for (int mag = 1; mag <= 5; ++mag)
    for (int dir = 0; dir < 8; ++dir) {
      const double a = dir * std::numbers::pi / 4.0;
      const Vec2 s{mag * std::cos(a), mag * std::sin(a)};
      const auto second = tex.render(w, h, s);
      const auto f = flow::dense_flow(first, second);
      std::vector<double> epe;
      for (int y = 20; y < h - 20; ++y)
        for (int x = 20; x < w - 20; ++x)
          if (f.valid(x, y)) epe.push_back((f.displacement(x, y) - s).norm());
      const double m = median(epe);
      epe_medians.push_back(m);
      worst = std::max(worst, m);
    }
  const double translation_epe = median(epe_medians);

  // Simulator shear: in-patch flow against the projected marker displacement.
  const auto model = std::make_shared<const sim::BubbleModel>(sim::BubbleConfig{});
  std::vector<double> rel_errors;
  const Vec2 shears[] = {{1.0, 0.0}, {0.0, 1.0}, {-0.8, 0.6}, {0.5, -1.2}};
  for (int i = 0; i < 4; ++i) {
    const auto free_state = sim::inflate_shape(model, 1050.0);
    const auto pressed = sim::press_object(free_state, kObjects[i % 2], 25.0);
    const auto sheared = sim::apply_shear(pressed, shears[i]);
    sim::RenderOptions ro;
    ro.noise_seed = 500 + static_cast<std::uint64_t>(i);
    auto ref = sim::render_depth(free_state, ro);
    const auto ref_ir = sim::render_ir(free_state, ro);
    ro.frame_index = 1;
    auto cur = sim::render_depth(sheared, ro);
    const auto cur_ir = sim::render_ir(sheared, ro);
    ref.pressure_hpa = cur.pressure_hpa = 1050.0;
    perception::ShearPipeline pipe;
    pipe.reset_reference(ref, ref_ir, 1050.0, true);
    const auto r = pipe.process(cur, cur_ir);
    const Vec2 truth = (1.0 / model->mm_per_pixel()) * shears[i];
    std::vector<double> dx, dy;
    for (int y = 0; y < r.flow.height(); ++y)
      for (int x = 0; x < r.flow.width(); ++x)
        if (r.flow.valid(x, y) && sheared.contact(x, y)) {
          dx.push_back(r.flow.displacement(x, y).x);
          dy.push_back(r.flow.displacement(x, y).y);
        }
    const Vec2 m{median(dx), median(dy)};
    rel_errors.push_back((m - truth).norm() / truth.norm());
  }
  const double worst_rel = *std::max_element(rel_errors.begin(), rel_errors.end());
  return {translation_epe < 0.25 && worst_rel <= 0.15,
          fmt("translation EPE median %.3f px (worst case %.3f px); shear in-patch median error %.1f%% worst",
              translation_epe, worst, 100.0 * worst_rel)};
}

Verdict geometry_independent_shear() {
  int agree = 0;
  double worst_angle = 0.0;
  std::string failure;
  for (int trial = 0; trial < 16; ++trial) {
    const double a = trial * std::numbers::pi / 8.0 + 0.1;
    const Vec2 shear{1.2 * std::cos(a), 1.2 * std::sin(a)};
    std::array<Vec2, 2> force{};
    const double pressures[] = {1020.0, 1070.0};
    for (int k = 0; k < 2; ++k) {
      harness::Scenario s;
      s.name = "trial";
      s.object = trial % 2 ? "sanitizer" : "mug";
      s.seed = 900 + static_cast<std::uint64_t>(trial);
      s.initial_pressure_hpa = pressures[k];
      s.duration_s = 1.0;
      s.events = {{harness::ScheduleEvent::Kind::shear, 0.5, 0.0, shear, 0}};
      const auto run = harness::run_scenario(s);
      if (!run.ok()) {
        failure = "trial " + std::to_string(trial) + " aborted";
        break;
      }
      // Last telemetry row holds the sheared frame.
      const auto& csv = run.perception_csv;
      const auto start = csv.rfind('\n', csv.size() - 2) + 1;
      double v[10];
      std::sscanf(csv.c_str() + start, "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4],
                  &v[5], &v[6], &v[7], &v[8], &v[9]);
      force[k] = {v[7], v[8]};
    }
    if (!failure.empty()) break;
    const double n0 = force[0].norm(), n1 = force[1].norm();
    const double cosang = (force[0].x * force[1].x + force[0].y * force[1].y) / (n0 * n1);
    const double angle = std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 / std::numbers::pi;
    const bool sign0 = force[0].x * shear.x + force[0].y * shear.y > 0.0;
    const bool sign1 = force[1].x * shear.x + force[1].y * shear.y > 0.0;
    worst_angle = std::max(worst_angle, angle);
    if (n0 > 0.0 && n1 > 0.0 && angle <= 10.0 && sign0 && sign1) ++agree;
  }
  if (!failure.empty()) return {false, failure};
  return {agree == 16, fmt("%d/16 trials agree, worst direction difference %.2f deg", agree, worst_angle)};
}

Verdict fig6() {
  const sim::BubbleConfig cfg;
  const auto r = harness::fig6_sweep(cfg);
  const double rel = std::abs(r.fit.c2 - cfg.geometry_quad_mm_per_hpa2) / cfg.geometry_quad_mm_per_hpa2;
  return {rel <= 0.05 && r.monotone && r.noisy_monotone,
          fmt("c2 %.4e vs %.4e (%.2f%%), monotone %s, noisy monotone %s", r.fit.c2, cfg.geometry_quad_mm_per_hpa2,
              100.0 * rel, r.monotone ? "yes" : "no", r.noisy_monotone ? "yes" : "no")};
}

Verdict fig7() {
  const sim::BubbleConfig cfg;
  const auto r = harness::fig7_sweep(cfg);
  const double rel = std::abs(r.fit.c2 - cfg.force_quad_n_per_hpa2) / std::abs(cfg.force_quad_n_per_hpa2);
  return {rel <= 0.05 && r.width_stddev_mm <= 1e-3,
          fmt("c2 %.5f vs %.5f (%.2f%%), width std %.2e mm", r.fit.c2, cfg.force_quad_n_per_hpa2, 100.0 * rel,
              r.width_stddev_mm)};
}

Verdict fig8() {
  const auto r = harness::fig8_sweep(sim::BubbleConfig{});
  return {r.monotone_truth && r.monotone_mask && r.pen_empty_wide_low,
          fmt("monotone truth %s, mask %s; pen empty on wide grasp at 1020 hPa %s", r.monotone_truth ? "yes" : "no",
              r.monotone_mask ? "yes" : "no", r.pen_empty_wide_low ? "yes" : "no")};
}

struct SettleOutcome {
  bool settled = false;
  double time_s = 0.0;
  bool held = true;
  double worst_hold_error = 0.0;
  long unsafe = 0;
};

SettleOutcome settle_pair(double from, double to, std::uint64_t seed) {
  pneumatics::PneumaticSystem sys({}, {}, 1, from, seed);
  SettleOutcome o;
  sys.set_telemetry_sink([&](const pneumatics::TelemetryRow& r) { o.unsafe += r.pump && r.valve; });
  sys.set_setpoint(0, from);
  if (!sys.run_until_settled(120.0)) return o;
  sys.set_setpoint(0, to);
  const double t0 = sys.time_s();
  o.settled = sys.run_until_settled(120.0);
  o.time_s = sys.time_s() - t0;
  const int steps = static_cast<int>(std::lround(10.0 / 0.01));
  for (int i = 0; i < steps; ++i) {
    sys.step();
    const double err = std::abs(sys.true_pressure(0) - to);
    o.worst_hold_error = std::max(o.worst_hold_error, err);
    if (err > 2.0) o.held = false;
  }
  return o;
}

Verdict controller() {
  int pairs = 0, ok = 0, slower = 0, symmetric = 0;
  long unsafe = 0;
  double worst_hold = 0.0;
  for (int a = 1010; a <= 1090; a += 10)
    for (int b = 1010; b <= 1090; b += 10) {
      const auto o = settle_pair(a, b, static_cast<std::uint64_t>(a * 7 + b));
      ++pairs;
      unsafe += o.unsafe;
      worst_hold = std::max(worst_hold, o.worst_hold_error);
      if (o.settled && o.held) ++ok;
      if (b > a) {
        ++symmetric;
        const auto down = settle_pair(b, a, static_cast<std::uint64_t>(b * 7 + a));
        unsafe += down.unsafe;
        if (down.settled && down.time_s > o.time_s) ++slower;
      }
    }
  return {ok == pairs && unsafe == 0 && slower == symmetric,
          fmt("%d/%d pairs settle and hold 10 s (worst hold error %.2f hPa); %ld unsafe samples; deflation slower "
              "in %d/%d symmetric pairs",
              ok, pairs, worst_hold, unsafe, slower, symmetric)};
}

Verdict determinism() {
  const auto s = harness::scenario_preset("mug-shear");
  const auto a = harness::run_scenario(s);
  const auto b = harness::run_scenario(s);
  const bool same = a.record == b.record && a.perception_csv == b.perception_csv &&
                    a.pneumatics_csv == b.pneumatics_csv && a.contact_truth == b.contact_truth;
  const bool replay_equal = harness::replay(a.record) == a.perception_csv;
  return {same && replay_equal && a.ok(),
          fmt("identical runs %s (%zu record bytes); replay telemetry %s", same ? "byte-equal" : "differ",
              a.record.size(), replay_equal ? "bit-equal" : "differs")};
}

Verdict calibration() {
  const std::array<double, 9> k{0.012, -0.003, 0.0005, 0.002, 0.015, -0.0004, 0.0001, 0.0003, 0.0009};
  auto make = [&](double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> raw_xy(-3000.0, 3000.0), raw_t(-40000.0, 40000.0);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<perception::CalibrationSample> samples;
    for (int i = 0; i < 60; ++i) {
      perception::CalibrationSample s;
      s.raw = {raw_xy(rng), raw_xy(rng), raw_t(rng)};
      perception::GainMatrix g;
      g.k = k;
      s.applied_force = g.apply(s.raw);
      for (double& f : s.applied_force) f *= 1.0 + noise * unit(rng);
      samples.push_back(s);
    }
    return perception::calibrate_gain(samples);
  };
  auto rel_error = [&](const perception::GainMatrix& g) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 9; ++i) {
      num += (g.k[i] - k[i]) * (g.k[i] - k[i]);
      den += k[i] * k[i];
    }
    return std::sqrt(num / den);
  };
  const double clean = rel_error(make(0.0, 3).gain);
  const double noisy = rel_error(make(0.05, 4).gain);
  return {clean <= 0.01 && noisy <= 0.10, fmt("relative error %.2e noise-free, %.2f%% at 5%% force noise", clean,
                                               100.0 * noisy)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"mask fidelity", mask_fidelity},
      {"flow accuracy", flow_accuracy},
      {"geometry-independent shear", geometry_independent_shear},
      {"depth vs pressure trend", fig6},
      {"force vs pressure trend", fig7},
      {"patch area trend", fig8},
      {"pressure controller", controller},
      {"determinism and replay", determinism},
      {"calibration round trip", calibration},
  };
  int failed = 0, n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str(), s);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
