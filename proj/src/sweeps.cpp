#include <cmath>
#include <cstdio>
#include <memory>

#include "bubble/harness.hpp"

namespace bubble::harness {

namespace {

constexpr double kSettleTimeoutS = 120.0;

pneumatics::PneumaticSystem make_pneumatics(const SweepOptions& o, int channels, double noise_hpa) {
  pneumatics::PlantProfile plant = o.plant;
  plant.sensor_noise_hpa = noise_hpa;
  return pneumatics::PneumaticSystem(plant, pneumatics::ControllerConfig{}, channels, 1050.0, o.seed);
}

void settle(pneumatics::PneumaticSystem& p, const char* what, double setpoint) {
  if (!p.run_until_settled(kSettleTimeoutS)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: controller did not settle at %.1f hPa", what, setpoint);
    throw Error(buf);
  }
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

std::string line(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

Fig6Result fig6_sweep(const sim::BubbleConfig& config, const SweepOptions& options) {
  const auto model = std::make_shared<const sim::BubbleModel>(config);
  auto pneu = make_pneumatics(options, 1, 0.0);
  Fig6Result r;
  for (int sp = 1010; sp <= 1090; sp += 10) {
    pneu.set_setpoint(0, sp);
    settle(pneu, "fig6", sp);
    const double p = pneu.true_pressure(0);
    const auto state = sim::inflate_shape(model, p);
    sim::RenderOptions clean;
    clean.depth_noise_sigma_mm = 0.0;
    sim::RenderOptions noisy;
    noisy.depth_noise_sigma_mm = options.depth_noise_mm;
    noisy.noise_seed = options.seed;
    noisy.frame_index = r.setpoints.size();
    r.setpoints.push_back(sp);
    r.pressures.push_back(p);
    r.mean_depth_mm.push_back(sim::mean_range_mm(sim::render_depth(state, clean)));
    r.noisy_mean_depth_mm.push_back(sim::mean_range_mm(sim::render_depth(state, noisy)));
  }
  r.fit = fit_quadratic(r.pressures, r.mean_depth_mm);
  r.monotone = strictly_increasing(r.mean_depth_mm);
  r.noisy_monotone = strictly_increasing(r.noisy_mean_depth_mm);
  return r;
}

Fig7Result fig7_sweep(const sim::BubbleConfig& config, const SweepOptions& options) {
  const auto model = std::make_shared<const sim::BubbleModel>(config);
  const auto mug = *object_preset("mug");
  const double thickness = mug.thickness_mm();
  const double rest = config.rest_apex_height_mm;
  auto pneu = make_pneumatics(options, 2, 0.0);

  // Close on the object with both bubbles at the top of the sweep.
  pneu.set_setpoint(0, 1070.0);
  pneu.set_setpoint(1, 1070.0);
  settle(pneu, "fig7 grasp", 1070.0);
  const double pa = pneu.true_pressure(0), pb = pneu.true_pressure(1);
  const double width = thickness - sim::overlap_for_force(*model, pa, pb, options.grasp_force_n) +
                       (model->apex_height_mm(pa) - rest) + (model->apex_height_mm(pb) - rest);
  if (width < 0.0 || width > 66.0) throw DomainError("fig7 grasp width outside the gripper range");

  Fig7Result r;
  for (int sp = 1070; sp >= 1010; sp -= 10) {
    pneu.set_setpoint(0, sp);
    settle(pneu, "fig7", sp);
    const double p = pneu.true_pressure(0);
    r.setpoints.push_back(sp);
    r.pressures.push_back(p);
    r.widths_mm.push_back(width);
    r.force_n.push_back(sim::pair_grasp_force(*model, p, pneu.true_pressure(1), width, thickness));
  }
  r.partner_pressure_hpa = pneu.true_pressure(1);
  r.fit = fit_quadratic(r.pressures, r.force_n);
  double mean = 0.0;
  for (double w : r.widths_mm) mean += w;
  mean /= static_cast<double>(r.widths_mm.size());
  double var = 0.0;
  for (double w : r.widths_mm) var += (w - mean) * (w - mean);
  r.width_stddev_mm = std::sqrt(var / static_cast<double>(r.widths_mm.size()));
  return r;
}

Fig8Result fig8_sweep(const sim::BubbleConfig& config, const SweepOptions& options) {
  const auto model = std::make_shared<const sim::BubbleModel>(config);
  const double rest = config.rest_apex_height_mm;
  const double pressures[] = {1020.0, 1050.0, 1070.0};
  const std::pair<const char*, double> variants[] = {{"standard", 1020.0}, {"wide-grasp", 1070.0}};
  Fig8Result r;
  r.monotone_truth = r.monotone_mask = true;
  std::uint64_t frame = 0;
  for (const char* name : {"mug", "sanitizer", "pen"}) {
    const auto obj = *object_preset(name);
    for (const auto& [variant, width_pressure] : variants) {
      auto pneu = make_pneumatics(options, 1, options.plant.sensor_noise_hpa);
      // Fix the gripper width from the 25 N grasp at the variant's pressure.
      pneu.set_setpoint(0, width_pressure);
      settle(pneu, "fig8 width", width_pressure);
      const auto free_w = sim::inflate_shape(model, pneu.true_pressure(0));
      const auto touch = sim::first_contact_bottom_mm(free_w, obj);
      if (!touch) throw Error("fig8: object misses the membrane");
      const double pw = pneu.true_pressure(0);
      const double overlap = sim::overlap_for_force(*model, pw, pw, options.grasp_force_n);
      const double bottom = *touch - 0.5 * overlap;
      const double width = obj.thickness_mm() + 2.0 * (model->apex_height_mm(pw) - rest) - overlap;

      std::vector<double> truth, masked;
      for (double sp : pressures) {
        pneu.set_setpoint(0, sp);
        settle(pneu, "fig8", sp);
        const double p = pneu.true_pressure(0);
        const double stamp = pneu.estimate(0);
        const auto free_state = sim::inflate_shape(model, p);
        sim::RenderOptions ro;
        ro.depth_noise_sigma_mm = options.depth_noise_mm;
        ro.noise_seed = options.seed;
        ro.frame_index = frame++;
        auto ref = sim::render_depth(free_state, ro);
        ref.pressure_hpa = stamp;
        const auto pressed = sim::place_object(free_state, obj, bottom);
        ro.frame_index = frame++;
        auto cur = sim::render_depth(pressed, ro);
        cur.pressure_hpa = stamp;
        const auto mask = perception::compute_mask(ref, cur, options.pipeline.mask);
        Fig8Cell c{name, variant, sp, p, width, pressed.contact_area_px(), mask.count(),
                   mask_iou(mask.on, pressed.contact)};
        truth.push_back(static_cast<double>(c.truth_area_px));
        masked.push_back(static_cast<double>(c.mask_area_px));
        r.cells.push_back(c);
      }
      if (std::string(variant) == "standard") {
        r.monotone_truth = r.monotone_truth && strictly_increasing(truth);
        r.monotone_mask = r.monotone_mask && strictly_increasing(masked);
      } else if (std::string(name) == "pen") {
        r.pen_empty_wide_low = truth.front() == 0.0 && masked.front() == 0.0;
      }
    }
  }
  return r;
}

std::string fig6_csv(const Fig6Result& r) {
  std::string s = "setpoint_hpa,pressure_hpa,mean_depth_mm,noisy_mean_depth_mm\n";
  for (std::size_t i = 0; i < r.pressures.size(); ++i)
    s += line("%.1f,%.4f,%.6f,%.6f\n", r.setpoints[i], r.pressures[i], r.mean_depth_mm[i], r.noisy_mean_depth_mm[i]);
  s += line("# fit c0=%.9g c1=%.9g c2=%.9g rms=%.3g\n", r.fit.c0, r.fit.c1, r.fit.c2, r.fit.residual);
  return s;
}

std::string fig7_csv(const Fig7Result& r) {
  std::string s = "setpoint_hpa,pressure_hpa,partner_hpa,width_mm,force_n\n";
  for (std::size_t i = 0; i < r.pressures.size(); ++i)
    s += line("%.1f,%.4f,%.4f,%.6f,%.6f\n", r.setpoints[i], r.pressures[i], r.partner_pressure_hpa, r.widths_mm[i],
              r.force_n[i]);
  s += line("# fit c0=%.9g c1=%.9g c2=%.9g rms=%.3g width_std_mm=%.3g\n", r.fit.c0, r.fit.c1, r.fit.c2,
            r.fit.residual, r.width_stddev_mm);
  return s;
}

std::string fig8_csv(const Fig8Result& r) {
  std::string s = "object,variant,setpoint_hpa,pressure_hpa,width_mm,truth_area_px,mask_area_px,iou\n";
  for (const auto& c : r.cells)
    s += line("%s,%s,%.1f,%.4f,%.4f,%zu,%zu,%.4f\n", c.object.c_str(), c.variant.c_str(), c.setpoint_hpa,
              c.pressure_hpa, c.width_mm, c.truth_area_px, c.mask_area_px, c.iou);
  return s;
}

std::string gnuplot_script(const std::string& name) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\nset grid\n";
  s += "set terminal pngcairo size 800,500\nset output '" + name + ".png'\n";
  if (name == "fig6") {
    s += "set xlabel 'pressure (hPa)'\nset ylabel 'mean range (mm)'\n";
    s += "plot 'fig6.csv' using 2:3 with linespoints, '' using 2:4 with points\n";
  } else if (name == "fig7") {
    s += "set xlabel 'pressure (hPa)'\nset ylabel 'grasp force (N)'\n";
    s += "plot 'fig7.csv' using 2:5 with linespoints\n";
  } else {
    s += "set xlabel 'pressure (hPa)'\nset ylabel 'contact area (px)'\n";
    s += "plot for [obj in 'mug sanitizer pen'] 'fig8.csv' using (strcol(1) eq obj && strcol(2) eq 'standard' ? "
         "$3 : 1/0):6 with linespoints title obj\n";
  }
  return s;
}

}  // namespace bubble::harness
