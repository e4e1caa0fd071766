#include "pimsim/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "pimsim/taskgraph.hpp"

namespace pimsim {

double operational_intensity(const GemmShape& g, int elem_bytes) {
  double bytes = double(elem_bytes) * double(g.m * g.k + g.k * g.n + g.m * g.n);
  return g.flops() / bytes;
}

double roofline_attainable(double oi, double peak_flops, double peak_bw) {
  return std::min(peak_flops, peak_bw * oi);
}

double gpu_util_at(double m, const std::vector<UtilKnot>& curve) {
  if (curve.empty()) return 1.0;
  if (m <= curve.front().m) return curve.front().util;
  if (m >= curve.back().m) return curve.back().util;
  for (size_t i = 0; i + 1 < curve.size(); ++i) {
    if (m <= curve[i + 1].m) {
      double x0 = std::log2(curve[i].m), x1 = std::log2(curve[i + 1].m);
      double f = (std::log2(m) - x0) / (x1 - x0);
      return curve[i].util + f * (curve[i + 1].util - curve[i].util);
    }
  }
  return curve.back().util;
}

double gpu_kernel_time(const GemmShape& g, int elem_bytes,
                       const PlatformConfig& p) {
  double oi = operational_intensity(g, elem_bytes);
  double ceiling = p.gpu_peak_flops * gpu_util_at(double(g.m), p.gpu_util_curve);
  double attainable = std::min(ceiling, p.gpu_peak_bw * oi);
  return g.flops() / attainable;
}

double gpu_baseline_time(const ModelConfig& model,
                         const WorkloadConfig& workload,
                         const PlatformConfig& p) {
  auto graph_time = [&](const TaskGraph& g) {
    double t = 0;
    for (const auto& n : g.nodes) {
      if (n.gemm) {
        t += gpu_kernel_time(*n.gemm, model.elem_bytes, p);
      } else if (n.elems > 0) {
        // Elementwise kernels are bandwidth bound: two reads + one write.
        t += 3.0 * double(n.elems) * model.elem_bytes / p.gpu_peak_bw;
      }
    }
    return t;
  };
  double total = graph_time(build_prefill_graph(model, workload));
  for (int s = 0; s < workload.output_len; ++s)
    total += graph_time(
        build_decode_step_graph(model, workload, workload.input_len + s));
  return total;
}

EnergyReport energy_report(const SimReport& sim, const ScenarioConfig& cfg) {
  const auto& d = cfg.dram;
  const auto& p = cfg.platform;
  EnergyReport e;
  e.activation_j = sim.row_activations *
                   (d.currents.idd0 - d.currents.idd3n) * d.vdd *
                   d.timing.trc;
  double read_w =
      p.read_energy_fraction * (d.currents.idd4r - d.currents.idd3n) * d.vdd;
  e.read_j = read_w * sim.dram_bytes_read / d.chip_bandwidth();
  e.compute_j = sim.flops * p.pj_per_flop_systolic * 1e-12 +
                sim.exp_ops * p.pj_per_exp_op * 1e-12;
  e.comm_j = sim.comm_energy_bytes * 8.0 * p.pj_per_bit_link * 1e-12;
  e.background_j = sim.end_to_end() * d.currents.idd3n * d.vdd *
                   double(d.total_chips());
  return e;
}

PowerReport power_report(const SimReport& sim, const EnergyReport& e,
                         const ScenarioConfig& cfg) {
  const auto& d = cfg.dram;
  const auto& p = cfg.platform;
  PowerReport r;
  r.logic_w = p.logic_power_w;
  r.all_bank_read_w =
      p.read_energy_fraction * (d.currents.idd4r - d.currents.idd3n) * d.vdd;
  r.chip_w = r.logic_w + r.all_bank_read_w;
  r.module_w = r.chip_w * p.mcoois_per_module;
  r.power_density_w_mm2 = p.logic_power_w / p.logic_area_mm2;
  if (sim.end_to_end() > 0) r.avg_dynamic_w = e.total() / sim.end_to_end();
  return r;
}

YieldCost yield_cost(const ScenarioConfig& cfg) {
  const auto& p = cfg.platform;
  YieldCost y;
  y.interposer_yield = p.interposer_yield;
  y.die_yield = std::pow(p.per_die_yield, p.chiplets_per_mcooi);
  y.bond_yield = std::pow(p.per_bond_yield, p.chiplets_per_mcooi);
  y.mcooi_yield = y.interposer_yield * y.die_yield * y.bond_yield;
  double build =
      p.mcooi_die_cost + p.mcooi_interposer_cost + p.mcooi_bonding_cost;
  y.mcooi_cost = build / y.mcooi_yield;
  y.module_cost = y.mcooi_cost * p.mcoois_per_module + p.module_assembly_cost;
  y.device_cost = y.module_cost * cfg.dram.modules;
  double gpu_build = p.gpu_die_cost + p.gpu_interposer_cost +
                     p.gpu_hbm_stacks * p.gpu_hbm_stack_gb *
                         p.gpu_hbm_cost_per_gb +
                     p.gpu_assembly_cost;
  y.gpu_cost = gpu_build / p.gpu_assembly_yield;
  return y;
}

std::string analytics_json(const SimReport& sim, const ScenarioConfig& cfg) {
  EnergyReport e = energy_report(sim, cfg);
  PowerReport pw = power_report(sim, e, cfg);
  YieldCost y = yield_cost(cfg);
  nlohmann::ordered_json j;
  j["energy_j"] = {{"activation", e.activation_j}, {"read", e.read_j},
                   {"compute", e.compute_j},       {"comm", e.comm_j},
                   {"total", e.total()},           {"background", e.background_j}};
  j["power_w"] = {{"logic", pw.logic_w},
                  {"all_bank_read", pw.all_bank_read_w},
                  {"chip", pw.chip_w},
                  {"module", pw.module_w},
                  {"density_w_mm2", pw.power_density_w_mm2},
                  {"avg_dynamic", pw.avg_dynamic_w}};
  j["yield"] = {{"interposer", y.interposer_yield}, {"die", y.die_yield},
                {"bond", y.bond_yield},             {"mcooi", y.mcooi_yield}};
  j["cost_usd"] = {{"mcooi", y.mcooi_cost},
                   {"module", y.module_cost},
                   {"device", y.device_cost},
                   {"gpu_module", y.gpu_cost}};
  return j.dump(2);
}

}  // namespace pimsim
