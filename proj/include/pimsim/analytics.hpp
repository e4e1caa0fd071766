#pragma once

#include "pimsim/engine.hpp"

namespace pimsim {

// FLOPs per byte of unique DRAM traffic for one GEMM at the given weight
// precision. `bytes` follows the MK + KN + MN convention.
double operational_intensity(const GemmShape& g, int elem_bytes);

// Roofline-attainable throughput (FLOP/s) at a given operational intensity.
double roofline_attainable(double oi, double peak_flops, double peak_bw);

// GPU baseline: roofline with an M-dependent utilization derate on the
// compute ceiling (piecewise linear in log2 M between the curve knots).
double gpu_util_at(double m, const std::vector<UtilKnot>& curve);
double gpu_kernel_time(const GemmShape& g, int elem_bytes,
                       const PlatformConfig& p);
// Whole-token-generation baseline walking the same task graphs.
double gpu_baseline_time(const ModelConfig& model,
                         const WorkloadConfig& workload,
                         const PlatformConfig& p);

struct EnergyReport {
  double activation_j = 0;
  double read_j = 0;
  double compute_j = 0;
  double comm_j = 0;
  double total() const {
    return activation_j + read_j + compute_j + comm_j;
  }
  double background_j = 0;  // standby power over the run, reported separately
};
EnergyReport energy_report(const SimReport& sim, const ScenarioConfig& cfg);

struct PowerReport {
  double logic_w = 0;            // logic chiplet stack per MCoOI
  double all_bank_read_w = 0;    // DRAM column path at full read rate
  double chip_w = 0;             // logic + read, per MCoOI
  double module_w = 0;
  double power_density_w_mm2 = 0;
  double avg_dynamic_w = 0;  // total sim energy / end-to-end time
};
PowerReport power_report(const SimReport& sim, const EnergyReport& e,
                         const ScenarioConfig& cfg);

struct YieldCost {
  double interposer_yield = 0;
  double die_yield = 0;   // all dies on one MCoOI
  double bond_yield = 0;  // all bonds on one MCoOI
  double mcooi_yield = 0;
  double mcooi_cost = 0;
  double module_cost = 0;
  double device_cost = 0;  // all modules plus assembly
  double gpu_cost = 0;
};
YieldCost yield_cost(const ScenarioConfig& cfg);

std::string analytics_json(const SimReport& sim, const ScenarioConfig& cfg);

}  // namespace pimsim
