#pragma once

#include "pimsim/analytics.hpp"

namespace pimsim {

struct RunOptions {
  // Simulate every k-th decode step and scale it to cover the skipped ones.
  // 1 = exact. Keeps long generations tractable without changing energy or
  // breakdown fractions materially.
  int decode_stride = 1;
  bool with_baseline = true;
};

struct RunResult {
  ScenarioConfig cfg;
  SimReport prefill;
  SimReport decode;  // accumulated over all simulated steps
  double ttft = 0;         // prefill end-to-end incl. first token selection
  double decode_time = 0;  // remaining output_len-1 steps
  double e2e = 0;
  int decode_steps = 0;
  double tokens = 0;  // batch * output_len
  double throughput_tok_s = 0;
  double decode_throughput_tok_s = 0;
  EnergyReport energy;

  // Analytical roofline baseline (not a measured system).
  double baseline_ttft = 0;
  double baseline_decode_time = 0;
  double baseline_e2e = 0;

  double e2e_speedup() const { return e2e > 0 ? baseline_e2e / e2e : 0; }
  double ttft_speedup() const { return ttft > 0 ? baseline_ttft / ttft : 0; }

  std::string to_json(bool pretty = true) const;
};

// Full pipeline for one scenario: validate, build the memory system, place
// tensors, generate+map+simulate prefill and every decode step.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

// Figure-family CSV emitters. Each returns the full CSV text including the
// header row; rows follow the order of `results`.
std::string csv_comparison(const std::vector<RunResult>& results);
std::string csv_e2e_speedup(const std::vector<RunResult>& results);
std::string csv_decode_throughput(const std::vector<RunResult>& results);
std::string csv_ttft_crossover(const std::vector<RunResult>& results);
std::string csv_breakdown(const std::vector<RunResult>& results);
std::string csv_energy(const std::vector<RunResult>& results);

std::string scenario_key(const ScenarioConfig& cfg);

}  // namespace pimsim
