#pragma once

#include <array>

#include "pimsim/mapper.hpp"

namespace pimsim {

// Per-bank systolic schedule length in cycles for one sub-GEMM. Inputs are
// streamed row-tile by row-tile; weights re-stream for every 8-row block.
double systolic_gemm_cycles(const GemmShape& per_bank, const LogicConfig& lc);

// Per-bank SIMD contract: gemv/elementwise are bank-rate limited (one fp16
// per interface lane per cycle), exp uses the 32-lane exponential unit,
// max-reduce the 64-to-1 tree.
enum class SimdKind { Gemv, Elementwise, Exp, MaxReduce };
double simd_cycles(SimdKind kind, std::int64_t elems, const DramConfig& d,
                   const LogicConfig& lc);

// SIMD pipeline cycles for `elems` elements on one chip.
double simd_kernel_cycles(Kernel k, std::int64_t elems, const DramConfig& d,
                          const LogicConfig& lc);

// Time to stream `bytes` out of one bank touching `rows` DRAM rows. With
// activation overlap only the first activation is exposed.
double dram_stream_time(double bytes, std::int64_t rows,
                        const ScenarioConfig& cfg);

// Store-and-forward latency of one transfer along a unit path, ignoring
// contention (the simulator adds queueing on top).
double comm_time(double bytes, const std::vector<int>& path,
                 const MemorySystem& sys);

struct Breakdown {
  double compute = 0;
  double comm = 0;
  double queueing = 0;
  double total() const { return compute + comm + queueing; }
};

struct SimReport {
  double makespan = 0;          // without refresh
  double refresh_overhead = 0;  // additive
  double end_to_end() const { return makespan + refresh_overhead; }
  Breakdown critical_path;

  // Activity totals for the energy model.
  double flops = 0;
  double exp_ops = 0;
  double dram_bytes_read = 0;
  double row_activations = 0;
  double link_bytes = 0;  // bytes crossing at least one physical link
  // Billable link traffic: every transfer pays at least one minimum-size
  // link transaction. The per-category split is kept for diagnostics.
  double comm_energy_bytes = 0;
  double billed_broadcast_bytes = 0;
  double billed_gather_bytes = 0;
  double comm_messages = 0;
  // Critical-path communication split by edge category (Broadcast, Gather,
  // Bus, Local), diagnostics only.
  std::array<double, 4> cp_comm_by_cat{};
  std::map<std::string, double> busy_by_kernel;  // unit-seconds

  std::string to_json() const;
};

SimReport simulate(const MappedGraph& g, const MemorySystem& sys,
                   const ScenarioConfig& cfg);

// Chip-level duration of one compute sub-task (max of DRAM stream and
// compute). Exposed for unit tests.
double subtask_duration(const SubTask& s, const ScenarioConfig& cfg);

void merge_report(SimReport& into, const SimReport& step);

}  // namespace pimsim
