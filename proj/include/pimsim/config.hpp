#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pimsim {

// ---------------------------------------------------------------------------
// Kernel and level vocabulary shared across the whole pipeline.

enum class Kernel {
  QkvProj,
  ScoreSoftmax,
  Context,
  OutProj,
  GateProj,
  UpProj,
  DownProj,
  ElementwiseMul,
  RmsNorm,
  ResidualAdd,
  LmHead,
  Argmax,
};

enum class Level { Root, Channel, Rank, Chip };

const char* kernel_name(Kernel k);
const char* level_name(Level l);
bool is_matrix_kernel(Kernel k);

struct GemmShape {
  std::int64_t m = 0;
  std::int64_t k = 0;
  std::int64_t n = 0;

  double flops() const { return 2.0 * double(m) * double(k) * double(n); }
  bool operator==(const GemmShape&) const = default;
};

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MappingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration blocks.

struct DramTiming {
  double tccd = 2.5e-9;
  double trcd = 14e-9;
  double trc = 48e-9;
  double trfc = 350e-9;
  double trefi = 3.9e-6;
};

struct DramCurrents {
  double idd0 = 0.538;   // A, activate-precharge cycling (all-bank convention)
  double idd3n = 0.500;  // A, active standby
  double idd4r = 5.139;  // A, all-bank burst read
};

struct DramConfig {
  int modules = 4;
  int ranks_per_module = 4;
  int chips_per_rank = 16;
  int banks_per_chip = 32;
  int bank_interface_bits = 128;
  std::int64_t row_bytes = 1024;
  std::uint64_t capacity_total = 0;  // bytes
  double clock_hz = 400e6;
  DramTiming timing;
  DramCurrents currents;
  double vdd = 1.1;

  int total_banks() const {
    return modules * ranks_per_module * chips_per_rank * banks_per_chip;
  }
  int total_chips() const { return modules * ranks_per_module * chips_per_rank; }
  std::int64_t interface_bytes() const { return bank_interface_bits / 8; }
  double bank_bandwidth() const { return double(interface_bytes()) * clock_hz; }
  double chip_bandwidth() const { return bank_bandwidth() * banks_per_chip; }
};

struct LogicConfig {
  int systolic_rows = 8;
  int systolic_cols = 8;
  int simd_mul_lanes = 16;
  int adder_trees_per_chip = 8;
  int adder_tree_fanin = 32;
  int max_tree_fanin = 64;
  int exp_lanes = 32;
  std::int64_t sram_bytes = 256 * 1024;
  int mul_pipe_stages = 2;
  int add_pipe_stages = 1;
  std::map<Level, std::set<Kernel>> level_kernel_support;
};

struct ModelConfig {
  std::string name;
  std::int64_t hidden_dim = 0;
  int n_layers = 0;
  int n_heads = 0;
  int n_kv_heads = 0;
  std::int64_t head_dim = 0;
  std::int64_t ffn_dim = 0;
  std::int64_t vocab_size = 0;
  int elem_bytes = 2;

  int gqa_group() const { return n_kv_heads > 0 ? n_heads / n_kv_heads : 0; }
  // Fused QKV weight columns: Q plus K,V sized for the KV-head count.
  std::int64_t qkv_cols() const {
    return hidden_dim + 2 * std::int64_t(n_kv_heads) * head_dim;
  }
};

struct WorkloadConfig {
  int batch = 1;
  int input_len = 0;
  int output_len = 0;
  int max_context = 0;
};

// Interconnect parameters. One row per connection class; the switch->controller
// bandwidth is divided among the attached modules.
struct LinkParams {
  double bandwidth = 32e9;  // bytes/s
  double link_latency = 20e-9;
  double src_port_latency = 5e-9;
  double dst_port_latency = 5e-9;
};

struct NetworkConfig {
  double switch_total_bandwidth = 128e9;  // shared across modules
  LinkParams switch_to_ctrl{32e9, 20e-9, 25e-9, 5e-9};
  LinkParams ctrl_to_ctrl{32e9, 20e-9, 5e-9, 5e-9};
  LinkParams rank_to_ctrl{32e9, 20e-9, 5e-9, 5e-9};
  LinkParams rank_to_rank{32e9, 20e-9, 5e-9, 5e-9};
  double host_ingress_latency = 0.0;  // fixed delay before prefill starts
};

// GPU utilization curve knot: fraction of peak GEMM throughput at a given M.
struct UtilKnot {
  double m;
  double util;
};

// Per-op energy constants and platform-level power/cost inputs. The per-op
// numbers are modeling inputs back-solved from aggregate logic power, not
// measured values.
struct PlatformConfig {
  // Energy constants.
  double pj_per_flop_systolic = 0.113;
  double pj_per_flop_simd = 0.113;
  double pj_per_exp_op = 1.0;
  double pj_per_bit_link = 7.0;
  // Smallest billable link transaction (DMA message size); short transfers
  // pay for a full one.
  double link_min_transfer_bytes = 8192.0;
  double read_energy_fraction = 0.34;  // column-path share of IDD4R energy
  // Power constants.
  double logic_power_w = 0.185;
  double logic_area_mm2 = 0.98;
  // Yield / cost inputs (calibrated to the published component yields).
  double interposer_yield = 0.94;
  double per_die_yield = 0.999552;
  double per_bond_yield = 0.99981;
  int chiplets_per_mcooi = 68;  // 64 memory chiplets + 4 logic chiplets
  double mcooi_die_cost = 1.70;
  double mcooi_interposer_cost = 1.20;
  double mcooi_bonding_cost = 0.565;
  int mcoois_per_module = 16;
  double module_assembly_cost = 0.39;
  // GPU baseline roofline and cost.
  double gpu_peak_bw = 3.35e12;
  double gpu_peak_flops = 1.98e15;
  std::vector<UtilKnot> gpu_util_curve{{16, 0.10}, {128, 0.25}, {1024, 1.0}};
  double gpu_die_cost = 486.0;
  double gpu_interposer_cost = 408.0;
  double gpu_hbm_stacks = 6.0;
  double gpu_hbm_stack_gb = 16.0;
  double gpu_hbm_cost_per_gb = 110.0;
  double gpu_assembly_cost = 500.0;
  double gpu_assembly_yield = 0.97;
  double gpu_tdp_w = 700.0;
  double gpu_power_fraction = 0.80;
};

struct ScenarioConfig {
  std::string arch_name;
  DramConfig dram;
  LogicConfig logic;
  NetworkConfig network;
  ModelConfig model;
  WorkloadConfig workload;
  PlatformConfig platform;
  bool activation_overlap = true;
  bool pad_indivisible = true;
};

// ---------------------------------------------------------------------------
// Derived peak rates.

struct PeakSpec {
  double peak_bandwidth = 0;  // bytes/s
  double peak_gemm = 0;       // FLOP/s
  double peak_simd = 0;       // FLOP/s
  std::uint64_t capacity = 0;

  // Table-style display values. Rates use decimal giga with a binary tera
  // step (8192 banks x 6.4 GB/s = 52428.8 GB/s = 51.2 "TB/s"); capacity is
  // natively binary.
  double bw_tb_binary() const { return peak_bandwidth / (1024.0 * 1e9); }
  double gemm_tflops_binary() const { return peak_gemm / (1024.0 * 1e9); }
  double simd_tflops_binary() const { return peak_simd / (1024.0 * 1e9); }
  double capacity_gb_binary() const { return double(capacity) / (1ull << 30); }
  double bw_tb_decimal() const { return peak_bandwidth / 1e12; }
  double gemm_tflops_decimal() const { return peak_gemm / 1e12; }
  double simd_tflops_decimal() const { return peak_simd / 1e12; }
};

PeakSpec derive_peaks(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Validation.

struct Violation {
  std::string field;
  std::string message;
  bool warning = false;
};

struct ValidationReport {
  std::vector<Violation> items;
  bool ok() const {
    for (const auto& v : items)
      if (!v.warning) return false;
    return true;
  }
  std::string to_string() const;
};

ValidationReport validate(const ScenarioConfig& cfg);
void require_valid(const ScenarioConfig& cfg);  // throws ConfigError

// ---------------------------------------------------------------------------
// Presets and loading.

std::vector<std::string> arch_preset_names();
std::vector<std::string> model_preset_names();
DramConfig arch_preset(const std::string& name);  // throws on unknown name
ModelConfig model_preset(const std::string& name);

ScenarioConfig default_scenario();  // D1 + llama2-7b, empty workload

// Load a scenario from a JSON config file. Sections: arch (preset name),
// dram, logic, network, model, workload, platform. Missing fields take
// preset/default values. Throws ConfigError naming the offending field path.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig scenario_from_json_text(const std::string& text);
std::string serialize_scenario(const ScenarioConfig& cfg);

}  // namespace pimsim
