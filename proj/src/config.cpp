#include "pimsim/config.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pimsim {

using json = nlohmann::ordered_json;

const char* kernel_name(Kernel k) {
  switch (k) {
    case Kernel::QkvProj: return "qkv_proj";
    case Kernel::ScoreSoftmax: return "score_softmax";
    case Kernel::Context: return "context";
    case Kernel::OutProj: return "out_proj";
    case Kernel::GateProj: return "gate_proj";
    case Kernel::UpProj: return "up_proj";
    case Kernel::DownProj: return "down_proj";
    case Kernel::ElementwiseMul: return "elementwise_mul";
    case Kernel::RmsNorm: return "rmsnorm";
    case Kernel::ResidualAdd: return "residual_add";
    case Kernel::LmHead: return "lm_head";
    case Kernel::Argmax: return "argmax";
  }
  return "?";
}

const char* level_name(Level l) {
  switch (l) {
    case Level::Root: return "root";
    case Level::Channel: return "channel";
    case Level::Rank: return "rank";
    case Level::Chip: return "chip";
  }
  return "?";
}

bool is_matrix_kernel(Kernel k) {
  switch (k) {
    case Kernel::QkvProj:
    case Kernel::ScoreSoftmax:
    case Kernel::Context:
    case Kernel::OutProj:
    case Kernel::GateProj:
    case Kernel::UpProj:
    case Kernel::DownProj:
    case Kernel::LmHead:
      return true;
    default:
      return false;
  }
}

static std::set<Kernel> all_compute_kernels() {
  return {Kernel::QkvProj,       Kernel::ScoreSoftmax, Kernel::Context,
          Kernel::OutProj,       Kernel::GateProj,     Kernel::UpProj,
          Kernel::DownProj,      Kernel::ElementwiseMul,
          Kernel::RmsNorm,       Kernel::ResidualAdd,  Kernel::LmHead,
          Kernel::Argmax};
}

static LogicConfig default_logic() {
  LogicConfig lc;
  lc.level_kernel_support[Level::Chip] = all_compute_kernels();
  lc.level_kernel_support[Level::Rank] = {Kernel::Argmax};
  lc.level_kernel_support[Level::Channel] = {Kernel::Argmax};
  lc.level_kernel_support[Level::Root] = {Kernel::Argmax};
  return lc;
}

// ---------------------------------------------------------------------------
// Presets.

std::vector<std::string> arch_preset_names() {
  return {"D1", "D2", "D3", "D4", "D5"};
}

std::vector<std::string> model_preset_names() {
  return {"llama2-7b", "mistral-7b", "llama3-70b"};
}

DramConfig arch_preset(const std::string& name) {
  DramConfig d;
  auto cap_gib = [](std::uint64_t g) { return g << 30; };
  if (name == "D1") {  // S-4M-4R-16C-128
    d.modules = 4; d.ranks_per_module = 4; d.chips_per_rank = 16;
    d.capacity_total = cap_gib(128);
  } else if (name == "D2") {  // S-8M-4R-16C-256
    d.modules = 8; d.ranks_per_module = 4; d.chips_per_rank = 16;
    d.capacity_total = cap_gib(256);
  } else if (name == "D3") {  // S-8M-4R-8C-128
    d.modules = 8; d.ranks_per_module = 4; d.chips_per_rank = 8;
    d.capacity_total = cap_gib(128);
  } else if (name == "D4") {  // S-8M-8R-8C-256
    d.modules = 8; d.ranks_per_module = 8; d.chips_per_rank = 8;
    d.capacity_total = cap_gib(256);
  } else if (name == "D5") {  // S-16M-8R-8C-512
    d.modules = 16; d.ranks_per_module = 8; d.chips_per_rank = 8;
    d.capacity_total = cap_gib(512);
  } else {
    std::ostringstream os;
    os << "unknown arch preset '" << name << "'; known presets:";
    for (const auto& p : arch_preset_names()) os << " " << p;
    throw ConfigError(os.str());
  }
  return d;
}

ModelConfig model_preset(const std::string& name) {
  ModelConfig m;
  m.name = name;
  if (name == "llama2-7b") {
    m.hidden_dim = 4096; m.n_layers = 32; m.n_heads = 32; m.n_kv_heads = 32;
    m.head_dim = 128; m.ffn_dim = 11008; m.vocab_size = 32000;
  } else if (name == "mistral-7b") {
    m.hidden_dim = 4096; m.n_layers = 32; m.n_heads = 32; m.n_kv_heads = 8;
    m.head_dim = 128; m.ffn_dim = 14336; m.vocab_size = 32000;
  } else if (name == "llama3-70b") {
    m.hidden_dim = 8192; m.n_layers = 80; m.n_heads = 64; m.n_kv_heads = 8;
    m.head_dim = 128; m.ffn_dim = 28672; m.vocab_size = 128256;
  } else {
    std::ostringstream os;
    os << "unknown model preset '" << name << "'; known presets:";
    for (const auto& p : model_preset_names()) os << " " << p;
    throw ConfigError(os.str());
  }
  return m;
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.arch_name = "D1";
  cfg.dram = arch_preset("D1");
  cfg.logic = default_logic();
  cfg.model = model_preset("llama2-7b");
  return cfg;
}

// ---------------------------------------------------------------------------
// Peaks.

PeakSpec derive_peaks(const ScenarioConfig& cfg) {
  const auto& d = cfg.dram;
  const auto& l = cfg.logic;
  PeakSpec p;
  double banks = d.total_banks();
  p.peak_bandwidth = banks * double(d.interface_bytes()) * d.clock_hz;
  p.peak_gemm = banks * l.systolic_rows * l.systolic_cols * 2.0 * d.clock_hz;
  // One multiply per FP16 delivered by the bank interface per cycle.
  p.peak_simd = banks * l.systolic_cols * d.clock_hz;
  p.capacity = d.capacity_total;
  return p;
}

// ---------------------------------------------------------------------------
// Validation.

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : items)
    os << (v.warning ? "warning" : "error") << " [" << v.field << "]: "
       << v.message << "\n";
  return os.str();
}

static bool pow2(std::int64_t x) { return x > 0 && std::has_single_bit(std::uint64_t(x)); }

ValidationReport validate(const ScenarioConfig& cfg) {
  ValidationReport r;
  auto err = [&](std::string f, std::string m) {
    r.items.push_back({std::move(f), std::move(m), false});
  };
  auto warn = [&](std::string f, std::string m) {
    r.items.push_back({std::move(f), std::move(m), true});
  };

  const auto& d = cfg.dram;
  if (d.modules < 1) err("dram.modules", "must be >= 1");
  if (d.ranks_per_module < 1) err("dram.ranks_per_module", "must be >= 1");
  if (d.chips_per_rank < 1) err("dram.chips_per_rank", "must be >= 1");
  if (d.banks_per_chip < 1) err("dram.banks_per_chip", "must be >= 1");
  if (d.bank_interface_bits <= 0 || d.bank_interface_bits % 16 != 0)
    err("dram.bank_interface_bits", "must be a positive multiple of 16");
  if (d.row_bytes <= 0) err("dram.row_bytes", "must be > 0");
  if (d.clock_hz <= 0) err("dram.clock_hz", "must be > 0");
  for (auto [name, v] : std::initializer_list<std::pair<const char*, double>>{
           {"tCCD", d.timing.tccd}, {"tRCD", d.timing.trcd},
           {"tRC", d.timing.trc}, {"tRFC", d.timing.trfc},
           {"tREFI", d.timing.trefi}})
    if (v <= 0) err(std::string("dram.timing.") + name, "must be > 0");
  if (d.capacity_total == 0) {
    err("dram.capacity_total", "must be > 0");
  } else if (d.total_banks() > 0 && d.capacity_total % std::uint64_t(d.total_banks()) != 0) {
    err("dram.capacity_total", "not divisible by total bank count");
  }
  // The address map needs exact log2 field widths.
  for (auto [name, v] : std::initializer_list<std::pair<const char*, std::int64_t>>{
           {"modules", d.modules}, {"ranks_per_module", d.ranks_per_module},
           {"chips_per_rank", d.chips_per_rank},
           {"banks_per_chip", d.banks_per_chip}, {"row_bytes", d.row_bytes}})
    if (!pow2(v)) err(std::string("dram.") + name, "must be a power of two");
  if (pow2(std::int64_t(d.capacity_total)) == false && d.capacity_total != 0)
    err("dram.capacity_total", "must be a power of two");

  const auto& l = cfg.logic;
  if (l.systolic_cols * 16 != d.bank_interface_bits)
    err("logic.systolic_cols",
        "array width mismatch: systolic_cols x 16 must equal bank_interface_bits");
  if (l.sram_bytes <= 0) err("logic.sram_bytes", "must be > 0");
  bool any_level = false;
  for (const auto& [lvl, ks] : l.level_kernel_support)
    if (!ks.empty()) any_level = true;
  if (!any_level) err("logic.level_kernel_support", "no kernels supported anywhere");
  for (Kernel k : all_compute_kernels()) {
    bool supported = false;
    for (const auto& [lvl, ks] : l.level_kernel_support)
      if (ks.count(k)) supported = true;
    if (!supported)
      err("logic.level_kernel_support",
          std::string("kernel '") + kernel_name(k) + "' has no hosting level");
  }

  const auto& m = cfg.model;
  if (m.hidden_dim > 0) {
    if (m.hidden_dim != std::int64_t(m.n_heads) * m.head_dim)
      err("model.hidden_dim", "hidden_dim != n_heads * head_dim");
    if (m.n_kv_heads <= 0 || m.n_heads % m.n_kv_heads != 0)
      err("model.n_kv_heads", "n_heads must be divisible by n_kv_heads");
    if (m.n_heads < d.chips_per_rank)
      warn("model.n_heads", "heads < chips: idle chips in kv_ranks");
  }

  const auto& w = cfg.workload;
  if (w.batch < 1) err("workload.batch", "must be >= 1");
  if (w.input_len + w.output_len > w.max_context)
    err("workload.max_context", "input_len + output_len exceeds max_context");

  const auto& pl = cfg.platform;
  if (pl.gpu_peak_bw <= 0) err("platform.gpu_peak_bw", "must be > 0");
  if (pl.gpu_peak_flops <= 0) err("platform.gpu_peak_flops", "must be > 0");
  for (const auto& knot : pl.gpu_util_curve)
    if (knot.util <= 0 || knot.util > 1)
      err("platform.gpu_util_curve", "util fractions must lie in (0,1]");
  return r;
}

void require_valid(const ScenarioConfig& cfg) {
  auto r = validate(cfg);
  if (!r.ok()) throw ConfigError("invalid scenario:\n" + r.to_string());
}

// ---------------------------------------------------------------------------
// JSON (de)serialization.

namespace {

template <typename T>
void get_to(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ConfigError("bad value at " + path + "." + key + ": " + e.what());
  }
}

Level parse_level(const std::string& s) {
  if (s == "root") return Level::Root;
  if (s == "channel") return Level::Channel;
  if (s == "rank") return Level::Rank;
  if (s == "chip") return Level::Chip;
  throw ConfigError("unknown level '" + s + "'");
}

Kernel parse_kernel(const std::string& s) {
  for (Kernel k : all_compute_kernels())
    if (s == kernel_name(k)) return k;
  throw ConfigError("unknown kernel '" + s + "'");
}

void load_link(const json& j, LinkParams& lp, const std::string& path) {
  get_to(j, "bandwidth", lp.bandwidth, path);
  get_to(j, "link_latency", lp.link_latency, path);
  get_to(j, "src_port_latency", lp.src_port_latency, path);
  get_to(j, "dst_port_latency", lp.dst_port_latency, path);
}

json dump_link(const LinkParams& lp) {
  return {{"bandwidth", lp.bandwidth},
          {"link_latency", lp.link_latency},
          {"src_port_latency", lp.src_port_latency},
          {"dst_port_latency", lp.dst_port_latency}};
}

}  // namespace

ScenarioConfig scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }

  ScenarioConfig cfg = default_scenario();
  if (j.contains("arch")) {
    cfg.arch_name = j.at("arch").get<std::string>();
    cfg.dram = arch_preset(cfg.arch_name);
  }
  if (j.contains("model") && j.at("model").is_string()) {
    cfg.model = model_preset(j.at("model").get<std::string>());
  }

  if (j.contains("dram")) {
    const json& d = j.at("dram");
    auto& dc = cfg.dram;
    get_to(d, "modules", dc.modules, "dram");
    get_to(d, "ranks_per_module", dc.ranks_per_module, "dram");
    get_to(d, "chips_per_rank", dc.chips_per_rank, "dram");
    get_to(d, "banks_per_chip", dc.banks_per_chip, "dram");
    get_to(d, "bank_interface_bits", dc.bank_interface_bits, "dram");
    get_to(d, "row_bytes", dc.row_bytes, "dram");
    get_to(d, "capacity_total", dc.capacity_total, "dram");
    get_to(d, "clock_hz", dc.clock_hz, "dram");
    get_to(d, "vdd", dc.vdd, "dram");
    if (d.contains("timing")) {
      const json& t = d.at("timing");
      get_to(t, "tCCD", dc.timing.tccd, "dram.timing");
      get_to(t, "tRCD", dc.timing.trcd, "dram.timing");
      get_to(t, "tRC", dc.timing.trc, "dram.timing");
      get_to(t, "tRFC", dc.timing.trfc, "dram.timing");
      get_to(t, "tREFI", dc.timing.trefi, "dram.timing");
    }
    if (d.contains("currents")) {
      const json& c = d.at("currents");
      get_to(c, "IDD0", dc.currents.idd0, "dram.currents");
      get_to(c, "IDD3N", dc.currents.idd3n, "dram.currents");
      get_to(c, "IDD4R", dc.currents.idd4r, "dram.currents");
    }
  }

  if (j.contains("logic")) {
    const json& l = j.at("logic");
    auto& lc = cfg.logic;
    get_to(l, "systolic_rows", lc.systolic_rows, "logic");
    get_to(l, "systolic_cols", lc.systolic_cols, "logic");
    get_to(l, "simd_mul_lanes", lc.simd_mul_lanes, "logic");
    get_to(l, "adder_trees_per_chip", lc.adder_trees_per_chip, "logic");
    get_to(l, "adder_tree_fanin", lc.adder_tree_fanin, "logic");
    get_to(l, "max_tree_fanin", lc.max_tree_fanin, "logic");
    get_to(l, "exp_lanes", lc.exp_lanes, "logic");
    get_to(l, "sram_bytes", lc.sram_bytes, "logic");
    get_to(l, "mul_pipe_stages", lc.mul_pipe_stages, "logic");
    get_to(l, "add_pipe_stages", lc.add_pipe_stages, "logic");
    if (l.contains("level_kernel_support")) {
      lc.level_kernel_support.clear();
      for (const auto& [lvl, ks] : l.at("level_kernel_support").items()) {
        std::set<Kernel> kernels;
        for (const auto& k : ks) kernels.insert(parse_kernel(k.get<std::string>()));
        lc.level_kernel_support[parse_level(lvl)] = std::move(kernels);
      }
    }
  }

  if (j.contains("network")) {
    const json& n = j.at("network");
    auto& nc = cfg.network;
    get_to(n, "switch_total_bandwidth", nc.switch_total_bandwidth, "network");
    get_to(n, "host_ingress_latency", nc.host_ingress_latency, "network");
    if (n.contains("switch_to_ctrl")) load_link(n.at("switch_to_ctrl"), nc.switch_to_ctrl, "network.switch_to_ctrl");
    if (n.contains("ctrl_to_ctrl")) load_link(n.at("ctrl_to_ctrl"), nc.ctrl_to_ctrl, "network.ctrl_to_ctrl");
    if (n.contains("rank_to_ctrl")) load_link(n.at("rank_to_ctrl"), nc.rank_to_ctrl, "network.rank_to_ctrl");
    if (n.contains("rank_to_rank")) load_link(n.at("rank_to_rank"), nc.rank_to_rank, "network.rank_to_rank");
  }

  if (j.contains("model") && j.at("model").is_object()) {
    const json& m = j.at("model");
    auto& mc = cfg.model;
    get_to(m, "name", mc.name, "model");
    get_to(m, "hidden_dim", mc.hidden_dim, "model");
    get_to(m, "n_layers", mc.n_layers, "model");
    get_to(m, "n_heads", mc.n_heads, "model");
    get_to(m, "n_kv_heads", mc.n_kv_heads, "model");
    get_to(m, "head_dim", mc.head_dim, "model");
    get_to(m, "ffn_dim", mc.ffn_dim, "model");
    get_to(m, "vocab_size", mc.vocab_size, "model");
    get_to(m, "elem_bytes", mc.elem_bytes, "model");
  }

  if (!j.contains("workload")) {
    throw ConfigError("missing required section 'workload'");
  }
  {
    const json& w = j.at("workload");
    auto& wc = cfg.workload;
    for (const char* key : {"batch", "input", "output"})
      if (!w.contains(key))
        throw ConfigError(std::string("missing field 'workload.") +
                          (std::string(key) == "input" ? "input" :
                           std::string(key) == "output" ? "output" : "batch") + "'");
    wc.batch = w.at("batch").get<int>();
    wc.input_len = w.at("input").get<int>();
    wc.output_len = w.at("output").get<int>();
    wc.max_context = w.value("max_context", wc.input_len + wc.output_len);
  }

  if (j.contains("platform")) {
    const json& p = j.at("platform");
    auto& pc = cfg.platform;
    get_to(p, "pj_per_flop_systolic", pc.pj_per_flop_systolic, "platform");
    get_to(p, "pj_per_flop_simd", pc.pj_per_flop_simd, "platform");
    get_to(p, "pj_per_exp_op", pc.pj_per_exp_op, "platform");
    get_to(p, "pj_per_bit_link", pc.pj_per_bit_link, "platform");
    get_to(p, "read_energy_fraction", pc.read_energy_fraction, "platform");
    get_to(p, "logic_power_w", pc.logic_power_w, "platform");
    get_to(p, "logic_area_mm2", pc.logic_area_mm2, "platform");
    get_to(p, "interposer_yield", pc.interposer_yield, "platform");
    get_to(p, "per_die_yield", pc.per_die_yield, "platform");
    get_to(p, "per_bond_yield", pc.per_bond_yield, "platform");
    get_to(p, "chiplets_per_mcooi", pc.chiplets_per_mcooi, "platform");
    get_to(p, "mcooi_die_cost", pc.mcooi_die_cost, "platform");
    get_to(p, "mcooi_interposer_cost", pc.mcooi_interposer_cost, "platform");
    get_to(p, "mcooi_bonding_cost", pc.mcooi_bonding_cost, "platform");
    get_to(p, "mcoois_per_module", pc.mcoois_per_module, "platform");
    get_to(p, "module_assembly_cost", pc.module_assembly_cost, "platform");
    get_to(p, "gpu_peak_bw", pc.gpu_peak_bw, "platform");
    get_to(p, "gpu_peak_flops", pc.gpu_peak_flops, "platform");
    if (p.contains("gpu_util_curve")) {
      pc.gpu_util_curve.clear();
      for (const auto& knot : p.at("gpu_util_curve"))
        pc.gpu_util_curve.push_back({knot.at("m").get<double>(), knot.at("util").get<double>()});
    }
  }

  if (j.contains("activation_overlap")) cfg.activation_overlap = j.at("activation_overlap").get<bool>();
  if (j.contains("pad_indivisible")) cfg.pad_indivisible = j.at("pad_indivisible").get<bool>();

  auto report = validate(cfg);
  if (!report.ok()) throw ConfigError("validation failure:\n" + report.to_string());
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json j;
  j["arch"] = cfg.arch_name;
  const auto& d = cfg.dram;
  j["dram"] = {
      {"modules", d.modules},
      {"ranks_per_module", d.ranks_per_module},
      {"chips_per_rank", d.chips_per_rank},
      {"banks_per_chip", d.banks_per_chip},
      {"bank_interface_bits", d.bank_interface_bits},
      {"row_bytes", d.row_bytes},
      {"capacity_total", d.capacity_total},
      {"clock_hz", d.clock_hz},
      {"vdd", d.vdd},
      {"timing",
       {{"tCCD", d.timing.tccd}, {"tRCD", d.timing.trcd}, {"tRC", d.timing.trc},
        {"tRFC", d.timing.trfc}, {"tREFI", d.timing.trefi}}},
      {"currents",
       {{"IDD0", d.currents.idd0}, {"IDD3N", d.currents.idd3n},
        {"IDD4R", d.currents.idd4r}}},
  };
  const auto& l = cfg.logic;
  json lks = json::object();
  for (const auto& [lvl, ks] : l.level_kernel_support) {
    json arr = json::array();
    for (Kernel k : ks) arr.push_back(kernel_name(k));
    lks[level_name(lvl)] = arr;
  }
  j["logic"] = {
      {"systolic_rows", l.systolic_rows}, {"systolic_cols", l.systolic_cols},
      {"simd_mul_lanes", l.simd_mul_lanes},
      {"adder_trees_per_chip", l.adder_trees_per_chip},
      {"adder_tree_fanin", l.adder_tree_fanin},
      {"max_tree_fanin", l.max_tree_fanin}, {"exp_lanes", l.exp_lanes},
      {"sram_bytes", l.sram_bytes}, {"mul_pipe_stages", l.mul_pipe_stages},
      {"add_pipe_stages", l.add_pipe_stages}, {"level_kernel_support", lks},
  };
  const auto& n = cfg.network;
  j["network"] = {
      {"switch_total_bandwidth", n.switch_total_bandwidth},
      {"host_ingress_latency", n.host_ingress_latency},
      {"switch_to_ctrl", dump_link(n.switch_to_ctrl)},
      {"ctrl_to_ctrl", dump_link(n.ctrl_to_ctrl)},
      {"rank_to_ctrl", dump_link(n.rank_to_ctrl)},
      {"rank_to_rank", dump_link(n.rank_to_rank)},
  };
  const auto& m = cfg.model;
  j["model"] = {
      {"name", m.name}, {"hidden_dim", m.hidden_dim}, {"n_layers", m.n_layers},
      {"n_heads", m.n_heads}, {"n_kv_heads", m.n_kv_heads},
      {"head_dim", m.head_dim}, {"ffn_dim", m.ffn_dim},
      {"vocab_size", m.vocab_size}, {"elem_bytes", m.elem_bytes},
  };
  const auto& w = cfg.workload;
  j["workload"] = {{"batch", w.batch}, {"input", w.input_len},
                   {"output", w.output_len}, {"max_context", w.max_context}};
  const auto& p = cfg.platform;
  json curve = json::array();
  for (const auto& knot : p.gpu_util_curve)
    curve.push_back({{"m", knot.m}, {"util", knot.util}});
  j["platform"] = {
      {"pj_per_flop_systolic", p.pj_per_flop_systolic},
      {"pj_per_flop_simd", p.pj_per_flop_simd},
      {"pj_per_exp_op", p.pj_per_exp_op},
      {"pj_per_bit_link", p.pj_per_bit_link},
      {"read_energy_fraction", p.read_energy_fraction},
      {"logic_power_w", p.logic_power_w},
      {"logic_area_mm2", p.logic_area_mm2},
      {"interposer_yield", p.interposer_yield},
      {"per_die_yield", p.per_die_yield},
      {"per_bond_yield", p.per_bond_yield},
      {"chiplets_per_mcooi", p.chiplets_per_mcooi},
      {"mcooi_die_cost", p.mcooi_die_cost},
      {"mcooi_interposer_cost", p.mcooi_interposer_cost},
      {"mcooi_bonding_cost", p.mcooi_bonding_cost},
      {"mcoois_per_module", p.mcoois_per_module},
      {"module_assembly_cost", p.module_assembly_cost},
      {"gpu_peak_bw", p.gpu_peak_bw},
      {"gpu_peak_flops", p.gpu_peak_flops},
      {"gpu_util_curve", curve},
  };
  j["activation_overlap"] = cfg.activation_overlap;
  j["pad_indivisible"] = cfg.pad_indivisible;
  return j.dump(2);
}

}  // namespace pimsim
