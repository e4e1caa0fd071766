#include "pimsim/runner.hpp"

#include <sstream>

#include "json.hpp"
#include "pimsim/taskgraph.hpp"

namespace pimsim {

namespace {

double gpu_graph_time(const TaskGraph& g, const ScenarioConfig& cfg) {
  double t = 0;
  for (const auto& n : g.nodes) {
    if (n.gemm)
      t += gpu_kernel_time(*n.gemm, cfg.model.elem_bytes, cfg.platform);
    else if (n.elems > 0)
      t += 3.0 * double(n.elems) * cfg.model.elem_bytes /
           cfg.platform.gpu_peak_bw;
  }
  return t;
}

SimReport scale_report(SimReport r, double f) {
  SimReport s;
  merge_report(s, r);
  s.makespan *= f;
  s.refresh_overhead *= f;
  s.critical_path.compute *= f;
  s.critical_path.comm *= f;
  s.critical_path.queueing *= f;
  s.flops *= f;
  s.exp_ops *= f;
  s.dram_bytes_read *= f;
  s.row_activations *= f;
  s.link_bytes *= f;
  s.comm_energy_bytes *= f;
  s.billed_broadcast_bytes *= f;
  s.billed_gather_bytes *= f;
  s.comm_messages *= f;
  for (auto& v : s.cp_comm_by_cat) v *= f;
  for (auto& [k, v] : s.busy_by_kernel) v *= f;
  return s;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  require_valid(cfg);
  RunResult r;
  r.cfg = cfg;

  MemorySystem sys = build_memory_system(cfg);
  TensorCatalog catalog = build_tensor_catalog(cfg.model, &cfg.workload);
  allocate_weights(catalog, cfg, sys);
  allocate_kv(catalog, cfg, sys);

  TaskGraph prefill = build_prefill_graph(cfg.model, cfg.workload);
  MappedGraph mapped = map_tasks(prefill, sys, catalog, cfg);
  r.prefill = simulate(mapped, sys, cfg);
  r.ttft = r.prefill.end_to_end() + cfg.network.host_ingress_latency;
  if (opt.with_baseline) r.baseline_ttft = gpu_graph_time(prefill, cfg);

  int steps = std::max(0, cfg.workload.output_len - 1);
  r.decode_steps = steps;
  int stride = std::max(1, opt.decode_stride);
  for (int s = 0; s < steps; s += stride) {
    int covered = std::min(stride, steps - s);
    int past = cfg.workload.input_len + s;
    TaskGraph step = build_decode_step_graph(cfg.model, cfg.workload, past);
    MappedGraph m = map_tasks(step, sys, catalog, cfg);
    SimReport sr = simulate(m, sys, cfg);
    merge_report(r.decode, scale_report(sr, double(covered)));
    if (opt.with_baseline)
      r.baseline_decode_time += gpu_graph_time(step, cfg) * covered;
  }
  r.decode_time = r.decode.end_to_end();
  r.e2e = r.ttft + r.decode_time;
  r.baseline_e2e = r.baseline_ttft + r.baseline_decode_time;
  r.tokens = double(cfg.workload.batch) * cfg.workload.output_len;
  if (r.e2e > 0) r.throughput_tok_s = r.tokens / r.e2e;
  // Tokens per second of generation per request stream: output_len over the
  // post-first-token window.
  if (r.decode_time > 0)
    r.decode_throughput_tok_s = double(cfg.workload.output_len) / r.decode_time;

  SimReport total;
  merge_report(total, r.prefill);
  merge_report(total, r.decode);
  r.energy = energy_report(total, cfg);
  return r;
}

std::string scenario_key(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << cfg.arch_name << "/" << cfg.model.name << "/b" << cfg.workload.batch
     << "/i" << cfg.workload.input_len << "/o" << cfg.workload.output_len;
  return os.str();
}

std::string RunResult::to_json(bool pretty) const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_key(cfg);
  j["arch"] = cfg.arch_name;
  j["model"] = cfg.model.name;
  j["workload"] = {{"batch", cfg.workload.batch},
                   {"input", cfg.workload.input_len},
                   {"output", cfg.workload.output_len}};
  j["ttft_s"] = ttft;
  j["decode_time_s"] = decode_time;
  j["e2e_s"] = e2e;
  j["throughput_tok_s"] = throughput_tok_s;
  j["decode_throughput_tok_s"] = decode_throughput_tok_s;
  auto breakdown = [](const SimReport& r) {
    return nlohmann::ordered_json{
        {"end_to_end_s", r.end_to_end()},
        {"compute_s", r.critical_path.compute},
        {"comm_s", r.critical_path.comm},
        {"queueing_s", r.critical_path.queueing},
        {"refresh_s", r.refresh_overhead}};
  };
  j["prefill"] = breakdown(prefill);
  j["decode"] = breakdown(decode);
  j["energy_j"] = {{"activation", energy.activation_j},
                   {"read", energy.read_j},
                   {"compute", energy.compute_j},
                   {"comm", energy.comm_j},
                   {"total", energy.total()}};
  j["baseline"] = {{"kind", "h100-roofline-analytical"},
                   {"ttft_s", baseline_ttft},
                   {"decode_time_s", baseline_decode_time},
                   {"e2e_s", baseline_e2e},
                   {"e2e_speedup", e2e_speedup()},
                   {"ttft_speedup", ttft_speedup()}};
  return pretty ? j.dump(2) : j.dump();
}

// ---------------------------------------------------------------------------
// CSV emitters. Header names are frozen: treat any change as schema-breaking.

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

}  // namespace

std::string csv_comparison(const std::vector<RunResult>& results) {
  std::ostringstream os;
  os << "scenario,batch,input,output,ttft_s,decode_time_s,e2e_s,"
        "throughput_tok_s,energy_j,baseline_ttft_s,baseline_e2e_s,"
        "e2e_speedup,ttft_speedup\n";
  for (const auto& r : results)
    os << scenario_key(r.cfg) << ',' << r.cfg.workload.batch << ','
       << r.cfg.workload.input_len << ',' << r.cfg.workload.output_len << ','
       << fmt(r.ttft) << ',' << fmt(r.decode_time) << ',' << fmt(r.e2e) << ','
       << fmt(r.throughput_tok_s) << ',' << fmt(r.energy.total()) << ','
       << fmt(r.baseline_ttft) << ',' << fmt(r.baseline_e2e) << ','
       << fmt(r.e2e_speedup()) << ',' << fmt(r.ttft_speedup()) << '\n';
  return os.str();
}

std::string csv_e2e_speedup(const std::vector<RunResult>& results) {
  std::ostringstream os;
  os << "scenario,arch,batch,input,output,e2e_s,baseline_e2e_s,e2e_speedup\n";
  for (const auto& r : results)
    os << scenario_key(r.cfg) << ',' << r.cfg.arch_name << ','
       << r.cfg.workload.batch << ',' << r.cfg.workload.input_len << ','
       << r.cfg.workload.output_len << ',' << fmt(r.e2e) << ','
       << fmt(r.baseline_e2e) << ',' << fmt(r.e2e_speedup()) << '\n';
  return os.str();
}

std::string csv_decode_throughput(const std::vector<RunResult>& results) {
  std::ostringstream os;
  os << "scenario,arch,batch,decode_throughput_tok_s,"
        "baseline_decode_throughput_tok_s,normalized\n";
  for (const auto& r : results) {
    int steps = std::max(1, r.decode_steps);
    double base = r.baseline_decode_time > 0
                      ? double(r.cfg.workload.batch) * steps /
                            r.baseline_decode_time
                      : 0;
    os << scenario_key(r.cfg) << ',' << r.cfg.arch_name << ','
       << r.cfg.workload.batch << ',' << fmt(r.decode_throughput_tok_s) << ','
       << fmt(base) << ','
       << fmt(base > 0 ? r.decode_throughput_tok_s / base : 0) << '\n';
  }
  return os.str();
}

std::string csv_ttft_crossover(const std::vector<RunResult>& results) {
  std::ostringstream os;
  // slo_* columns: minimum speedup over the baseline needed to meet each
  // time-to-first-token target.
  os << "scenario,batch,input,ttft_s,baseline_ttft_s,ttft_speedup,"
        "slo_0.5s,slo_1.5s,slo_3.0s\n";
  for (const auto& r : results) {
    os << scenario_key(r.cfg) << ',' << r.cfg.workload.batch << ','
       << r.cfg.workload.input_len << ',' << fmt(r.ttft) << ','
       << fmt(r.baseline_ttft) << ',' << fmt(r.ttft_speedup());
    for (double slo : {0.5, 1.5, 3.0})
      os << ',' << fmt(r.baseline_ttft / slo);
    os << '\n';
  }
  return os.str();
}

std::string csv_breakdown(const std::vector<RunResult>& results) {
  std::ostringstream os;
  os << "scenario,phase,compute_frac,comm_frac,queueing_frac\n";
  for (const auto& r : results) {
    auto row = [&](const char* phase, const SimReport& rep) {
      double t = rep.critical_path.total();
      if (t <= 0) t = 1;
      os << scenario_key(r.cfg) << ',' << phase << ','
         << fmt(rep.critical_path.compute / t) << ','
         << fmt(rep.critical_path.comm / t) << ','
         << fmt(rep.critical_path.queueing / t) << '\n';
    };
    row("prefill", r.prefill);
    if (r.decode_steps > 0) row("decode", r.decode);
  }
  return os.str();
}

std::string csv_energy(const std::vector<RunResult>& results) {
  std::ostringstream os;
  os << "scenario,data_access,computation,communication,total_j\n";
  for (const auto& r : results) {
    double total = r.energy.total();
    double safe = total > 0 ? total : 1;
    os << scenario_key(r.cfg) << ','
       << fmt((r.energy.activation_j + r.energy.read_j) / safe) << ','
       << fmt(r.energy.compute_j / safe) << ','
       << fmt(r.energy.comm_j / safe) << ',' << fmt(total) << '\n';
  }
  return os.str();
}

}  // namespace pimsim
