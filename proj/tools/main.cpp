#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pimsim/runner.hpp"
#include "pimsim/taskgraph.hpp"

using namespace pimsim;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string arch = "D1";
  std::string model = "llama2-7b";
  std::vector<int> batch{1};
  std::vector<int> input{128};
  std::vector<int> output{128};
  std::string format = "json";
  std::string out_dir;
  std::string baseline = "h100-roofline";
  int jobs = 1;
  int decode_stride = 1;
  std::uint64_t seed = 0;  // reserved for the property-test harness
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--config", a.config_path, "scenario JSON file");
  app->add_option("--arch", a.arch, "architecture preset");
  app->add_option("--model", a.model, "model preset");
  app->add_option("--batch", a.batch, "batch size(s)");
  app->add_option("--input", a.input, "input length(s)");
  app->add_option("--output", a.output, "output length(s)");
  app->add_option("--format", a.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--out", a.out_dir, "output directory");
  app->add_option("--baseline", a.baseline, "baseline model")
      ->check(CLI::IsMember({"h100-roofline", "none"}));
  app->add_option("--jobs", a.jobs, "parallel sweep points");
  app->add_option("--decode-stride", a.decode_stride,
                  "simulate every k-th decode step");
  app->add_option("--seed", a.seed, "property-test RNG seed (never affects "
                                    "simulation)");
}

ScenarioConfig make_scenario(const CommonArgs& a, int batch, int input,
                             int output) {
  ScenarioConfig cfg;
  if (!a.config_path.empty()) {
    cfg = load_scenario(a.config_path);
  } else {
    cfg = default_scenario();
    cfg.arch_name = a.arch;
    cfg.dram = arch_preset(a.arch);
    cfg.model = model_preset(a.model);
  }
  cfg.workload.batch = batch;
  cfg.workload.input_len = input;
  cfg.workload.output_len = output;
  if (cfg.workload.max_context <= 0)
    cfg.workload.max_context = input + output + 1;
  return cfg;
}

void emit(const CommonArgs& a, const std::string& name,
          const std::string& text) {
  if (a.out_dir.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::filesystem::create_directories(a.out_dir);
  std::ofstream f(std::filesystem::path(a.out_dir) / name,
                  std::ios::binary);
  f << text;
  std::cerr << "wrote " << (std::filesystem::path(a.out_dir) / name).string()
            << "\n";
}

std::vector<RunResult> run_sweep(const CommonArgs& a) {
  std::vector<ScenarioConfig> points;
  for (int b : a.batch)
    for (int in : a.input)
      for (int out : a.output) points.push_back(make_scenario(a, b, in, out));
  if (points.size() > 10000)
    throw ConfigError("sweep product exceeds cap of 10000 points");
  RunOptions opt;
  opt.decode_stride = a.decode_stride;
  opt.with_baseline = a.baseline != "none";

  std::vector<RunResult> results(points.size());
  int jobs = std::max(1, a.jobs);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < points.size(); i = next++)
      results[i] = run_scenario(points[i], opt);
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::future<void>> fs;
    for (int j = 0; j < jobs; ++j)
      fs.push_back(std::async(std::launch::async, worker));
    for (auto& f : fs) f.get();  // propagates the first exception
  }
  return results;
}

int cmd_run(const CommonArgs& a) {
  auto results = run_sweep(a);
  if (results.size() == 1 && a.format == "json") {
    emit(a, "report.json", results[0].to_json());
  } else if (a.format == "json") {
    std::string text = "[\n";
    for (size_t i = 0; i < results.size(); ++i)
      text += results[i].to_json() + (i + 1 < results.size() ? ",\n" : "\n");
    text += "]\n";
    emit(a, "report.json", text);
  } else {
    emit(a, "report.csv", csv_comparison(results));
  }
  return 0;
}

int cmd_sweep(const CommonArgs& a) {
  auto results = run_sweep(a);
  emit(a, "comparison.csv", csv_comparison(results));
  if (!a.out_dir.empty()) {
    emit(a, "e2e_speedup.csv", csv_e2e_speedup(results));
    emit(a, "decode_throughput.csv", csv_decode_throughput(results));
    emit(a, "ttft_crossover.csv", csv_ttft_crossover(results));
    emit(a, "breakdown.csv", csv_breakdown(results));
    emit(a, "energy.csv", csv_energy(results));
  }
  return 0;
}

int cmd_oi(const CommonArgs& a) {
  ScenarioConfig cfg =
      make_scenario(a, a.batch.front(), a.input.front(), a.output.front());
  require_valid(cfg);
  const Kernel order[] = {Kernel::QkvProj,  Kernel::ScoreSoftmax,
                          Kernel::Context,  Kernel::OutProj,
                          Kernel::GateProj, Kernel::UpProj,
                          Kernel::DownProj, Kernel::LmHead};
  auto first_shapes = [&](const TaskGraph& g) {
    std::map<Kernel, GemmShape> shapes;
    for (const auto& n : g.nodes)
      if (n.gemm && n.layer <= 0 && !shapes.count(n.kernel))
        shapes[n.kernel] = *n.gemm;
    return shapes;
  };
  auto pre = first_shapes(build_prefill_graph(cfg.model, cfg.workload));
  auto dec = first_shapes(build_decode_step_graph(cfg.model, cfg.workload,
                                                  cfg.workload.input_len));
  if (a.format == "csv") {
    std::ostringstream os;
    os << "kernel,prefill_m,prefill_k,prefill_n,prefill_oi,decode_m,decode_k,"
          "decode_n,decode_oi\n";
    for (Kernel k : order) {
      const auto &p = pre.at(k), &d = dec.at(k);
      os << kernel_name(k) << ',' << p.m << ',' << p.k << ',' << p.n << ','
         << operational_intensity(p, cfg.model.elem_bytes) << ',' << d.m << ','
         << d.k << ',' << d.n << ','
         << operational_intensity(d, cfg.model.elem_bytes) << '\n';
    }
    emit(a, "oi.csv", os.str());
  } else {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (Kernel k : order) {
      const auto &p = pre.at(k), &d = dec.at(k);
      j.push_back({{"kernel", kernel_name(k)},
                   {"prefill",
                    {{"m", p.m}, {"k", p.k}, {"n", p.n},
                     {"oi", operational_intensity(p, cfg.model.elem_bytes)}}},
                   {"decode",
                    {{"m", d.m}, {"k", d.k}, {"n", d.n},
                     {"oi", operational_intensity(d, cfg.model.elem_bytes)}}}});
    }
    emit(a, "oi.json", j.dump(2));
  }
  return 0;
}

int cmd_roofline(const CommonArgs& a) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& name : arch_preset_names()) {
    ScenarioConfig cfg = default_scenario();
    cfg.arch_name = name;
    cfg.dram = arch_preset(name);
    PeakSpec p = derive_peaks(cfg);
    j.push_back({{"arch", name},
                 {"bandwidth_tbs", p.bw_tb_binary()},
                 {"gemm_tflops", p.gemm_tflops_binary()},
                 {"simd_tflops", p.simd_tflops_binary()},
                 {"capacity_gb", p.capacity_gb_binary()}});
  }
  emit(a, "roofline.json", j.dump(2));
  return 0;
}

int cmd_cost(const CommonArgs& a) {
  ScenarioConfig cfg =
      make_scenario(a, a.batch.front(), a.input.front(), a.output.front());
  YieldCost y = yield_cost(cfg);
  nlohmann::ordered_json j;
  j["yield"] = {{"interposer", y.interposer_yield},
                {"die", y.die_yield},
                {"bond", y.bond_yield},
                {"mcooi", y.mcooi_yield}};
  j["cost_usd"] = {{"mcooi", y.mcooi_cost},
                   {"module", y.module_cost},
                   {"device", y.device_cost},
                   {"gpu_module", y.gpu_cost}};
  emit(a, "cost.json", j.dump(2));
  return 0;
}

int cmd_topo(const CommonArgs& a) {
  ScenarioConfig cfg =
      make_scenario(a, a.batch.front(), a.input.front(), a.output.front());
  require_valid(cfg);
  MemorySystem sys = build_memory_system(cfg);
  emit(a, "topology.json", sys.topology_json());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chiplet DRAM-PIM inference performance model"};
  app.require_subcommand(1);
  CommonArgs a;
  std::map<std::string, std::function<int(const CommonArgs&)>> handlers = {
      {"run", cmd_run},       {"sweep", cmd_sweep}, {"oi", cmd_oi},
      {"roofline", cmd_roofline}, {"cost", cmd_cost},   {"topo", cmd_topo}};
  for (auto& [name, fn] : handlers) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, a);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (auto& [name, fn] : handlers)
      if (app.get_subcommand(name)->parsed()) return fn(a);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const MappingError& e) {
    std::cerr << "mapping error: " << e.what() << "\n";
    return 3;
  } catch (const SimError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
