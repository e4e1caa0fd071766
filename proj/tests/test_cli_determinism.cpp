#include "doctest.h"

#include "pimsim/runner.hpp"

using namespace pimsim;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig cfg = default_scenario();
  cfg.model.n_layers = 4;
  cfg.workload = {1, 16, 4, 64};
  return cfg;
}

}  // namespace

TEST_CASE("run_scenario is deterministic byte for byte") {
  RunOptions opt;
  RunResult a = run_scenario(small_scenario(), opt);
  RunResult b = run_scenario(small_scenario(), opt);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_json(false) == b.to_json(false));
}

TEST_CASE("run_scenario basic sanity") {
  RunResult r = run_scenario(small_scenario());
  CHECK(r.ttft > 0);
  CHECK(r.decode_time > 0);
  CHECK(r.e2e == doctest::Approx(r.ttft + r.decode_time));
  CHECK(r.decode_steps == 3);
  CHECK(r.throughput_tok_s > 0);
  CHECK(r.energy.total() > 0);
  CHECK(r.baseline_e2e > 0);
}

TEST_CASE("decode stride approximates the exact walk") {
  ScenarioConfig cfg = small_scenario();
  cfg.workload.output_len = 16;
  RunOptions exact;
  RunOptions strided;
  strided.decode_stride = 4;
  RunResult a = run_scenario(cfg, exact);
  RunResult b = run_scenario(cfg, strided);
  CHECK(b.decode_time == doctest::Approx(a.decode_time).epsilon(0.02));
  CHECK(b.energy.total() == doctest::Approx(a.energy.total()).epsilon(0.02));
}

TEST_CASE("csv headers are frozen") {
  std::vector<RunResult> rs{run_scenario(small_scenario())};
  auto header = [](const std::string& csv) {
    return csv.substr(0, csv.find('\n'));
  };
  CHECK(header(csv_comparison(rs)).rfind("scenario,batch,input,output,ttft_s",
                                         0) == 0);
  CHECK(header(csv_e2e_speedup(rs)) ==
        "scenario,arch,batch,input,output,e2e_s,baseline_e2e_s,e2e_speedup");
  CHECK(header(csv_decode_throughput(rs)).rfind(
            "scenario,arch,batch,decode_throughput_tok_s", 0) == 0);
  CHECK(header(csv_breakdown(rs)) ==
        "scenario,phase,compute_frac,comm_frac,queueing_frac");
  CHECK(header(csv_energy(rs)) ==
        "scenario,data_access,computation,communication,total_j");
  CHECK(header(csv_ttft_crossover(rs)).rfind("scenario,batch,input,ttft_s",
                                             0) == 0);
}

TEST_CASE("scenario key format") {
  ScenarioConfig cfg = small_scenario();
  CHECK(scenario_key(cfg) == "D1/llama2-7b/b1/i16/o4");
}
