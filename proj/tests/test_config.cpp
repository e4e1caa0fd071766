#include "doctest.h"

#include "pimsim/config.hpp"

using namespace pimsim;

namespace {

ScenarioConfig scenario(const std::string& arch, const std::string& model) {
  ScenarioConfig cfg = default_scenario();
  cfg.arch_name = arch;
  cfg.dram = arch_preset(arch);
  cfg.model = model_preset(model);
  cfg.workload = {1, 32, 32, 128};
  return cfg;
}

}  // namespace

TEST_CASE("arch presets match published geometry") {
  DramConfig d1 = arch_preset("D1");
  CHECK(d1.modules == 4);
  CHECK(d1.ranks_per_module == 4);
  CHECK(d1.chips_per_rank == 16);
  CHECK(d1.banks_per_chip == 32);
  CHECK(d1.capacity_total == (std::uint64_t(128) << 30));
  CHECK(d1.total_banks() == 8192);
  CHECK(d1.bank_bandwidth() == doctest::Approx(6.4e9));

  CHECK_THROWS_AS(arch_preset("D9"), ConfigError);
}

TEST_CASE("model presets") {
  ModelConfig m = model_preset("llama2-7b");
  CHECK(m.hidden_dim == 4096);
  CHECK(m.n_heads == 32);
  CHECK(m.head_dim == 128);
  CHECK(m.ffn_dim == 11008);
  CHECK(m.vocab_size == 32000);
  CHECK(m.qkv_cols() == 3 * 4096);

  ModelConfig g = model_preset("mistral-7b");
  CHECK(g.n_kv_heads == 8);
  CHECK(g.gqa_group() == 4);
  CHECK(g.qkv_cols() == 4096 + 2 * 8 * 128);
}

TEST_CASE("derive_peaks reproduces the published peak table") {
  struct Row {
    const char* arch;
    double bw, gemm, simd, cap;
  };
  // Binary-prefix display values; rates are exact, capacity in GiB.
  const Row rows[] = {
      {"D1", 51.2, 409.6, 25.6, 128},   {"D2", 102.4, 819.2, 51.2, 256},
      {"D3", 51.2, 409.6, 25.6, 128},   {"D4", 102.4, 819.2, 51.2, 256},
      {"D5", 204.8, 1638.4, 102.4, 512},
  };
  for (const Row& r : rows) {
    CAPTURE(r.arch);
    PeakSpec p = derive_peaks(scenario(r.arch, "llama2-7b"));
    CHECK(p.bw_tb_binary() == doctest::Approx(r.bw).epsilon(1e-12));
    CHECK(p.gemm_tflops_binary() == doctest::Approx(r.gemm).epsilon(1e-12));
    CHECK(p.simd_tflops_binary() == doctest::Approx(r.simd).epsilon(1e-12));
    CHECK(p.capacity_gb_binary() == doctest::Approx(r.cap).epsilon(1e-12));
    // Decimal prefixes land within 2.5% of the same table values.
    CHECK(p.bw_tb_decimal() == doctest::Approx(r.bw).epsilon(0.025));
    CHECK(p.gemm_tflops_decimal() == doctest::Approx(r.gemm).epsilon(0.025));
    CHECK(p.simd_tflops_decimal() == doctest::Approx(r.simd).epsilon(0.025));
  }
}

TEST_CASE("derive_peaks underlying rates for D1") {
  PeakSpec p = derive_peaks(scenario("D1", "llama2-7b"));
  CHECK(p.peak_bandwidth == doctest::Approx(52428.8e9));
  CHECK(p.peak_gemm == doctest::Approx(419430.4e9));
  CHECK(p.peak_simd == doctest::Approx(26214.4e9));
}

TEST_CASE("derive_peaks is linear in bank count") {
  ScenarioConfig a = scenario("D1", "llama2-7b");
  ScenarioConfig b = a;
  b.dram.modules *= 2;
  b.dram.capacity_total *= 2;
  PeakSpec pa = derive_peaks(a), pb = derive_peaks(b);
  CHECK(pb.peak_bandwidth == doctest::Approx(2 * pa.peak_bandwidth));
  CHECK(pb.peak_gemm == doctest::Approx(2 * pa.peak_gemm));
  CHECK(pb.peak_simd == doctest::Approx(2 * pa.peak_simd));
}

TEST_CASE("validation accepts consistent presets") {
  CHECK(validate(scenario("D1", "llama2-7b")).ok());
  CHECK(validate(scenario("D5", "llama3-70b")).ok());
}

TEST_CASE("validation flags array width mismatch") {
  ScenarioConfig cfg = scenario("D1", "llama2-7b");
  cfg.logic.systolic_cols = 4;
  ValidationReport rep = validate(cfg);
  CHECK(!rep.ok());
  CHECK(rep.to_string().find("array width mismatch") != std::string::npos);
}

TEST_CASE("validation warns when heads leave kv chips idle") {
  ScenarioConfig cfg = scenario("D1", "llama2-7b");
  cfg.model.n_heads = 8;
  cfg.model.n_kv_heads = 8;
  cfg.model.head_dim = 512;  // keep hidden_dim == heads x head_dim
  ValidationReport rep = validate(cfg);
  CHECK(rep.ok());  // warning only
  bool found = false;
  for (const auto& v : rep.items)
    if (v.warning && v.message.find("heads < chips") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("validation rejects nonsense geometry") {
  ScenarioConfig cfg = scenario("D1", "llama2-7b");
  cfg.dram.chips_per_rank = 12;  // not a power of two: address map undecodable
  CHECK(!validate(cfg).ok());
  CHECK_THROWS_AS(require_valid(cfg), ConfigError);
}

TEST_CASE("missing workload batch is named in the error") {
  const char* text = R"({
    "arch": "D1",
    "model": {"preset": "llama2-7b"},
    "workload": {"input_len": 128, "output_len": 128}
  })";
  try {
    scenario_from_json_text(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("workload.batch") != std::string::npos);
  }
}

TEST_CASE("scenario JSON round trip") {
  ScenarioConfig cfg = scenario("D3", "mistral-7b");
  cfg.workload = {8, 128, 256, 512};
  cfg.network.rank_to_rank.bandwidth = 16e9;
  cfg.platform.pj_per_bit_link = 30.0;
  ScenarioConfig back = scenario_from_json_text(serialize_scenario(cfg));
  CHECK(serialize_scenario(back) == serialize_scenario(cfg));
  CHECK(back.dram.modules == cfg.dram.modules);
  CHECK(back.workload.output_len == 256);
  CHECK(back.network.rank_to_rank.bandwidth == doctest::Approx(16e9));
  CHECK(back.platform.pj_per_bit_link == doctest::Approx(30.0));
}
