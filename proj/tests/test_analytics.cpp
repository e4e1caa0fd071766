#include "doctest.h"

#include "pimsim/analytics.hpp"

using namespace pimsim;

TEST_CASE("operational intensity") {
  CHECK(operational_intensity({1024, 4096, 12288}, 2) ==
        doctest::Approx(768.0));
  CHECK(operational_intensity({128, 128, 128}, 2) ==
        doctest::Approx(128.0 / 3.0));
  CHECK(operational_intensity({1, 1, 1}, 2) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("roofline attainable throughput") {
  CHECK(roofline_attainable(10, 1e15, 1e12) == doctest::Approx(1e13));
  CHECK(roofline_attainable(1e6, 1e15, 1e12) == doctest::Approx(1e15));
  // Ridge point: oi = peak_flops / peak_bw.
  CHECK(roofline_attainable(1000, 1e15, 1e12) == doctest::Approx(1e15));
}

TEST_CASE("gpu utilization curve interpolates in log2(M)") {
  PlatformConfig p;
  CHECK(gpu_util_at(16, p.gpu_util_curve) == doctest::Approx(0.10));
  CHECK(gpu_util_at(1, p.gpu_util_curve) == doctest::Approx(0.10));
  CHECK(gpu_util_at(128, p.gpu_util_curve) == doctest::Approx(0.25));
  CHECK(gpu_util_at(1024, p.gpu_util_curve) == doctest::Approx(1.0));
  CHECK(gpu_util_at(4096, p.gpu_util_curve) == doctest::Approx(1.0));
  // Geometric midpoint of 16..128 in log2 space: halfway between the knots.
  CHECK(gpu_util_at(45.254834, p.gpu_util_curve) ==
        doctest::Approx(0.175).epsilon(1e-6));
  CHECK(gpu_util_at(512, p.gpu_util_curve) > gpu_util_at(256, p.gpu_util_curve));
}

TEST_CASE("gpu kernel time obeys both roofs") {
  PlatformConfig p;
  // Memory-bound decode GEMV: time approaches bytes / peak_bw.
  GemmShape dec{1, 4096, 4096};
  double bytes = 2.0 * (dec.m * dec.k + dec.k * dec.n + dec.m * dec.n);
  CHECK(gpu_kernel_time(dec, 2, p) == doctest::Approx(bytes / p.gpu_peak_bw));
  // Compute-bound prefill GEMM: time approaches flops / peak.
  GemmShape pre{4096, 4096, 4096};
  CHECK(gpu_kernel_time(pre, 2, p) ==
        doctest::Approx(pre.flops() / p.gpu_peak_flops).epsilon(0.05));
}

TEST_CASE("yield and cost reproduce the calibrated figures") {
  ScenarioConfig cfg = default_scenario();
  YieldCost y = yield_cost(cfg);
  CHECK(y.interposer_yield == doctest::Approx(0.94));
  CHECK(y.die_yield == doctest::Approx(0.97).epsilon(0.005));
  CHECK(y.mcooi_yield == doctest::Approx(0.90).epsilon(0.0112));
  CHECK(y.mcooi_cost == doctest::Approx(3.85).epsilon(0.05 / 3.85));
  CHECK(y.module_cost == doctest::Approx(61.99).epsilon(0.50 / 61.99));
  CHECK(y.gpu_cost == doctest::Approx(12324.0).epsilon(0.01));
}

TEST_CASE("power report reproduces the stated constants") {
  ScenarioConfig cfg = default_scenario();
  SimReport sim;
  EnergyReport e;
  PowerReport r = power_report(sim, e, cfg);
  CHECK(r.logic_w == doctest::Approx(0.185));
  CHECK(r.all_bank_read_w == doctest::Approx(1.735).epsilon(0.01));
  CHECK(r.chip_w == doctest::Approx(1.92).epsilon(0.01));
  CHECK(r.module_w == doctest::Approx(30.7).epsilon(0.01));
  CHECK(r.power_density_w_mm2 == doctest::Approx(0.19).epsilon(0.05));
}

TEST_CASE("energy report wiring") {
  ScenarioConfig cfg = default_scenario();
  SimReport sim;
  sim.makespan = 1e-3;
  sim.flops = 1e12;
  sim.exp_ops = 1e9;
  sim.dram_bytes_read = 1e9;
  sim.row_activations = 1e6;
  sim.link_bytes = 1e6;
  sim.comm_energy_bytes = 1e6;
  EnergyReport e = energy_report(sim, cfg);
  // Activation: N x (IDD0 - IDD3N) x VDD x tRC.
  CHECK(e.activation_j ==
        doctest::Approx(1e6 * (0.538 - 0.5) * 1.1 * 48e-9));
  // Read: column-path share of IDD4R at the time to move the bytes.
  CHECK(e.read_j == doctest::Approx(0.34 * (5.139 - 0.5) * 1.1 * 1e9 /
                                    cfg.dram.chip_bandwidth()));
  CHECK(e.compute_j == doctest::Approx(1e12 * 0.113e-12 + 1e9 * 1e-12));
  CHECK(e.comm_j ==
        doctest::Approx(1e6 * 8 * cfg.platform.pj_per_bit_link * 1e-12));
  CHECK(e.total() ==
        doctest::Approx(e.activation_j + e.read_j + e.compute_j + e.comm_j));
  CHECK(e.background_j > 0);
}

TEST_CASE("gpu baseline time scales with work") {
  ModelConfig m = model_preset("llama2-7b");
  PlatformConfig p;
  WorkloadConfig small{1, 128, 8, 512};
  WorkloadConfig big{1, 128, 64, 512};
  double ts = gpu_baseline_time(m, small, p);
  double tb = gpu_baseline_time(m, big, p);
  CHECK(ts > 0);
  CHECK(tb > ts);
}
