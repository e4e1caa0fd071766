#include "pimsim/alloc.hpp"

#include <algorithm>
#include <sstream>

namespace pimsim {

static std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}
static std::int64_t round_up(std::int64_t a, std::int64_t b) {
  return ceil_div(a, b) * b;
}

Tensor* TensorCatalog::find(const std::string& name) {
  for (auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}
const Tensor* TensorCatalog::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::vector<RankRef> wt_ranks(const ScenarioConfig& cfg) {
  std::vector<RankRef> out;
  for (int m = 0; m < cfg.dram.modules; ++m)
    for (int r = 0; r < cfg.dram.ranks_per_module; r += 2)
      out.push_back({m, r});
  return out;
}

std::vector<RankRef> kv_ranks(const ScenarioConfig& cfg) {
  std::vector<RankRef> out;
  for (int m = 0; m < cfg.dram.modules; ++m)
    for (int r = 1; r < cfg.dram.ranks_per_module; r += 2)
      out.push_back({m, r});
  // Single-rank systems share the one rank between weights and KV.
  if (out.empty()) return wt_ranks(cfg);
  return out;
}

TensorCatalog build_tensor_catalog(const ModelConfig& model,
                                   const WorkloadConfig* workload) {
  TensorCatalog cat;
  std::int64_t batch = workload ? workload->batch : 0;
  std::int64_t ctx = workload ? workload->max_context : 0;
  auto add = [&](std::string name, TensorRole role,
                 std::vector<std::int64_t> shape, int layer) {
    Tensor t;
    t.name = std::move(name);
    t.role = role;
    t.shape = std::move(shape);
    t.elem_bytes = model.elem_bytes;
    t.layer = layer;
    cat.tensors.push_back(std::move(t));
  };
  for (int l = 0; l < model.n_layers; ++l) {
    std::string p = "layer" + std::to_string(l) + ".";
    add(p + "Wqkv", TensorRole::Weight, {model.hidden_dim, model.qkv_cols()}, l);
    add(p + "Wo", TensorRole::Weight, {model.hidden_dim, model.hidden_dim}, l);
    add(p + "Wgate", TensorRole::Weight, {model.hidden_dim, model.ffn_dim}, l);
    add(p + "Wup", TensorRole::Weight, {model.hidden_dim, model.ffn_dim}, l);
    add(p + "Wdown", TensorRole::Weight, {model.ffn_dim, model.hidden_dim}, l);
    add(p + "Kcache", TensorRole::Kv,
        {batch, ctx, model.n_kv_heads, model.head_dim}, l);
    add(p + "Vcache", TensorRole::Kv,
        {batch, ctx, model.n_kv_heads, model.head_dim}, l);
  }
  add("lm_head", TensorRole::Weight, {model.hidden_dim, model.vocab_size}, -1);
  return cat;
}

void allocate_weights(TensorCatalog& catalog, const ScenarioConfig& cfg,
                      const MemorySystem& sys) {
  const auto& d = cfg.dram;
  auto ranks = wt_ranks(cfg);
  std::int64_t chips = std::int64_t(ranks.size()) * d.chips_per_rank;
  std::int64_t bank_rows =
      std::int64_t(d.capacity_total / std::uint64_t(d.total_banks())) /
      d.row_bytes;
  std::int64_t row_cursor = 0;

  for (auto& t : catalog.tensors) {
    if (t.role != TensorRole::Weight) continue;
    std::int64_t k = t.shape[0], n = t.shape[1];
    Placement& pl = t.placement;
    pl.rank_set = ranks;
    pl.chip_partition = ChipPartition::ColumnWise;
    pl.rows_per_block = cfg.logic.systolic_rows;
    if (!cfg.pad_indivisible &&
        (n % chips != 0 || k % (std::int64_t(d.banks_per_chip) * pl.rows_per_block) != 0))
      throw ConfigError("indivisible dimensions for tensor " + t.name +
                        " with padding disabled");
    pl.cols_per_chip = ceil_div(n, chips);
    std::int64_t kpad = round_up(k, std::int64_t(d.banks_per_chip) * pl.rows_per_block);
    std::int64_t weight_rows_per_bank = kpad / d.banks_per_chip;  // weight matrix rows
    std::int64_t bytes_per_bank =
        weight_rows_per_bank * pl.cols_per_chip * t.elem_bytes;
    pl.rows_per_bank = ceil_div(bytes_per_bank, d.row_bytes);
    pl.start_row = row_cursor;
    if (row_cursor + pl.rows_per_bank > bank_rows) {
      std::ostringstream os;
      os << "weight capacity exceeded placing tensor " << t.name << ": needs "
         << pl.rows_per_bank << " rows/bank at row " << row_cursor
         << " of " << bank_rows;
      throw ConfigError(os.str());
    }
    row_cursor += pl.rows_per_bank;
    Location loc;
    loc.row = pl.start_row;
    loc.channel = ranks[0].module;
    loc.rank = ranks[0].rank;
    t.address_offset = encode_address(loc, sys.address_map);
  }
}

void allocate_kv(TensorCatalog& catalog, const ScenarioConfig& cfg,
                 const MemorySystem& sys) {
  const auto& d = cfg.dram;
  const auto& m = cfg.model;
  const auto& w = cfg.workload;
  auto ranks = kv_ranks(cfg);
  std::int64_t n_ranks = std::int64_t(ranks.size());
  std::int64_t bank_rows =
      std::int64_t(d.capacity_total / std::uint64_t(d.total_banks())) /
      d.row_bytes;

  // Requests per rank under round robin; the busiest rank bounds capacity.
  std::int64_t max_requests = ceil_div(w.batch, n_ranks);
  std::int64_t heads_per_chip = ceil_div(m.n_kv_heads, d.chips_per_rank);

  std::int64_t row_cursor = 0;
  for (auto& t : catalog.tensors) {
    if (t.role != TensorRole::Kv) continue;
    t.shape = {w.batch, w.max_context, m.n_kv_heads, m.head_dim};
    Placement& pl = t.placement;
    pl.rank_set = ranks;
    pl.chip_partition = ChipPartition::HeadWise;
    pl.rows_per_block = cfg.logic.systolic_rows;
    pl.head_to_chip.clear();
    for (int h = 0; h < m.n_kv_heads; ++h)
      pl.head_to_chip.push_back({-1 /* follows batch item's rank */,
                                 h % d.chips_per_rank});
    // Token-major layout per chip: worst-case rows per bank on the busiest
    // rank. Per-chip bytes cover that rank's requests and this chip's heads.
    std::int64_t chip_bytes = max_requests * w.max_context * heads_per_chip *
                              m.head_dim * t.elem_bytes;
    std::int64_t bank_bytes = ceil_div(chip_bytes, d.banks_per_chip);
    pl.rows_per_bank = ceil_div(bank_bytes, d.row_bytes);
    pl.start_row = row_cursor;
    if (row_cursor + pl.rows_per_bank > bank_rows) {
      // Report the largest batch that still fits.
      std::int64_t per_req_rows = std::max<std::int64_t>(
          1, ceil_div(ceil_div(std::int64_t(w.max_context) * heads_per_chip *
                                   m.head_dim * t.elem_bytes,
                               d.banks_per_chip),
                      d.row_bytes));
      // Two KV tensors per layer share the budget across layers.
      std::int64_t layers = std::max(1, m.n_layers);
      std::int64_t max_batch = bank_rows / (per_req_rows * 2 * layers) * n_ranks;
      std::ostringstream os;
      os << "KV capacity exceeded placing tensor " << t.name
         << "; maximum supportable batch is approximately " << max_batch;
      throw ConfigError(os.str());
    }
    row_cursor += pl.rows_per_bank;
    Location loc;
    loc.row = pl.start_row;
    loc.channel = ranks[0].module;
    loc.rank = ranks[0].rank;
    t.address_offset = encode_address(loc, sys.address_map);
  }
}

BankSubShape partition_gemm(const GemmShape& shape, const Placement& placement,
                            const ScenarioConfig& cfg) {
  const auto& d = cfg.dram;
  std::int64_t chips =
      std::int64_t(placement.rank_set.size()) * d.chips_per_rank;
  std::int64_t nb = d.banks_per_chip;
  std::int64_t rb = placement.rows_per_block;
  if (!cfg.pad_indivisible &&
      (shape.k % (nb * rb) != 0 || shape.n % chips != 0))
    throw ConfigError("indivisible GEMM dimensions with padding disabled");
  BankSubShape out;
  std::int64_t kpad = round_up(std::max<std::int64_t>(shape.k, 1), nb * rb);
  std::int64_t npad = round_up(std::max<std::int64_t>(shape.n, 1), chips);
  out.sub = {shape.m, kpad / nb, npad / chips};
  out.unpadded = shape;
  out.weight_blocks = out.sub.k / rb;
  out.input_tiles = ceil_div(shape.m, rb) * out.weight_blocks;
  if (shape.m == 0) out.input_tiles = 0;
  return out;
}

std::string placement_csv(const TensorCatalog& catalog,
                          const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "tensor,role,module,rank,chip,bank,start_row,rows\n";
  const auto& d = cfg.dram;
  for (const auto& t : catalog.tensors) {
    if (t.role == TensorRole::Activation) continue;
    const auto& pl = t.placement;
    const char* role = t.role == TensorRole::Weight ? "weight" : "kv";
    for (const auto& rr : pl.rank_set)
      for (int c = 0; c < d.chips_per_rank; ++c)
        for (int b = 0; b < d.banks_per_chip; ++b)
          os << t.name << "," << role << "," << rr.module << "," << rr.rank
             << "," << c << "," << b << "," << pl.start_row << ","
             << pl.rows_per_bank << "\n";
  }
  return os.str();
}

}  // namespace pimsim
