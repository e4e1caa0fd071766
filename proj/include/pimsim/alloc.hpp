#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pimsim/memsys.hpp"

namespace pimsim {

enum class TensorRole { Weight, Kv, Activation };

struct RankRef {
  int module = 0;
  int rank = 0;
  bool operator==(const RankRef&) const = default;
  auto operator<=>(const RankRef&) const = default;
};

enum class ChipPartition { HeadWise, ColumnWise };

struct Placement {
  std::vector<RankRef> rank_set;
  ChipPartition chip_partition = ChipPartition::ColumnWise;
  // Column-wise: columns held by each chip (same for all chips, padded).
  std::int64_t cols_per_chip = 0;
  // Head-wise: head -> (rank_set index, chip) assignment.
  std::vector<std::pair<int, int>> head_to_chip;
  // Row-wise bank partition: blocks of rows_per_block consecutive weight rows
  // per bank, round robin across banks.
  int rows_per_block = 8;
  std::int64_t start_row = 0;    // starting DRAM row per bank
  std::int64_t rows_per_bank = 0;  // DRAM rows occupied in every bank
};

struct Tensor {
  std::string name;
  TensorRole role = TensorRole::Activation;
  std::vector<std::int64_t> shape;
  int elem_bytes = 2;
  int layer = -1;  // -1 for model-level tensors
  Placement placement;
  std::uint64_t address_offset = 0;

  std::int64_t elems() const {
    std::int64_t p = 1;
    for (auto d : shape) p *= d;
    return p;
  }
  std::int64_t bytes() const { return elems() * elem_bytes; }
};

struct TensorCatalog {
  std::vector<Tensor> tensors;
  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;
};

// Weight/KV rank split: even rank indices hold weights, odd hold KV.
std::vector<RankRef> wt_ranks(const ScenarioConfig& cfg);
std::vector<RankRef> kv_ranks(const ScenarioConfig& cfg);

// KV tensors are sized from the workload when one is given; otherwise their
// batch/context dimensions stay zero until allocate_kv.
TensorCatalog build_tensor_catalog(const ModelConfig& model,
                                   const WorkloadConfig* workload = nullptr);

// Places every weight tensor column-wise across the chips of all wt_ranks,
// row-wise in 8-row blocks across banks. Throws ConfigError on capacity
// overflow, naming the first tensor that does not fit.
void allocate_weights(TensorCatalog& catalog, const ScenarioConfig& cfg,
                      const MemorySystem& sys);

// KV: request b -> kv_rank (b mod #kv_ranks); head h -> chip (h mod chips).
void allocate_kv(TensorCatalog& catalog, const ScenarioConfig& cfg,
                 const MemorySystem& sys);

// Per-bank sub-shape for a GEMM executed against a column-wise placement:
// (M, K/N_b, N/(chips in rank set)). Padding rounds K up to a multiple of
// N_b*rows_per_block and N up to a multiple of the chip count.
struct BankSubShape {
  GemmShape sub;                 // padded per-bank shape
  GemmShape unpadded;            // actual work (for FLOP accounting)
  std::int64_t input_tiles = 0;  // 8x8 input tiles streamed per bank
  std::int64_t weight_blocks = 0;
};
BankSubShape partition_gemm(const GemmShape& shape, const Placement& placement,
                            const ScenarioConfig& cfg);

std::string placement_csv(const TensorCatalog& catalog,
                          const ScenarioConfig& cfg);

}  // namespace pimsim
