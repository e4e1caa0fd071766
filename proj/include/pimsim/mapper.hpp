#pragma once

#include "pimsim/taskgraph.hpp"

namespace pimsim {

enum class SubTaskKind { Compute, Aggregate, Broadcast };
// Bus: intra-rank delivery of a broadcast to every chip at once; timed like a
// link hop but counted once (on the Broadcast edge into the rank), never per
// chip.
enum class EdgeCategory { Broadcast, Gather, Bus, Local };

struct SubTask {
  int id = -1;
  int task = -1;  // TaskNode id; -1 for synthetic gather nodes
  SubTaskKind kind = SubTaskKind::Compute;
  Kernel kernel{};
  int unit = -1;  // LogicUnit index
  int head = -1;
  int batch_item = -1;
  BankSubShape shape;       // matrix kernels
  std::int64_t elems = 0;   // SIMD kernels, per-unit share
  double flops = 0;
  double bytes_read = 0;    // DRAM bytes this unit streams once
};

struct MappedEdge {
  int from = -1;
  int to = -1;
  double bytes = 0;
  EdgeCategory category = EdgeCategory::Local;
};

struct MovementVolume {
  double broadcast_bytes = 0;
  double gather_bytes = 0;
  // Orthogonal split of the same traffic by how far it travels.
  double inter_rank_bytes = 0;
  double inter_module_bytes = 0;
  double total() const { return broadcast_bytes + gather_bytes; }
};

struct MappedGraph {
  std::vector<SubTask> subtasks;
  std::vector<MappedEdge> edges;
  std::vector<int> result_of;  // task id -> subtask holding its final output
  MovementVolume movement;
};

// Places every task: weight GEMMs fan out per chip of the owning placement's
// rank set with aggregation at the lowest common parent, attention kernels
// pin to the KV chip of their (batch, head), SIMD kernels split across the
// chips of the first weight rank. Throws MappingError when a kernel has no
// supporting unit or a referenced tensor is unplaced.
MappedGraph map_tasks(const TaskGraph& graph, const MemorySystem& sys,
                      const TensorCatalog& catalog, const ScenarioConfig& cfg);

std::string mapping_summary_json(const MappedGraph& g, const MemorySystem& sys);

}  // namespace pimsim
