#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pimsim/alloc.hpp"

namespace pimsim {

enum class Phase { Prefill, Decode };

struct TaskNode {
  int id = -1;
  Kernel kernel{};
  Phase phase = Phase::Prefill;
  int layer = -1;
  int head = -1;        // kv-head index for attention kernels
  int batch_item = -1;  // -1 when the kernel covers the whole batch
  std::optional<GemmShape> gemm;
  std::vector<std::string> input_tensors;
  std::vector<std::string> output_tensors;
  double flops = 0;
  double bytes_read = 0;  // DRAM-resident bytes touched once
  std::int64_t elems = 0; // element count for SIMD kernels
};

struct TaskEdge {
  int producer = -1;
  int consumer = -1;
  std::string tensor;
  double bytes = 0;
};

struct TaskGraph {
  Phase phase = Phase::Prefill;
  int past = 0;  // cached tokens at the start of a decode step
  std::vector<TaskNode> nodes;
  std::vector<TaskEdge> edges;

  int add(TaskNode n);
  void connect(int producer, int consumer, std::string tensor, double bytes);
  std::string to_json() const;
};

TaskGraph build_prefill_graph(const ModelConfig& model,
                              const WorkloadConfig& workload);

// One decode step generating token past+1. Requires past >= input_len; throws
// SimError on context overflow.
TaskGraph build_decode_step_graph(const ModelConfig& model,
                                  const WorkloadConfig& workload, int past);

// GEMMs: elem_bytes * (MK + KN + MN); elementwise kernels: inputs + outputs.
double kernel_bytes(const TaskNode& node, int elem_bytes);

// Compares the kernel sequence and GEMM shapes against an independent
// straight-line transformer trace.
struct ShapeMismatch {
  int position;
  std::string expected;
  std::string actual;
};
std::vector<ShapeMismatch> validate_shapes(const TaskGraph& graph,
                                           const ModelConfig& model,
                                           const WorkloadConfig& workload);

double graph_flops(const TaskGraph& g);

}  // namespace pimsim
