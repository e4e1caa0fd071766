#include "pimsim/mapper.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace pimsim {

namespace {

// The weight tensor a matrix kernel streams, if any.
const Tensor* weight_of(const TaskNode& n, const TensorCatalog& cat) {
  for (const auto& name : n.input_tensors) {
    const Tensor* t = cat.find(name);
    if (t && t->role != TensorRole::Activation) return t;
  }
  return nullptr;
}

struct Mapper {
  const TaskGraph& graph;
  const MemorySystem& sys;
  const TensorCatalog& catalog;
  const ScenarioConfig& cfg;
  MappedGraph out;

  // Compute sub-tasks per task, for wiring incoming edges.
  std::vector<std::vector<int>> compute_of;
  // Per-task broadcast staging node per rank unit (unit -> subtask id).
  std::vector<std::map<int, int>> rank_stage;
  // Stages reused across consumers of the same producer result, so a tensor
  // needed by several tasks on the same chips crosses each rank once.
  std::map<std::pair<int, int>, int> shared_stage;
  // Concatenated output size per task, for building result aggregates on
  // demand. Tasks whose consumers all read slices in place never gather.
  std::vector<double> agg_bytes;

  int add(SubTask s) {
    s.id = int(out.subtasks.size());
    leaf_count.push_back(s.kind == SubTaskKind::Compute ? 1 : 0);
    out.subtasks.push_back(s);
    return s.id;
  }

  void link(int from, int to, double bytes, EdgeCategory cat) {
    if (from < 0 || to < 0 || bytes < 0) return;
    const auto& a = out.subtasks[from];
    const auto& b = out.subtasks[to];
    if (a.unit == b.unit) cat = EdgeCategory::Local;
    out.edges.push_back({from, to, bytes, cat});
    if (cat == EdgeCategory::Broadcast)
      out.movement.broadcast_bytes += bytes;
    else if (cat == EdgeCategory::Gather)
      out.movement.gather_bytes += bytes;
    if (cat == EdgeCategory::Broadcast || cat == EdgeCategory::Gather) {
      const UnitId& ia = sys.units[a.unit].id;
      const UnitId& ib = sys.units[b.unit].id;
      if (ia.module != ib.module)
        out.movement.inter_module_bytes += bytes;
      else if (ia.rank != ib.rank && (ia.rank >= 0 || ib.rank >= 0))
        out.movement.inter_rank_bytes += bytes;
    }
  }

  void check_support(Kernel k, Level level) const {
    auto it = cfg.logic.level_kernel_support.find(level);
    if (it == cfg.logic.level_kernel_support.end() || !it->second.count(k))
      throw MappingError(std::string("kernel '") + kernel_name(k) +
                         "' not supported at level " + level_name(level));
  }

  // Concatenating aggregation from chip sub-tasks up to the lowest common
  // parent. Returns the result node id.
  int aggregate(const TaskNode& task, const std::vector<int>& chips,
                double out_bytes) {
    if (chips.size() == 1) return chips[0];
    std::vector<int> units;
    for (int s : chips) units.push_back(out.subtasks[s].unit);
    int lca = sys.lowest_common_parent(units);
    double share = out_bytes / double(chips.size());

    // Group producers by rank, then ranks by channel, stopping at the LCA.
    std::map<int, std::vector<int>> by_parent;
    for (int s : chips) {
      int u = out.subtasks[s].unit;
      int p = sys.units[u].id.level == Level::Chip ? sys.units[u].parent : u;
      by_parent[p].push_back(s);
    }
    std::vector<int> level_nodes;
    for (auto& [unit, members] : by_parent) {
      SubTask agg;
      agg.task = task.id;
      agg.kind = SubTaskKind::Aggregate;
      agg.kernel = task.kernel;
      agg.unit = unit;
      int id = add(agg);
      for (int s : members) {
        link(s, id, share, EdgeCategory::Gather);
        leaf_count[id] += leaf_count[s];
      }
      level_nodes.push_back(id);
    }
    while (int(level_nodes.size()) > 1 ||
           out.subtasks[level_nodes[0]].unit != lca) {
      if (int(level_nodes.size()) == 1 &&
          sys.units[out.subtasks[level_nodes[0]].unit].parent < 0)
        break;
      std::map<int, std::vector<int>> groups;
      for (int s : level_nodes)
        groups[sys.units[out.subtasks[s].unit].parent].push_back(s);
      std::vector<int> next;
      for (auto& [unit, members] : groups) {
        SubTask agg;
        agg.task = task.id;
        agg.kind = SubTaskKind::Aggregate;
        agg.kernel = task.kernel;
        agg.unit = unit;
        int id = add(agg);
        for (int s : members) {
          double portion = out_bytes *
                           double(count_leaves(s)) / double(chips.size());
          link(s, id, portion, EdgeCategory::Gather);
          leaf_count[id] += leaf_count[s];
        }
        next.push_back(id);
      }
      level_nodes = std::move(next);
      if (out.subtasks[level_nodes[0]].unit == lca &&
          int(level_nodes.size()) == 1)
        break;
    }
    return level_nodes[0];
  }

  // Chip-level compute producers under each sub-task (sizes the concatenated
  // payload an aggregate forwards upward). Maintained incrementally.
  std::vector<int> leaf_count;
  int count_leaves(int sub) { return leaf_count[sub]; }

  // --- per-kernel placement ------------------------------------------------

  void place_matrix(const TaskNode& task) {
    const Tensor* w = weight_of(task, catalog);
    if (!w) throw MappingError("matrix task has no weight tensor: " +
                               std::string(kernel_name(task.kernel)));
    const Placement& p = w->placement;
    if (p.rank_set.empty())
      throw MappingError("tensor '" + w->name + "' is not placed");

    if (p.chip_partition == ChipPartition::HeadWise) {
      place_attention(task, *w);
      return;
    }
    check_support(task.kernel, Level::Chip);
    BankSubShape bs = partition_gemm(*task.gemm, p, cfg);
    std::int64_t n_chips =
        std::int64_t(p.rank_set.size()) * cfg.dram.chips_per_rank;
    double flops_share = task.gemm->flops() / double(n_chips);
    double weight_bytes_chip =
        double(bs.sub.k * cfg.dram.banks_per_chip * bs.sub.n) * w->elem_bytes;
    for (const auto& rr : p.rank_set)
      for (int c = 0; c < cfg.dram.chips_per_rank; ++c) {
        SubTask s;
        s.task = task.id;
        s.kernel = task.kernel;
        s.unit = sys.chip_unit(rr.module, rr.rank, c);
        s.shape = bs;
        s.flops = flops_share;
        s.bytes_read = weight_bytes_chip;
        compute_of[task.id].push_back(add(s));
      }
    agg_bytes[task.id] =
        double(task.gemm->m * task.gemm->n) * cfg.model.elem_bytes;
  }

  void place_attention(const TaskNode& task, const Tensor& kv) {
    check_support(task.kernel, Level::Chip);
    const Placement& p = kv.placement;
    if (task.head < 0 || task.head >= int(p.head_to_chip.size()))
      throw MappingError("attention task head out of range for tensor '" +
                         kv.name + "'");
    int b = std::max(task.batch_item, 0);
    auto [rank_idx, chip] = p.head_to_chip[task.head];
    int R = int(p.rank_set.size());
    // rank_idx < 0: the rank follows the batch item round robin.
    const RankRef* rr = &p.rank_set[rank_idx < 0 ? b % R : rank_idx % R];
    if (graph.phase == Phase::Prefill) {
      // Prefill attention consumes the K/V produced this very step, so it is
      // not tied to the stored cache's rank; heads fan out over the whole
      // cache rank set instead of stacking on the request's home rank.
      std::int64_t flat =
          std::int64_t(task.head) * std::max(cfg.workload.batch, 1) + b;
      rr = &p.rank_set[flat % R];
      chip = int((flat / R) % cfg.dram.chips_per_rank);
    }
    SubTask s;
    s.task = task.id;
    s.kernel = task.kernel;
    s.unit = sys.chip_unit(rr->module, rr->rank, chip);
    s.head = task.head;
    s.batch_item = task.batch_item;
    s.shape.sub = *task.gemm;
    s.shape.unpadded = *task.gemm;
    s.flops = task.flops;
    s.bytes_read = task.bytes_read;
    int id = add(s);
    compute_of[task.id].push_back(id);
    out.result_of[task.id] = id;
  }

  void place_simd(const TaskNode& task) {
    check_support(task.kernel, Level::Chip);
    // Spread element-parallel work over the same chips the weight GEMMs run
    // on, so producer slices are consumed in place instead of funneling
    // through one rank.
    auto ranks = wt_ranks(cfg);
    std::int64_t chips =
        std::int64_t(ranks.size()) * cfg.dram.chips_per_rank;
    std::int64_t per_chip = (task.elems + chips - 1) / chips;
    for (const auto& rr : ranks)
      for (int c = 0; c < cfg.dram.chips_per_rank; ++c) {
        SubTask s;
        s.task = task.id;
        s.kernel = task.kernel;
        s.unit = sys.chip_unit(rr.module, rr.rank, c);
        s.elems = per_chip;
        s.flops = task.flops / double(chips);
        compute_of[task.id].push_back(add(s));
      }
    double out_bytes = double(task.elems) * cfg.model.elem_bytes;
    if (task.kernel == Kernel::Argmax)
      out_bytes = double(cfg.workload.batch) * cfg.model.elem_bytes * 2;
    agg_bytes[task.id] = out_bytes;
  }

  // Result node for a task, gathering its slices to the lowest common parent.
  // Built on first use; tasks consumed slice-in-place never pay for it.
  int result_node(int task) {
    int& r = out.result_of[task];
    if (r < 0)
      r = aggregate(graph.nodes[task], compute_of[task], agg_bytes[task]);
    return r;
  }

  // --- edge wiring ---------------------------------------------------------

  // Staging node at `unit` that fans a task's input out to its chips.
  int stage_at(const TaskNode& task, int unit) {
    auto& m = rank_stage[task.id];
    auto it = m.find(unit);
    if (it != m.end()) return it->second;
    SubTask s;
    s.task = task.id;
    s.kind = SubTaskKind::Broadcast;
    s.kernel = task.kernel;
    s.unit = unit;
    int id = add(s);
    m[unit] = id;
    return id;
  }

  // True when the producer's compute slices already sit on every chip the
  // consumer runs on, i.e. the two tasks share a partition.
  bool partition_matches(int producer, const std::vector<int>& targets,
                         std::map<int, int>& sub_at_unit) {
    sub_at_unit.clear();
    for (int s : compute_of[producer]) sub_at_unit[out.subtasks[s].unit] = s;
    for (int t : targets)
      if (!sub_at_unit.count(out.subtasks[t].unit)) return false;
    return true;
  }

  // Wires all incoming task edges of one consumer. Data-parallel consumers
  // run where their operands already sit: a producer split over the same
  // chips hands each one its slice in place. Everything else pulls through
  // one staging node per rank so each rank link is crossed once; the chip
  // fan-out is emitted once with the summed payload.
  void wire_consumer(int task_id, const std::vector<const TaskEdge*>& in) {
    const TaskNode& dst = graph.nodes[task_id];
    const auto& targets = compute_of[task_id];
    if (targets.size() == 1) {
      for (const TaskEdge* e : in)
        link(result_node(e->producer), targets[0], e->bytes,
             EdgeCategory::Broadcast);
      return;
    }
    // Column-split GEMMs need the whole input on every chip; data-parallel
    // SIMD kernels only need their slice.
    bool full_copy = dst.gemm.has_value();
    std::vector<const TaskEdge*> staged;
    std::map<int, int> sub_at_unit;
    for (const TaskEdge* e : in) {
      if (!full_copy && partition_matches(e->producer, targets, sub_at_unit)) {
        double slice = e->bytes / double(targets.size());
        for (int t : targets)
          link(sub_at_unit[out.subtasks[t].unit], t, slice,
               EdgeCategory::Gather);
        continue;
      }
      staged.push_back(e);
    }
    if (staged.empty()) return;
    double total = 0;
    for (const TaskEdge* e : staged) total += e->bytes;
    std::map<int, std::vector<int>> by_rank;
    for (int t : targets)
      by_rank[sys.units[out.subtasks[t].unit].parent].push_back(t);
    for (auto& [rank_unit, members] : by_rank) {
      int stage = -1;
      bool reused = false;
      if (staged.size() == 1) {
        auto key =
            std::make_pair(result_node(staged[0]->producer), rank_unit);
        auto it = shared_stage.find(key);
        if (it != shared_stage.end()) {
          stage = it->second;
          reused = true;
        } else {
          stage = stage_at(dst, rank_unit);
          shared_stage.emplace(key, stage);
        }
      } else {
        stage = stage_at(dst, rank_unit);
      }
      if (!reused)
        for (const TaskEdge* e : staged)
          link(result_node(e->producer), stage, e->bytes,
               EdgeCategory::Broadcast);
      double down = full_copy ? total : total / double(targets.size());
      for (int t : members) link(stage, t, down, EdgeCategory::Bus);
    }
  }

  // KV-cache writes: a producer that fills a KV tensor ships the new K and V
  // slices to the chips that will read them.
  void wire_kv_writes(const TaskNode& task) {
    if (task.output_tensors.empty()) return;
    int src = result_node(task.id);
    double seq = graph.phase == Phase::Prefill ? cfg.workload.input_len : 1;
    double slice =
        seq * double(cfg.model.head_dim) * cfg.model.elem_bytes;
    for (const auto& name : task.output_tensors) {
      const Tensor* t = catalog.find(name);
      if (!t || t->role != TensorRole::Kv || t->placement.rank_set.empty())
        continue;
      const Placement& p = t->placement;
      for (int b = 0; b < cfg.workload.batch; ++b)
        for (int h = 0; h < cfg.model.n_kv_heads; ++h) {
          auto [rank_idx, chip] = p.head_to_chip[h];
          const RankRef& rr =
              p.rank_set[rank_idx < 0 ? b % int(p.rank_set.size())
                                      : rank_idx % int(p.rank_set.size())];
          int unit = sys.chip_unit(rr.module, rr.rank, chip);
          SubTask sink;
          sink.task = task.id;
          sink.kind = SubTaskKind::Broadcast;
          sink.kernel = task.kernel;
          sink.unit = unit;
          sink.head = h;
          sink.batch_item = b;
          int id = add(sink);
          link(src, id, slice, EdgeCategory::Broadcast);
        }
    }
  }

  MappedGraph run() {
    compute_of.resize(graph.nodes.size());
    rank_stage.resize(graph.nodes.size());
    agg_bytes.assign(graph.nodes.size(), 0);
    out.result_of.assign(graph.nodes.size(), -1);
    for (const auto& task : graph.nodes) {
      if (task.gemm)
        place_matrix(task);
      else
        place_simd(task);
      if (task.kernel == Kernel::QkvProj) wire_kv_writes(task);
    }
    std::vector<std::vector<const TaskEdge*>> incoming(graph.nodes.size());
    std::vector<bool> has_consumer(graph.nodes.size(), false);
    for (const auto& e : graph.edges) {
      incoming[e.consumer].push_back(&e);
      has_consumer[e.producer] = true;
    }
    for (size_t t = 0; t < graph.nodes.size(); ++t)
      if (!incoming[t].empty()) wire_consumer(int(t), incoming[t]);
    // Final outputs still leave the array: gather graph sinks to their LCA.
    for (size_t t = 0; t < graph.nodes.size(); ++t)
      if (!has_consumer[t]) result_node(int(t));
    return std::move(out);
  }
};

}  // namespace

MappedGraph map_tasks(const TaskGraph& graph, const MemorySystem& sys,
                      const TensorCatalog& catalog, const ScenarioConfig& cfg) {
  Mapper m{graph, sys, catalog, cfg};
  return m.run();
}

std::string mapping_summary_json(const MappedGraph& g, const MemorySystem& sys) {
  nlohmann::ordered_json j;
  int compute = 0, agg = 0, stage = 0;
  for (const auto& s : g.subtasks) {
    if (s.kind == SubTaskKind::Compute) ++compute;
    else if (s.kind == SubTaskKind::Aggregate) ++agg;
    else ++stage;
  }
  j["subtasks"] = int(g.subtasks.size());
  j["compute"] = compute;
  j["aggregate"] = agg;
  j["staging"] = stage;
  j["edges"] = int(g.edges.size());
  j["movement_bytes"] = {{"broadcast", g.movement.broadcast_bytes},
                         {"gather", g.movement.gather_bytes},
                         {"inter_rank", g.movement.inter_rank_bytes},
                         {"inter_module", g.movement.inter_module_bytes}};
  std::map<std::string, int> per_level;
  for (const auto& s : g.subtasks)
    if (s.kind == SubTaskKind::Compute)
      per_level[level_name(sys.units[s.unit].id.level)]++;
  j["compute_by_level"] = per_level;
  return j.dump(2);
}

}  // namespace pimsim
