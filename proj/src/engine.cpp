#include "pimsim/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <queue>
#include <unordered_map>

#include "json.hpp"

namespace pimsim {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

}  // namespace

double systolic_gemm_cycles(const GemmShape& per_bank, const LogicConfig& lc) {
  if (per_bank.m == 0 || per_bank.k == 0 || per_bank.n == 0) return 0;
  std::int64_t rows = lc.systolic_rows;
  std::int64_t m_tiles = ceil_div(per_bank.m, rows);
  std::int64_t k_blocks = ceil_div(per_bank.k, rows);
  double pipe_fill = double(rows + lc.mul_pipe_stages + lc.add_pipe_stages);
  return double(m_tiles) * double(k_blocks) *
         (double(rows) + double(per_bank.n) + pipe_fill);
}

double simd_cycles(SimdKind kind, std::int64_t elems, const DramConfig& d,
                   const LogicConfig& lc) {
  if (elems <= 0) return 0;
  std::int64_t rate = d.bank_interface_bits / 16;
  switch (kind) {
    case SimdKind::Gemv:
    case SimdKind::Elementwise:
      return double(ceil_div(elems, rate));
    case SimdKind::Exp:
      return double(ceil_div(elems, std::int64_t(lc.exp_lanes)));
    case SimdKind::MaxReduce:
      return double(ceil_div(elems, std::int64_t(lc.max_tree_fanin))) +
             std::log2(double(lc.max_tree_fanin));
  }
  return 0;
}

double simd_kernel_cycles(Kernel k, std::int64_t elems, const DramConfig& d,
                          const LogicConfig& lc) {
  if (elems <= 0) return 0;
  // Throughput is bound by the bank interface: 8 fp16 lanes per bank.
  std::int64_t lanes_per_chip =
      std::int64_t(d.banks_per_chip) * (d.bank_interface_bits / 16);
  double per_pass = double(ceil_div(elems, lanes_per_chip));
  switch (k) {
    case Kernel::RmsNorm:
      // square+sum pass, then scale pass; the reduction tree latency is a
      // handful of cycles and folded into the passes.
      return 2 * per_pass + std::log2(double(lc.adder_tree_fanin));
    case Kernel::ResidualAdd:
    case Kernel::ElementwiseMul:
      return per_pass;
    case Kernel::Argmax:
      return double(ceil_div(elems, std::int64_t(lc.max_tree_fanin))) +
             std::log2(double(lc.max_tree_fanin));
    default:
      return per_pass;
  }
}

double dram_stream_time(double bytes, std::int64_t rows,
                        const ScenarioConfig& cfg) {
  const auto& t = cfg.dram.timing;
  double act = cfg.activation_overlap ? (rows > 0 ? t.trcd : 0.0)
                                      : double(rows) * t.trcd;
  return act + bytes / cfg.dram.bank_bandwidth();
}

double comm_time(double bytes, const std::vector<int>& path,
                 const MemorySystem& sys) {
  // Store-and-forward at message granularity: payloads larger than one chunk
  // pipeline across hops, so a multi-hop transfer pays full serialization
  // only on its slowest link.
  const double chunk = double(sys.transfer_chunk);
  double head = 0, tail = 0;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    const auto& p = sys.link_between(path[i], path[i + 1]).params;
    double lat = p.src_port_latency + p.link_latency + p.dst_port_latency;
    double first = std::min(bytes, chunk) / p.bandwidth;
    double full = bytes / p.bandwidth;
    tail = std::max(head + lat + full, tail + lat + first);
    head += lat + first;
  }
  return tail;
}

namespace {

// Per-bank work of a compute sub-task: shape, streamed bytes, touched rows.
struct BankWork {
  GemmShape shape;  // zero for SIMD kernels
  double bytes = 0;
  std::int64_t rows = 0;
  double softmax_elems = 0;  // score elements needing exp+max
};

BankWork bank_work(const SubTask& s, const ScenarioConfig& cfg) {
  BankWork w;
  const auto& d = cfg.dram;
  if (s.kernel == Kernel::ScoreSoftmax || s.kernel == Kernel::Context) {
    const GemmShape& g = s.shape.sub;
    if (s.kernel == Kernel::ScoreSoftmax) {
      // K-cache split token-wise (output columns) across banks.
      w.shape = {g.m, g.k, ceil_div(g.n, d.banks_per_chip)};
      w.softmax_elems = double(g.m) * double(g.n);
    } else {
      // V-cache split token-wise (reduction dim) across banks; partial sums
      // combine on the adder trees.
      w.shape = {g.m, ceil_div(g.k, d.banks_per_chip), g.n};
    }
    w.bytes = double(s.bytes_read) / d.banks_per_chip;
    w.rows = ceil_div(std::int64_t(std::ceil(w.bytes)), d.row_bytes);
    return w;
  }
  if (s.shape.sub.m > 0) {
    // Column-partitioned weight GEMM: every bank holds sub.k x sub.n weights
    // and re-streams them once per 8-row input tile.
    w.shape = s.shape.sub;
    std::int64_t m_tiles = ceil_div(s.shape.sub.m, cfg.logic.systolic_rows);
    double resident =
        double(s.shape.sub.k) * double(s.shape.sub.n) * cfg.model.elem_bytes;
    w.bytes = double(m_tiles) * resident;
    w.rows = m_tiles * ceil_div(std::int64_t(resident), d.row_bytes);
    return w;
  }
  // SIMD kernels: each operand element crosses the bank interface once.
  w.bytes = double(s.elems) * cfg.model.elem_bytes / d.banks_per_chip;
  w.rows = ceil_div(std::int64_t(std::ceil(w.bytes)), d.row_bytes);
  return w;
}

}  // namespace

double subtask_duration(const SubTask& s, const ScenarioConfig& cfg) {
  if (s.kind != SubTaskKind::Compute) return 0;
  BankWork w = bank_work(s, cfg);
  double cycles;
  if (w.shape.m > 0) {
    cycles = systolic_gemm_cycles(w.shape, cfg.logic);
    if (w.softmax_elems > 0)
      cycles += std::ceil(w.softmax_elems / cfg.logic.exp_lanes) +
                std::ceil(w.softmax_elems / cfg.logic.max_tree_fanin) +
                std::log2(double(cfg.logic.max_tree_fanin));
  } else {
    cycles = simd_kernel_cycles(s.kernel, s.elems, cfg.dram, cfg.logic);
  }
  double compute = cycles / cfg.dram.clock_hz;
  double stream = dram_stream_time(w.bytes, w.rows, cfg);
  return std::max(compute, stream);
}

namespace {

struct NodeState {
  double ready = 0;   // all inputs arrived
  double start = 0;
  double finish = 0;
  double duration = 0;
  // Earliest time the first message chunk of any input landed here. Lets a
  // zero-work forwarding node start retransmitting before the whole payload
  // has arrived (cut-through), instead of store-and-forward at the stage.
  double first_head = std::numeric_limits<double>::infinity();
  int cause_edge = -1;  // incoming edge that fixed `ready`
  bool done = false;
};

}  // namespace

SimReport simulate(const MappedGraph& g, const MemorySystem& sys,
                   const ScenarioConfig& cfg) {
  const size_t n = g.subtasks.size();
  std::vector<NodeState> st(n);
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> out_edges(n);
  for (size_t i = 0; i < g.edges.size(); ++i) {
    indeg[g.edges[i].to]++;
    out_edges[g.edges[i].from].push_back(int(i));
  }

  std::vector<double> unit_free(sys.units.size(), 0);
  // Links are full duplex: occupancy is tracked per direction (2*index+dir).
  std::vector<double> link_free(2 * sys.links.size(), 0);
  std::vector<double> edge_delay(g.edges.size(), 0);
  std::unordered_map<std::uint64_t, std::vector<int>> route_cache;
  std::array<double, 12> busy{};

  SimReport rep;

  // min-heap of ready nodes by (ready time, id): FIFO service per unit.
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) pq.push({0.0, int(i)});

  size_t processed = 0;
  int last_node = -1;
  double makespan = 0;
  while (!pq.empty()) {
    auto [ready, id] = pq.top();
    pq.pop();
    if (st[id].done) continue;
    NodeState& s = st[id];
    s.ready = ready;
    s.duration = subtask_duration(g.subtasks[id], cfg);
    int unit = g.subtasks[id].unit;
    s.start = std::max(s.ready, unit_free[unit]);
    s.finish = s.start + s.duration;
    if (s.duration > 0) {
      unit_free[unit] = s.finish;
      busy[int(g.subtasks[id].kernel)] += s.duration;
    }
    s.done = true;
    ++processed;
    if (s.finish >= makespan) {
      makespan = s.finish;
      last_node = id;
    }

    // Activity accounting for compute nodes.
    if (g.subtasks[id].kind == SubTaskKind::Compute) {
      const SubTask& sub = g.subtasks[id];
      rep.flops += sub.flops;
      BankWork w = bank_work(sub, cfg);
      rep.exp_ops += w.softmax_elems;
      rep.dram_bytes_read += w.bytes * cfg.dram.banks_per_chip;
      rep.row_activations += double(w.rows) * cfg.dram.banks_per_chip;
    }

    // Launch outgoing transfers in edge order. Broadcast edges from one
    // producer carry the same payload, so shared links along their routes are
    // crossed once (tree multicast); the per-link head/tail times are reused
    // where routes overlap.
    const double chunk = double(sys.transfer_chunk);
    std::unordered_map<int, std::pair<double, double>> mcast;
    bool bcast_billed = false;
    // Stage and aggregate nodes do no work (concatenate / fan out), so they
    // forward chunks as they arrive rather than store-and-forward.
    const bool forwarder = s.duration == 0 &&
                           g.subtasks[id].kind != SubTaskKind::Compute &&
                           std::isfinite(s.first_head);
    const double head0 = forwarder ? s.first_head : s.finish;
    for (int ei : out_edges[id]) {
      const MappedEdge& e = g.edges[ei];
      double arrive = s.finish;
      double head_at_dest = arrive;
      if (e.category != EdgeCategory::Local && e.bytes > 0) {
        std::uint64_t key =
            (std::uint64_t(std::uint32_t(g.subtasks[e.from].unit)) << 32) |
            std::uint32_t(g.subtasks[e.to].unit);
        auto it = route_cache.find(key);
        if (it == route_cache.end()) {
          auto path =
              sys.route(g.subtasks[e.from].unit, g.subtasks[e.to].unit);
          std::vector<int> hops;
          for (size_t h = 0; h + 1 < path.size(); ++h) {
            int li = int(&sys.link_between(path[h], path[h + 1]) -
                         sys.links.data());
            hops.push_back(2 * li + (sys.links[li].a == path[h] ? 0 : 1));
          }
          it = route_cache.emplace(key, std::move(hops)).first;
        }
        // All fan-out edges of one node carry the same payload, so shared
        // links along their routes are crossed once.
        bool share = e.category == EdgeCategory::Broadcast ||
                     e.category == EdgeCategory::Bus;
        double head = head0, tail = s.finish;
        for (int li : it->second) {
          if (share) {
            auto mit = mcast.find(li);
            if (mit != mcast.end()) {
              head = mit->second.first;
              tail = mit->second.second;
              continue;
            }
          }
          const LinkParams& p = sys.links[li / 2].params;
          double lat = p.src_port_latency + p.link_latency +
                       p.dst_port_latency;
          double first = std::min(e.bytes, chunk) / p.bandwidth;
          double full = e.bytes / p.bandwidth;
          double begin = std::max(head, link_free[li]);
          link_free[li] = begin + full;
          tail = std::max(begin + lat + full, tail + lat + first);
          head = begin + lat + first;
          if (share) mcast[li] = {head, tail};
        }
        arrive = tail;
        head_at_dest = std::min(head, tail);
        if (e.category != EdgeCategory::Bus) {
          rep.link_bytes += e.bytes;
          double billed =
              std::max(e.bytes, cfg.platform.link_min_transfer_bytes);
          if (e.category == EdgeCategory::Broadcast) {
            // Multicast delivery: the payload is billed once per broadcast,
            // not once per destination rank.
            if (!bcast_billed) {
              rep.comm_energy_bytes += billed;
              rep.billed_broadcast_bytes += billed;
              rep.comm_messages += 1;
              bcast_billed = true;
            }
          } else {
            rep.comm_energy_bytes += billed;
            rep.billed_gather_bytes += billed;
            rep.comm_messages += 1;
          }
        }
      }
      edge_delay[ei] = arrive - s.finish;
      NodeState& d = st[e.to];
      d.first_head = std::min(d.first_head, head_at_dest);
      if (arrive >= d.ready) {
        d.ready = arrive;
        d.cause_edge = ei;
      }
      if (--indeg[e.to] == 0) pq.push({d.ready, e.to});
    }
  }
  if (processed != n) throw SimError("task graph contains a cycle");

  for (int k = 0; k < 12; ++k)
    if (busy[k] > 0) rep.busy_by_kernel[kernel_name(Kernel(k))] += busy[k];

  rep.makespan = makespan;

  // Critical-path walk from the finishing node back to time zero. Time a
  // ready task spent waiting for its unit counts as queueing; the walk then
  // follows the dependency that fixed the ready time.
  int node = last_node;
  double frontier = makespan;
  const bool trace = std::getenv("PIMSIM_TRACE_CP") != nullptr;
  while (node >= 0) {
    const NodeState& s = st[node];
    rep.critical_path.compute += frontier - s.start;
    if (trace)
      std::fprintf(stderr,
                   "cp node=%d kern=%s kind=%d unit=%d ready=%.6f start=%.6f "
                   "fin=%.6f queue=%.6f edge_delay=%.6f cat=%d\n",
                   node, kernel_name(g.subtasks[node].kernel),
                   int(g.subtasks[node].kind), g.subtasks[node].unit, s.ready,
                   s.start, s.finish, s.start - s.ready,
                   s.cause_edge >= 0 ? edge_delay[s.cause_edge] : 0.0,
                   s.cause_edge >= 0 ? int(g.edges[s.cause_edge].category)
                                     : -1);
    if (s.start > s.ready) rep.critical_path.queueing += s.start - s.ready;
    if (s.cause_edge >= 0) {
      const MappedEdge& e = g.edges[s.cause_edge];
      rep.critical_path.comm += edge_delay[s.cause_edge];
      rep.cp_comm_by_cat[size_t(e.category)] += edge_delay[s.cause_edge];
      frontier = st[e.from].finish;
      node = e.from;
      continue;
    }
    rep.critical_path.queueing += s.ready;
    break;
  }

  // Refresh hides in per-rank idle time; only the shortfall below tRFC per
  // tREFI window serializes onto that rank. The busiest rank bounds the run.
  const auto& t = cfg.dram.timing;
  if (makespan > 0) {
    // A rank refreshes as a whole; its banks run in lockstep, so the busiest
    // chip in the rank defines the rank's busy time.
    std::map<int, double> chip_busy;
    for (size_t i = 0; i < n; ++i) {
      const auto& u = sys.units[g.subtasks[i].unit].id;
      if (u.level == Level::Chip && st[i].duration > 0)
        chip_busy[g.subtasks[i].unit] += st[i].duration;
    }
    std::map<int, double> rank_busy;
    for (const auto& [unit, busy] : chip_busy) {
      int rank_unit = unit - sys.units[unit].id.chip - 1;
      rank_busy[rank_unit] = std::max(rank_busy[rank_unit], busy);
    }
    double worst = 0;
    for (const auto& [rank, busy] : rank_busy) {
      double idle_per_window = (makespan - busy) * t.trefi / makespan;
      if (idle_per_window < t.trfc)
        worst = std::max(
            worst, (t.trfc - idle_per_window) * (makespan / t.trefi));
    }
    rep.refresh_overhead = worst;
  }
  return rep;
}

void merge_report(SimReport& into, const SimReport& step) {
  into.makespan += step.makespan;
  into.refresh_overhead += step.refresh_overhead;
  into.critical_path.compute += step.critical_path.compute;
  into.critical_path.comm += step.critical_path.comm;
  into.critical_path.queueing += step.critical_path.queueing;
  into.flops += step.flops;
  into.exp_ops += step.exp_ops;
  into.dram_bytes_read += step.dram_bytes_read;
  into.row_activations += step.row_activations;
  into.link_bytes += step.link_bytes;
  into.comm_energy_bytes += step.comm_energy_bytes;
  into.billed_broadcast_bytes += step.billed_broadcast_bytes;
  into.billed_gather_bytes += step.billed_gather_bytes;
  into.comm_messages += step.comm_messages;
  for (size_t i = 0; i < step.cp_comm_by_cat.size(); ++i)
    into.cp_comm_by_cat[i] += step.cp_comm_by_cat[i];
  for (const auto& [k, v] : step.busy_by_kernel) into.busy_by_kernel[k] += v;
}

std::string SimReport::to_json() const {
  nlohmann::ordered_json j;
  j["makespan_s"] = makespan;
  j["refresh_overhead_s"] = refresh_overhead;
  j["end_to_end_s"] = end_to_end();
  j["critical_path"] = {{"compute_s", critical_path.compute},
                        {"comm_s", critical_path.comm},
                        {"queueing_s", critical_path.queueing}};
  j["flops"] = flops;
  j["exp_ops"] = exp_ops;
  j["dram_bytes_read"] = dram_bytes_read;
  j["row_activations"] = row_activations;
  j["link_bytes"] = link_bytes;
  j["comm_energy_bytes"] = comm_energy_bytes;
  j["busy_by_kernel_s"] = busy_by_kernel;
  return j.dump(2);
}

}  // namespace pimsim
