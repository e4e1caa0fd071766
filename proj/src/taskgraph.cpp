#include "pimsim/taskgraph.hpp"

#include <sstream>

#include "json.hpp"

namespace pimsim {

int TaskGraph::add(TaskNode n) {
  n.id = int(nodes.size());
  nodes.push_back(std::move(n));
  return nodes.back().id;
}

void TaskGraph::connect(int producer, int consumer, std::string tensor,
                        double bytes) {
  edges.push_back({producer, consumer, std::move(tensor), bytes});
}

double kernel_bytes(const TaskNode& node, int elem_bytes) {
  if (node.gemm) {
    const auto& g = *node.gemm;
    return double(elem_bytes) *
           double(g.m * g.k + g.k * g.n + g.m * g.n);
  }
  // Elementwise / reduction style: read inputs, write outputs. The element
  // count already covers the dominant operand; two reads + one write is the
  // worst case we charge for.
  return double(elem_bytes) * double(node.elems) *
         (node.kernel == Kernel::ElementwiseMul || node.kernel == Kernel::ResidualAdd
              ? 3.0
              : 2.0);
}

double graph_flops(const TaskGraph& g) {
  double total = 0;
  for (const auto& n : g.nodes) total += n.flops;
  return total;
}

namespace {

// Shared layer builder. `seq` is the number of query positions folded into one
// GEMM M dimension, `past_len` the attention span (== seq in prefill,
// past + 1 in decode).
struct GraphBuilder {
  const ModelConfig& model;
  const WorkloadConfig& wl;
  TaskGraph g;
  int batch_m;    // rows folded into projection GEMMs
  int seq;        // query positions per request
  std::int64_t past_len;

  TaskNode base(Kernel k, int layer) const {
    TaskNode n;
    n.kernel = k;
    n.phase = g.phase;
    n.layer = layer;
    return n;
  }

  int simd(Kernel k, int layer, std::int64_t elems, double flops_per_elem,
           int after, const std::string& tensor) {
    TaskNode n = base(k, layer);
    n.elems = elems;
    n.flops = double(elems) * flops_per_elem;
    n.bytes_read = 0;
    int id = g.add(n);
    if (after >= 0)
      g.connect(after, id, tensor, double(elems) * model.elem_bytes);
    return id;
  }

  int gemm(Kernel k, int layer, GemmShape s, const std::string& weight,
           int after, const std::string& act) {
    TaskNode n = base(k, layer);
    n.gemm = s;
    n.flops = s.flops();
    n.bytes_read = double(s.k * s.n) * model.elem_bytes;  // streamed operand
    if (!weight.empty()) n.input_tensors.push_back(weight);
    int id = g.add(n);
    if (after >= 0)
      g.connect(after, id, act, double(s.m * s.k) * model.elem_bytes);
    return id;
  }

  // Attention block for one layer: per batch item, per kv head. Returns the
  // out-projection node id.
  int attention(int layer, int qkv_node) {
    std::string p = "layer" + std::to_string(layer) + ".";
    int group = model.gqa_group();
    std::vector<int> ctx_nodes;
    for (int b = 0; b < wl.batch; ++b) {
      for (int h = 0; h < model.n_kv_heads; ++h) {
        TaskNode sc = base(Kernel::ScoreSoftmax, layer);
        sc.head = h;
        sc.batch_item = b;
        sc.gemm = GemmShape{std::int64_t(seq) * group, model.head_dim, past_len};
        // score GEMM + softmax (exp, max, sum, div ~ 4 ops/score element)
        sc.flops = sc.gemm->flops() +
                   4.0 * double(sc.gemm->m) * double(past_len);
        sc.input_tensors.push_back(p + "Kcache");
        sc.bytes_read = double(past_len * model.head_dim) * model.elem_bytes;
        int sid = g.add(sc);
        g.connect(qkv_node, sid, p + "q",
                  double(seq) * group * model.head_dim * model.elem_bytes);

        TaskNode cx = base(Kernel::Context, layer);
        cx.head = h;
        cx.batch_item = b;
        cx.gemm = GemmShape{std::int64_t(seq) * group, past_len, model.head_dim};
        cx.flops = cx.gemm->flops();
        cx.input_tensors.push_back(p + "Vcache");
        cx.bytes_read = double(past_len * model.head_dim) * model.elem_bytes;
        int cid = g.add(cx);
        g.connect(sid, cid, p + "scores",
                  double(seq) * group * past_len * model.elem_bytes);
        ctx_nodes.push_back(cid);
      }
    }
    int out = gemm(Kernel::OutProj, layer,
                   {batch_m, model.hidden_dim, model.hidden_dim}, p + "Wo", -1,
                   "");
    for (int cid : ctx_nodes)
      g.connect(cid, out, "layer" + std::to_string(layer) + ".attn_out",
                double(seq) * model.gqa_group() * model.head_dim *
                    model.elem_bytes);
    return out;
  }

  int layer_block(int layer, int prev) {
    std::string p = "layer" + std::to_string(layer) + ".";
    std::int64_t h = model.hidden_dim;
    int norm1 = simd(Kernel::RmsNorm, layer, std::int64_t(batch_m) * h, 4.0,
                     prev, "hidden");
    int qkv = gemm(Kernel::QkvProj, layer, {batch_m, h, model.qkv_cols()},
                   p + "Wqkv", norm1, p + "norm1");
    g.nodes[qkv].output_tensors = {p + "Kcache", p + "Vcache"};
    int out = attention(layer, qkv);
    int res1 = simd(Kernel::ResidualAdd, layer, std::int64_t(batch_m) * h, 1.0,
                    out, p + "attn_proj");
    if (prev >= 0)
      g.connect(prev, res1, p + "residual",
                double(batch_m) * h * model.elem_bytes);
    int norm2 = simd(Kernel::RmsNorm, layer, std::int64_t(batch_m) * h, 4.0,
                     res1, p + "post_attn");
    int gate = gemm(Kernel::GateProj, layer, {batch_m, h, model.ffn_dim},
                    p + "Wgate", norm2, p + "norm2");
    int up = gemm(Kernel::UpProj, layer, {batch_m, h, model.ffn_dim},
                  p + "Wup", norm2, p + "norm2");
    // silu on the gate output folded into the multiply: 3 ops/elem
    int mul = simd(Kernel::ElementwiseMul, layer,
                   std::int64_t(batch_m) * model.ffn_dim, 3.0, gate,
                   p + "gate_out");
    g.connect(up, mul, p + "up_out",
              double(batch_m) * model.ffn_dim * model.elem_bytes);
    int down = gemm(Kernel::DownProj, layer, {batch_m, model.ffn_dim, h},
                    p + "Wdown", mul, p + "mul_out");
    int res2 = simd(Kernel::ResidualAdd, layer, std::int64_t(batch_m) * h, 1.0,
                    down, p + "down_out");
    g.connect(res1, res2, p + "residual2", double(batch_m) * h * model.elem_bytes);
    return res2;
  }

  void head_block(int prev) {
    std::int64_t h = model.hidden_dim;
    // Logits are computed for every position (prefill included); only the
    // last position per request feeds the sampled token.
    int norm = simd(Kernel::RmsNorm, -1, std::int64_t(batch_m) * h, 4.0, prev,
                    "final_hidden");
    int lm = gemm(Kernel::LmHead, -1, {batch_m, h, model.vocab_size},
                  "lm_head", norm, "final_norm");
    simd(Kernel::Argmax, -1, std::int64_t(wl.batch) * model.vocab_size, 1.0,
         lm, "logits");
  }
};

}  // namespace

TaskGraph build_prefill_graph(const ModelConfig& model,
                              const WorkloadConfig& workload) {
  if (workload.input_len <= 0)
    throw ConfigError("prefill graph requires input_len > 0");
  GraphBuilder b{model, workload};
  b.g.phase = Phase::Prefill;
  b.g.past = 0;
  b.seq = workload.input_len;
  b.batch_m = workload.batch * workload.input_len;
  b.past_len = workload.input_len;
  int prev = -1;
  for (int l = 0; l < model.n_layers; ++l) prev = b.layer_block(l, prev);
  b.head_block(prev);
  return b.g;
}

TaskGraph build_decode_step_graph(const ModelConfig& model,
                                  const WorkloadConfig& workload, int past) {
  if (past < workload.input_len)
    throw ConfigError("decode step before prefill completed");
  if (workload.max_context > 0 && past + 1 > workload.max_context)
    throw SimError("context overflow: position " + std::to_string(past + 1) +
                   " exceeds max_context " +
                   std::to_string(workload.max_context));
  GraphBuilder b{model, workload};
  b.g.phase = Phase::Decode;
  b.g.past = past;
  b.seq = 1;
  b.batch_m = workload.batch;
  b.past_len = past + 1;
  int prev = -1;
  for (int l = 0; l < model.n_layers; ++l) prev = b.layer_block(l, prev);
  b.head_block(prev);
  return b.g;
}

// ---------------------------------------------------------------------------
// Independent reference trace: a straight-line walk over the transformer,
// written without reusing the builder above.

namespace {

struct TraceEntry {
  Kernel k;
  GemmShape shape;  // zero for non-GEMM kernels
};

std::vector<TraceEntry> reference_trace(const ModelConfig& m,
                                        const WorkloadConfig& w, Phase phase,
                                        int past) {
  std::vector<TraceEntry> out;
  std::int64_t seq = phase == Phase::Prefill ? w.input_len : 1;
  std::int64_t span = phase == Phase::Prefill ? w.input_len : past + 1;
  std::int64_t rows = seq * w.batch;
  std::int64_t gm = seq * (m.n_heads / m.n_kv_heads);
  for (int l = 0; l < m.n_layers; ++l) {
    out.push_back({Kernel::RmsNorm, {}});
    out.push_back({Kernel::QkvProj,
                   {rows, m.hidden_dim,
                    m.hidden_dim + 2 * m.n_kv_heads * m.head_dim}});
    for (int b = 0; b < w.batch; ++b)
      for (int h = 0; h < m.n_kv_heads; ++h) {
        out.push_back({Kernel::ScoreSoftmax, {gm, m.head_dim, span}});
        out.push_back({Kernel::Context, {gm, span, m.head_dim}});
      }
    out.push_back({Kernel::OutProj, {rows, m.hidden_dim, m.hidden_dim}});
    out.push_back({Kernel::ResidualAdd, {}});
    out.push_back({Kernel::RmsNorm, {}});
    out.push_back({Kernel::GateProj, {rows, m.hidden_dim, m.ffn_dim}});
    out.push_back({Kernel::UpProj, {rows, m.hidden_dim, m.ffn_dim}});
    out.push_back({Kernel::ElementwiseMul, {}});
    out.push_back({Kernel::DownProj, {rows, m.ffn_dim, m.hidden_dim}});
    out.push_back({Kernel::ResidualAdd, {}});
  }
  out.push_back({Kernel::RmsNorm, {}});
  out.push_back({Kernel::LmHead, {rows, m.hidden_dim, m.vocab_size}});
  out.push_back({Kernel::Argmax, {}});
  return out;
}

std::string describe(Kernel k, const GemmShape& s) {
  std::ostringstream os;
  os << kernel_name(k);
  if (s.m > 0) os << "(" << s.m << "," << s.k << "," << s.n << ")";
  return os.str();
}

}  // namespace

std::vector<ShapeMismatch> validate_shapes(const TaskGraph& graph,
                                           const ModelConfig& model,
                                           const WorkloadConfig& workload) {
  auto ref = reference_trace(model, workload, graph.phase, graph.past);
  std::vector<ShapeMismatch> bad;
  size_t n = std::max(ref.size(), graph.nodes.size());
  for (size_t i = 0; i < n; ++i) {
    std::string want =
        i < ref.size() ? describe(ref[i].k, ref[i].shape) : "<end>";
    std::string got = "<end>";
    if (i < graph.nodes.size()) {
      const auto& node = graph.nodes[i];
      got = describe(node.kernel, node.gemm.value_or(GemmShape{}));
    }
    if (want != got) bad.push_back({int(i), want, got});
  }
  return bad;
}

std::string TaskGraph::to_json() const {
  nlohmann::ordered_json j;
  j["phase"] = phase == Phase::Prefill ? "prefill" : "decode";
  j["past"] = past;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : nodes) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["kernel"] = kernel_name(n.kernel);
    jn["layer"] = n.layer;
    if (n.head >= 0) jn["head"] = n.head;
    if (n.batch_item >= 0) jn["batch"] = n.batch_item;
    if (n.gemm) jn["gemm"] = {n.gemm->m, n.gemm->k, n.gemm->n};
    jn["flops"] = n.flops;
    j["nodes"].push_back(std::move(jn));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : edges)
    j["edges"].push_back({{"from", e.producer},
                          {"to", e.consumer},
                          {"tensor", e.tensor},
                          {"bytes", e.bytes}});
  return j.dump(2);
}

}  // namespace pimsim
