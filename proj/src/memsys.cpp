#include "pimsim/memsys.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "json.hpp"

namespace pimsim {

using json = nlohmann::ordered_json;

std::string UnitId::to_string() const {
  std::ostringstream os;
  switch (level) {
    case Level::Root: os << "root"; break;
    case Level::Channel: os << "channel[m" << module << "]"; break;
    case Level::Rank: os << "rank[m" << module << ".r" << rank << "]"; break;
    case Level::Chip:
      os << "chip[m" << module << ".r" << rank << ".c" << chip << "]";
      break;
  }
  return os.str();
}

static int log2_exact(std::int64_t v) {
  return std::countr_zero(std::uint64_t(v));
}

MemorySystem build_memory_system(const ScenarioConfig& cfg) {
  require_valid(cfg);
  const auto& d = cfg.dram;
  MemorySystem sys;
  sys.capacity = d.capacity_total;
  sys.modules = d.modules;
  sys.ranks_per_module = d.ranks_per_module;
  sys.chips_per_rank = d.chips_per_rank;

  auto support = [&](Level lvl) {
    auto it = cfg.logic.level_kernel_support.find(lvl);
    return it == cfg.logic.level_kernel_support.end() ? std::set<Kernel>{}
                                                      : it->second;
  };

  auto add_unit = [&](UnitId id, int parent, const LinkParams* up) {
    LogicUnit u;
    u.index = int(sys.units.size());
    u.id = id;
    u.parent = parent;
    u.kernel_support = support(id.level);
    if (parent >= 0) {
      u.uplink = int(sys.links.size());
      sys.links.push_back({parent, u.index, *up});
      sys.units[parent].children.push_back(u.index);
    }
    sys.units.push_back(u);
    return u.index;
  };

  sys.root = add_unit({Level::Root}, -1, nullptr);

  LinkParams switch_link = cfg.network.switch_to_ctrl;
  switch_link.bandwidth = cfg.network.switch_total_bandwidth / d.modules;
  sys.rank_peer = cfg.network.rank_to_rank;
  sys.transfer_chunk = access_granularity(cfg);

  for (int m = 0; m < d.modules; ++m) {
    int ch = add_unit({Level::Channel, m}, sys.root, &switch_link);
    for (int r = 0; r < d.ranks_per_module; ++r) {
      int rk = add_unit({Level::Rank, m, r}, ch, &cfg.network.rank_to_ctrl);
      for (int c = 0; c < d.chips_per_rank; ++c) {
        // Chip<->rank transfers ride the rank unit's local bus; modeled with
        // the rank link class.
        add_unit({Level::Chip, m, r, c}, rk, &cfg.network.rank_to_rank);
      }
    }
  }
  // Peer PCIe links between sibling ranks.
  for (int m = 0; m < d.modules; ++m)
    for (int r = 0; r < d.ranks_per_module; ++r)
      for (int r2 = r + 1; r2 < d.ranks_per_module; ++r2)
        sys.links.push_back({sys.rank_unit(m, r), sys.rank_unit(m, r2),
                             cfg.network.rank_to_rank});

  AddressMap& am = sys.address_map;
  am.offset_bits = log2_exact(d.interface_bytes());
  am.chip_bits = log2_exact(d.chips_per_rank);
  int bg_count = std::min<int>(8, d.banks_per_chip);
  am.bank_group_bits = log2_exact(bg_count);
  am.bank_bits = log2_exact(d.banks_per_chip / bg_count);
  am.column_bits = log2_exact(d.row_bytes / d.interface_bytes());
  am.rank_bits = log2_exact(d.ranks_per_module);
  am.channel_bits = log2_exact(d.modules);
  int cap_bits = log2_exact(std::int64_t(d.capacity_total));
  am.row_bits = cap_bits - (am.offset_bits + am.chip_bits + am.bank_bits +
                            am.bank_group_bits + am.column_bits +
                            am.rank_bits + am.channel_bits);
  if (am.row_bits < 0)
    throw ConfigError("capacity too small for address map fields");
  return sys;
}

std::int64_t access_granularity(const ScenarioConfig& cfg) {
  require_valid(cfg);
  const auto& d = cfg.dram;
  return std::int64_t(d.chips_per_rank) * d.banks_per_chip * d.interface_bytes();
}

int MemorySystem::find_unit(const UnitId& id) const {
  for (const auto& u : units)
    if (u.id == id) return u.index;
  return -1;
}

// Units are appended in a fixed depth-first order, so coordinates map to
// indices arithmetically.
int MemorySystem::channel_unit(int module) const {
  return 1 + module * (1 + ranks_per_module * (1 + chips_per_rank));
}
int MemorySystem::rank_unit(int module, int rank) const {
  return channel_unit(module) + 1 + rank * (1 + chips_per_rank);
}
int MemorySystem::chip_unit(int module, int rank, int chip) const {
  return rank_unit(module, rank) + 1 + chip;
}

static int depth_of(const MemorySystem& sys, int u) {
  int d = 0;
  while (sys.units[u].parent >= 0) {
    u = sys.units[u].parent;
    ++d;
  }
  return d;
}

int MemorySystem::lowest_common_parent(const std::vector<int>& unit_indices) const {
  if (unit_indices.empty()) throw std::invalid_argument("empty unit set");
  int lca = unit_indices[0];
  for (size_t i = 1; i < unit_indices.size(); ++i) {
    int a = lca, b = unit_indices[i];
    int da = depth_of(*this, a), db = depth_of(*this, b);
    while (da > db) { a = units[a].parent; --da; }
    while (db > da) { b = units[b].parent; --db; }
    while (a != b) { a = units[a].parent; b = units[b].parent; }
    lca = a;
  }
  return lca;
}

std::vector<int> MemorySystem::route(int from, int to) const {
  if (from == to) return {from};
  const auto& fa = units[from].id;
  const auto& ta = units[to].id;
  if (fa.level == Level::Rank && ta.level == Level::Rank &&
      fa.module == ta.module)
    return {from, to};  // peer link between sibling ranks
  int lca = lowest_common_parent({from, to});
  std::vector<int> up, down;
  for (int u = from; u != lca; u = units[u].parent) up.push_back(u);
  up.push_back(lca);
  for (int u = to; u != lca; u = units[u].parent) down.push_back(u);
  std::reverse(down.begin(), down.end());
  up.insert(up.end(), down.begin(), down.end());
  return up;
}

const LinkSpec& MemorySystem::link_between(int a, int b) const {
  if (units[a].parent == b) return links[units[a].uplink];
  if (units[b].parent == a) return links[units[b].uplink];
  for (const auto& l : links)
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return l;
  throw SimError("route missing link between " + units[a].id.to_string() +
                 " and " + units[b].id.to_string());
}

// ---------------------------------------------------------------------------
// Address interleaving.

std::uint64_t encode_address(const Location& loc, const AddressMap& map) {
  std::uint64_t addr = 0;
  int shift = 0;
  auto put = [&](std::int64_t value, int bits) {
    addr |= std::uint64_t(value) << shift;
    shift += bits;
  };
  put(loc.offset, map.offset_bits);
  put(loc.chip, map.chip_bits);
  put(loc.bank, map.bank_bits);
  put(loc.bank_group, map.bank_group_bits);
  put(loc.column, map.column_bits);
  put(loc.rank, map.rank_bits);
  put(loc.channel, map.channel_bits);
  put(loc.row, map.row_bits);
  return addr;
}

Location decode_address(std::uint64_t addr, const AddressMap& map,
                        std::uint64_t capacity) {
  if (addr >= capacity) {
    std::ostringstream os;
    os << "address " << addr << " out of range (capacity " << capacity << ")";
    throw SimError(os.str());
  }
  Location loc;
  auto take = [&](int bits) {
    std::uint64_t v = addr & ((std::uint64_t(1) << bits) - 1);
    addr >>= bits;
    return std::int64_t(v);
  };
  loc.offset = take(map.offset_bits);
  loc.chip = int(take(map.chip_bits));
  loc.bank = int(take(map.bank_bits));
  loc.bank_group = int(take(map.bank_group_bits));
  loc.column = take(map.column_bits);
  loc.rank = int(take(map.rank_bits));
  loc.channel = int(take(map.channel_bits));
  loc.row = take(map.row_bits);
  return loc;
}

std::string MemorySystem::topology_json() const {
  json j;
  json ju = json::array();
  for (const auto& u : units) {
    json ks = json::array();
    for (Kernel k : u.kernel_support) ks.push_back(kernel_name(k));
    ju.push_back({{"index", u.index},
                  {"id", u.id.to_string()},
                  {"level", level_name(u.id.level)},
                  {"parent", u.parent},
                  {"children", u.children},
                  {"kernel_support", ks}});
  }
  j["units"] = ju;
  json jl = json::array();
  for (const auto& l : links)
    jl.push_back({{"a", l.a},
                  {"b", l.b},
                  {"bandwidth", l.params.bandwidth},
                  {"link_latency", l.params.link_latency},
                  {"src_port_latency", l.params.src_port_latency},
                  {"dst_port_latency", l.params.dst_port_latency}});
  j["links"] = jl;
  j["address_map"] = {{"offset_bits", address_map.offset_bits},
                      {"chip_bits", address_map.chip_bits},
                      {"bank_bits", address_map.bank_bits},
                      {"bank_group_bits", address_map.bank_group_bits},
                      {"column_bits", address_map.column_bits},
                      {"rank_bits", address_map.rank_bits},
                      {"channel_bits", address_map.channel_bits},
                      {"row_bits", address_map.row_bits}};
  j["capacity"] = capacity;
  return j.dump(2);
}

}  // namespace pimsim
