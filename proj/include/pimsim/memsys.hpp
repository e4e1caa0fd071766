#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pimsim/config.hpp"

namespace pimsim {

// Identifies one logic unit in the tree. Coordinates are used down to the
// unit's level; deeper fields are -1.
struct UnitId {
  Level level = Level::Root;
  int module = -1;
  int rank = -1;
  int chip = -1;

  bool operator==(const UnitId&) const = default;
  auto operator<=>(const UnitId&) const = default;
  std::string to_string() const;
};

struct LogicUnit {
  int index = -1;  // position in MemorySystem::units
  UnitId id;
  int parent = -1;
  int uplink = -1;  // index into links for the edge to the parent
  std::vector<int> children;
  std::set<Kernel> kernel_support;
};

struct LinkSpec {
  int a = -1;  // unit indices (a is the parent side for tree links)
  int b = -1;
  LinkParams params;
};

// RoChRaCoBgBa interleaving. Field widths in bits, LSB first in decode order:
// byte offset within one bank transfer, chip, bank, bank group, column,
// rank, channel, row.
struct AddressMap {
  int offset_bits = 0;
  int chip_bits = 0;
  int bank_bits = 0;        // bank within group
  int bank_group_bits = 0;
  int column_bits = 0;
  int rank_bits = 0;
  int channel_bits = 0;
  int row_bits = 0;

  int total_bits() const {
    return offset_bits + chip_bits + bank_bits + bank_group_bits +
           column_bits + rank_bits + channel_bits + row_bits;
  }
};

struct Location {
  std::int64_t row = 0;
  int channel = 0;
  int rank = 0;
  std::int64_t column = 0;
  int bank_group = 0;
  int bank = 0;
  int chip = 0;
  std::int64_t offset = 0;

  bool operator==(const Location&) const = default;
};

class MemorySystem {
 public:
  std::vector<LogicUnit> units;
  std::vector<LinkSpec> links;
  AddressMap address_map;
  std::uint64_t capacity = 0;
  int root = 0;
  int modules = 0;
  int ranks_per_module = 0;
  int chips_per_rank = 0;
  LinkParams rank_peer;  // peer link between ranks on the same module
  // Message granularity on the interconnect: transfers larger than one chunk
  // pipeline across hops chunk by chunk.
  std::int64_t transfer_chunk = 8192;

  int find_unit(const UnitId& id) const;  // -1 if absent
  int channel_unit(int module) const;
  int rank_unit(int module, int rank) const;
  int chip_unit(int module, int rank, int chip) const;

  // Unique tree path between two units, endpoints included.
  std::vector<int> route(int from, int to) const;
  const LinkSpec& link_between(int a, int b) const;  // throws if missing
  int lowest_common_parent(const std::vector<int>& unit_indices) const;

  std::string topology_json() const;
};

MemorySystem build_memory_system(const ScenarioConfig& cfg);

std::int64_t access_granularity(const ScenarioConfig& cfg);

std::uint64_t encode_address(const Location& loc, const AddressMap& map);
Location decode_address(std::uint64_t addr, const AddressMap& map,
                        std::uint64_t capacity);

}  // namespace pimsim
