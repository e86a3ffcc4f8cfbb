#pragma once

#include <vector>

#include "ipsim/geometry.hpp"

namespace ipsim {

/// Positions of N agents and the sensing axis each one orients its zones by.
struct AgentSet {
  std::vector<Vec2> positions;
  std::vector<Vec2> axes;

  AgentSet() = default;
  /// All agents share `axis`.
  AgentSet(std::vector<Vec2> pos, Vec2 axis) : positions(std::move(pos)), axes(positions.size(), axis) {}

  std::size_t size() const { return positions.size(); }
  friend bool operator==(const AgentSet&, const AgentSet&) = default;
};

}  // namespace ipsim
