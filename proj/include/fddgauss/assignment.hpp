#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fddgauss {

// Minimum-cost perfect matching on a dense square cost matrix (row-major,
// size x size) by shortest augmenting paths with Dijkstra on reduced costs.
// Returns col_for_row. Among equal reduced costs the lowest column index wins,
// except that an unassigned column is preferred, so results are deterministic.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t size);

}  // namespace fddgauss
