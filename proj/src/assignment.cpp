#include "fddgauss/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fddgauss/errors.hpp"

namespace fddgauss {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Solver {
  std::span<const double> cost;
  std::size_t n;
  std::vector<double> u, v, shortest;
  std::vector<std::size_t> path, col4row, row4col, remaining;
  std::vector<char> in_rows, in_cols;

  Solver(std::span<const double> c, std::size_t size)
      : cost(c), n(size), u(size, 0.0), v(size, 0.0), shortest(size), path(size, kNone),
        col4row(size, kNone), row4col(size, kNone), remaining(size), in_rows(size), in_cols(size) {}

  // Returns the sink column and the path length.
  std::size_t augmenting_path(std::size_t start, double& min_val) {
    min_val = 0.0;
    std::size_t num_remaining = n;
    for (std::size_t j = 0; j < n; ++j) remaining[j] = j;
    std::fill(in_rows.begin(), in_rows.end(), 0);
    std::fill(in_cols.begin(), in_cols.end(), 0);
    std::fill(shortest.begin(), shortest.end(), kInf);

    std::size_t i = start;
    std::size_t sink = kNone;
    while (sink == kNone) {
      in_rows[i] = 1;
      std::size_t index = kNone;
      double lowest = kInf;
      const double* row = cost.data() + i * n;
      for (std::size_t it = 0; it < num_remaining; ++it) {
        const std::size_t j = remaining[it];
        const double r = min_val + row[j] - u[i] - v[j];
        if (r < shortest[j]) {
          path[j] = i;
          shortest[j] = r;
        }
        if (shortest[j] < lowest || (shortest[j] == lowest && row4col[j] == kNone && index != kNone &&
                                     row4col[remaining[index]] != kNone)) {
          lowest = shortest[j];
          index = it;
        }
      }
      min_val = lowest;
      if (index == kNone || min_val == kInf) return kNone;
      const std::size_t j = remaining[index];
      if (row4col[j] == kNone) {
        sink = j;
      } else {
        i = row4col[j];
      }
      in_cols[j] = 1;
      // Keep the remaining list sorted so ties resolve to the lowest column.
      for (std::size_t it = index; it + 1 < num_remaining; ++it) remaining[it] = remaining[it + 1];
      --num_remaining;
    }
    return sink;
  }

  void run() {
    for (std::size_t cur = 0; cur < n; ++cur) {
      double min_val = 0.0;
      const std::size_t sink = augmenting_path(cur, min_val);
      if (sink == kNone) throw InvalidArgument("solve_assignment: cost matrix is infeasible");
      u[cur] += min_val;
      for (std::size_t i = 0; i < n; ++i) {
        if (in_rows[i] && i != cur) u[i] += min_val - shortest[col4row[i]];
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (in_cols[j]) v[j] -= min_val - shortest[j];
      }
      std::size_t j = sink;
      for (;;) {
        const std::size_t i = path[j];
        row4col[j] = i;
        std::swap(col4row[i], j);
        if (i == cur) break;
      }
    }
  }
};

}  // namespace

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t size) {
  if (cost.size() != size * size) throw InvalidArgument("solve_assignment: cost matrix is not size x size");
  for (double c : cost) {
    if (!std::isfinite(c)) throw InvalidArgument("solve_assignment: non-finite cost");
  }
  if (size == 0) return {};
  Solver solver(cost, size);
  solver.run();
  return solver.col4row;
}

}  // namespace fddgauss
