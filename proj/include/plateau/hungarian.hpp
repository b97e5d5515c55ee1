#pragma once

#include <limits>
#include <vector>

namespace plateau {

// O(n^3) Hungarian algorithm with potentials, square cost matrix.
// assignment[i] = column assigned to row i; returns total cost.
inline double hungarian(const std::vector<std::vector<double>>& cost,
                        std::vector<int>& assignment) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) {
    assignment.clear();
    return 0.0;
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1), v(n + 1);
  std::vector<int> p(n + 1), way(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j)
        if (!used[j]) {
          double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  assignment.assign(n, -1);
  double total = 0.0;
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) {
      assignment[p[j] - 1] = j - 1;
      total += cost[p[j] - 1][j - 1];
    }
  return total;
}

}  // namespace plateau
