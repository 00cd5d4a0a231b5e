#include "roughmf/assignment.hpp"

#include "roughmf/error.hpp"

#include <algorithm>
#include <limits>

namespace roughmf {

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols())
    throw InvalidInput("solve_assignment: cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  Assignment out;
  if (n == 0) return out;
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is a virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) out.row_to_col[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) out.cost += cost(i, out.row_to_col[i]);
  return out;
}

}  // namespace roughmf
