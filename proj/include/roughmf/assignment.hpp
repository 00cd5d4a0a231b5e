#pragma once

#include <Eigen/Dense>

#include <vector>

namespace roughmf {

struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

// Minimum-cost perfect matching on a square cost matrix (Hungarian method with
// potentials, O(n^3)).
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace roughmf
