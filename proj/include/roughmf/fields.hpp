#pragma once

#include "roughmf/rde.hpp"

#include <vector>

namespace roughmf {

// V^i(y) = c_i (columns of C); zero Jacobians.
VectorFieldSet constant_fields(const Mat& columns);

// V^i(y) = A_i y.
VectorFieldSet linear_fields(std::vector<Mat> matrices);

// Benchmark fields on R^d with d driving signals:
//   V^i(y) = e_i (1 + b tanh(y_{(i+1) mod d})).
// Bounded, non-commuting for b != 0, and DV^i V^i = 0 (d >= 2).
VectorFieldSet saturated_axis_fields(int dim, double b);

// Block fields on R^{N e} for N copies of `base`: field j acts on block
// j / d with base field j mod d, and is zero on every other block.
VectorFieldSet block_fields(const VectorFieldSet& base, int copies);

}  // namespace roughmf
