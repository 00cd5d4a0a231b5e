#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace roughmf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class RoughPathGrid;

// A point of the step-1 or step-2 free nilpotent group over R^dim. The
// scalar level-0 term is always 1 and is not stored. lvl2(i, j) holds the
// iterated integral of dx^i followed by dx^j.
struct GroupElement {
  int level = 2;
  Vec lvl1;
  Mat lvl2;  // empty when level == 1

  static GroupElement identity(int dim, int level);
  // Straight-line segment signature: (delta, delta (x) delta / 2).
  static GroupElement segment(const Vec& delta, int level);

  int dim() const { return static_cast<int>(lvl1.size()); }
  bool is_identity() const;
};

// Element of the step-2 free Lie algebra: a vector plus an antisymmetric area.
struct LieElement {
  int level = 2;
  Vec lvl1;
  Mat area;  // antisymmetric; empty when level == 1

  // Builds an element from an arbitrary square matrix, keeping only its
  // antisymmetric part.
  static LieElement from_parts(const Vec& lvl1, const Mat& any_square);
  int dim() const { return static_cast<int>(lvl1.size()); }
};

GroupElement tensor_mul(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& g);
// g_s^{-1} (x) g_t.
GroupElement increment(const GroupElement& g_s, const GroupElement& g_t);

GroupElement exp(const LieElement& a);
// Throws InvalidElement if g is not group-like to within `tol` (relative).
LieElement log(const GroupElement& g, double tol = 1e-10);

// Frobenius norm of sym(lvl2) - lvl1 (x) lvl1 / 2. Zero for level 1.
double group_defect(const GroupElement& g);
bool is_group_like(const GroupElement& g, double rel_tol = 1e-12);

// max(|lvl1|, sqrt(2 |lvl2|)), Euclidean / Frobenius magnitudes. Homogeneous
// of degree one under dilation; a fixed stand-in for the Carnot-Caratheodory
// norm.
double hom_norm(const GroupElement& g);

// delta_lambda: lvl1 * lambda, lvl2 * lambda^2.
GroupElement dilate(const GroupElement& g, double lambda);

// Running signature of the piecewise-linear path through `points` (one row per
// point). `times` defaults to a uniform grid on [0, 1].
RoughPathGrid signature_pl(const Mat& points, int level,
                           std::span<const double> times = {});

}  // namespace roughmf
