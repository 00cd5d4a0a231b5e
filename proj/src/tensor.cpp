#include "roughmf/tensor.hpp"

#include "roughmf/error.hpp"
#include "roughmf/rough_path.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace roughmf {

namespace {

void require_compatible(const GroupElement& a, const GroupElement& b,
                        const char* op) {
  if (a.dim() != b.dim() || a.level != b.level) {
    std::ostringstream os;
    os << op << ": mismatched operands (dim " << a.dim() << " level "
       << a.level << " vs dim " << b.dim() << " level " << b.level << ")";
    throw InvalidInput(os.str());
  }
}

void require_level(int level) {
  if (level != 1 && level != 2)
    throw InvalidInput("truncation level must be 1 or 2");
}

double defect_scale(const GroupElement& g) {
  double s = std::max(1.0, 0.5 * g.lvl1.squaredNorm());
  if (g.level == 2) s = std::max(s, g.lvl2.norm());
  return s;
}

}  // namespace

GroupElement GroupElement::identity(int dim, int level) {
  require_level(level);
  if (dim <= 0) throw InvalidInput("dimension must be positive");
  GroupElement g;
  g.level = level;
  g.lvl1 = Vec::Zero(dim);
  if (level == 2) g.lvl2 = Mat::Zero(dim, dim);
  return g;
}

GroupElement GroupElement::segment(const Vec& delta, int level) {
  require_level(level);
  GroupElement g;
  g.level = level;
  g.lvl1 = delta;
  if (level == 2) g.lvl2 = 0.5 * delta * delta.transpose();
  return g;
}

bool GroupElement::is_identity() const {
  if (!lvl1.isZero(0.0)) return false;
  return level == 1 || lvl2.isZero(0.0);
}

LieElement LieElement::from_parts(const Vec& lvl1, const Mat& any_square) {
  LieElement a;
  a.level = 2;
  a.lvl1 = lvl1;
  a.area = 0.5 * (any_square - any_square.transpose());
  return a;
}

GroupElement tensor_mul(const GroupElement& a, const GroupElement& b) {
  require_compatible(a, b, "tensor_mul");
  GroupElement out;
  out.level = a.level;
  out.lvl1 = a.lvl1 + b.lvl1;
  if (a.level == 2) out.lvl2 = a.lvl2 + b.lvl2 + a.lvl1 * b.lvl1.transpose();
  return out;
}

GroupElement inverse(const GroupElement& g) {
  GroupElement out;
  out.level = g.level;
  out.lvl1 = -g.lvl1;
  if (g.level == 2) out.lvl2 = -g.lvl2 + g.lvl1 * g.lvl1.transpose();
  return out;
}

GroupElement increment(const GroupElement& g_s, const GroupElement& g_t) {
  require_compatible(g_s, g_t, "increment");
  return tensor_mul(inverse(g_s), g_t);
}

GroupElement exp(const LieElement& a) {
  require_level(a.level);
  GroupElement g;
  g.level = a.level;
  g.lvl1 = a.lvl1;
  if (a.level == 2) {
    if (a.area.rows() != a.dim() || a.area.cols() != a.dim())
      throw InvalidInput("exp: area block has wrong shape");
    g.lvl2 = a.area + 0.5 * a.lvl1 * a.lvl1.transpose();
  }
  return g;
}

LieElement log(const GroupElement& g, double tol) {
  LieElement a;
  a.level = g.level;
  a.lvl1 = g.lvl1;
  if (g.level == 1) return a;
  const double defect = group_defect(g);
  if (defect > tol * defect_scale(g)) {
    std::ostringstream os;
    os << "log: element is not group-like (symmetric defect " << defect
       << ")";
    throw InvalidElement(os.str(), defect);
  }
  a.area = 0.5 * (g.lvl2 - g.lvl2.transpose());
  return a;
}

double group_defect(const GroupElement& g) {
  if (g.level == 1) return 0.0;
  const Mat sym = 0.5 * (g.lvl2 + g.lvl2.transpose());
  return (sym - 0.5 * g.lvl1 * g.lvl1.transpose()).norm();
}

bool is_group_like(const GroupElement& g, double rel_tol) {
  return group_defect(g) <= rel_tol * defect_scale(g);
}

double hom_norm(const GroupElement& g) {
  const double n1 = g.lvl1.norm();
  if (g.level == 1) return n1;
  return std::max(n1, std::sqrt(2.0 * g.lvl2.norm()));
}

GroupElement dilate(const GroupElement& g, double lambda) {
  GroupElement out;
  out.level = g.level;
  out.lvl1 = lambda * g.lvl1;
  if (g.level == 2) out.lvl2 = (lambda * lambda) * g.lvl2;
  return out;
}

RoughPathGrid signature_pl(const Mat& points, int level,
                           std::span<const double> times) {
  require_level(level);
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw InvalidInput("signature_pl: need at least two points");
  std::vector<double> t;
  if (times.empty()) {
    t = uniform_times(n - 1, 1.0);
  } else {
    if (times.size() != n)
      throw InvalidInput("signature_pl: times and points differ in length");
    t.assign(times.begin(), times.end());
  }
  const int d = static_cast<int>(points.cols());
  RoughPathGrid out(std::move(t), d, level);
  GroupElement running = GroupElement::identity(d, level);
  for (std::size_t k = 1; k < n; ++k) {
    const Vec delta = (points.row(static_cast<Eigen::Index>(k)) -
                       points.row(static_cast<Eigen::Index>(k - 1)))
                          .transpose();
    running = tensor_mul(running, GroupElement::segment(delta, level));
    out.set(k, running);
  }
  return out;
}

}  // namespace roughmf
