#include "roughmf/fields.hpp"

#include "roughmf/error.hpp"

#include <cmath>
#include <memory>

namespace roughmf {

VectorFieldSet constant_fields(const Mat& columns) {
  VectorFieldSet vf;
  vf.state_dim = static_cast<int>(columns.rows());
  vf.num_fields = static_cast<int>(columns.cols());
  vf.eval = [columns](const Vec&, Mat& out) { out = columns; };
  const int e = vf.state_dim;
  const int d = vf.num_fields;
  vf.jac = [e, d](const Vec&, std::vector<Mat>& out) {
    out.resize(d);
    for (auto& m : out) m.setZero(e, e);
  };
  vf.lip_gamma_bound = columns.norm();
  return vf;
}

VectorFieldSet linear_fields(std::vector<Mat> matrices) {
  if (matrices.empty()) throw InvalidInput("linear_fields: no matrices");
  const auto e = static_cast<int>(matrices.front().rows());
  for (const auto& m : matrices)
    if (m.rows() != e || m.cols() != e)
      throw InvalidInput("linear_fields: matrices must be square and equal size");
  auto shared = std::make_shared<const std::vector<Mat>>(std::move(matrices));
  VectorFieldSet vf;
  vf.state_dim = e;
  vf.num_fields = static_cast<int>(shared->size());
  vf.eval = [shared](const Vec& y, Mat& out) {
    out.resize(y.size(), static_cast<Eigen::Index>(shared->size()));
    for (std::size_t i = 0; i < shared->size(); ++i)
      out.col(static_cast<Eigen::Index>(i)).noalias() = (*shared)[i] * y;
  };
  vf.jac = [shared](const Vec&, std::vector<Mat>& out) { out = *shared; };
  return vf;
}

VectorFieldSet saturated_axis_fields(int dim, double b) {
  if (dim <= 0) throw InvalidInput("saturated_axis_fields: dim must be positive");
  VectorFieldSet vf;
  vf.state_dim = dim;
  vf.num_fields = dim;
  vf.eval = [dim, b](const Vec& y, Mat& out) {
    out.setZero(dim, dim);
    for (int i = 0; i < dim; ++i)
      out(i, i) = 1.0 + b * std::tanh(y((i + 1) % dim));
  };
  vf.jac = [dim, b](const Vec& y, std::vector<Mat>& out) {
    out.resize(dim);
    for (int i = 0; i < dim; ++i) {
      out[i].setZero(dim, dim);
      const double th = std::tanh(y((i + 1) % dim));
      out[i](i, (i + 1) % dim) += b * (1.0 - th * th);
    }
  };
  vf.lip_gamma_bound = 1.0 + 2.0 * std::abs(b);
  return vf;
}

VectorFieldSet block_fields(const VectorFieldSet& base, int copies) {
  if (copies <= 0) throw InvalidInput("block_fields: copies must be positive");
  const int e = base.state_dim;
  const int d = base.num_fields;
  VectorFieldSet vf;
  vf.state_dim = copies * e;
  vf.num_fields = copies * d;
  vf.lip_gamma_bound = base.lip_gamma_bound;
  auto b = std::make_shared<const VectorFieldSet>(base);
  vf.eval = [b, copies, e, d](const Vec& y, Mat& out) {
    out.setZero(copies * e, copies * d);
    Mat local(e, d);
    for (int m = 0; m < copies; ++m) {
      b->eval(y.segment(m * e, e), local);
      out.block(m * e, m * d, e, d) = local;
    }
  };
  vf.jac = [b, copies, e, d](const Vec& y, std::vector<Mat>& out) {
    out.resize(static_cast<std::size_t>(copies * d));
    std::vector<Mat> local;
    for (int m = 0; m < copies; ++m) {
      b->jac(y.segment(m * e, e), local);
      for (int i = 0; i < d; ++i) {
        Mat& j = out[static_cast<std::size_t>(m * d + i)];
        j.setZero(copies * e, copies * e);
        j.block(m * e, m * e, e, e) = local[static_cast<std::size_t>(i)];
      }
    }
  };
  return vf;
}

}  // namespace roughmf
