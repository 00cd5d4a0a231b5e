#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "roughmf/error.hpp"
#include "roughmf/tensor.hpp"

using namespace roughmf;

namespace {

GroupElement random_group(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec l1(d);
  Mat a(d, d);
  for (int i = 0; i < d; ++i) l1(i) = n(rng);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(rng);
  return exp(LieElement::from_parts(l1, a));
}

double rel_gap(const GroupElement& a, const GroupElement& b) {
  const double scale = std::max({1.0, a.lvl1.norm(), a.lvl2.norm()});
  return std::max((a.lvl1 - b.lvl1).norm(), (a.lvl2 - b.lvl2).norm()) / scale;
}

}  // namespace

TEST_CASE("identity is neutral") {
  std::mt19937_64 rng(1);
  const GroupElement g = random_group(3, rng);
  const GroupElement e = GroupElement::identity(3, 2);
  CHECK(rel_gap(tensor_mul(e, g), g) == 0.0);
  CHECK(rel_gap(tensor_mul(g, e), g) == 0.0);
}

TEST_CASE("Chen on a straight line") {
  Vec v(2);
  v << 1.5, -2.0;
  const GroupElement a = GroupElement::segment(0.5 * v, 2);
  const GroupElement b = GroupElement::segment(0.5 * v, 2);
  const GroupElement ab = tensor_mul(a, b);
  CHECK((ab.lvl1 - v).norm() < 1e-15);
  CHECK((ab.lvl2 - 0.5 * v * v.transpose()).norm() < 1e-15);
}

TEST_CASE("product of group-like elements is group-like") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const GroupElement a = random_group(3, rng), b = random_group(3, rng);
    const GroupElement ab = tensor_mul(a, b);
    const Vec s = a.lvl1 + b.lvl1;
    const Mat sym = 0.5 * (ab.lvl2 + ab.lvl2.transpose());
    CHECK((sym - 0.5 * s * s.transpose()).norm() <= 1e-12 * std::max(1.0, s.squaredNorm()));
  }
}

TEST_CASE("increment identities") {
  std::mt19937_64 rng(3);
  const GroupElement g = random_group(2, rng);
  CHECK(increment(g, g).is_identity());
  CHECK(rel_gap(increment(GroupElement::identity(2, 2), g), g) == 0.0);
  CHECK(rel_gap(tensor_mul(g, increment(g, g)), g) == 0.0);
  const GroupElement h = random_group(2, rng);
  CHECK(rel_gap(tensor_mul(g, increment(g, h)), h) < 1e-14);
}

TEST_CASE("Chen chain on a three-segment path") {
  Mat pts(4, 2);
  pts << 0, 0, 1, 0.5, 0.2, 2, -1, 1;
  const RoughPathGrid x = signature_pl(pts, 2);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t u = s; u < 4; ++u)
      for (std::size_t t = u; t < 4; ++t)
        CHECK(rel_gap(tensor_mul(x.increment(s, u), x.increment(u, t)), x.increment(s, t)) <
              1e-12);
}

TEST_CASE("exp and log") {
  CHECK(exp(LieElement::from_parts(Vec::Zero(3), Mat::Zero(3, 3))).is_identity());
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int t = 0; t < 100; ++t) {
    Vec l1(3);
    Mat a(3, 3);
    for (int i = 0; i < 3; ++i) l1(i) = n(rng);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = n(rng);
    const LieElement x = LieElement::from_parts(l1, a);
    CHECK((x.area + x.area.transpose()).norm() == 0.0);
    const LieElement y = log(exp(x));
    CHECK((y.lvl1 - x.lvl1).norm() == 0.0);
    CHECK((y.area - x.area).norm() < 1e-14 * std::max(1.0, x.lvl1.squaredNorm()));
  }
  Mat area(2, 2);
  area << 0, 0.7, -0.7, 0;
  const GroupElement g = exp(LieElement::from_parts(Vec::Zero(2), area));
  CHECK(g.lvl1.norm() == 0.0);
  CHECK((g.lvl2 - area).norm() == 0.0);
}

TEST_CASE("log rejects non-group-like elements") {
  GroupElement g = GroupElement::identity(2, 2);
  g.lvl2(0, 0) = 1.0;
  CHECK_THROWS_AS(log(g), InvalidElement);
  try {
    log(g);
  } catch (const InvalidElement& e) {
    CHECK(e.defect() == doctest::Approx(1.0));
  }
}

TEST_CASE("mismatched elements are rejected") {
  CHECK_THROWS_AS(tensor_mul(GroupElement::identity(2, 2), GroupElement::identity(3, 2)),
                  InvalidInput);
  CHECK_THROWS_AS(tensor_mul(GroupElement::identity(2, 2), GroupElement::identity(2, 1)),
                  InvalidInput);
}

TEST_CASE("L path signature against a Riemann-sum oracle") {
  Mat pts(3, 2);
  pts << 0, 0, 1, 0, 1, 1;
  const RoughPathGrid x = signature_pl(pts, 2);
  const GroupElement g = x.at(2);
  const Mat oracle = oracle::riemann_lvl2(pts, 4096);
  CHECK((g.lvl2 - oracle).norm() < 1e-8);
  CHECK(g.lvl2(0, 1) == doctest::Approx(1.0));
  CHECK(g.lvl2(1, 0) == doctest::Approx(0.0));
  CHECK(0.5 * (g.lvl2(0, 1) - g.lvl2(1, 0)) == doctest::Approx(0.5));
}

TEST_CASE("signature of a random path matches Riemann sums") {
  std::mt19937_64 rng(5);
  const Mat pts = oracle::random_walk(6, 3, rng);
  const RoughPathGrid x = signature_pl(pts, 2);
  CHECK((x.at(5).lvl2 - oracle::riemann_lvl2(pts, 2048)).norm() < 1e-8);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(is_group_like(x.at(k)));
}

TEST_CASE("path followed by its reverse is the identity") {
  std::mt19937_64 rng(6);
  const Mat pts = oracle::random_walk(5, 2, rng);
  Mat loop(9, 2);
  loop.topRows(5) = pts;
  for (int k = 0; k < 4; ++k) loop.row(5 + k) = pts.row(3 - k);
  const GroupElement g = signature_pl(loop, 2).at(8);
  CHECK(g.lvl1.norm() < 1e-14);
  CHECK(g.lvl2.norm() < 1e-13);
}

TEST_CASE("signature needs two points") {
  CHECK_THROWS_AS(signature_pl(Mat::Zero(1, 2), 2), InvalidInput);
}

TEST_CASE("homogeneous norm") {
  CHECK(hom_norm(GroupElement::identity(2, 2)) == 0.0);
  Vec v(2);
  v << 3, 0;
  CHECK(hom_norm(GroupElement::segment(v, 2)) >= 3.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lam(-3, 3);
  for (int t = 0; t < 100; ++t) {
    const GroupElement g = random_group(3, rng), h = random_group(3, rng);
    const double l = lam(rng);
    CHECK(hom_norm(dilate(g, l)) == doctest::Approx(std::abs(l) * hom_norm(g)).epsilon(1e-12));
    CHECK(hom_norm(tensor_mul(g, h)) <= 2.0 * (hom_norm(g) + hom_norm(h)));
  }
}

TEST_CASE("level one arithmetic") {
  Vec a(2), b(2);
  a << 1, 2;
  b << -3, 1;
  const GroupElement g = tensor_mul(GroupElement::segment(a, 1), GroupElement::segment(b, 1));
  CHECK(g.level == 1);
  CHECK((g.lvl1 - (a + b)).norm() == 0.0);
  CHECK(hom_norm(g) == doctest::Approx((a + b).norm()));
}
