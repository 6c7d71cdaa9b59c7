#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>

#include "igabem/quadrature.hpp"
#include "oracles.hpp"

using namespace igabem;

namespace {

using oracle::apply_rule;

double coplanar_oracle(const Eigen::Vector4d& A, const Eigen::Vector4d& B) {
  return oracle::coplanar_integral(A, B);
}

MultipatchSurface flat_square_mesh() {
  Patch patch;
  patch.knots_u = open_uniform_knots<double>(1, 1);
  patch.knots_v = open_uniform_knots<double>(1, 1);
  patch.control_points = {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}};
  patch.weights = {1, 1, 1, 1};
  MultipatchSurface s;
  s.patches.push_back(patch);
  return refine(s, 1);
}

}  // namespace

TEST_CASE("Gauss-Legendre on [0,1]") {
  const Rule1D& one = gauss_legendre_1d(1);
  CHECK(one.nodes[0] == doctest::Approx(0.5));
  CHECK(one.weights[0] == doctest::Approx(1.0));
  const Rule1D& two = gauss_legendre_1d(2);
  CHECK(two.nodes[0] == doctest::Approx(0.5 - 0.5 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(two.nodes[1] == doctest::Approx(0.5 + 0.5 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(two.weights[0] == doctest::Approx(0.5));
  double cube = 0;
  for (int i = 0; i < 2; ++i) cube += two.weights[i] * std::pow(two.nodes[i], 3);
  CHECK(cube == doctest::Approx(0.25).epsilon(1e-15));
  for (int order : {3, 7, 20, 64}) {
    const Rule1D& r = gauss_legendre_1d(order);
    double sum = 0, moment = 0;
    for (int i = 0; i < order; ++i) {
      CHECK(r.weights[i] > 0);
      sum += r.weights[i];
      moment += r.weights[i] * std::pow(r.nodes[i], 2 * order - 1);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-14);
    CHECK(moment == doctest::Approx(1.0 / (2 * order)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gauss_legendre_1d(0), ContractError);
}

TEST_CASE("singular rules: positive weights summing to one") {
  for (auto cls : {PanelPairClass::Coincident, PanelPairClass::SharedEdge, PanelPairClass::SharedVertex})
    for (int order : {1, 3, 8}) {
      const QuadratureRule4D r = singular_rule(cls, order);
      double sum = 0, smallest = INFINITY, lo = INFINITY, hi = -INFINITY;
      for (double w : r.weights) {
        smallest = std::min(smallest, w);
        sum += w;
      }
      for (const auto& n : r.nodes) {
        lo = std::min(lo, n.minCoeff());
        hi = std::max(hi, n.maxCoeff());
      }
      CHECK(smallest > 0);
      CHECK(std::abs(sum - 1.0) <= 1e-14);
      CHECK(lo >= 0.0);
      CHECK(hi <= 1.0);
    }
  CHECK_THROWS_AS(singular_rule(PanelPairClass::Separated, 4), ContractError);
}

TEST_CASE("weakly singular model integrals against the brute-force oracle") {
  const Eigen::Vector4d unit(0, 1, 0, 1);
  const double coincident_exact =
      4.0 / 3.0 - 4.0 / 3.0 * std::sqrt(2.0) + 4.0 * std::log(1.0 + std::sqrt(2.0));
  const double coincident = coplanar_oracle(unit, unit);
  CHECK(coincident == doctest::Approx(coincident_exact).epsilon(1e-10));
  const double edge = coplanar_oracle(unit, Eigen::Vector4d(-1, 0, 0, 1));
  const double vertex = coplanar_oracle(unit, Eigen::Vector4d(-1, 0, -1, 0));

  auto id = [](double s, double t) { return Eigen::Vector2d(s, t); };
  auto mirror_s = [](double s, double t) { return Eigen::Vector2d(-s, t); };
  auto mirror_st = [](double s, double t) { return Eigen::Vector2d(-s, -t); };
  struct Case {
    PanelPairClass cls;
    std::function<Eigen::Vector2d(double, double)> b;
    double exact;
  };
  for (const Case& c : {Case{PanelPairClass::Coincident, id, coincident},
                        Case{PanelPairClass::SharedEdge, mirror_s, edge},
                        Case{PanelPairClass::SharedVertex, mirror_st, vertex}}) {
    double previous = INFINITY;
    for (int order : {2, 4, 8}) {
      const double err =
          std::abs(apply_rule(singular_rule(c.cls, order), id, c.b) - c.exact) / c.exact;
      CHECK(err < previous);
      previous = err;
    }
    CAPTURE(to_string(c.cls));
    CHECK(previous <= 1e-6);
  }
}

TEST_CASE("classification and alignment on a flat 2 x 2 mesh") {
  const MultipatchSurface s = flat_square_mesh();
  const ElementMesh mesh(s);
  REQUIRE(mesh.size() == 4);
  const int e00 = mesh.index(0, 0, 0), e01 = mesh.index(0, 0, 1), e11 = mesh.index(0, 1, 1);
  CHECK(classify_pair(mesh, e00, e00) == PanelPairClass::Coincident);
  CHECK(classify_pair(mesh, e00, e01) == PanelPairClass::SharedEdge);
  CHECK(classify_pair(mesh, e01, e00) == PanelPairClass::SharedEdge);
  CHECK(classify_pair(mesh, e00, e11) == PanelPairClass::SharedVertex);

  auto world = [&](int e, const Eigen::Vector2d& local) {
    const Eigen::Vector4d b = mesh.box(e);
    return eval_surface(s.patches[0], b[0] + b[2] * local.x(), b[1] + b[3] * local.y());
  };
  const auto edge_maps = align_pair(mesh, e11, e01, PanelPairClass::SharedEdge);
  for (double t : {0.0, 0.3, 1.0})
    CHECK((world(e11, edge_maps[0](0, t)) - world(e01, edge_maps[1](0, t))).norm() <= 1e-15);
  const auto vertex_maps = align_pair(mesh, e11, e00, PanelPairClass::SharedVertex);
  CHECK((world(e11, vertex_maps[0](0, 0)) - world(e00, vertex_maps[1](0, 0))).norm() <= 1e-15);

  // Half-size elements: the 1/r integral scales with the cube of the length.
  const double edge = coplanar_oracle(Eigen::Vector4d(0, 1, 0, 1), Eigen::Vector4d(-1, 0, 0, 1));
  const QuadratureRule4D rule = singular_rule(PanelPairClass::SharedEdge, 8);
  double sum = 0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) {
    const auto& n = rule.nodes[i];
    sum += rule.weights[i] /
           (world(e11, edge_maps[0](n[0], n[1])) - world(e01, edge_maps[1](n[2], n[3]))).norm();
  }
  CHECK(sum * 0.25 * 0.25 == doctest::Approx(edge * 0.125).epsilon(1e-6));
}

TEST_CASE("sphere corner elements on three patches share a vertex") {
  const MultipatchSurface s = refine(make_unit_sphere(), 1);
  const ElementMesh mesh(s);
  CHECK(mesh.size() == 24);
  CHECK(mesh.num_vertices() == 26);
  int cross_patch_vertex = 0, cross_patch_edge = 0;
  for (int a = 0; a < mesh.size(); ++a)
    for (int b = 0; b < mesh.size(); ++b) {
      const auto c = classify_pair(mesh, a, b);
      CHECK(c == classify_pair(mesh, b, a));
      if (mesh.element(a).patch == mesh.element(b).patch) continue;
      cross_patch_vertex += c == PanelPairClass::SharedVertex;
      cross_patch_edge += c == PanelPairClass::SharedEdge;
    }
  // 8 cube corners x 3 ordered-pair pairs x 2 orders; 12 cube edges x 2 element pairs x 2.
  CHECK(cross_patch_vertex == 8 * 6);
  CHECK(cross_patch_edge == 12 * 2 * 2);
}

TEST_CASE("tensor Gauss error decreases on a separated Helmholtz pair") {
  const double kappa = 2.0;
  auto integrate = [&](int order) {
    const QuadratureRule2D r = tensor_gauss(order);
    std::complex<double> sum = 0;
    for (std::size_t i = 0; i < r.weights.size(); ++i)
      for (std::size_t j = 0; j < r.weights.size(); ++j) {
        const Eigen::Vector3d x(r.nodes[i].x(), r.nodes[i].y(), 0.0);
        const Eigen::Vector3d y(2.0 + r.nodes[j].x(), r.nodes[j].y(), 0.5);
        const double d = (x - y).norm();
        sum += r.weights[i] * r.weights[j] * std::polar(1.0 / (4 * std::numbers::pi * d), -kappa * d);
      }
    return sum;
  };
  const std::complex<double> reference = integrate(24);
  double previous = INFINITY;
  for (int order = 1; order <= 8; ++order) {
    const double err = std::abs(integrate(order) - reference);
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 1e-12);
}
