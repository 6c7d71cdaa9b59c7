#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "igabem/efie.hpp"
#include "igabem/linalg.hpp"

using namespace igabem;

namespace {

const DivConformingSpace& space48() {
  static const DivConformingSpace space(refine(make_unit_sphere(), 1), 1);
  return space;
}

const Eigen::MatrixXcd& matrix48() {
  static const Eigen::MatrixXcd V = assemble_matrix(space48(), 2.0, {}, 1);
  return V;
}

std::vector<int> support(const DivConformingSpace& space, int k) {
  std::vector<int> elements;
  for (int e = 0; e < space.mesh().size(); ++e)
    for (const auto& d : space.element_dofs(e))
      if (d.global == k) elements.push_back(e);
  return elements;
}

// Galerkin entry by plain tensor Gauss over the supports of m and n.
std::complex<double> brute_force_entry(const DivConformingSpace& space, int m, int n, double kappa) {
  const QuadratureRule2D rule = tensor_gauss(10);
  std::complex<double> sum = 0;
  ElementSample sa, sb;
  for (int ea : support(space, m))
    for (int eb : support(space, n)) {
      const auto da = space.element_dofs(ea), db = space.element_dofs(eb);
      int ka = 0, kb = 0;
      while (da[ka].global != m) ++ka;
      while (db[kb].global != n) ++kb;
      for (std::size_t i = 0; i < rule.weights.size(); ++i) {
        space.evaluate(ea, rule.nodes[i].x(), rule.nodes[i].y(), sa);
        for (std::size_t j = 0; j < rule.weights.size(); ++j) {
          space.evaluate(eb, rule.nodes[j].x(), rule.nodes[j].y(), sb);
          const double kernel = sa.values.col(ka).dot(sb.values.col(kb)) -
                                sa.divs[ka] * sb.divs[kb] / (kappa * kappa);
          sum += rule.weights[i] * rule.weights[j] * sa.jacobian * sb.jacobian * da[ka].sign *
                 db[kb].sign * kernel * greens(sa.point, sb.point, kappa);
        }
      }
    }
  return sum;
}

bool supports_touch(const DivConformingSpace& space, int m, int n) {
  for (int ea : support(space, m))
    for (int eb : support(space, n))
      if (classify_pair(space.mesh(), ea, eb) != PanelPairClass::Separated) return true;
  return false;
}

}  // namespace

TEST_CASE("Green's function") {
  const Eigen::Vector3d x(0, 0, 0), y(0, 0, 1);
  CHECK(std::abs(greens(x, y, 0.0) - 1.0 / (4 * std::numbers::pi)) <= 1e-16);
  const std::complex<double> expected = std::complex<double>(std::cos(2.0), -std::sin(2.0)) /
                                        (4 * std::numbers::pi);
  CHECK(std::abs(greens(x, y, 2.0) - expected) <= 1e-16);
  const Eigen::Vector3d z(0.3, -1.2, 2.0);
  for (double k : {0.5, 2.0, 7.0})
    CHECK(std::abs(greens(x, z, k)) == doctest::Approx(1.0 / (4 * std::numbers::pi * z.norm())));
  CHECK_THROWS_AS(greens(z, z, 2.0), SingularityError);
}

TEST_CASE("48-DOF matrix: finite, complex symmetric, deterministic") {
  const Eigen::MatrixXcd& V = matrix48();
  REQUIRE(V.rows() == 48);
  CHECK(V.allFinite());
  CHECK((V - V.transpose()).norm() <= 1e-10 * V.norm());
  CHECK((V - V.adjoint()).norm() > 1e-3 * V.norm());  // not Hermitian
  const Eigen::MatrixXcd again = assemble_matrix(space48(), 2.0, {}, 3);
  CHECK((again - V).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(assemble_matrix(space48(), 0.0), DomainError);
}

TEST_CASE("doubling the singular quadrature order barely changes V") {
  QuadratureConfig fine;
  fine.singular_order = 16;
  const Eigen::MatrixXcd Vf = assemble_matrix(space48(), 2.0, fine, 1);
  const double change = std::abs(Vf.norm() - matrix48().norm()) / matrix48().norm();
  CHECK(change <= 1e-6);
  CHECK((Vf - matrix48()).norm() <= 1e-5 * matrix48().norm());
}

TEST_CASE("separated entries agree with a brute-force double integral in both orders") {
  const DivConformingSpace& space = space48();
  const Eigen::MatrixXcd& V = matrix48();
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, space.num_dofs() - 1);
  int tested = 0;
  while (tested < 6) {
    const int m = pick(rng), n = pick(rng);
    if (supports_touch(space, m, n)) continue;
    const std::complex<double> ref = brute_force_entry(space, m, n, 2.0);
    const std::complex<double> swapped = brute_force_entry(space, n, m, 2.0);
    CHECK(std::abs(ref - swapped) <= 1e-13 * std::abs(ref));
    CHECK(std::abs(V(m, n) - ref) <= 1e-4 * std::abs(ref));
    CHECK(V(m, n) == V(n, m));
    ++tested;
  }
}

TEST_CASE("right-hand side") {
  const DivConformingSpace& space = space48();
  ExcitationDipole d;
  const Eigen::VectorXcd f = assemble_rhs(space, d);
  CHECK(f.allFinite());
  CHECK(f.norm() > 0);
  ExcitationDipole doubled = d;
  doubled.moment *= 2;
  CHECK((assemble_rhs(space, doubled) - 2.0 * f).norm() <= 1e-14 * f.norm());
  ExcitationDipole silent = d;
  silent.moment.setZero();
  CHECK(assemble_rhs(space, silent).norm() == 0.0);
  ExcitationDipole outside = d;
  outside.position = {1.5, 0, 0};
  CHECK_THROWS_AS(assemble_rhs(space, outside), DomainError);
  ExcitationDipole on_surface = d;
  on_surface.position = {0, 0, 1};
  CHECK_THROWS_AS(assemble_rhs(space, on_surface), Error);
}

TEST_CASE("direct solve, residual loss and the scattered field") {
  const DivConformingSpace& space = space48();
  const ExcitationDipole d;
  const Eigen::MatrixXcd& V = matrix48();
  const Eigen::VectorXcd f = assemble_rhs(space, d);
  const Eigen::VectorXcd j = lu_solve(V, -f);
  CHECK((V * j + f).norm() <= 1e-12 * f.norm());
  CHECK(residual_loss(V, f, j) <= 1e-25);
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(48);
  CHECK(residual_loss(V, f, zero) == doctest::Approx(f.squaredNorm() / 48).epsilon(1e-14));
  CHECK_THROWS_AS(residual_loss(V, f, Eigen::VectorXcd::Zero(5)), ContractError);

  const EvalPointSet pts = sample_eval_points(space.geometry(), 50, 3);
  const auto e0 = eval_scattered_field(space, zero, pts.points, d.kappa);
  for (const auto& v : e0.values) CHECK(v.norm() == 0.0);
  const auto e1 = eval_scattered_field(space, j, pts.points, d.kappa);
  const auto e2 = eval_scattered_field(space, Eigen::VectorXcd(2.0 * j), pts.points, d.kappa);
  for (std::size_t i = 0; i < pts.points.size(); ++i)
    CHECK((e2.values[i] - 2.0 * e1.values[i]).norm() <= 1e-14 * e1.values[i].norm());
  CHECK(e1.min_distance > 0.9);
  CHECK_THROWS_AS(eval_scattered_field(space, Eigen::VectorXcd::Zero(3), pts.points, d.kappa),
                  ContractError);

  std::vector<Eigen::Vector3d> close{{0, 0, 1.01}};
  CHECK(eval_scattered_field(space, j, close, d.kappa).degraded);

  // Manufactured solution: the field of the solved current matches the dipole outside.
  std::vector<Eigen::Vector3cd> ref;
  for (const auto& x : pts.points) ref.push_back(dipole_field(x, d));
  const double err48 = max_pointwise_error(ref, e1.values);
  double scale = 0;
  for (const auto& r : ref) scale = std::max(scale, r.norm());
  CHECK(err48 < 0.05 * scale);

  const DivConformingSpace space192(refine(make_unit_sphere(), 2), 1);
  const EfieSystem sys = assemble_system(space192, d);
  const Eigen::VectorXcd j192 = lu_solve(sys.matrix, -sys.rhs);
  const double err192 =
      max_pointwise_error(ref, eval_scattered_field(space192, j192, pts.points, d.kappa).values);
  CHECK(err192 < err48 / 4);
}

TEST_CASE("system cache round trip") {
  const DivConformingSpace& space = space48();
  const ExcitationDipole d;
  EfieSystem sys;
  sys.matrix = matrix48();
  sys.rhs = assemble_rhs(space, d);
  sys.kappa = d.kappa;
  sys.key = system_key(space.geometry(), 1, d, {});
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "igabem_system_roundtrip.bin";
  write_system(path, sys);
  const EfieSystem back = read_system(path);
  CHECK(back.matrix == sys.matrix);
  CHECK(back.rhs == sys.rhs);
  CHECK(back.kappa == sys.kappa);
  CHECK(read_system_if_matches(path, sys.key).has_value());
  CHECK_FALSE(read_system_if_matches(path, sys.key + 1).has_value());
  CHECK_FALSE(read_system_if_matches(dir / "igabem_missing.bin", sys.key).has_value());

  QuadratureConfig other;
  other.singular_order = 9;
  CHECK(system_key(space.geometry(), 1, d, other) != sys.key);
  ExcitationDipole moved = d;
  moved.position.x() += 1e-9;
  CHECK(system_key(space.geometry(), 1, moved, {}) != sys.key);

  std::ofstream(path, std::ios::binary | std::ios::trunc) << "IGAEFIE";
  CHECK_THROWS_AS(read_system(path), IoError);
  std::filesystem::remove(path);
}
