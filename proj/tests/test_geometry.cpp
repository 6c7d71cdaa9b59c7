#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "igabem/geometry.hpp"

using namespace igabem;

namespace {

double halton(int i, int base) {
  double f = 1, r = 0;
  for (; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

double oblate_area(double c) {
  const double e = std::sqrt(1.0 - c * c);
  return 2.0 * std::numbers::pi * (1.0 + (1.0 - e * e) / e * std::atanh(e));
}

}  // namespace

TEST_CASE("unit sphere is exact and closed") {
  const MultipatchSurface s = make_unit_sphere();
  CHECK(s.patches.size() == 6);
  CHECK(s.interfaces.size() == 12);
  std::vector<int> per_patch(6, 0);
  for (const auto& itf : s.interfaces) {
    ++per_patch[itf.patch_a];
    ++per_patch[itf.patch_b];
  }
  for (int n : per_patch) CHECK(n == 4);

  double worst = 0;
  for (int i = 1; i <= 1000; ++i) {
    const Patch& p = s.patches[i % 6];
    worst = std::max(worst, std::abs(eval_surface(p, halton(i, 2), halton(i, 3)).norm() - 1.0));
  }
  CHECK(worst <= 1e-12);
  for (const Patch& p : s.patches) {
    const auto f = eval_surface_jacobian(p, 0.37, 0.61);
    CHECK(f.unit_normal.dot(f.point) > 0.99);
    for (double w : p.weights) CHECK(w > 0.0);
  }
  CHECK(max_interface_mismatch(s) <= 1e-10);
  CHECK(surface_area(s, 12) == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-10));
}

TEST_CASE("interface midpoints coincide") {
  const MultipatchSurface s = make_unit_sphere();
  for (const auto& itf : s.interfaces) {
    const Eigen::Vector2d a = edge_parameter(itf.edge_a, 0.5);
    const Eigen::Vector2d b = edge_parameter(itf.edge_b, 0.5);
    const auto xa = eval_surface(s.patches[itf.patch_a], a.x(), a.y());
    const auto xb = eval_surface(s.patches[itf.patch_b], b.x(), b.y());
    CHECK((xa - xb).norm() <= 1e-10);
    for (double t : {0.1, 0.3, 0.8}) {
      const Eigen::Vector2d pa = edge_parameter(itf.edge_a, t);
      const Eigen::Vector2d pb = edge_parameter(itf.edge_b, itf.orientation_flip ? 1 - t : t);
      CHECK((eval_surface(s.patches[itf.patch_a], pa.x(), pa.y()) -
             eval_surface(s.patches[itf.patch_b], pb.x(), pb.y()))
                .norm() <= 1e-10);
    }
  }
}

TEST_CASE("spheroids") {
  CHECK_THROWS_AS(make_spheroid(0.0), DomainError);
  CHECK_THROWS_AS(make_spheroid(-0.5), DomainError);
  CHECK(to_params(make_spheroid(1.0)) == to_params(make_unit_sphere()));

  const MultipatchSurface s = make_spheroid(0.6);
  double worst = 0;
  for (int i = 1; i <= 600; ++i) {
    const auto x = eval_surface(s.patches[i % 6], halton(i, 2), halton(i, 3));
    worst = std::max(worst, std::abs(x.x() * x.x() + x.y() * x.y() + x.z() * x.z() / 0.36 - 1.0));
  }
  CHECK(worst <= 1e-12);
  CHECK(surface_area(s, 14) == doctest::Approx(oblate_area(0.6)).epsilon(1e-8));
  CHECK(max_interface_mismatch(s) <= 1e-10);
}

TEST_CASE("build_interfaces detects gaps") {
  MultipatchSurface s = make_unit_sphere();
  s.patches[0].control_points[0] += Eigen::Vector3d(1e-3, 0, 0);
  CHECK_THROWS_AS(build_interfaces(s.patches), TopologyError);
  std::vector<Patch> five(s.patches.begin() + 1, s.patches.end());
  CHECK_THROWS_AS(build_interfaces(five), TopologyError);
}

TEST_CASE("parameter vector round trip") {
  const MultipatchSurface s = make_unit_sphere();
  const GeometryParams g = to_params(s);
  // Six bi-quartic faces with 5 x 5 control nets.
  CHECK(g.size() == 6 * (3 * 25 + 25));
  CHECK(num_params(s) == g.size());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  GeometryParams random(g.size());
  for (auto& x : random) x = uni(rng);
  CHECK(to_params(from_params(s, random)) == random);
  CHECK_THROWS_AS(from_params(s, GeometryParams::Zero(10)), ContractError);

  const MultipatchSurface spheroid = from_params(s, to_params(make_spheroid(0.75)));
  const MultipatchSurface direct = make_spheroid(0.75);
  for (int p = 0; p < 6; ++p)
    CHECK((eval_surface(spheroid.patches[p], 0.3, 0.4) - eval_surface(direct.patches[p], 0.3, 0.4))
              .norm() <= 1e-15);
}

TEST_CASE("refinement keeps exactness and interfaces") {
  const MultipatchSurface s = refine(make_spheroid(0.8), 2);
  CHECK(s.interfaces.size() == 12);
  CHECK(max_interface_mismatch(s) <= 1e-10);
  for (const Patch& p : s.patches) {
    CHECK(p.knots_u.num_elements() == 4);
    const auto x = eval_surface(p, 0.123, 0.987);
    CHECK(std::abs(x.x() * x.x() + x.y() * x.y() + x.z() * x.z() / 0.64 - 1.0) <= 1e-12);
  }
}

TEST_CASE("geometry JSON round trip") {
  const MultipatchSurface s = make_spheroid(0.65);
  const auto path = std::filesystem::temp_directory_path() / "igabem_geometry_roundtrip.json";
  write_geometry(path, s);
  const MultipatchSurface back = read_geometry(path);
  CHECK(to_params(back) == to_params(s));
  CHECK(back.interfaces.size() == 12);
  CHECK(geometry_hash(back) == geometry_hash(s));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_geometry("/nonexistent/geometry.json"), IoError);
  CHECK(geometry_hash(make_spheroid(0.65)) != geometry_hash(make_spheroid(0.66)));
}
