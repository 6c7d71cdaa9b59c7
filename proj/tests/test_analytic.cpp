#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "igabem/analytic.hpp"
#include "oracles.hpp"

using namespace igabem;

namespace {

using Field = Eigen::Vector3cd;

double angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double covering_gap(const std::vector<Eigen::Vector3d>& pts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double gap = 0;
  for (int probe = 0; probe < 20000; ++probe) {
    const Eigen::Vector3d q(normal(rng), normal(rng), normal(rng));
    double nearest = INFINITY;
    for (const auto& p : pts) nearest = std::min(nearest, angle(q, p));
    gap = std::max(gap, nearest);
  }
  return gap;
}

}  // namespace

TEST_CASE("dipole field satisfies the vector Helmholtz equation") {
  const ExcitationDipole d;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> radius(0.7, 2.5);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d dir = Eigen::Vector3d(normal(rng), normal(rng), normal(rng)).normalized();
    const Eigen::Vector3d x = d.position + radius(rng) * dir;
    CHECK(oracle::helmholtz_residual(d, x, 1e-3) <= 1e-4);
  }
}

TEST_CASE("dipole field: far-field decay and static limit") {
  const ExcitationDipole d;
  const Eigen::Vector3d dir = Eigen::Vector3d(1, -2, 0.5).normalized();
  const double R = 1e3;
  const double ratio = dipole_field(2 * R * dir, d).norm() / dipole_field(R * dir, d).norm();
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.01));

  ExcitationDipole stat = d;
  stat.kappa = 0.0;
  const Eigen::Vector3d x(0.9, -0.4, 1.3);
  const Eigen::Vector3d r = x - d.position;
  const Eigen::Vector3d n = r.normalized();
  const Eigen::Vector3d expected =
      (3.0 * n * n.dot(d.moment) - d.moment) / std::pow(r.norm(), 3) / (4.0 * std::numbers::pi);
  CHECK((dipole_field(x, stat) - expected.cast<std::complex<double>>()).norm() <=
        1e-15 * expected.norm());
  CHECK_THROWS_AS(dipole_field(d.position, d), SingularityError);
}

TEST_CASE("evaluation points") {
  const MultipatchSurface sphere = make_unit_sphere();
  const EvalPointSet set = sample_eval_points(sphere, 200, 42);
  CHECK(set.points.size() == 200);
  CHECK(set.radius == 2.0);
  CHECK(set.seed == 42);
  for (const auto& p : set.points) CHECK(p.norm() == doctest::Approx(2.0).epsilon(1e-14));
  const EvalPointSet again = sample_eval_points(sphere, 200, 42);
  CHECK(again.points == set.points);
  CHECK(sample_eval_points(sphere, 200, 43).points != set.points);

  double min_sep = INFINITY;
  for (std::size_t i = 0; i < set.points.size(); ++i)
    for (std::size_t j = i + 1; j < set.points.size(); ++j)
      min_sep = std::min(min_sep, angle(set.points[i], set.points[j]));
  CHECK(min_sep > 0.05);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<Eigen::Vector3d> random;
  for (int i = 0; i < 200; ++i)
    random.push_back(2.0 * Eigen::Vector3d(normal(rng), normal(rng), normal(rng)).normalized());
  CHECK(covering_gap(set.points, 1) < covering_gap(random, 1));

  CHECK_THROWS_AS(sample_eval_points(sphere, 10, 1, 1.0), DomainError);
  CHECK_THROWS_AS(sample_eval_points(sphere, 10, 1, 3.5), DomainError);
  CHECK_THROWS_AS(sample_eval_points(sphere, 0, 1), ContractError);
}

TEST_CASE("max pointwise error is a seminorm") {
  std::vector<Field> a{Field(std::complex<double>(3, 4), 0, 0)}, zero{Field::Zero()};
  CHECK(max_pointwise_error(a, zero) == doctest::Approx(5.0));
  CHECK(max_pointwise_error(a, a) == 0.0);
  CHECK_THROWS_AS(max_pointwise_error(a, std::vector<Field>{}), ContractError);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  auto random_list = [&] {
    std::vector<Field> v(30);
    for (auto& f : v)
      for (int k = 0; k < 3; ++k) f[k] = {normal(rng), normal(rng)};
    return v;
  };
  const auto x = random_list(), y = random_list(), z = random_list();
  std::vector<Field> scaled(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = x[i] * std::complex<double>(0, -3);
  std::vector<Field> zeros(x.size(), Field::Zero());
  CHECK(max_pointwise_error(scaled, zeros) == doctest::Approx(3.0 * max_pointwise_error(x, zeros)));
  CHECK(max_pointwise_error(x, z) <= max_pointwise_error(x, y) + max_pointwise_error(y, z));
}

TEST_CASE("field CSV") {
  const EvalPointSet set = sample_eval_points(make_unit_sphere(), 5, 1);
  const ExcitationDipole d;
  std::vector<Field> ref;
  for (const auto& p : set.points) ref.push_back(dipole_field(p, d));
  const auto path = std::filesystem::temp_directory_path() / "igabem_field.csv";
  write_field_csv(path, set, ref, ref, {"test header"});
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "# test header");
  CHECK(lines[1].rfind("x,y,z,", 0) == 0);
  CHECK(lines[2].substr(lines[2].rfind(',') + 1) == "0");
  std::filesystem::remove(path);
}
