#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "igabem/geometry.hpp"

namespace igabem {

/// Hertzian dipole at `position` with moment `moment`, radiating at wave number kappa.
struct ExcitationDipole {
  Eigen::Vector3d position{0.2, 0.2, 0.2};
  Eigen::Vector3d moment{0.0, 0.1, 0.1};
  double kappa = 2.0;
};

/// Electric field of the dipole for the e^{+j omega t} convention (outgoing phase
/// e^{-j kappa r}), in normalized units with eps = 1:
///   E = (1/4pi) { kappa^2 (n x p) x n e^{-jkr}/r + [3 n (n.p) - p] (1/r^3 + j kappa/r^2) e^{-jkr} }.
Eigen::Vector3cd dipole_field(const Eigen::Vector3d& x, const ExcitationDipole& dipole);

/// Exterior evaluation points with the parameters that generated them.
struct EvalPointSet {
  std::vector<Eigen::Vector3d> points;
  double radius = 2.0;
  int count = 0;
  std::uint64_t seed = 0;
};

/// Fibonacci lattice of `count` points on the sphere |x| = radius, rotated by a
/// rotation drawn from `seed`. Throws DomainError if the geometry's control hull
/// reaches the sampling sphere or the sphere leaves the radius-3 ball.
EvalPointSet sample_eval_points(const MultipatchSurface& geometry, int count, std::uint64_t seed,
                                double radius = 2.0);

/// max_i |E_ref(i) - E_h(i)| with the Euclidean norm on C^3.
double max_pointwise_error(std::span<const Eigen::Vector3cd> reference,
                           std::span<const Eigen::Vector3cd> computed);

/// CSV: x,y,z, reference field (re/im per component), computed field, pointwise error.
void write_field_csv(const std::filesystem::path& path, const EvalPointSet& points,
                     std::span<const Eigen::Vector3cd> reference,
                     std::span<const Eigen::Vector3cd> computed,
                     const std::vector<std::string>& header_lines = {});

}  // namespace igabem
