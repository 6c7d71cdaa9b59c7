#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "igabem/analytic.hpp"
#include "igabem/spaces.hpp"

namespace igabem {

/// Quadrature orders (Gauss points per direction) used by assembly and evaluation.
struct QuadratureConfig {
  int regular_order = 4;   // well-separated element pairs
  int near_order = 8;      // separated pairs closer than near_factor element diameters
  int singular_order = 8;  // coincident / shared-edge / shared-vertex pairs
  int rhs_order = 8;
  int field_order = 8;
  double near_factor = 1.0;
};

/// e^{-j kappa |x-y|} / (4 pi |x-y|).
std::complex<double> greens(const Eigen::Vector3d& x, const Eigen::Vector3d& y, double kappa);

/// Galerkin matrix
///   V_mn = int int g(x,y) [phi_m(x).phi_n(y) - div phi_m(x) div phi_n(y) / kappa^2].
/// Complex symmetric by construction; bit-identical across runs and thread counts.
Eigen::MatrixXcd assemble_matrix(const DivConformingSpace& space, double kappa,
                                 const QuadratureConfig& quad = {}, int threads = 0);

/// f_m = int E_inc(x) . phi_m(x) dGamma with the dipole field as incident field.
/// The discrete problem is V j = -f.
Eigen::VectorXcd assemble_rhs(const DivConformingSpace& space, const ExcitationDipole& dipole,
                              const QuadratureConfig& quad = {});

struct FieldEvaluation {
  std::vector<Eigen::Vector3cd> values;
  double min_distance = 0;  // smallest distance from a point to a surface quadrature node
  bool degraded = false;    // some point is closer than one element diameter
};

/// Scattered field E(x) = -[ int g J dGamma + grad_x int g div J dGamma / kappa^2 ].
/// With j solving V j = -f this reproduces the incident dipole field outside the surface.
FieldEvaluation eval_scattered_field(const DivConformingSpace& space, const Eigen::VectorXcd& j,
                                     std::span<const Eigen::Vector3d> points, double kappa,
                                     const QuadratureConfig& quad = {});

/// (1/N) sum_n |(V j + f)_n|^2.
double residual_loss(const Eigen::MatrixXcd& V, const Eigen::VectorXcd& f,
                     const Eigen::VectorXcd& j);

struct EfieSystem {
  Eigen::MatrixXcd matrix;
  Eigen::VectorXcd rhs;
  double kappa = 0;
  std::uint64_t key = 0;
};

/// Assembles matrix and right-hand side for one geometry.
EfieSystem assemble_system(const DivConformingSpace& space, const ExcitationDipole& dipole,
                           const QuadratureConfig& quad = {}, int threads = 0);

/// Identity of an assembled system: geometry, degree, wave number, dipole, quadrature.
std::uint64_t system_key(const MultipatchSurface& refined_geometry, int degree,
                         const ExcitationDipole& dipole, const QuadratureConfig& quad);

/// Binary cache: 8-byte magic "IGAEFIE\0", uint32 version, uint32 reserved, uint64 K,
/// float64 kappa, uint64 key, then V column-major and f as little-endian
/// (re, im) float64 pairs.
void write_system(const std::filesystem::path& path, const EfieSystem& system);
EfieSystem read_system(const std::filesystem::path& path);
std::optional<EfieSystem> read_system_if_matches(const std::filesystem::path& path,
                                                 std::uint64_t key);

}  // namespace igabem
