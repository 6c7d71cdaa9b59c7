#include "igabem/analytic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace igabem {

Eigen::Vector3cd dipole_field(const Eigen::Vector3d& x, const ExcitationDipole& dipole) {
  const Eigen::Vector3d d = x - dipole.position;
  const double r = d.norm();
  if (r < 1e-12) throw SingularityError("dipole_field: evaluation point at the dipole");
  const Eigen::Vector3d n = d / r;
  const Eigen::Vector3d& p = dipole.moment;
  const double k = dipole.kappa;
  const std::complex<double> phase = std::polar(1.0, -k * r);
  const Eigen::Vector3d radiation = k * k * n.cross(p).cross(n) / r;
  const Eigen::Vector3d near = 3.0 * n * n.dot(p) - p;
  const std::complex<double> near_factor = std::complex<double>(1.0 / (r * r * r), k / (r * r));
  return (radiation.cast<std::complex<double>>() + near.cast<std::complex<double>>() * near_factor) *
         (phase / (4.0 * std::numbers::pi));
}

EvalPointSet sample_eval_points(const MultipatchSurface& geometry, int count, std::uint64_t seed,
                                double radius) {
  if (count < 1) throw ContractError("sample_eval_points: count must be >= 1");
  if (!(radius > 0.0 && radius <= 3.0))
    throw DomainError("sample_eval_points: radius must lie in (0, 3]");
  if (bounding_radius(geometry) >= radius)
    throw DomainError("sample_eval_points: geometry reaches the sampling sphere");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  const Eigen::Matrix3d rot = q.toRotationMatrix();
  EvalPointSet set;
  set.radius = radius;
  set.count = count;
  set.seed = seed;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    set.points.push_back(radius * (rot * Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z)));
  }
  return set;
}

double max_pointwise_error(std::span<const Eigen::Vector3cd> reference,
                           std::span<const Eigen::Vector3cd> computed) {
  if (reference.size() != computed.size())
    throw ContractError("max_pointwise_error: field lists differ in length");
  double worst = 0;
  for (std::size_t i = 0; i < reference.size(); ++i)
    worst = std::max(worst, (reference[i] - computed[i]).norm());
  return worst;
}

void write_field_csv(const std::filesystem::path& path, const EvalPointSet& points,
                     std::span<const Eigen::Vector3cd> reference,
                     std::span<const Eigen::Vector3cd> computed,
                     const std::vector<std::string>& header_lines) {
  if (reference.size() != points.points.size() || computed.size() != points.points.size())
    throw ContractError("write_field_csv: field lists differ in length");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& line : header_lines) out << "# " << line << '\n';
  out << "x,y,z,ref_x_re,ref_x_im,ref_y_re,ref_y_im,ref_z_re,ref_z_im,"
         "h_x_re,h_x_im,h_y_re,h_y_im,h_z_re,h_z_im,error\n";
  char buf[64];
  auto put = [&](double v, bool last = false) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << (last ? '\n' : ',');
  };
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    for (int c = 0; c < 3; ++c) put(points.points[i][c]);
    for (int c = 0; c < 3; ++c) {
      put(reference[i][c].real());
      put(reference[i][c].imag());
    }
    for (int c = 0; c < 3; ++c) {
      put(computed[i][c].real());
      put(computed[i][c].imag());
    }
    put((reference[i] - computed[i]).norm(), true);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace igabem
