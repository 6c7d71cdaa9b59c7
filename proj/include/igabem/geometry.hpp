#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "igabem/bspline.hpp"

namespace igabem {

using Patch = NurbsPatch<double>;

/// Patch boundary edge, named by the parameter held fixed.
enum class Edge { UMin, UMax, VMin, VMax };

inline constexpr std::array<Edge, 4> kAllEdges{Edge::UMin, Edge::UMax, Edge::VMin, Edge::VMax};

std::string to_string(Edge e);
Edge edge_from_string(const std::string& s);

/// Parameter point at position t in [0,1] along an edge. UMin/UMax run along v,
/// VMin/VMax along u.
Eigen::Vector2d edge_parameter(Edge e, double t);

/// Two patch edges that trace the same curve. With orientation_flip, position t on
/// edge_a meets position 1 - t on edge_b.
struct Interface {
  int patch_a = 0;
  Edge edge_a = Edge::UMin;
  int patch_b = 0;
  Edge edge_b = Edge::UMin;
  bool orientation_flip = false;
};

struct MultipatchSurface {
  std::vector<Patch> patches;
  std::vector<Interface> interfaces;
};

/// Flattened control points and weights. Layout: patch-major; inside a patch all
/// control points row-major with x, y, z interleaved, followed by all weights.
using GeometryParams = Eigen::VectorXd;

/// Exact unit sphere from six rational patches in cube-face topology.
///
/// Each face is the inverse stereographic image of a planar rational biquadratic
/// patch bounded by circular arcs, which makes every face a bi-quartic rational
/// Bezier patch (5 x 5 control net). The planar patch is invariant under the
/// symmetries of the square, so all shared edges carry identical parametrizations.
/// Normals point outward.
MultipatchSurface make_unit_sphere();

/// Oblate spheroid x^2 + y^2 + (z / r_semi)^2 = 1, obtained by scaling the sphere's
/// control points along z.
MultipatchSurface make_spheroid(double r_semi);

/// Matches every patch edge with exactly one partner edge. Throws TopologyError
/// on gaps or on edges shared by more than two patches.
std::vector<Interface> build_interfaces(std::span<const Patch> patches, double tol = 1e-10);

/// Largest pointwise distance between matched edges, sampled at `samples` points.
double max_interface_mismatch(const MultipatchSurface& surface, int samples = 21);

GeometryParams to_params(const MultipatchSurface& surface);
MultipatchSurface from_params(const MultipatchSurface& tmpl, const GeometryParams& params);
int num_params(const MultipatchSurface& surface);

/// Patchwise uniform knot refinement; topology and interfaces are unchanged.
MultipatchSurface refine(const MultipatchSurface& surface, int levels);

/// Surface area by tensor Gauss quadrature of the given order on every element.
double surface_area(const MultipatchSurface& surface, int order = 10);

/// Stable 64-bit hash of knots, control points and weights.
std::uint64_t geometry_hash(const MultipatchSurface& surface);

/// An upper bound on max |x| over the surface (control hull radius).
double bounding_radius(const MultipatchSurface& surface);

std::string geometry_to_json(const MultipatchSurface& surface);
MultipatchSurface geometry_from_json(const std::string& text);
void write_geometry(const std::filesystem::path& path, const MultipatchSurface& surface);
MultipatchSurface read_geometry(const std::filesystem::path& path);

}  // namespace igabem
