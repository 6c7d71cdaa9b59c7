#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "igabem/geometry.hpp"

namespace igabem {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Tensor or transformed rule on [0,1]^2.
struct QuadratureRule2D {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<double> weights;
};

/// Rule on [0,1]^4; a node is (s_a, t_a, s_b, t_b), local coordinates on two elements.
struct QuadratureRule4D {
  std::vector<Eigen::Vector4d> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [0,1], exact for polynomials of degree 2*order - 1.
const Rule1D& gauss_legendre_1d(int order);

QuadratureRule2D tensor_gauss(int order);

enum class PanelPairClass { Separated, SharedVertex, SharedEdge, Coincident };

const char* to_string(PanelPairClass c);

/// Rule for the weakly singular double integral over an element pair in canonical
/// position:
///  - Coincident: both coordinate pairs live on the same element.
///  - SharedEdge: the common edge is s = 0 on both elements and t_a = t_b there.
///  - SharedVertex: the common vertex is s = t = 0 on both elements.
/// Sauter-Schwab relative coordinates followed by Duffy blow-ups of the singular
/// point; nodes and weights absorb all Jacobians, so weights sum to 1.
QuadratureRule4D singular_rule(PanelPairClass cls, int order);

/// Knot-span element of a patch.
struct ElementId {
  int patch = 0;
  int eu = 0;
  int ev = 0;
};

/// Element list of a multipatch surface with corner connectivity. Corners are
/// merged into global vertices when they coincide to within `tol` in world space.
/// Local corner k of an element sits at (k & 1, k >> 1) in element coordinates.
class ElementMesh {
 public:
  explicit ElementMesh(const MultipatchSurface& surface, double tol = 1e-10);

  int size() const noexcept { return static_cast<int>(elements_.size()); }
  int num_vertices() const noexcept { return num_vertices_; }
  const ElementId& element(int e) const { return elements_[e]; }
  const std::array<int, 4>& corners(int e) const { return corners_[e]; }
  int index(int patch, int eu, int ev) const;

  /// Parameter box [u0, u0+hu] x [v0, v0+hv] of element e on its patch.
  Eigen::Vector4d box(int e) const { return boxes_[e]; }

 private:
  std::vector<ElementId> elements_;
  std::vector<std::array<int, 4>> corners_;
  std::vector<Eigen::Vector4d> boxes_;
  std::vector<int> patch_offset_;
  std::vector<int> patch_nev_;
  int num_vertices_ = 0;
};

PanelPairClass classify_pair(const ElementMesh& mesh, int a, int b);

/// Affine map of canonical element coordinates to an element's own local
/// coordinates: local = origin + s * axis_s + t * axis_t (a symmetry of the square).
struct SquareMap {
  Eigen::Vector2d origin{0.0, 0.0};
  Eigen::Vector2d axis_s{1.0, 0.0};
  Eigen::Vector2d axis_t{0.0, 1.0};

  Eigen::Vector2d operator()(double s, double t) const { return origin + s * axis_s + t * axis_t; }
};

/// Maps that put an adjacent element pair in the canonical position of singular_rule.
std::array<SquareMap, 2> align_pair(const ElementMesh& mesh, int a, int b, PanelPairClass cls);

}  // namespace igabem
