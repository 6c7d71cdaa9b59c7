#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

#include "igabem/geometry.hpp"
#include "igabem/quadrature.hpp"

namespace igabem {

/// Global coefficient index of a patch-local basis function and the sign with which
/// the local function enters the global one.
struct DofRef {
  int global = -1;
  double sign = 1.0;
};

/// Values of the element-local functions at one point of an element.
struct ElementSample {
  Eigen::Vector3d point;
  Eigen::Vector3d tangent_u;  // with respect to the patch parameter u
  Eigen::Vector3d tangent_v;
  double area_element = 0;    // |tangent_u x tangent_v|
  double jacobian = 0;        // surface measure per unit area of the element square
  Eigen::Matrix<double, 3, Eigen::Dynamic> values;  // Piola-mapped tangent fields
  Eigen::VectorXd divs;                             // surface divergences
};

/// Div-conforming spline space on a multipatch surface.
///
/// On every patch, reference fields (j_u, j_v) live in S^{p,p-1} x S^{p-1,p} over the
/// geometry's breakpoints with maximal smoothness, and are pushed forward with the
/// contravariant Piola map
///   phi = (tangent_u j_u + tangent_v j_v) / |tangent_u x tangent_v|,
///   div phi = (d_u j_u + d_v j_v) / |tangent_u x tangent_v|.
/// Normal-trace functions on matched edges are merged into one global coefficient
/// with a sign that makes the flux continuous across the interface.
///
/// Patch-local numbering: u-component functions (i, j) at i * n_v + j, followed by
/// the v-component functions in the same row-major layout.
/// Element-local numbering: u-component (a, b) at a * p + b for a <= p, b < p,
/// then v-component (a, b) at p (p + 1) + a * (p + 1) + b.
class DivConformingSpace {
 public:
  DivConformingSpace(MultipatchSurface geometry, int degree);

  int degree() const noexcept { return degree_; }
  int num_dofs() const noexcept { return num_dofs_; }
  const MultipatchSurface& geometry() const noexcept { return geometry_; }
  const ElementMesh& mesh() const noexcept { return mesh_; }

  /// Knot vector of a component space: component 0 = u-field, 1 = v-field;
  /// direction 0 = u, 1 = v.
  const KnotVector<double>& knots(int patch, int component, int direction) const;

  int num_local(int patch) const;
  DofRef dof(int patch, int local) const { return dof_map_[patch][local]; }

  int functions_per_element() const noexcept { return 2 * degree_ * (degree_ + 1); }
  std::span<const DofRef> element_dofs(int element) const;

  /// Evaluates all element-local functions at element coordinates (s, t) in [0,1]^2.
  void evaluate(int element, double s, double t, ElementSample& out) const;

  /// Element containing patch parameter (u, v) and the local coordinates in it.
  int locate(int patch, double u, double v, double& s, double& t) const;

  Eigen::Vector3d eval_basis_fn(int k, int patch, double u, double v) const;
  double eval_div(int k, int patch, double u, double v) const;

  /// Current density sum_k j_k phi_k and its divergence at a patch point.
  void eval_field(const Eigen::VectorXcd& coeffs, int patch, double u, double v,
                  Eigen::Vector3cd& value, std::complex<double>& div) const;

 private:
  struct PatchSpace {
    // [component][direction]
    std::array<std::array<KnotVector<double>, 2>, 2> knots;
    int num_u_field = 0;
  };

  void build_dof_map();

  MultipatchSurface geometry_;
  int degree_;
  ElementMesh mesh_;
  std::vector<PatchSpace> patch_spaces_;
  std::vector<std::vector<DofRef>> dof_map_;
  std::vector<DofRef> element_dofs_;   // functions_per_element() entries per element
  std::vector<BezierElement<double>> bezier_;
  int num_dofs_ = 0;
};

/// Patch-local functions with a non-zero normal trace on `edge`, ordered along the
/// edge's running parameter.
std::vector<int> edge_functions(const DivConformingSpace& space, int patch, Edge edge);

}  // namespace igabem
