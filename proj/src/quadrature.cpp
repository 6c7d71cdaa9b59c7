#include "igabem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace igabem {

namespace {

constexpr int kMaxGaussOrder = 64;

Rule1D compute_gauss(int n) {
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
    }
    // nodes ascending on [0,1]
    r.nodes[n - 1 - i] = 0.5 * (1 + x);
    r.weights[n - 1 - i] = 1.0 / ((1 - x * x) * dp * dp);
  }
  return r;
}

void push(QuadratureRule4D& r, double sa, double ta, double sb, double tb, double w) {
  r.nodes.emplace_back(sa, ta, sb, tb);
  r.weights.push_back(w);
}

QuadratureRule4D coincident_rule(const Rule1D& g, const Rule1D& radial) {
  QuadratureRule4D r;
  const int n = static_cast<int>(g.nodes.size());
  const int nr = static_cast<int>(radial.nodes.size());
  for (int sign1 : {1, -1})
    for (int sign2 : {1, -1})
      for (bool swap : {false, true})
        for (int a = 0; a < nr; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
              for (int d = 0; d < n; ++d) {
                const double xi = radial.nodes[a], eta = g.nodes[b];
                const double z1 = swap ? xi * eta : xi;
                const double z2 = swap ? xi : xi * eta;
                const double x1 = (sign1 > 0 ? 0.0 : z1) + (1 - z1) * g.nodes[c];
                const double x2 = (sign2 > 0 ? 0.0 : z2) + (1 - z2) * g.nodes[d];
                const double w = radial.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi *
                                 (1 - z1) * (1 - z2);
                push(r, x1, x2, x1 + sign1 * z1, x2 + sign2 * z2, w);
              }
  return r;
}

QuadratureRule4D edge_rule(const Rule1D& g, const Rule1D& radial) {
  QuadratureRule4D r;
  const int n = static_cast<int>(g.nodes.size());
  const int nr = static_cast<int>(radial.nodes.size());
  for (int sign : {1, -1})
    for (int major = 0; major < 3; ++major)
      for (int a = 0; a < nr; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
              const double xi = radial.nodes[a];
              // (s_a, s_b, |t_b - t_a|) with the largest one equal to xi
              std::array<double, 3> q{};
              q[major] = xi;
              q[(major + 1) % 3] = xi * g.nodes[b];
              q[(major + 2) % 3] = xi * g.nodes[c];
              const double dz = q[2];
              const double ta = (sign > 0 ? 0.0 : dz) + (1 - dz) * g.nodes[d];
              const double w = radial.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi *
                               xi * (1 - dz);
              push(r, q[0], ta, q[1], ta + sign * dz, w);
            }
  return r;
}

QuadratureRule4D vertex_rule(const Rule1D& g, const Rule1D& radial) {
  QuadratureRule4D r;
  const int n = static_cast<int>(g.nodes.size());
  const int nr = static_cast<int>(radial.nodes.size());
  for (int major = 0; major < 4; ++major)
    for (int a = 0; a < nr; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            const double xi = radial.nodes[a];
            std::array<double, 4> q{};
            q[major] = xi;
            q[(major + 1) % 4] = xi * g.nodes[b];
            q[(major + 2) % 4] = xi * g.nodes[c];
            q[(major + 3) % 4] = xi * g.nodes[d];
            const double w =
                radial.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi * xi * xi;
            push(r, q[0], q[1], q[2], q[3], w);
          }
  return r;
}

int corner_position(const std::array<int, 4>& corners, int vertex) {
  for (int k = 0; k < 4; ++k)
    if (corners[k] == vertex) return k;
  return -1;
}

Eigen::Vector2d corner_coord(int k) { return {double(k & 1), double(k >> 1)}; }

// Square map with origin at corner c00, the s axis towards c10 and the t axis towards c01.
SquareMap map_from_corners(int c00, int c10, int c01) {
  SquareMap m;
  m.origin = corner_coord(c00);
  m.axis_s = corner_coord(c10) - m.origin;
  m.axis_t = corner_coord(c01) - m.origin;
  return m;
}

// The corner next to `c` along the other axis than `towards`.
int other_neighbor(int c, int towards) { return c ^ (3 ^ (c ^ towards)); }

}  // namespace

const Rule1D& gauss_legendre_1d(int order) {
  if (order < 1) throw ContractError("gauss_legendre_1d: order must be >= 1");
  if (order > kMaxGaussOrder) throw ContractError("gauss_legendre_1d: order above 64");
  static std::array<Rule1D, kMaxGaussOrder + 1> cache;
  static std::array<std::once_flag, kMaxGaussOrder + 1> once;
  std::call_once(once[order], [order] { cache[order] = compute_gauss(order); });
  return cache[order];
}

QuadratureRule2D tensor_gauss(int order) {
  const Rule1D& g = gauss_legendre_1d(order);
  QuadratureRule2D r;
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) {
      r.nodes.emplace_back(g.nodes[i], g.nodes[j]);
      r.weights.push_back(g.weights[i] * g.weights[j]);
    }
  return r;
}

const char* to_string(PanelPairClass c) {
  switch (c) {
    case PanelPairClass::Separated: return "separated";
    case PanelPairClass::SharedVertex: return "shared-vertex";
    case PanelPairClass::SharedEdge: return "shared-edge";
    case PanelPairClass::Coincident: return "coincident";
  }
  return "?";
}

QuadratureRule4D singular_rule(PanelPairClass cls, int order) {
  const Rule1D& g = gauss_legendre_1d(order);
  // Integrates the cubic radial Duffy Jacobians exactly.
  const Rule1D& radial = gauss_legendre_1d(std::max(order, 2));
  switch (cls) {
    case PanelPairClass::Coincident: return coincident_rule(g, radial);
    case PanelPairClass::SharedEdge: return edge_rule(g, radial);
    case PanelPairClass::SharedVertex: return vertex_rule(g, radial);
    case PanelPairClass::Separated: break;
  }
  throw ContractError("singular_rule: separated pairs use tensor Gauss rules");
}

ElementMesh::ElementMesh(const MultipatchSurface& surface, double tol) {
  std::vector<Eigen::Vector3d> vertices;
  auto vertex_id = [&](const Eigen::Vector3d& x) {
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i)
      if ((vertices[i] - x).norm() <= tol) return i;
    vertices.push_back(x);
    return static_cast<int>(vertices.size()) - 1;
  };
  for (int p = 0; p < static_cast<int>(surface.patches.size()); ++p) {
    const Patch& patch = surface.patches[p];
    const auto bu = patch.knots_u.breakpoints(), bv = patch.knots_v.breakpoints();
    patch_offset_.push_back(size());
    patch_nev_.push_back(static_cast<int>(bv.size()) - 1);
    for (std::size_t i = 0; i + 1 < bu.size(); ++i) {
      for (std::size_t j = 0; j + 1 < bv.size(); ++j) {
        elements_.push_back({p, static_cast<int>(i), static_cast<int>(j)});
        boxes_.emplace_back(bu[i], bv[j], bu[i + 1] - bu[i], bv[j + 1] - bv[j]);
        std::array<int, 4> c{};
        for (int k = 0; k < 4; ++k)
          c[k] = vertex_id(eval_surface(patch, k & 1 ? bu[i + 1] : bu[i], k >> 1 ? bv[j + 1] : bv[j]));
        corners_.push_back(c);
      }
    }
  }
  num_vertices_ = static_cast<int>(vertices.size());
}

int ElementMesh::index(int patch, int eu, int ev) const {
  return patch_offset_[patch] + eu * patch_nev_[patch] + ev;
}

PanelPairClass classify_pair(const ElementMesh& mesh, int a, int b) {
  if (a == b) return PanelPairClass::Coincident;
  int shared = 0;
  for (int va : mesh.corners(a))
    for (int vb : mesh.corners(b)) shared += (va == vb);
  if (shared >= 2) return PanelPairClass::SharedEdge;
  if (shared == 1) return PanelPairClass::SharedVertex;
  return PanelPairClass::Separated;
}

std::array<SquareMap, 2> align_pair(const ElementMesh& mesh, int a, int b, PanelPairClass cls) {
  const auto &ca = mesh.corners(a), &cb = mesh.corners(b);
  switch (cls) {
    case PanelPairClass::Coincident:
      return {SquareMap{}, SquareMap{}};
    case PanelPairClass::SharedVertex: {
      for (int k = 0; k < 4; ++k) {
        const int kb = corner_position(cb, ca[k]);
        if (kb < 0) continue;
        return {map_from_corners(k, k ^ 1, k ^ 2), map_from_corners(kb, kb ^ 1, kb ^ 2)};
      }
      break;
    }
    case PanelPairClass::SharedEdge: {
      std::array<int, 2> shared{};
      int n = 0;
      for (int v : ca)
        if (corner_position(cb, v) >= 0 && n < 2) shared[n++] = v;
      if (n < 2) break;
      const int a0 = corner_position(ca, shared[0]), a1 = corner_position(ca, shared[1]);
      const int b0 = corner_position(cb, shared[0]), b1 = corner_position(cb, shared[1]);
      return {map_from_corners(a0, other_neighbor(a0, a1), a1),
              map_from_corners(b0, other_neighbor(b0, b1), b1)};
    }
    case PanelPairClass::Separated:
      break;
  }
  throw ContractError("align_pair: element pair is not in the stated adjacency class");
}

}  // namespace igabem
