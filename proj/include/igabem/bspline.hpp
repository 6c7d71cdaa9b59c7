#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "igabem/errors.hpp"

namespace igabem {

/// Largest polynomial degree supported by the stack-allocated evaluation kernels.
inline constexpr int kMaxDegree = 8;

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Homogeneous4 = Eigen::Matrix<Scalar, 4, 1>;

/// Open knot vector on [0,1]: both end knots repeat exactly degree+1 times.
template <typename Scalar = double>
class KnotVector {
 public:
  KnotVector() = default;

  KnotVector(std::vector<Scalar> knots, int degree) : knots_(std::move(knots)), degree_(degree) {
    if (degree_ < 0 || degree_ > kMaxDegree)
      throw ContractError("KnotVector: degree " + std::to_string(degree_) + " outside [0, " +
                          std::to_string(kMaxDegree) + "]");
    const int m = static_cast<int>(knots_.size());
    if (m < 2 * (degree_ + 1)) throw ContractError("KnotVector: too few knots for degree");
    for (int i = 1; i < m; ++i)
      if (knots_[i] < knots_[i - 1]) throw ContractError("KnotVector: knots must be non-decreasing");
    if (knots_.front() != Scalar(0) || knots_.back() != Scalar(1))
      throw ContractError("KnotVector: knots must span [0,1]");
    for (int i = 0; i <= degree_; ++i)
      if (knots_[i] != Scalar(0) || knots_[m - 1 - i] != Scalar(1))
        throw ContractError("KnotVector: end knots must repeat degree+1 times");
    if (knots_[degree_ + 1] == Scalar(0) || knots_[m - degree_ - 2] == Scalar(1))
      throw ContractError("KnotVector: end knots repeat more than degree+1 times");
  }

  int degree() const noexcept { return degree_; }
  int size() const noexcept { return static_cast<int>(knots_.size()); }
  int num_basis() const noexcept { return size() - degree_ - 1; }
  Scalar operator[](int i) const { return knots_[i]; }
  const std::vector<Scalar>& knots() const noexcept { return knots_; }
  const Scalar* data() const noexcept { return knots_.data(); }

  /// Distinct knot values in increasing order.
  std::vector<Scalar> breakpoints() const {
    std::vector<Scalar> b;
    for (Scalar k : knots_)
      if (b.empty() || k != b.back()) b.push_back(k);
    return b;
  }
  int num_elements() const { return static_cast<int>(breakpoints().size()) - 1; }

  bool operator==(const KnotVector& other) const = default;

 private:
  std::vector<Scalar> knots_{Scalar(0), Scalar(1)};
  int degree_ = 0;
};

/// Open knot vector with `num_elements` uniform spans and maximal smoothness C^{degree-1}.
template <typename Scalar = double>
KnotVector<Scalar> open_uniform_knots(int degree, int num_elements) {
  if (num_elements < 1) throw ContractError("open_uniform_knots: need at least one element");
  std::vector<Scalar> k(degree + 1, Scalar(0));
  for (int e = 1; e < num_elements; ++e) k.push_back(Scalar(e) / Scalar(num_elements));
  k.insert(k.end(), degree + 1, Scalar(1));
  return KnotVector<Scalar>(std::move(k), degree);
}

/// Index i with knots[i] <= xi < knots[i+1]; xi == 1 maps to the last non-empty span.
template <typename Scalar>
int find_span(const KnotVector<Scalar>& kv, Scalar xi) {
  if (!(xi >= Scalar(0) && xi <= Scalar(1)))
    throw DomainError("find_span: parameter outside [0,1]");
  const int p = kv.degree();
  const int n = kv.num_basis();
  if (xi >= kv[n]) return n - 1;
  const auto first = kv.knots().begin() + p;
  const auto last = kv.knots().begin() + n + 1;
  return static_cast<int>(std::upper_bound(first, last, xi) - kv.knots().begin()) - 1;
}

namespace detail {

/// Values and derivatives up to `nd` of the p+1 non-zero basis functions on `span`.
/// `out` is row-major (nd+1) x (p+1).
template <typename Scalar>
void basis_derivs(const Scalar* U, int p, int span, Scalar xi, int nd, Scalar* out) {
  std::array<Scalar, (kMaxDegree + 1) * (kMaxDegree + 1)> ndu{};
  std::array<Scalar, kMaxDegree + 1> left{}, right{};
  std::array<Scalar, 2 * (kMaxDegree + 1)> a{};
  const int w = p + 1;
  ndu[0] = Scalar(1);
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - U[span + 1 - j];
    right[j] = U[span + j] - xi;
    Scalar saved = 0;
    for (int r = 0; r < j; ++r) {
      // lower triangle holds knot differences, upper triangle basis values
      ndu[j * w + r] = right[r + 1] + left[j - r];
      const Scalar denom = ndu[j * w + r];
      const Scalar temp = denom == Scalar(0) ? Scalar(0) : ndu[r * w + j - 1] / denom;
      ndu[r * w + j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j * w + j] = saved;
  }
  for (int j = 0; j <= p; ++j) out[j] = ndu[j * w + p];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0] = Scalar(1);
    for (int k = 1; k <= nd; ++k) {
      Scalar d = 0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        const Scalar den = ndu[(pk + 1) * w + rk];
        a[s2 * w + 0] = den == Scalar(0) ? Scalar(0) : a[s1 * w + 0] / den;
        d = a[s2 * w + 0] * ndu[rk * w + pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        const Scalar den = ndu[(pk + 1) * w + rk + j];
        a[s2 * w + j] =
            den == Scalar(0) ? Scalar(0) : (a[s1 * w + j] - a[s1 * w + j - 1]) / den;
        d += a[s2 * w + j] * ndu[(rk + j) * w + pk];
      }
      if (r <= pk) {
        const Scalar den = ndu[(pk + 1) * w + r];
        a[s2 * w + k] = den == Scalar(0) ? Scalar(0) : -a[s1 * w + k - 1] / den;
        d += a[s2 * w + k] * ndu[r * w + pk];
      }
      out[k * w + r] = d;
      std::swap(s1, s2);
    }
  }
  Scalar fac = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) out[k * w + j] *= fac;
    fac *= Scalar(p - k);
  }
}

/// Bernstein polynomials of degree p and their first derivatives at t.
template <typename Scalar>
void bernstein(int p, Scalar t, Scalar* values, Scalar* derivs) {
  std::array<Scalar, kMaxDegree + 1> lower{};
  lower[0] = Scalar(1);
  for (int d = 1; d < p; ++d) {
    Scalar saved = 0;
    for (int i = 0; i < d; ++i) {
      const Scalar tmp = lower[i];
      lower[i] = saved + (Scalar(1) - t) * tmp;
      saved = t * tmp;
    }
    lower[d] = saved;
  }
  if (p == 0) {
    values[0] = Scalar(1);
    derivs[0] = Scalar(0);
    return;
  }
  for (int i = 0; i <= p; ++i) {
    const Scalar left = i > 0 ? lower[i - 1] : Scalar(0);
    const Scalar right = i < p ? lower[i] : Scalar(0);
    values[i] = (i > 0 ? t * left : Scalar(0)) + (i < p ? (Scalar(1) - t) * right : Scalar(0));
    derivs[i] = Scalar(p) * (left - right);
  }
}

}  // namespace detail

/// The p+1 non-zero basis values b_{span-p..span}(xi).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval_basis(const KnotVector<Scalar>& kv, Scalar xi) {
  const int span = find_span(kv, xi);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values(kv.degree() + 1);
  detail::basis_derivs(kv.data(), kv.degree(), span, xi, 0, values.data());
  return values;
}

/// Row k holds the k-th derivatives of the p+1 non-zero basis functions.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eval_basis_derivatives(
    const KnotVector<Scalar>& kv, Scalar xi, int max_order) {
  if (max_order < 0 || max_order > kv.degree())
    throw ContractError("eval_basis_derivatives: max_order must lie in [0, degree]");
  const int span = find_span(kv, xi);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> d(max_order + 1,
                                                                          kv.degree() + 1);
  detail::basis_derivs(kv.data(), kv.degree(), span, xi, max_order, d.data());
  return d;
}

/// Rational tensor-product patch. Control points and weights are stored row-major:
/// entry (i, j) sits at index i * num_v() + j, with i running along u.
template <typename Scalar = double>
struct NurbsPatch {
  using Point = Vector3<Scalar>;

  KnotVector<Scalar> knots_u;
  KnotVector<Scalar> knots_v;
  std::vector<Point> control_points;
  std::vector<Scalar> weights;

  int num_u() const noexcept { return knots_u.num_basis(); }
  int num_v() const noexcept { return knots_v.num_basis(); }
  int index(int i, int j) const noexcept { return i * num_v() + j; }

  void validate() const {
    const auto n = static_cast<std::size_t>(num_u() * num_v());
    if (control_points.size() != n || weights.size() != n)
      throw ContractError("NurbsPatch: control net does not match knot vectors");
    for (Scalar w : weights)
      if (!(w > Scalar(0))) throw ContractError("NurbsPatch: weights must be positive");
  }
};

template <typename Scalar>
struct SurfaceFrame {
  Vector3<Scalar> point;
  Vector3<Scalar> tangent_u;
  Vector3<Scalar> tangent_v;
  Vector3<Scalar> unit_normal;
  Scalar area_element;
};

namespace detail {

template <typename Scalar>
void surface_derivs(const NurbsPatch<Scalar>& patch, Scalar u, Scalar v, int nd,
                    Homogeneous4<Scalar>* hom /* [value, d/du, d/dv] */) {
  const int pu = patch.knots_u.degree(), pv = patch.knots_v.degree();
  const int su = find_span(patch.knots_u, u), sv = find_span(patch.knots_v, v);
  std::array<Scalar, 2 * (kMaxDegree + 1)> bu{}, bv{};
  detail::basis_derivs(patch.knots_u.data(), pu, su, u, std::min(nd, pu), bu.data());
  detail::basis_derivs(patch.knots_v.data(), pv, sv, v, std::min(nd, pv), bv.data());
  for (int k = 0; k < 3; ++k) hom[k].setZero();
  for (int a = 0; a <= pu; ++a) {
    for (int b = 0; b <= pv; ++b) {
      const int idx = patch.index(su - pu + a, sv - pv + b);
      const Scalar w = patch.weights[idx];
      Homogeneous4<Scalar> cp;
      cp << patch.control_points[idx] * w, w;
      hom[0] += bu[a] * bv[b] * cp;
      if (nd > 0) {
        if (pu > 0) hom[1] += bu[pu + 1 + a] * bv[b] * cp;
        if (pv > 0) hom[2] += bu[a] * bv[pv + 1 + b] * cp;
      }
    }
  }
}

}  // namespace detail

/// Point of the rational map at (u, v).
template <typename Scalar>
Vector3<Scalar> eval_surface(const NurbsPatch<Scalar>& patch, Scalar u, Scalar v) {
  std::array<Homogeneous4<Scalar>, 3> h;
  detail::surface_derivs(patch, u, v, 0, h.data());
  return h[0].template head<3>() / h[0][3];
}

/// Tangents, unit normal cross(t_u, t_v)/|.| and the area element |cross(t_u, t_v)|.
template <typename Scalar>
SurfaceFrame<Scalar> eval_surface_jacobian(const NurbsPatch<Scalar>& patch, Scalar u, Scalar v) {
  std::array<Homogeneous4<Scalar>, 3> h;
  detail::surface_derivs(patch, u, v, 1, h.data());
  SurfaceFrame<Scalar> f;
  const Scalar w = h[0][3];
  f.point = h[0].template head<3>() / w;
  f.tangent_u = (h[1].template head<3>() - h[1][3] * f.point) / w;
  f.tangent_v = (h[2].template head<3>() - h[2][3] * f.point) / w;
  const Vector3<Scalar> c = f.tangent_u.cross(f.tangent_v);
  f.area_element = c.norm();
  if (!(f.area_element >= Scalar(1e-14)))
    throw SingularityError("eval_surface_jacobian: degenerate parametrization");
  f.unit_normal = c / f.area_element;
  return f;
}

namespace detail {

/// Single insertion of `xi` into a curve given by homogeneous points (Boehm).
template <typename Scalar>
void insert_knot_curve(const std::vector<Scalar>& U, int p, Scalar xi,
                       const std::vector<Homogeneous4<Scalar>>& P,
                       std::vector<Homogeneous4<Scalar>>& Q) {
  const int n = static_cast<int>(P.size());
  int k = static_cast<int>(std::upper_bound(U.begin(), U.end(), xi) - U.begin()) - 1;
  k = std::min(k, n - 1);
  int s = 0;
  for (Scalar x : U) s += (x == xi);
  Q.assign(n + 1, Homogeneous4<Scalar>::Zero());
  for (int i = 0; i <= k - p; ++i) Q[i] = P[i];
  for (int i = k - p + 1; i <= k - s; ++i) {
    const Scalar alpha = (xi - U[i]) / (U[i + p] - U[i]);
    Q[i] = alpha * P[i] + (Scalar(1) - alpha) * P[i - 1];
  }
  for (int i = k - s + 1; i <= n; ++i) Q[i] = P[i - 1];
}

template <typename Scalar>
NurbsPatch<Scalar> insert_knots(const NurbsPatch<Scalar>& patch, const std::vector<Scalar>& xs,
                                bool along_u) {
  const KnotVector<Scalar>& kv = along_u ? patch.knots_u : patch.knots_v;
  const int p = kv.degree();
  const int nu = patch.num_u(), nv = patch.num_v();
  std::vector<Scalar> U = kv.knots();
  const int lines = along_u ? nv : nu;
  const int len = along_u ? nu : nv;
  std::vector<std::vector<Homogeneous4<Scalar>>> curves(lines);
  for (int l = 0; l < lines; ++l) {
    curves[l].resize(len);
    for (int t = 0; t < len; ++t) {
      const int idx = along_u ? patch.index(t, l) : patch.index(l, t);
      const Scalar w = patch.weights[idx];
      curves[l][t] << patch.control_points[idx] * w, w;
    }
  }
  std::vector<Homogeneous4<Scalar>> tmp;
  for (Scalar x : xs) {
    for (auto& c : curves) {
      insert_knot_curve(U, p, x, c, tmp);
      c.swap(tmp);
    }
    U.insert(std::upper_bound(U.begin(), U.end(), x), x);
  }
  NurbsPatch<Scalar> out;
  out.knots_u = along_u ? KnotVector<Scalar>(U, p) : patch.knots_u;
  out.knots_v = along_u ? patch.knots_v : KnotVector<Scalar>(U, p);
  const int new_len = len + static_cast<int>(xs.size());
  const int onu = along_u ? new_len : nu, onv = along_u ? nv : new_len;
  out.control_points.resize(onu * onv);
  out.weights.resize(onu * onv);
  for (int l = 0; l < lines; ++l) {
    for (int t = 0; t < new_len; ++t) {
      const int idx = along_u ? t * onv + l : l * onv + t;
      const Homogeneous4<Scalar>& h = curves[l][t];
      out.weights[idx] = h[3];
      out.control_points[idx] = h.template head<3>() / h[3];
    }
  }
  return out;
}

template <typename Scalar>
std::vector<Scalar> span_midpoints(const KnotVector<Scalar>& kv) {
  const auto b = kv.breakpoints();
  std::vector<Scalar> mids;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) mids.push_back((b[i] + b[i + 1]) / Scalar(2));
  return mids;
}

}  // namespace detail

/// Halves every knot span `levels` times by knot insertion; the surface map is unchanged.
template <typename Scalar>
NurbsPatch<Scalar> refine_uniform(const NurbsPatch<Scalar>& patch, int levels) {
  if (levels < 0) throw ContractError("refine_uniform: levels must be non-negative");
  NurbsPatch<Scalar> out = patch;
  for (int l = 0; l < levels; ++l) {
    out = detail::insert_knots(out, detail::span_midpoints(out.knots_u), true);
    out = detail::insert_knots(out, detail::span_midpoints(out.knots_v), false);
  }
  return out;
}

/// Rational Bezier net of one knot-span element, homogeneous coordinates, row-major
/// (degree_u+1) x (degree_v+1).
template <typename Scalar>
struct BezierElement {
  int degree_u = 0;
  int degree_v = 0;
  std::vector<Homogeneous4<Scalar>> net;
};

/// Bezier extraction: element (eu, ev) is stored at eu * num_elements_v + ev.
template <typename Scalar>
std::vector<BezierElement<Scalar>> bezier_extract(const NurbsPatch<Scalar>& patch) {
  auto saturate = [](const KnotVector<Scalar>& kv) {
    std::vector<Scalar> xs;
    const auto b = kv.breakpoints();
    for (std::size_t i = 1; i + 1 < b.size(); ++i) {
      const int mult =
          static_cast<int>(std::count(kv.knots().begin(), kv.knots().end(), b[i]));
      for (int m = mult; m < kv.degree(); ++m) xs.push_back(b[i]);
    }
    return xs;
  };
  NurbsPatch<Scalar> full = detail::insert_knots(patch, saturate(patch.knots_u), true);
  full = detail::insert_knots(full, saturate(full.knots_v), false);
  const int pu = patch.knots_u.degree(), pv = patch.knots_v.degree();
  const int neu = patch.knots_u.num_elements(), nev = patch.knots_v.num_elements();
  std::vector<BezierElement<Scalar>> out(neu * nev);
  for (int eu = 0; eu < neu; ++eu) {
    for (int ev = 0; ev < nev; ++ev) {
      BezierElement<Scalar>& e = out[eu * nev + ev];
      e.degree_u = pu;
      e.degree_v = pv;
      e.net.resize((pu + 1) * (pv + 1));
      for (int a = 0; a <= pu; ++a) {
        for (int b = 0; b <= pv; ++b) {
          const int idx = full.index(eu * pu + a, ev * pv + b);
          const Scalar w = full.weights[idx];
          e.net[a * (pv + 1) + b] << full.control_points[idx] * w, w;
        }
      }
    }
  }
  return out;
}

}  // namespace igabem
