#include "igabem/spaces.hpp"

#include <cmath>

namespace igabem {

namespace {

KnotVector<double> knots_on_breakpoints(const std::vector<double>& b, int degree) {
  std::vector<double> k(degree + 1, 0.0);
  for (std::size_t i = 1; i + 1 < b.size(); ++i) k.push_back(b[i]);
  k.insert(k.end(), degree + 1, 1.0);
  return KnotVector<double>(std::move(k), degree);
}

bool same_knots(const KnotVector<double>& a, const KnotVector<double>& b, bool reversed) {
  if (a.size() != b.size() || a.degree() != b.degree()) return false;
  const int m = a.size();
  for (int i = 0; i < m; ++i) {
    const double other = reversed ? 1.0 - b[m - 1 - i] : b[i];
    if (std::abs(a[i] - other) > 1e-14) return false;
  }
  return true;
}

double outward_sign(Edge e) { return (e == Edge::UMin || e == Edge::VMin) ? -1.0 : 1.0; }

}  // namespace

DivConformingSpace::DivConformingSpace(MultipatchSurface geometry, int degree)
    : geometry_(std::move(geometry)), degree_(degree), mesh_(geometry_) {
  if (degree_ < 1 || degree_ > kMaxDegree)
    throw ContractError("DivConformingSpace: degree must lie in [1, " +
                        std::to_string(kMaxDegree) + "]");
  for (const Patch& patch : geometry_.patches) {
    patch.validate();
    const auto bu = patch.knots_u.breakpoints(), bv = patch.knots_v.breakpoints();
    PatchSpace ps;
    ps.knots[0][0] = knots_on_breakpoints(bu, degree_);
    ps.knots[0][1] = knots_on_breakpoints(bv, degree_ - 1);
    ps.knots[1][0] = knots_on_breakpoints(bu, degree_ - 1);
    ps.knots[1][1] = knots_on_breakpoints(bv, degree_);
    ps.num_u_field = ps.knots[0][0].num_basis() * ps.knots[0][1].num_basis();
    patch_spaces_.push_back(std::move(ps));
    auto nets = bezier_extract(patch);
    bezier_.insert(bezier_.end(), nets.begin(), nets.end());
  }
  build_dof_map();
}

const KnotVector<double>& DivConformingSpace::knots(int patch, int component, int direction) const {
  return patch_spaces_[patch].knots[component][direction];
}

int DivConformingSpace::num_local(int patch) const {
  const PatchSpace& ps = patch_spaces_[patch];
  return ps.num_u_field + ps.knots[1][0].num_basis() * ps.knots[1][1].num_basis();
}

std::vector<int> edge_functions(const DivConformingSpace& space, int patch, Edge edge) {
  std::vector<int> out;
  const int nu0 = space.knots(patch, 0, 0).num_basis(), nv0 = space.knots(patch, 0, 1).num_basis();
  const int nu1 = space.knots(patch, 1, 0).num_basis(), nv1 = space.knots(patch, 1, 1).num_basis();
  const int offset = nu0 * nv0;
  switch (edge) {
    case Edge::UMin:
      for (int j = 0; j < nv0; ++j) out.push_back(j);
      break;
    case Edge::UMax:
      for (int j = 0; j < nv0; ++j) out.push_back((nu0 - 1) * nv0 + j);
      break;
    case Edge::VMin:
      for (int i = 0; i < nu1; ++i) out.push_back(offset + i * nv1);
      break;
    case Edge::VMax:
      for (int i = 0; i < nu1; ++i) out.push_back(offset + i * nv1 + nv1 - 1);
      break;
  }
  return out;
}

void DivConformingSpace::build_dof_map() {
  const int np = static_cast<int>(geometry_.patches.size());
  struct Link {
    int patch = -1, local = -1;
    double sign = 1.0;
  };
  std::vector<std::vector<Link>> master(np);
  for (int p = 0; p < np; ++p) master[p].resize(num_local(p));

  for (const Interface& it : geometry_.interfaces) {
    auto running = [&](int patch, Edge e) -> const KnotVector<double>& {
      return (e == Edge::UMin || e == Edge::UMax) ? knots(patch, 0, 1) : knots(patch, 1, 0);
    };
    if (!same_knots(running(it.patch_a, it.edge_a), running(it.patch_b, it.edge_b),
                    it.orientation_flip))
      throw TopologyError("build_space: knot vectors along interface between patches " +
                          std::to_string(it.patch_a) + " and " + std::to_string(it.patch_b) +
                          " do not match under the stated orientation");
    const auto fa = edge_functions(*this, it.patch_a, it.edge_a);
    const auto fb = edge_functions(*this, it.patch_b, it.edge_b);
    const int m = static_cast<int>(fa.size());
    const double sign = -outward_sign(it.edge_a) * outward_sign(it.edge_b);
    for (int k = 0; k < m; ++k) {
      const int lb = fb[it.orientation_flip ? m - 1 - k : k];
      Link& slot = master[it.patch_b][lb];
      if (slot.patch >= 0 || master[it.patch_a][fa[k]].patch >= 0)
        throw TopologyError("build_space: edge function claimed by two interfaces");
      slot = {it.patch_a, fa[k], sign};
    }
  }

  dof_map_.assign(np, {});
  num_dofs_ = 0;
  for (int p = 0; p < np; ++p) {
    dof_map_[p].resize(num_local(p));
    for (int l = 0; l < num_local(p); ++l)
      if (master[p][l].patch < 0) dof_map_[p][l] = {num_dofs_++, 1.0};
  }
  for (int p = 0; p < np; ++p)
    for (int l = 0; l < num_local(p); ++l) {
      const Link& link = master[p][l];
      if (link.patch < 0) continue;
      const DofRef m = dof_map_[link.patch][link.local];
      if (m.global < 0) throw TopologyError("build_space: chained interface identification");
      dof_map_[p][l] = {m.global, m.sign * link.sign};
    }

  const int nfe = functions_per_element();
  element_dofs_.resize(static_cast<std::size_t>(mesh_.size()) * nfe);
  for (int e = 0; e < mesh_.size(); ++e) {
    const ElementId& id = mesh_.element(e);
    const PatchSpace& ps = patch_spaces_[id.patch];
    const int nv0 = ps.knots[0][1].num_basis(), nv1 = ps.knots[1][1].num_basis();
    int k = 0;
    for (int a = 0; a <= degree_; ++a)
      for (int b = 0; b < degree_; ++b)
        element_dofs_[e * nfe + k++] = dof_map_[id.patch][(id.eu + a) * nv0 + id.ev + b];
    for (int a = 0; a < degree_; ++a)
      for (int b = 0; b <= degree_; ++b)
        element_dofs_[e * nfe + k++] =
            dof_map_[id.patch][ps.num_u_field + (id.eu + a) * nv1 + id.ev + b];
  }
}

std::span<const DofRef> DivConformingSpace::element_dofs(int element) const {
  const int nfe = functions_per_element();
  return {element_dofs_.data() + static_cast<std::size_t>(element) * nfe,
          static_cast<std::size_t>(nfe)};
}

void DivConformingSpace::evaluate(int element, double s, double t, ElementSample& out) const {
  const ElementId& id = mesh_.element(element);
  const Eigen::Vector4d box = mesh_.box(element);
  const BezierElement<double>& bz = bezier_[element];
  std::array<double, kMaxDegree + 1> bs{}, dbs{}, bt{}, dbt{};
  detail::bernstein(bz.degree_u, s, bs.data(), dbs.data());
  detail::bernstein(bz.degree_v, t, bt.data(), dbt.data());
  Homogeneous4<double> h = Homogeneous4<double>::Zero(), hs = h, ht = h;
  for (int a = 0; a <= bz.degree_u; ++a) {
    Homogeneous4<double> row = Homogeneous4<double>::Zero(), drow = row;
    for (int b = 0; b <= bz.degree_v; ++b) {
      const Homogeneous4<double>& c = bz.net[a * (bz.degree_v + 1) + b];
      row += bt[b] * c;
      drow += dbt[b] * c;
    }
    h += bs[a] * row;
    hs += dbs[a] * row;
    ht += bs[a] * drow;
  }
  const double w = h[3];
  out.point = h.head<3>() / w;
  out.tangent_u = (hs.head<3>() - hs[3] * out.point) / (w * box[2]);
  out.tangent_v = (ht.head<3>() - ht[3] * out.point) / (w * box[3]);
  out.area_element = out.tangent_u.cross(out.tangent_v).norm();
  if (!(out.area_element >= 1e-14))
    throw SingularityError("evaluate: degenerate parametrization on element " +
                           std::to_string(element));
  out.jacobian = out.area_element * box[2] * box[3];

  const int p = degree_;
  const PatchSpace& ps = patch_spaces_[id.patch];
  const double u = box[0] + s * box[2], v = box[1] + t * box[3];
  std::array<double, 2 * (kMaxDegree + 1)> nu_p{}, nv_q{}, nu_q{}, nv_p{};
  detail::basis_derivs(ps.knots[0][0].data(), p, p + id.eu, u, 1, nu_p.data());
  detail::basis_derivs(ps.knots[0][1].data(), p - 1, p - 1 + id.ev, v, 0, nv_q.data());
  detail::basis_derivs(ps.knots[1][0].data(), p - 1, p - 1 + id.eu, u, 0, nu_q.data());
  detail::basis_derivs(ps.knots[1][1].data(), p, p + id.ev, v, 1, nv_p.data());

  const int nfe = functions_per_element();
  out.values.resize(3, nfe);
  out.divs.resize(nfe);
  const double inv_area = 1.0 / out.area_element;
  const Eigen::Vector3d gu = out.tangent_u * inv_area, gv = out.tangent_v * inv_area;
  int k = 0;
  for (int a = 0; a <= p; ++a)
    for (int b = 0; b < p; ++b, ++k) {
      out.values.col(k) = gu * (nu_p[a] * nv_q[b]);
      out.divs[k] = nu_p[p + 1 + a] * nv_q[b] * inv_area;
    }
  for (int a = 0; a < p; ++a)
    for (int b = 0; b <= p; ++b, ++k) {
      out.values.col(k) = gv * (nu_q[a] * nv_p[b]);
      out.divs[k] = nu_q[a] * nv_p[p + 1 + b] * inv_area;
    }
}

int DivConformingSpace::locate(int patch, double u, double v, double& s, double& t) const {
  const int eu = find_span(knots(patch, 0, 0), u) - degree_;
  const int ev = find_span(knots(patch, 1, 1), v) - degree_;
  const int e = mesh_.index(patch, eu, ev);
  const Eigen::Vector4d box = mesh_.box(e);
  s = (u - box[0]) / box[2];
  t = (v - box[1]) / box[3];
  return e;
}

Eigen::Vector3d DivConformingSpace::eval_basis_fn(int k, int patch, double u, double v) const {
  if (k < 0 || k >= num_dofs_) throw ContractError("eval_basis_fn: DOF index out of range");
  double s, t;
  const int e = locate(patch, u, v, s, t);
  ElementSample sample;
  evaluate(e, s, t, sample);
  Eigen::Vector3d value = Eigen::Vector3d::Zero();
  const auto dofs = element_dofs(e);
  for (int l = 0; l < static_cast<int>(dofs.size()); ++l)
    if (dofs[l].global == k) value += dofs[l].sign * sample.values.col(l);
  return value;
}

double DivConformingSpace::eval_div(int k, int patch, double u, double v) const {
  if (k < 0 || k >= num_dofs_) throw ContractError("eval_div: DOF index out of range");
  double s, t;
  const int e = locate(patch, u, v, s, t);
  ElementSample sample;
  evaluate(e, s, t, sample);
  double div = 0;
  const auto dofs = element_dofs(e);
  for (int l = 0; l < static_cast<int>(dofs.size()); ++l)
    if (dofs[l].global == k) div += dofs[l].sign * sample.divs[l];
  return div;
}

void DivConformingSpace::eval_field(const Eigen::VectorXcd& coeffs, int patch, double u, double v,
                                    Eigen::Vector3cd& value, std::complex<double>& div) const {
  if (coeffs.size() != num_dofs_) throw ContractError("eval_field: coefficient length mismatch");
  double s, t;
  const int e = locate(patch, u, v, s, t);
  ElementSample sample;
  evaluate(e, s, t, sample);
  value.setZero();
  div = 0;
  const auto dofs = element_dofs(e);
  for (int l = 0; l < static_cast<int>(dofs.size()); ++l) {
    const std::complex<double> c = coeffs[dofs[l].global] * dofs[l].sign;
    value += c * sample.values.col(l).cast<std::complex<double>>();
    div += c * sample.divs[l];
  }
}

}  // namespace igabem
