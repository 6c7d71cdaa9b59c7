#include "igabem/efie.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "igabem/hash.hpp"
#include "igabem/parallel.hpp"

namespace igabem {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;
using cd = std::complex<double>;

// Quadrature data of one element. Row c * nfe + k of `channels` holds component c of
// phi_k times the quadrature weight and surface measure; rows 3 * nfe + k hold div phi_k
// with the same factor.
struct ElementQuad {
  Eigen::Matrix3Xd points;
  Eigen::MatrixXd channels;
};

ElementQuad element_quad(const DivConformingSpace& space, int e, const QuadratureRule2D& rule) {
  const int nfe = space.functions_per_element();
  const int nq = static_cast<int>(rule.weights.size());
  ElementQuad q;
  q.points.resize(3, nq);
  q.channels.resize(4 * nfe, nq);
  ElementSample s;
  for (int i = 0; i < nq; ++i) {
    space.evaluate(e, rule.nodes[i].x(), rule.nodes[i].y(), s);
    q.points.col(i) = s.point;
    const double w = rule.weights[i] * s.jacobian;
    for (int c = 0; c < 3; ++c) q.channels.block(c * nfe, i, nfe, 1) = s.values.row(c).transpose() * w;
    q.channels.block(3 * nfe, i, nfe, 1) = s.divs * w;
  }
  return q;
}

struct ElementBounds {
  Eigen::Vector3d center;
  double radius = 0;
};

ElementBounds element_bounds(const DivConformingSpace& space, int e) {
  ElementSample s;
  space.evaluate(e, 0.5, 0.5, s);
  ElementBounds b{s.point, 0.0};
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j) {
      space.evaluate(e, i / 4.0, j / 4.0, s);
      b.radius = std::max(b.radius, (s.point - b.center).norm());
    }
  return b;
}

// Separated pair by tensor Gauss: block = sum_c A_c G B_c^T with divergence rows of B
// scaled by -1/kappa^2.
void regular_block(const ElementQuad& qa, const ElementQuad& qb, double kappa, int nfe,
                   Eigen::MatrixXd& re, Eigen::MatrixXd& im) {
  const int na = static_cast<int>(qa.points.cols()), nb = static_cast<int>(qb.points.cols());
  Eigen::MatrixXd gr(na, nb), gi(na, nb);
  for (int j = 0; j < nb; ++j)
    for (int i = 0; i < na; ++i) {
      const double r = (qa.points.col(i) - qb.points.col(j)).norm();
      const double amp = 1.0 / (kFourPi * r);
      gr(i, j) = amp * std::cos(kappa * r);
      gi(i, j) = -amp * std::sin(kappa * r);
    }
  Eigen::MatrixXd bs = qb.channels;
  bs.bottomRows(nfe) *= -1.0 / (kappa * kappa);
  const Eigen::MatrixXd tr = gr * bs.transpose(), ti = gi * bs.transpose();
  re.setZero(nfe, nfe);
  im.setZero(nfe, nfe);
  for (int c = 0; c < 4; ++c) {
    re.noalias() += qa.channels.middleRows(c * nfe, nfe) * tr.middleCols(c * nfe, nfe);
    im.noalias() += qa.channels.middleRows(c * nfe, nfe) * ti.middleCols(c * nfe, nfe);
  }
}

void singular_block(const DivConformingSpace& space, int a, int b, const QuadratureRule4D& rule,
                    const std::array<SquareMap, 2>& maps, double kappa, Eigen::MatrixXd& re,
                    Eigen::MatrixXd& im) {
  const int nfe = space.functions_per_element();
  re.setZero(nfe, nfe);
  im.setZero(nfe, nfe);
  ElementSample sa, sb;
  Eigen::MatrixXd m(nfe, nfe);
  const double inv_k2 = 1.0 / (kappa * kappa);
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const Eigen::Vector4d& n = rule.nodes[q];
    const Eigen::Vector2d xa = maps[0](n[0], n[1]), xb = maps[1](n[2], n[3]);
    space.evaluate(a, xa.x(), xa.y(), sa);
    space.evaluate(b, xb.x(), xb.y(), sb);
    const double r = (sa.point - sb.point).norm();
    const double w = rule.weights[q] * sa.jacobian * sb.jacobian / (kFourPi * r);
    m.noalias() = sa.values.transpose() * sb.values;
    m.noalias() -= inv_k2 * sa.divs * sb.divs.transpose();
    re.noalias() += (w * std::cos(kappa * r)) * m;
    im.noalias() -= (w * std::sin(kappa * r)) * m;
  }
}

struct PairTask {
  int a, b;
  PanelPairClass cls;
  bool near;
};

// Solid angle of the closed surface seen from x, divided by 4 pi: 1 inside, 0 outside.
double winding_number(const DivConformingSpace& space, const Eigen::Vector3d& x, int order) {
  const QuadratureRule2D rule = tensor_gauss(order);
  ElementSample s;
  double total = 0;
  for (int e = 0; e < space.mesh().size(); ++e)
    for (std::size_t i = 0; i < rule.weights.size(); ++i) {
      space.evaluate(e, rule.nodes[i].x(), rule.nodes[i].y(), s);
      const Eigen::Vector3d d = s.point - x;
      const Eigen::Vector3d n = s.tangent_u.cross(s.tangent_v) / s.area_element;
      total += rule.weights[i] * s.jacobian * d.dot(n) / std::pow(d.norm(), 3);
    }
  return total / kFourPi;
}

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
void get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof v);
}

constexpr char kMagic[8] = {'I', 'G', 'A', 'E', 'F', 'I', 'E', '\0'};
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

std::complex<double> greens(const Eigen::Vector3d& x, const Eigen::Vector3d& y, double kappa) {
  const double r = (x - y).norm();
  if (r < 1e-14) throw SingularityError("greens: coincident points; use singular quadrature");
  return std::polar(1.0 / (kFourPi * r), -kappa * r);
}

Eigen::MatrixXcd assemble_matrix(const DivConformingSpace& space, double kappa,
                                 const QuadratureConfig& quad, int threads) {
  if (!(kappa > 0.0)) throw DomainError("assemble_matrix: kappa must be positive");
  const ElementMesh& mesh = space.mesh();
  const int ne = mesh.size();
  const int nfe = space.functions_per_element();

  const QuadratureRule2D regular = tensor_gauss(quad.regular_order);
  const QuadratureRule2D near = tensor_gauss(quad.near_order);
  std::vector<ElementQuad> qr(ne), qn(ne);
  std::vector<ElementBounds> bounds(ne);
  parallel_for(
      ne,
      [&](std::size_t e) {
        qr[e] = element_quad(space, static_cast<int>(e), regular);
        qn[e] = element_quad(space, static_cast<int>(e), near);
        bounds[e] = element_bounds(space, static_cast<int>(e));
      },
      threads);

  const QuadratureRule4D rule_coincident =
      singular_rule(PanelPairClass::Coincident, quad.singular_order);
  const QuadratureRule4D rule_edge = singular_rule(PanelPairClass::SharedEdge, quad.singular_order);
  const QuadratureRule4D rule_vertex =
      singular_rule(PanelPairClass::SharedVertex, quad.singular_order);

  std::vector<PairTask> tasks;
  tasks.reserve(static_cast<std::size_t>(ne) * (ne + 1) / 2);
  for (int a = 0; a < ne; ++a)
    for (int b = a; b < ne; ++b) {
      const PanelPairClass cls = classify_pair(mesh, a, b);
      bool is_near = false;
      if (cls == PanelPairClass::Separated) {
        const double gap =
            (bounds[a].center - bounds[b].center).norm() - bounds[a].radius - bounds[b].radius;
        is_near = gap < quad.near_factor * 2.0 * std::max(bounds[a].radius, bounds[b].radius);
      }
      tasks.push_back({a, b, cls, is_near});
    }

  const int n = space.num_dofs();
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(n, n);
  constexpr std::size_t kChunk = 4096;
  std::vector<Eigen::MatrixXd> block_re(kChunk), block_im(kChunk);
  for (std::size_t start = 0; start < tasks.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, tasks.size() - start);
    parallel_for(
        count,
        [&](std::size_t i) {
          const PairTask& t = tasks[start + i];
          switch (t.cls) {
            case PanelPairClass::Separated:
              if (t.near)
                regular_block(qn[t.a], qn[t.b], kappa, nfe, block_re[i], block_im[i]);
              else
                regular_block(qr[t.a], qr[t.b], kappa, nfe, block_re[i], block_im[i]);
              break;
            case PanelPairClass::Coincident:
              singular_block(space, t.a, t.b, rule_coincident, align_pair(mesh, t.a, t.b, t.cls),
                             kappa, block_re[i], block_im[i]);
              block_re[i] = 0.5 * (block_re[i] + block_re[i].transpose()).eval();
              block_im[i] = 0.5 * (block_im[i] + block_im[i].transpose()).eval();
              break;
            case PanelPairClass::SharedEdge:
              singular_block(space, t.a, t.b, rule_edge, align_pair(mesh, t.a, t.b, t.cls), kappa,
                             block_re[i], block_im[i]);
              break;
            case PanelPairClass::SharedVertex:
              singular_block(space, t.a, t.b, rule_vertex, align_pair(mesh, t.a, t.b, t.cls),
                             kappa, block_re[i], block_im[i]);
              break;
          }
          if (!block_re[i].allFinite() || !block_im[i].allFinite())
            throw NumericalError("assemble_matrix: non-finite entry for element pair (" +
                                 std::to_string(t.a) + ", " + std::to_string(t.b) + "), " +
                                 to_string(t.cls));
        },
        threads);
    for (std::size_t i = 0; i < count; ++i) {
      const PairTask& t = tasks[start + i];
      const auto da = space.element_dofs(t.a), db = space.element_dofs(t.b);
      for (int k = 0; k < nfe; ++k)
        for (int l = 0; l < nfe; ++l) {
          const double sign = da[k].sign * db[l].sign;
          const cd value(sign * block_re[i](k, l), sign * block_im[i](k, l));
          V(da[k].global, db[l].global) += value;
          if (t.a != t.b) V(db[l].global, da[k].global) += value;
        }
    }
  }
  return V;
}

Eigen::VectorXcd assemble_rhs(const DivConformingSpace& space, const ExcitationDipole& dipole,
                              const QuadratureConfig& quad) {
  const double winding = winding_number(space, dipole.position, quad.rhs_order);
  if (std::abs(winding - 1.0) > 1e-3)
    throw DomainError("assemble_rhs: dipole must lie strictly inside the closed surface");
  const QuadratureRule2D rule = tensor_gauss(quad.rhs_order);
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(space.num_dofs());
  ElementSample s;
  for (int e = 0; e < space.mesh().size(); ++e) {
    const auto dofs = space.element_dofs(e);
    for (std::size_t i = 0; i < rule.weights.size(); ++i) {
      space.evaluate(e, rule.nodes[i].x(), rule.nodes[i].y(), s);
      const Eigen::Vector3cd E = dipole_field(s.point, dipole);
      const double w = rule.weights[i] * s.jacobian;
      for (int k = 0; k < static_cast<int>(dofs.size()); ++k) {
        const Eigen::Vector3d& phi = s.values.col(k);
        f[dofs[k].global] += dofs[k].sign * w * (E[0] * phi[0] + E[1] * phi[1] + E[2] * phi[2]);
      }
    }
  }
  return f;
}

FieldEvaluation eval_scattered_field(const DivConformingSpace& space, const Eigen::VectorXcd& j,
                                     std::span<const Eigen::Vector3d> points, double kappa,
                                     const QuadratureConfig& quad) {
  if (j.size() != space.num_dofs()) throw ContractError("eval_scattered_field: coefficient length");
  if (!(kappa > 0.0)) throw DomainError("eval_scattered_field: kappa must be positive");
  const QuadratureRule2D rule = tensor_gauss(quad.field_order);
  std::vector<Eigen::Vector3d> ys;
  std::vector<Eigen::Vector3cd> current;
  std::vector<cd> divergence;
  double max_diameter = 0;
  ElementSample s;
  for (int e = 0; e < space.mesh().size(); ++e) {
    const auto dofs = space.element_dofs(e);
    max_diameter = std::max(max_diameter, 2.0 * element_bounds(space, e).radius);
    for (std::size_t i = 0; i < rule.weights.size(); ++i) {
      space.evaluate(e, rule.nodes[i].x(), rule.nodes[i].y(), s);
      const double w = rule.weights[i] * s.jacobian;
      Eigen::Vector3cd J = Eigen::Vector3cd::Zero();
      cd div = 0;
      for (int k = 0; k < static_cast<int>(dofs.size()); ++k) {
        const cd c = j[dofs[k].global] * dofs[k].sign * w;
        J += c * s.values.col(k).cast<cd>();
        div += c * s.divs[k];
      }
      ys.push_back(s.point);
      current.push_back(J);
      divergence.push_back(div);
    }
  }
  FieldEvaluation out;
  out.values.resize(points.size());
  out.min_distance = std::numeric_limits<double>::infinity();
  const cd jk(0.0, kappa);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Eigen::Vector3d& x = points[p];
    Eigen::Vector3cd a = Eigen::Vector3cd::Zero(), grad_phi = Eigen::Vector3cd::Zero();
    for (std::size_t q = 0; q < ys.size(); ++q) {
      const Eigen::Vector3d d = x - ys[q];
      const double r = d.norm();
      out.min_distance = std::min(out.min_distance, r);
      const cd g = std::polar(1.0 / (kFourPi * r), -kappa * r);
      a += g * current[q];
      grad_phi += (g * (-jk - 1.0 / r) / r * divergence[q]) * d.cast<cd>();
    }
    out.values[p] = -(a + grad_phi / (kappa * kappa));
  }
  out.degraded = out.min_distance < max_diameter;
  return out;
}

double residual_loss(const Eigen::MatrixXcd& V, const Eigen::VectorXcd& f,
                     const Eigen::VectorXcd& j) {
  if (V.rows() != f.size() || V.cols() != j.size())
    throw ContractError("residual_loss: dimension mismatch");
  return (V * j + f).squaredNorm() / static_cast<double>(f.size());
}

EfieSystem assemble_system(const DivConformingSpace& space, const ExcitationDipole& dipole,
                           const QuadratureConfig& quad, int threads) {
  EfieSystem sys;
  sys.kappa = dipole.kappa;
  sys.matrix = assemble_matrix(space, dipole.kappa, quad, threads);
  sys.rhs = assemble_rhs(space, dipole, quad);
  sys.key = system_key(space.geometry(), space.degree(), dipole, quad);
  return sys;
}

std::uint64_t system_key(const MultipatchSurface& refined_geometry, int degree,
                         const ExcitationDipole& dipole, const QuadratureConfig& quad) {
  Fnv1a h;
  h.value(static_cast<std::int64_t>(geometry_hash(refined_geometry)));
  h.value(std::int64_t{degree});
  h.value(dipole.kappa);
  h.values(std::span<const double>(dipole.position.data(), 3));
  h.values(std::span<const double>(dipole.moment.data(), 3));
  for (int o : {quad.regular_order, quad.near_order, quad.singular_order, quad.rhs_order})
    h.value(std::int64_t{o});
  h.value(quad.near_factor);
  return h.digest();
}

void write_system(const std::filesystem::path& path, const EfieSystem& system) {
  static_assert(std::endian::native == std::endian::little, "cache format is little-endian");
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw IoError("cannot write " + tmp.string());
    os.write(kMagic, sizeof kMagic);
    put(os, kCacheVersion);
    put(os, std::uint32_t{0});
    put(os, static_cast<std::uint64_t>(system.rhs.size()));
    put(os, system.kappa);
    put(os, system.key);
    os.write(reinterpret_cast<const char*>(system.matrix.data()),
             static_cast<std::streamsize>(system.matrix.size() * sizeof(cd)));
    os.write(reinterpret_cast<const char*>(system.rhs.data()),
             static_cast<std::streamsize>(system.rhs.size() * sizeof(cd)));
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

EfieSystem read_system(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw IoError(path.string() + ": not an EFIE system cache");
  std::uint32_t version = 0, reserved = 0;
  std::uint64_t k = 0;
  EfieSystem sys;
  get(is, version);
  get(is, reserved);
  get(is, k);
  get(is, sys.kappa);
  get(is, sys.key);
  if (!is || version != kCacheVersion) throw IoError(path.string() + ": unsupported cache version");
  if (k > (1u << 16)) throw IoError(path.string() + ": implausible system size");
  const auto n = static_cast<Eigen::Index>(k);
  sys.matrix.resize(n, n);
  sys.rhs.resize(n);
  is.read(reinterpret_cast<char*>(sys.matrix.data()), static_cast<std::streamsize>(n * n * sizeof(cd)));
  is.read(reinterpret_cast<char*>(sys.rhs.data()), static_cast<std::streamsize>(n * sizeof(cd)));
  if (!is) throw IoError(path.string() + ": truncated cache file");
  return sys;
}

std::optional<EfieSystem> read_system_if_matches(const std::filesystem::path& path,
                                                 std::uint64_t key) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    EfieSystem sys = read_system(path);
    if (sys.key != key) return std::nullopt;
    return sys;
  } catch (const IoError&) {
    return std::nullopt;
  }
}

}  // namespace igabem
