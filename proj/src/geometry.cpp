#include "igabem/geometry.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "igabem/hash.hpp"
#include "igabem/quadrature.hpp"

namespace igabem {

namespace {

using Grid3 = std::array<std::array<double, 3>, 3>;
using Grid5 = std::array<std::array<double, 5>, 5>;

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Bernstein coefficients of the product of two biquadratic polynomials.
Grid5 bernstein_product(const Grid3& f, const Grid3& g) {
  Grid5 h{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          h[i + k][j + l] += binom(2, i) * binom(2, k) / binom(4, i + k) * binom(2, j) *
                             binom(2, l) / binom(4, j + l) * f[i][j] * g[k][l];
  return h;
}

// +z face: planar biquadratic patch in the stereographic chart of the south pole.
Patch sphere_top_face() {
  const double s3 = std::sqrt(3.0);
  const double corner = (s3 - 1.0) / 2.0;                    // chart image of cube corners
  const double mid = 2.0 * s3 - 3.0;                         // tangent intersection of edge arcs
  const double arc_weight = (std::sqrt(6.0) + std::sqrt(2.0)) / 4.0;  // cos 15 deg
  const double center_weight = std::sqrt(2.0);
  Grid3 a{}, b{}, w{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int sx = i - 1, sy = j - 1;
      double px = 0, py = 0, wt = 1;
      if (sx != 0 && sy != 0) {
        px = sx * corner;
        py = sy * corner;
      } else if (sx == 0 && sy == 0) {
        wt = center_weight;
      } else {
        px = sx * mid;
        py = sy * mid;
        wt = arc_weight;
      }
      a[i][j] = px * wt;
      b[i][j] = py * wt;
      w[i][j] = wt;
    }
  }
  // inverse stereographic projection (a, b) -> (2a, 2b, 1 - a^2 - b^2) / (1 + a^2 + b^2)
  const Grid5 aw = bernstein_product(a, w), bw = bernstein_product(b, w);
  const Grid5 ww = bernstein_product(w, w), aa = bernstein_product(a, a),
              bb = bernstein_product(b, b);
  Patch patch;
  patch.knots_u = open_uniform_knots<double>(4, 1);
  patch.knots_v = open_uniform_knots<double>(4, 1);
  patch.control_points.resize(25);
  patch.weights.resize(25);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double hw = ww[i][j] + aa[i][j] + bb[i][j];
      const Eigen::Vector3d hx(2 * aw[i][j], 2 * bw[i][j], ww[i][j] - aa[i][j] - bb[i][j]);
      patch.control_points[patch.index(i, j)] = hx / hw;
      patch.weights[patch.index(i, j)] = hw;
    }
  }
  return patch;
}

Patch rotated(const Patch& p, const Eigen::Matrix3d& r) {
  Patch out = p;
  for (auto& c : out.control_points) c = r * c;
  return out;
}

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

}  // namespace

std::string to_string(Edge e) {
  switch (e) {
    case Edge::UMin: return "u0";
    case Edge::UMax: return "u1";
    case Edge::VMin: return "v0";
    case Edge::VMax: return "v1";
  }
  return "?";
}

Edge edge_from_string(const std::string& s) {
  for (Edge e : kAllEdges)
    if (to_string(e) == s) return e;
  throw ContractError("unknown edge name '" + s + "'");
}

Eigen::Vector2d edge_parameter(Edge e, double t) {
  switch (e) {
    case Edge::UMin: return {0.0, t};
    case Edge::UMax: return {1.0, t};
    case Edge::VMin: return {t, 0.0};
    case Edge::VMax: return {t, 1.0};
  }
  return {0.0, 0.0};
}

MultipatchSurface make_unit_sphere() {
  const Patch top = sphere_top_face();
  std::vector<Eigen::Matrix3d> rotations(6);
  rotations[0] << 0, 0, 1, 0, 1, 0, -1, 0, 0;   // +x
  rotations[1] << 0, 0, -1, 0, 1, 0, 1, 0, 0;   // -x
  rotations[2] << 1, 0, 0, 0, 0, 1, 0, -1, 0;   // +y
  rotations[3] << 1, 0, 0, 0, 0, -1, 0, 1, 0;   // -y
  rotations[4].setIdentity();                    // +z
  rotations[5] << 1, 0, 0, 0, -1, 0, 0, 0, -1;  // -z
  MultipatchSurface s;
  for (const auto& r : rotations) s.patches.push_back(rotated(top, r));
  s.interfaces = build_interfaces(s.patches);
  return s;
}

MultipatchSurface make_spheroid(double r_semi) {
  if (!(r_semi > 0.0) || !(r_semi <= 1.0))
    throw DomainError("make_spheroid: r_semi must lie in (0, 1]");
  MultipatchSurface s = make_unit_sphere();
  for (auto& p : s.patches)
    for (auto& c : p.control_points) c.z() *= r_semi;
  return s;
}

std::vector<Interface> build_interfaces(std::span<const Patch> patches, double tol) {
  struct EdgeSample {
    int patch;
    Edge edge;
    Eigen::Vector3d p0, pm, p1;
  };
  std::vector<EdgeSample> edges;
  for (int i = 0; i < static_cast<int>(patches.size()); ++i) {
    for (Edge e : kAllEdges) {
      auto at = [&](double t) {
        const Eigen::Vector2d uv = edge_parameter(e, t);
        return eval_surface(patches[i], uv.x(), uv.y());
      };
      edges.push_back({i, e, at(0.0), at(0.5), at(1.0)});
    }
  }
  std::vector<int> partner(edges.size(), -1);
  std::vector<Interface> result;
  for (std::size_t a = 0; a < edges.size(); ++a) {
    int found = 0;
    for (std::size_t b = 0; b < edges.size(); ++b) {
      if (a == b) continue;
      const EdgeSample &ea = edges[a], &eb = edges[b];
      if ((ea.pm - eb.pm).norm() > tol) continue;
      const bool same = (ea.p0 - eb.p0).norm() <= tol && (ea.p1 - eb.p1).norm() <= tol;
      const bool flip = (ea.p0 - eb.p1).norm() <= tol && (ea.p1 - eb.p0).norm() <= tol;
      if (!same && !flip) continue;
      ++found;
      if (a < b) {
        partner[a] = static_cast<int>(b);
        result.push_back({ea.patch, ea.edge, eb.patch, eb.edge, flip && !same});
      } else {
        partner[a] = static_cast<int>(b);
      }
    }
    if (found == 0)
      throw TopologyError("build_interfaces: edge " + to_string(edges[a].edge) + " of patch " +
                          std::to_string(edges[a].patch) + " has no partner (gap)");
    if (found > 1)
      throw TopologyError("build_interfaces: edge " + to_string(edges[a].edge) + " of patch " +
                          std::to_string(edges[a].patch) + " is shared by more than two patches");
  }
  return result;
}

double max_interface_mismatch(const MultipatchSurface& surface, int samples) {
  double worst = 0;
  for (const Interface& it : surface.interfaces) {
    for (int k = 0; k < samples; ++k) {
      const double t = static_cast<double>(k) / (samples - 1);
      const Eigen::Vector2d ua = edge_parameter(it.edge_a, t);
      const Eigen::Vector2d ub = edge_parameter(it.edge_b, it.orientation_flip ? 1.0 - t : t);
      const Eigen::Vector3d xa = eval_surface(surface.patches[it.patch_a], ua.x(), ua.y());
      const Eigen::Vector3d xb = eval_surface(surface.patches[it.patch_b], ub.x(), ub.y());
      worst = std::max(worst, (xa - xb).norm());
    }
  }
  return worst;
}

int num_params(const MultipatchSurface& surface) {
  int n = 0;
  for (const auto& p : surface.patches) n += 4 * p.num_u() * p.num_v();
  return n;
}

GeometryParams to_params(const MultipatchSurface& surface) {
  GeometryParams g(num_params(surface));
  int o = 0;
  for (const auto& p : surface.patches) {
    for (const auto& c : p.control_points) {
      g.segment<3>(o) = c;
      o += 3;
    }
    for (double w : p.weights) g[o++] = w;
  }
  return g;
}

MultipatchSurface from_params(const MultipatchSurface& tmpl, const GeometryParams& params) {
  if (params.size() != num_params(tmpl))
    throw ContractError("from_params: expected " + std::to_string(num_params(tmpl)) +
                        " parameters, got " + std::to_string(params.size()));
  MultipatchSurface s = tmpl;
  int o = 0;
  for (auto& p : s.patches) {
    for (auto& c : p.control_points) {
      c = params.segment<3>(o);
      o += 3;
    }
    for (double& w : p.weights) w = params[o++];
    p.validate();
  }
  return s;
}

MultipatchSurface refine(const MultipatchSurface& surface, int levels) {
  MultipatchSurface s = surface;
  for (auto& p : s.patches) p = refine_uniform(p, levels);
  return s;
}

double surface_area(const MultipatchSurface& surface, int order) {
  const Rule1D g = gauss_legendre_1d(order);
  double area = 0;
  for (const auto& p : surface.patches) {
    const auto bu = p.knots_u.breakpoints(), bv = p.knots_v.breakpoints();
    for (std::size_t i = 0; i + 1 < bu.size(); ++i) {
      for (std::size_t j = 0; j + 1 < bv.size(); ++j) {
        const double hu = bu[i + 1] - bu[i], hv = bv[j + 1] - bv[j];
        for (std::size_t a = 0; a < g.nodes.size(); ++a)
          for (std::size_t b = 0; b < g.nodes.size(); ++b) {
            const auto f = eval_surface_jacobian(p, bu[i] + hu * g.nodes[a], bv[j] + hv * g.nodes[b]);
            area += f.area_element * hu * hv * g.weights[a] * g.weights[b];
          }
      }
    }
  }
  return area;
}

std::uint64_t geometry_hash(const MultipatchSurface& surface) {
  Fnv1a h;
  for (const auto& p : surface.patches) {
    h.value(std::int64_t{p.knots_u.degree()});
    h.values(p.knots_u.knots());
    h.value(std::int64_t{p.knots_v.degree()});
    h.values(p.knots_v.knots());
    for (const auto& c : p.control_points) h.values(std::span<const double>(c.data(), 3));
    h.values(p.weights);
  }
  return h.digest();
}

double bounding_radius(const MultipatchSurface& surface) {
  double r = 0;
  for (const auto& p : surface.patches)
    for (const auto& c : p.control_points) r = std::max(r, c.norm());
  return r;
}

std::string geometry_to_json(const MultipatchSurface& surface) {
  std::ostringstream os;
  auto list = [&](const std::vector<double>& xs) {
    os << '[';
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? ", " : "") << fmt_real(xs[i]);
    os << ']';
  };
  os << "{\n  \"patches\": [\n";
  for (std::size_t k = 0; k < surface.patches.size(); ++k) {
    const Patch& p = surface.patches[k];
    os << "    {\n      \"degree_u\": " << p.knots_u.degree()
       << ",\n      \"degree_v\": " << p.knots_v.degree() << ",\n      \"knots_u\": ";
    list(p.knots_u.knots());
    os << ",\n      \"knots_v\": ";
    list(p.knots_v.knots());
    os << ",\n      \"control_points\": [";
    for (std::size_t i = 0; i < p.control_points.size(); ++i) {
      const auto& c = p.control_points[i];
      os << (i ? ",\n        " : "\n        ") << '[' << fmt_real(c.x()) << ", "
         << fmt_real(c.y()) << ", " << fmt_real(c.z()) << ']';
    }
    os << "\n      ],\n      \"weights\": ";
    list(p.weights);
    os << "\n    }" << (k + 1 < surface.patches.size() ? "," : "") << '\n';
  }
  os << "  ],\n  \"interfaces\": [";
  for (std::size_t k = 0; k < surface.interfaces.size(); ++k) {
    const Interface& it = surface.interfaces[k];
    os << (k ? ",\n    " : "\n    ") << "{\"patch_a\": " << it.patch_a << ", \"edge_a\": \""
       << to_string(it.edge_a) << "\", \"patch_b\": " << it.patch_b << ", \"edge_b\": \""
       << to_string(it.edge_b) << "\", \"orientation_flip\": "
       << (it.orientation_flip ? "true" : "false") << '}';
  }
  os << "\n  ]\n}\n";
  return os.str();
}

MultipatchSurface geometry_from_json(const std::string& text) {
  MultipatchSurface s;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& jp : j.at("patches")) {
      Patch p;
      p.knots_u = KnotVector<double>(jp.at("knots_u").get<std::vector<double>>(),
                                     jp.at("degree_u").get<int>());
      p.knots_v = KnotVector<double>(jp.at("knots_v").get<std::vector<double>>(),
                                     jp.at("degree_v").get<int>());
      for (const auto& c : jp.at("control_points")) {
        const auto xyz = c.get<std::vector<double>>();
        if (xyz.size() != 3) throw ContractError("control point must have 3 coordinates");
        p.control_points.emplace_back(xyz[0], xyz[1], xyz[2]);
      }
      p.weights = jp.at("weights").get<std::vector<double>>();
      p.validate();
      s.patches.push_back(std::move(p));
    }
    if (j.contains("interfaces") && !j.at("interfaces").empty()) {
      for (const auto& ji : j.at("interfaces")) {
        s.interfaces.push_back({ji.at("patch_a").get<int>(),
                                edge_from_string(ji.at("edge_a").get<std::string>()),
                                ji.at("patch_b").get<int>(),
                                edge_from_string(ji.at("edge_b").get<std::string>()),
                                ji.at("orientation_flip").get<bool>()});
      }
    } else {
      s.interfaces = build_interfaces(s.patches);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("geometry JSON: ") + e.what());
  }
  return s;
}

void write_geometry(const std::filesystem::path& path, const MultipatchSurface& surface) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << geometry_to_json(surface);
  if (!out) throw IoError("write failed for " + path.string());
}

MultipatchSurface read_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return geometry_from_json(ss.str());
}

}  // namespace igabem
