#include "igabem/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "igabem/hash.hpp"

namespace igabem {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view s) {
  const std::string text(trim(s));
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
    throw ConfigError("config: " + std::string(key) + ": expected a number, got '" + text + "'");
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view s) {
  s = trim(s);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("config: " + std::string(key) + ": expected an integer, got '" +
                      std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    parts.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

Eigen::Vector3d parse_vec3(std::string_view key, std::string_view s) {
  const auto parts = split(s);
  if (parts.size() != 3) throw ConfigError("config: " + std::string(key) + ": expected x,y,z");
  return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(const Eigen::Vector3d& v) { return fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]); }

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view, std::string_view)> set;
  bool numeric = true;  // participates in config_hash
};

template <typename T>
Field int_field(const char* key, T RunConfig::*member) {
  return {key, [member](const RunConfig& c) { return std::to_string(c.*member); },
          [member](RunConfig& c, std::string_view k, std::string_view v) {
            c.*member = parse_int<T>(k, v);
          }};
}

Field real_field(const char* key, double RunConfig::*member) {
  return {key, [member](const RunConfig& c) { return fmt(c.*member); },
          [member](RunConfig& c, std::string_view k, std::string_view v) {
            c.*member = parse_double(k, v);
          }};
}

#define IGABEM_REAL(key, expr)                                                           \
  Field {                                                                                \
    key, [](const RunConfig& c) { return fmt(c.expr); },                                 \
        [](RunConfig& c, std::string_view k, std::string_view v) { c.expr = parse_double(k, v); } \
  }
#define IGABEM_INT(key, type, expr)                                                       \
  Field {                                                                                 \
    key, [](const RunConfig& c) { return std::to_string(c.expr); },                       \
        [](RunConfig& c, std::string_view k, std::string_view v) { c.expr = parse_int<type>(k, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back(IGABEM_REAL("efie.kappa", dipole.kappa));
    t.push_back({"dipole.position", [](const RunConfig& c) { return fmt(c.dipole.position); },
                 [](RunConfig& c, std::string_view k, std::string_view v) {
                   c.dipole.position = parse_vec3(k, v);
                 }});
    t.push_back({"dipole.moment", [](const RunConfig& c) { return fmt(c.dipole.moment); },
                 [](RunConfig& c, std::string_view k, std::string_view v) {
                   c.dipole.moment = parse_vec3(k, v);
                 }});
    t.push_back(int_field("space.degree", &RunConfig::degree));
    t.push_back(int_field("mesh.refinement", &RunConfig::refinement));
    t.push_back(IGABEM_INT("quadrature.regular_order", int, quadrature.regular_order));
    t.push_back(IGABEM_INT("quadrature.near_order", int, quadrature.near_order));
    t.push_back(IGABEM_INT("quadrature.singular_order", int, quadrature.singular_order));
    t.push_back(IGABEM_INT("quadrature.rhs_order", int, quadrature.rhs_order));
    t.push_back(IGABEM_INT("quadrature.field_order", int, quadrature.field_order));
    t.push_back(IGABEM_REAL("quadrature.near_factor", quadrature.near_factor));
    t.push_back({"solver.kind",
                 [](const RunConfig& c) { return std::string(c.solver == SolverKind::Lu ? "lu" : "gmres"); },
                 [](RunConfig& c, std::string_view k, std::string_view v) {
                   v = trim(v);
                   if (v == "lu")
                     c.solver = SolverKind::Lu;
                   else if (v == "gmres")
                     c.solver = SolverKind::Gmres;
                   else
                     throw ConfigError("config: " + std::string(k) + ": expected lu or gmres");
                 }});
    t.push_back(IGABEM_REAL("solver.tol", gmres.tol));
    t.push_back(IGABEM_INT("solver.restart", int, gmres.restart));
    t.push_back(IGABEM_INT("solver.max_iter", int, gmres.max_iter));
    t.push_back({"network.hidden",
                 [](const RunConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.hidden.size(); ++i)
                     s += (i ? "," : "") + std::to_string(c.hidden[i]);
                   return s;
                 },
                 [](RunConfig& c, std::string_view k, std::string_view v) {
                   std::vector<int> sizes;
                   for (auto part : split(v)) sizes.push_back(parse_int<int>(k, part));
                   c.hidden = sizes;
                 }});
    t.push_back(int_field("network.seed", &RunConfig::network_seed));
    t.push_back(IGABEM_REAL("optimizer.lr", adam.lr));
    t.push_back(IGABEM_REAL("optimizer.beta1", adam.beta1));
    t.push_back(IGABEM_REAL("optimizer.beta2", adam.beta2));
    t.push_back(IGABEM_REAL("optimizer.eps", adam.eps));
    t.push_back(real_field("optimizer.lr_decay", &RunConfig::lr_decay));
    t.push_back(real_field("train.stop_epsilon", &RunConfig::stop_epsilon));
    t.push_back(int_field("train.max_steps", &RunConfig::max_steps));
    t.push_back(int_field("train.checkpoint_every", &RunConfig::checkpoint_every));
    t.push_back(int_field("train.log_every", &RunConfig::log_every));
    t.push_back(int_field("dataset.size", &RunConfig::dataset_size));
    t.push_back(real_field("dataset.r_min", &RunConfig::r_min));
    t.push_back(real_field("dataset.r_max", &RunConfig::r_max));
    t.push_back(int_field("dataset.seed", &RunConfig::dataset_seed));
    t.push_back(int_field("eval.points", &RunConfig::eval_points));
    t.push_back(real_field("eval.radius", &RunConfig::eval_radius));
    t.push_back(int_field("eval.seed", &RunConfig::eval_seed));
    t.push_back({"paths.cache_dir", [](const RunConfig& c) { return c.cache_dir; },
                 [](RunConfig& c, std::string_view, std::string_view v) { c.cache_dir = trim(v); },
                 false});
    t.push_back({"paths.output_dir", [](const RunConfig& c) { return c.output_dir; },
                 [](RunConfig& c, std::string_view, std::string_view v) { c.output_dir = trim(v); },
                 false});
    Field threads = int_field("threads", &RunConfig::threads);
    threads.numeric = false;
    t.push_back(threads);
    return t;
  }();
  return table;
}

#undef IGABEM_REAL
#undef IGABEM_INT

}  // namespace

void set_value(RunConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const Field& f : fields())
    if (key == f.key) {
      f.set(config, key, value);
      return;
    }
  throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("config: expected key=value, got '" + std::string(assignment) + "'");
  set_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view s = trim(std::string_view(line).substr(0, line.find('#')));
    if (s.empty()) continue;
    try {
      apply_override(base, s);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

std::vector<std::string> config_lines(const RunConfig& config) {
  std::vector<std::string> lines;
  for (const Field& f : fields()) lines.push_back(std::string(f.key) + " = " + f.get(config));
  return lines;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.emplace_back(f.key);
  return keys;
}

std::uint64_t config_hash(const RunConfig& config) {
  Fnv1a h;
  for (const Field& f : fields())
    if (f.numeric) {
      h.text(f.key);
      h.text("=");
      h.text(f.get(config));
      h.text("\n");
    }
  return h.digest();
}

std::vector<std::string> provenance_lines(const RunConfig& config, std::string_view command) {
  std::vector<std::string> lines{"igabem " + std::string(command),
                                 "config_hash = " + hex(config_hash(config))};
  for (auto& l : config_lines(config)) lines.push_back(l);
  return lines;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace igabem
