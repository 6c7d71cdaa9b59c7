#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "igabem/config.hpp"
#include "igabem/efie.hpp"
#include "igabem/linalg.hpp"
#include "igabem/parallel.hpp"
#include "igabem/training.hpp"

using namespace igabem;
namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

struct GlobalOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  int threads = -1;
  std::string cache_dir;
  std::string output_dir;
};

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg;
  if (!g.config_file.empty()) cfg = load_config(g.config_file);
  for (const auto& o : g.overrides) apply_override(cfg, o);
  if (g.threads >= 0) cfg.threads = g.threads;
  if (!g.cache_dir.empty()) cfg.cache_dir = g.cache_dir;
  if (!g.output_dir.empty()) cfg.output_dir = g.output_dir;
  set_default_threads(cfg.threads);
  return cfg;
}

Discretization discretization(const RunConfig& cfg) {
  return {cfg.degree, cfg.refinement, cfg.dipole, cfg.quadrature};
}

fs::path output_path(const RunConfig& cfg, const std::string& explicit_path, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  fs::create_directories(cfg.output_dir);
  return fs::path(cfg.output_dir) / name;
}

Eigen::VectorXcd solve(const RunConfig& cfg, const EfieSystem& sys, int* iterations = nullptr) {
  if (cfg.solver == SolverKind::Lu) return lu_solve(sys.matrix, -sys.rhs);
  const GmresResult r = gmres(sys.matrix, -sys.rhs, cfg.gmres);
  if (iterations) *iterations = r.iterations;
  return r.x;
}

EfieSystem cached_system(const RunConfig& cfg, const DivConformingSpace& space) {
  const std::uint64_t key =
      system_key(space.geometry(), cfg.degree, cfg.dipole, cfg.quadrature);
  const fs::path file = cfg.cache_dir.empty() ? fs::path() : system_cache_path(cfg.cache_dir, key);
  if (!file.empty())
    if (auto sys = read_system_if_matches(file, key)) return std::move(*sys);
  EfieSystem sys = assemble_system(space, cfg.dipole, cfg.quadrature, cfg.threads);
  if (!file.empty()) {
    fs::create_directories(cfg.cache_dir);
    write_system(file, sys);
  }
  return sys;
}

struct SolveReport {
  int dofs = 0;
  double delta_max = 0;
  double residual = 0;
  bool degraded = false;
  Eigen::VectorXcd j;
};

SolveReport solve_geometry(const RunConfig& cfg, const MultipatchSurface& coarse) {
  const DivConformingSpace space(refine(coarse, cfg.refinement), cfg.degree);
  const EfieSystem sys = cached_system(cfg, space);
  SolveReport rep;
  rep.dofs = space.num_dofs();
  rep.j = solve(cfg, sys);
  rep.residual = (sys.matrix * rep.j + sys.rhs).norm() / sys.rhs.norm();
  const EvalPointSet pts =
      sample_eval_points(space.geometry(), cfg.eval_points, cfg.eval_seed, cfg.eval_radius);
  std::vector<Eigen::Vector3cd> ref;
  for (const auto& x : pts.points) ref.push_back(dipole_field(x, cfg.dipole));
  const FieldEvaluation field =
      eval_scattered_field(space, rep.j, pts.points, cfg.dipole.kappa, cfg.quadrature);
  rep.degraded = field.degraded;
  rep.delta_max = max_pointwise_error(ref, field.values);
  return rep;
}

int cmd_geometry(const RunConfig& cfg, const std::string& kind, double r_semi,
                 const std::string& out) {
  MultipatchSurface s;
  if (kind == "sphere")
    s = make_unit_sphere();
  else if (kind == "spheroid")
    s = make_spheroid(r_semi);
  else
    throw CLI::ValidationError("geometry", "unknown kind '" + kind + "' (sphere or spheroid)");
  const fs::path path = output_path(cfg, out, (kind + ".json").c_str());
  write_geometry(path, s);
  std::printf("wrote %s (%zu patches, %d parameters)\n", path.c_str(), s.patches.size(),
              num_params(s));
  return kOk;
}

int cmd_solve(const RunConfig& cfg, const std::string& geometry_file, const std::string& out) {
  const MultipatchSurface coarse = read_geometry(geometry_file);
  const SolveReport rep = solve_geometry(cfg, coarse);
  nlohmann::ordered_json doc;
  doc["provenance"] = provenance_lines(cfg, "solve");
  doc["geometry"] = geometry_file;
  doc["num_dofs"] = rep.dofs;
  doc["solver"] = cfg.solver == SolverKind::Lu ? "lu" : "gmres";
  doc["relative_residual"] = rep.residual;
  doc["delta_max"] = rep.delta_max;
  auto& coeffs = doc["coefficients"] = nlohmann::ordered_json::array();
  for (Eigen::Index k = 0; k < rep.j.size(); ++k)
    coeffs.push_back({rep.j[k].real(), rep.j[k].imag()});
  const fs::path path = output_path(cfg, out, "solution.json");
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << doc.dump(2) << '\n';
  std::printf("dofs %d  relative residual %.3e  delta_max %.6e\n", rep.dofs, rep.residual,
              rep.delta_max);
  if (rep.degraded)
    std::fprintf(stderr, "warning: evaluation points closer than one element diameter\n");
  return kOk;
}

int cmd_convergence(RunConfig cfg, int first, int last, const std::string& out) {
  if (first < 0 || last < first) throw CLI::ValidationError("convergence", "bad level range");
  const fs::path path = output_path(cfg, out, "convergence.csv");
  std::vector<double> logh, loge;
  std::vector<std::string> rows;
  const RunConfig base = cfg;
  for (int level = first; level <= last; ++level) {
    cfg.refinement = level;
    const SolveReport rep = solve_geometry(cfg, make_unit_sphere());
    const double h = std::ldexp(1.0, -level);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g", level, rep.dofs, h, rep.delta_max);
    rows.emplace_back(buf);
    std::printf("level %d  dofs %d  h %.4f  delta_max %.6e\n", level, rep.dofs, h, rep.delta_max);
    logh.push_back(std::log(h));
    loge.push_back(std::log(rep.delta_max));
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  for (const auto& l : provenance_lines(base, "convergence")) os << "# " << l << '\n';
  os << "level,dofs,h,delta_max\n";
  for (const auto& r : rows) os << r << '\n';
  if (logh.size() >= 2) {
    const double n = static_cast<double>(logh.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < logh.size(); ++i) {
      sx += logh[i];
      sy += loge[i];
      sxx += logh[i] * logh[i];
      sxy += logh[i] * loge[i];
    }
    std::printf("fitted slope %.3f\n", (n * sxy - sx * sy) / (n * sxx - sx * sx));
  }
  return kOk;
}

Dataset make_dataset(const RunConfig& cfg, bool sphere_only) {
  if (!sphere_only) return generate_dataset(cfg.dataset_size, cfg.r_min, cfg.r_max, cfg.dataset_seed);
  Dataset ds;
  ds.r_min = ds.r_max = 1.0;
  GeometrySample s;
  s.train = true;
  s.params = to_params(make_unit_sphere());
  ds.items.push_back(s);
  return ds;
}

TrainOptions train_options(const RunConfig& cfg, const fs::path& checkpoint) {
  TrainOptions o;
  o.hidden = cfg.hidden;
  o.seed = cfg.network_seed;
  o.adam = cfg.adam;
  o.lr_decay = cfg.lr_decay;
  o.stop_epsilon = cfg.stop_epsilon;
  o.max_steps = cfg.max_steps;
  o.checkpoint_every = cfg.checkpoint_every;
  o.log_every = cfg.log_every;
  o.checkpoint_path = checkpoint;
  o.threads = cfg.threads;
  return o;
}

int cmd_train(const RunConfig& cfg, bool sphere_only, const std::string& model_out) {
  const Dataset ds = make_dataset(cfg, sphere_only);
  const Discretization disc = discretization(cfg);
  PrecomputeStats stats;
  const auto systems = precompute_systems(ds, disc, cfg.cache_dir, cfg.threads, &stats);
  std::printf("systems: %d assembled, %d from cache\n", stats.assembled, stats.reused);
  write_manifest(output_path(cfg, "", "manifest.json"), ds, disc, cfg.cache_dir,
                 hex(config_hash(cfg)));
  const auto terms = make_loss_terms(ds, systems, true);
  const fs::path model_path = output_path(cfg, model_out, "model.bin");
  try {
    const TrainResult res = train(terms, train_options(cfg, model_path));
    write_training_log(output_path(cfg, "", "training_log.csv"), res.log,
                       provenance_lines(cfg, sphere_only ? "train --sphere-only" : "train"));
    std::printf("%s after %lld steps, loss %.3e\n", res.converged ? "converged" : "stopped",
                static_cast<long long>(res.steps), res.final_loss);
    return kOk;
  } catch (const TrainingDiverged& e) {
    std::fprintf(stderr, "%s; last checkpoint written to %s\n", e.what(), model_path.c_str());
    return kNumerical;
  }
}

int cmd_evaluate(const RunConfig& cfg, bool sphere_only, const std::string& model_file,
                 const std::string& out) {
  const MlpModel model = read_model(model_file.empty() ? output_path(cfg, "", "model.bin")
                                                       : fs::path(model_file));
  const Dataset ds = make_dataset(cfg, sphere_only);
  const Discretization disc = discretization(cfg);
  const auto systems = precompute_systems(ds, disc, cfg.cache_dir, cfg.threads);
  const auto rows = evaluate(model, ds, systems, disc, {cfg.eval_points, cfg.eval_seed, cfg.eval_radius});
  write_evaluation_csv(output_path(cfg, out, "evaluation.csv"), rows,
                       provenance_lines(cfg, "evaluate"));

  double lo[2] = {INFINITY, INFINITY}, hi[2] = {0, 0};
  for (const auto& r : rows) {
    lo[r.train] = std::min(lo[r.train], r.loss);
    hi[r.train] = std::max(hi[r.train], r.loss);
    if (r.delta_max >= 0)
      std::printf("sphere: delta_max network %.6e, direct %.6e\n", r.delta_max, r.delta_max_direct);
  }
  if (hi[1] > 0) std::printf("train losses [%.3e, %.3e]\n", lo[1], hi[1]);
  if (hi[0] > 0) std::printf("test losses  [%.3e, %.3e]\n", lo[0], hi[0]);

  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& s : ds.items) (void)forward(model, s.params);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::printf("prediction latency %.4f ms per geometry\n", ms / static_cast<double>(ds.items.size()));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isogeometric EFIE solver and operator-network training"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config_file, "Config file with 'key = value' lines");
  app.add_option("--set", g.overrides, "Override a config key: --set efie.kappa=2");
  app.add_option("--threads", g.threads, "Worker threads (0: all cores)");
  app.add_option("--cache-dir", g.cache_dir, "Directory for assembled system caches");
  app.add_option("--output-dir", g.output_dir, "Directory for default output files");
  std::string solver;
  app.add_option("--solver", solver, "lu or gmres")->check(CLI::IsMember({"lu", "gmres"}));
  int refinement = -1;
  app.add_option("--refinement", refinement, "Uniform refinement levels of the geometry");

  auto* geo = app.add_subcommand("geometry", "Write a geometry JSON file");
  std::string kind, out;
  std::string r_semi_text = "1";
  geo->add_option("kind", kind, "sphere or spheroid")->required();
  geo->add_option("--r-semi", r_semi_text, "Semi-axis along z for spheroids");
  geo->add_option("-o,--output", out, "Output file");

  auto* sol = app.add_subcommand("solve", "Assemble and solve one geometry");
  std::string geometry_file;
  sol->add_option("geometry", geometry_file, "Geometry JSON file")->required();
  sol->add_option("-o,--output", out, "Solution JSON file");

  auto* conv = app.add_subcommand("convergence", "Refinement study on the unit sphere");
  int first = 1, last = 3;
  conv->add_option("--first", first, "First refinement level");
  conv->add_option("--last", last, "Last refinement level");
  conv->add_option("-o,--output", out, "CSV file");

  bool sphere_only = false;
  std::string model_file;
  auto* tr = app.add_subcommand("train", "Train the operator network on the spheroid dataset");
  tr->add_flag("--sphere-only", sphere_only, "Train on the unit sphere alone");
  tr->add_option("-o,--output", model_file, "Model file");

  auto* ev = app.add_subcommand("evaluate", "Evaluate a trained network on the dataset");
  ev->add_flag("--sphere-only", sphere_only, "Evaluate on the unit sphere alone");
  ev->add_option("--model", model_file, "Model file");
  ev->add_option("-o,--output", out, "CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg = resolve_config(g);
    if (!solver.empty()) set_value(cfg, "solver.kind", solver);
    if (refinement >= 0) cfg.refinement = refinement;
    if (*geo) {
      char* end = nullptr;
      const double r = std::strtod(r_semi_text.c_str(), &end);
      if (end == r_semi_text.c_str() || *end != '\0' || !std::isfinite(r))
        throw CLI::ValidationError("--r-semi", "not a number: '" + r_semi_text + "'");
      return cmd_geometry(cfg, kind, r, out);
    }
    if (*sol) return cmd_solve(cfg, geometry_file, out);
    if (*conv) return cmd_convergence(cfg, first, last, out);
    if (*tr) return cmd_train(cfg, sphere_only, model_file);
    if (*ev) return cmd_evaluate(cfg, sphere_only, model_file, out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
