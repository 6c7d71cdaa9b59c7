#include "igabem/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "json.hpp"

#include "igabem/config.hpp"
#include "igabem/hash.hpp"
#include "igabem/linalg.hpp"
#include "igabem/parallel.hpp"

namespace igabem {

namespace {

const MultipatchSurface& sphere_template() {
  static const MultipatchSurface sphere = make_unit_sphere();
  return sphere;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& line : header) out << "# " << line << '\n';
  return out;
}

}  // namespace

std::vector<int> Dataset::indices(bool train) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(items.size()); ++i)
    if (items[i].train == train) out.push_back(i);
  return out;
}

bool is_unit_sphere(const GeometrySample& sample) { return std::abs(sample.r_semi - 1.0) < 1e-14; }

Dataset generate_dataset(int n, double r_min, double r_max, std::uint64_t seed,
                         double train_fraction) {
  if (n < 4) throw ContractError("generate_dataset: need at least 4 geometries to split");
  if (!(r_min > 0.0 && r_min < r_max && r_max <= 1.0))
    throw DomainError("generate_dataset: need 0 < r_min < r_max <= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ContractError("generate_dataset: train_fraction must lie in (0, 1)");
  Dataset ds;
  ds.r_min = r_min;
  ds.r_max = r_max;
  ds.seed = seed;
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    GeometrySample s;
    s.id = i;
    s.r_semi = i == n - 1 ? r_max : r_min + (r_max - r_min) * i / (n - 1);
    s.params = to_params(make_spheroid(s.r_semi));
    if (!is_unit_sphere(s)) candidates.push_back(i);
    ds.items.push_back(std::move(s));
  }
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
  if (n_train < 1 || n_train > candidates.size())
    throw ContractError("generate_dataset: split impossible for n = " + std::to_string(n));
  // Fisher-Yates with raw engine output so the split does not depend on the standard
  // library's distribution implementations.
  std::mt19937_64 rng(seed);
  for (std::size_t i = candidates.size() - 1; i > 0; --i) std::swap(candidates[i], candidates[rng() % (i + 1)]);
  for (std::size_t i = 0; i < n_train; ++i) ds.items[candidates[i]].train = true;
  return ds;
}

DivConformingSpace make_space(const GeometrySample& sample, const Discretization& disc) {
  return DivConformingSpace(refine(from_params(sphere_template(), sample.params), disc.refinement),
                            disc.degree);
}

std::uint64_t sample_key(const GeometrySample& sample, const Discretization& disc) {
  const MultipatchSurface geometry =
      refine(from_params(sphere_template(), sample.params), disc.refinement);
  return system_key(geometry, disc.degree, disc.dipole, disc.quadrature);
}

std::filesystem::path system_cache_path(const std::filesystem::path& cache_dir, std::uint64_t key) {
  return cache_dir / ("system_" + hex(key) + ".bin");
}

std::vector<EfieSystem> precompute_systems(const Dataset& dataset, const Discretization& disc,
                                           const std::filesystem::path& cache_dir, int threads,
                                           PrecomputeStats* stats) {
  if (!cache_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    if (ec) throw IoError("cannot create cache directory " + cache_dir.string());
  }
  std::vector<EfieSystem> systems(dataset.items.size());
  std::vector<char> reused(dataset.items.size(), 0);
  parallel_for(
      dataset.items.size(),
      [&](std::size_t i) {
        const GeometrySample& sample = dataset.items[i];
        try {
          const DivConformingSpace space = make_space(sample, disc);
          const std::uint64_t key =
              system_key(space.geometry(), disc.degree, disc.dipole, disc.quadrature);
          if (!cache_dir.empty()) {
            if (auto cached = read_system_if_matches(system_cache_path(cache_dir, key), key)) {
              systems[i] = std::move(*cached);
              reused[i] = 1;
              return;
            }
          }
          systems[i] = assemble_system(space, disc.dipole, disc.quadrature, 1);
          if (!cache_dir.empty()) write_system(system_cache_path(cache_dir, key), systems[i]);
        } catch (const IoError& e) {
          throw IoError("geometry " + std::to_string(sample.id) + ": " + e.what());
        } catch (const Error& e) {
          throw NumericalError("geometry " + std::to_string(sample.id) + ": " + e.what());
        }
      },
      threads);
  if (stats) {
    stats->reused = static_cast<int>(std::count(reused.begin(), reused.end(), 1));
    stats->assembled = static_cast<int>(dataset.items.size()) - stats->reused;
  }
  return systems;
}

std::vector<LossTerm> make_loss_terms(const Dataset& dataset, std::span<const EfieSystem> systems,
                                      bool train) {
  if (systems.size() != dataset.items.size())
    throw ContractError("make_loss_terms: one system per geometry expected");
  std::vector<LossTerm> terms;
  for (int i : dataset.indices(train))
    terms.push_back({dataset.items[i].params, systems[i].matrix, systems[i].rhs});
  return terms;
}

TrainResult train(std::span<const LossTerm> terms, const TrainOptions& options) {
  if (terms.empty()) throw ContractError("train: no training geometries");
  if (options.max_steps < 0) throw ContractError("train: max_steps must be >= 0");
  std::vector<int> sizes{static_cast<int>(terms.front().input.size())};
  sizes.insert(sizes.end(), options.hidden.begin(), options.hidden.end());
  sizes.push_back(2 * static_cast<int>(terms.front().f.size()));

  TrainResult result;
  result.model = init_model(sizes, options.seed);
  std::vector<Eigen::VectorXd> inputs;
  for (const auto& t : terms) inputs.push_back(t.input);
  fit_input_normalization(result.model, inputs);
  AdamState adam = make_adam(result.model, options.adam);
  MlpModel last_good = result.model;

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  for (std::int64_t step = 0;; ++step) {
    LossGradient lg;
    try {
      lg = loss_and_gradient(result.model, terms, options.threads);
    } catch (const NumericalError& e) {
      if (!options.checkpoint_path.empty()) write_model(options.checkpoint_path, last_good);
      throw TrainingDiverged("train: loss became non-finite at step " + std::to_string(step),
                             last_good, step);
    }
    const double max_loss = *std::max_element(lg.losses.begin(), lg.losses.end());
    result.final_loss = lg.loss;
    result.steps = step;
    const bool converged = lg.loss <= options.stop_epsilon;
    const bool exhausted = step >= options.max_steps;
    if (converged || exhausted || (options.log_every > 0 && step % options.log_every == 0)) {
      result.log.push_back({step, lg.loss, max_loss, adam.options.lr, elapsed(),
                            converged ? "converged" : exhausted ? "max_steps" : "running"});
    }
    if (converged || exhausted) {
      result.converged = converged;
      break;
    }
    adam_step(result.model, adam, lg.gradient);
    if (options.checkpoint_every > 0 && (step + 1) % options.checkpoint_every == 0) {
      last_good = result.model;
      if (!options.checkpoint_path.empty()) write_model(options.checkpoint_path, last_good);
      adam.options.lr *= options.lr_decay;
    }
  }
  if (!options.checkpoint_path.empty()) write_model(options.checkpoint_path, result.model);
  return result;
}

std::vector<EvaluationRow> evaluate(const MlpModel& model, const Dataset& dataset,
                                    std::span<const EfieSystem> systems,
                                    const Discretization& disc, const EvalSettings& eval) {
  if (systems.size() != dataset.items.size())
    throw ContractError("evaluate: one system per geometry expected");
  std::vector<EvaluationRow> rows;
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const GeometrySample& sample = dataset.items[i];
    const EfieSystem& sys = systems[i];
    EvaluationRow row;
    row.id = sample.id;
    row.r_semi = sample.r_semi;
    row.train = sample.train;
    const Eigen::VectorXcd j = forward(model, sample.params);
    row.loss = residual_loss(sys.matrix, sys.rhs, j);
    if (is_unit_sphere(sample)) {
      const DivConformingSpace space = make_space(sample, disc);
      const EvalPointSet points = sample_eval_points(space.geometry(), eval.count, eval.seed, eval.radius);
      std::vector<Eigen::Vector3cd> reference;
      for (const auto& x : points.points) reference.push_back(dipole_field(x, disc.dipole));
      const auto predicted =
          eval_scattered_field(space, j, points.points, disc.dipole.kappa, disc.quadrature);
      const auto direct = eval_scattered_field(space, lu_solve(sys.matrix, -sys.rhs), points.points,
                                               disc.dipole.kappa, disc.quadrature);
      row.delta_max = max_pointwise_error(reference, predicted.values);
      row.delta_max_direct = max_pointwise_error(reference, direct.values);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_training_log(const std::filesystem::path& path, std::span<const TrainLogRow> rows,
                        const std::vector<std::string>& header_lines) {
  std::ofstream out = open_csv(path, header_lines);
  out << "step,loss,max_loss,lr,wall_time_s,status\n";
  for (const auto& r : rows)
    out << r.step << ',' << fmt(r.loss) << ',' << fmt(r.max_loss) << ',' << fmt(r.lr) << ','
        << fmt(r.wall_seconds) << ',' << r.status << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

void write_evaluation_csv(const std::filesystem::path& path, std::span<const EvaluationRow> rows,
                          const std::vector<std::string>& header_lines) {
  std::ofstream out = open_csv(path, header_lines);
  out << "id,r_semi,split,loss,delta_max,delta_max_direct\n";
  for (const auto& r : rows) {
    out << r.id << ',' << fmt(r.r_semi) << ',' << (r.train ? "train" : "test") << ','
        << fmt(r.loss) << ',';
    out << (r.delta_max >= 0 ? fmt(r.delta_max) : "") << ','
        << (r.delta_max_direct >= 0 ? fmt(r.delta_max_direct) : "") << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_manifest(const std::filesystem::path& path, const Dataset& dataset,
                    const Discretization& disc, const std::filesystem::path& cache_dir,
                    const std::string& config_hash) {
  nlohmann::ordered_json doc;
  doc["config_hash"] = config_hash;
  doc["seed"] = dataset.seed;
  doc["r_min"] = dataset.r_min;
  doc["r_max"] = dataset.r_max;
  auto& list = doc["geometries"] = nlohmann::ordered_json::array();
  for (const auto& s : dataset.items) {
    const std::uint64_t key = sample_key(s, disc);
    list.push_back({{"id", s.id},
                    {"r_semi", s.r_semi},
                    {"split", s.train ? "train" : "test"},
                    {"system_key", hex(key)},
                    {"cache_file", cache_dir.empty() ? "" : system_cache_path(cache_dir, key).string()}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace igabem
