#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "igabem/efie.hpp"
#include "igabem/neural.hpp"

namespace igabem {

/// One spheroid of the study. `params` is the coarse (unrefined) geometry vector
/// that the network receives as input.
struct GeometrySample {
  int id = 0;
  double r_semi = 1.0;
  bool train = false;
  GeometryParams params;
};

struct Dataset {
  std::vector<GeometrySample> items;
  double r_min = 0.6, r_max = 1.0;
  std::uint64_t seed = 0;

  std::vector<int> indices(bool train) const;
};

/// n spheroids with r_semi on a uniform grid over [r_min, r_max]. A seeded shuffle
/// puts round(train_fraction * n) of them in the training split; the unit sphere is
/// never a training geometry. Throws ContractError for n < 4.
Dataset generate_dataset(int n, double r_min, double r_max, std::uint64_t seed,
                         double train_fraction = 0.25);

/// Everything that determines a geometry's discrete system besides the geometry.
struct Discretization {
  int degree = 1;
  int refinement = 1;
  ExcitationDipole dipole;
  QuadratureConfig quadrature;
};

DivConformingSpace make_space(const GeometrySample& sample, const Discretization& disc);
std::uint64_t sample_key(const GeometrySample& sample, const Discretization& disc);
std::filesystem::path system_cache_path(const std::filesystem::path& cache_dir, std::uint64_t key);

struct PrecomputeStats {
  int assembled = 0;
  int reused = 0;
};

/// Assembles (or loads from cache_dir, when not empty) the system of every geometry.
/// Geometries are processed concurrently. A failed assembly is rethrown with the
/// geometry id in its message.
std::vector<EfieSystem> precompute_systems(const Dataset& dataset, const Discretization& disc,
                                           const std::filesystem::path& cache_dir,
                                           int threads = 0, PrecomputeStats* stats = nullptr);

/// Loss terms of one split, in dataset order.
std::vector<LossTerm> make_loss_terms(const Dataset& dataset, std::span<const EfieSystem> systems,
                                      bool train);

struct TrainOptions {
  std::vector<int> hidden{50, 50};
  std::uint64_t seed = 1;
  AdamOptions adam;
  double lr_decay = 1.0;         // lr *= lr_decay at every checkpoint
  double stop_epsilon = 2e-8;
  std::int64_t max_steps = 200000;
  std::int64_t checkpoint_every = 500;
  std::int64_t log_every = 100;
  std::filesystem::path checkpoint_path;  // empty: keep checkpoints in memory only
  int threads = 0;
};

struct TrainLogRow {
  std::int64_t step = 0;
  double loss = 0;
  double max_loss = 0;
  double lr = 0;
  double wall_seconds = 0;
  std::string status;  // running, converged, max_steps
};

struct TrainResult {
  MlpModel model;
  std::vector<TrainLogRow> log;
  bool converged = false;
  std::int64_t steps = 0;
  double final_loss = 0;
};

/// Thrown when the loss turns non-finite; carries the last checkpointed model.
class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(const std::string& what, MlpModel last_good, std::int64_t step)
      : NumericalError(what), last_good_(std::move(last_good)), step_(step) {}
  const MlpModel& last_good() const noexcept { return last_good_; }
  std::int64_t step() const noexcept { return step_; }

 private:
  MlpModel last_good_;
  std::int64_t step_;
};

/// Full-batch ADAM on the mean residual loss until it drops to stop_epsilon or
/// max_steps updates have been made. Input normalization is fitted on the batch.
TrainResult train(std::span<const LossTerm> terms, const TrainOptions& options);

struct EvaluationRow {
  int id = 0;
  double r_semi = 0;
  bool train = false;
  double loss = 0;              // residual loss of the network prediction
  double delta_max = -1;        // network prediction vs dipole field; -1 when not computed
  double delta_max_direct = -1; // direct solve vs dipole field
};

struct EvalSettings {
  int count = 200;
  std::uint64_t seed = 1;
  double radius = 2.0;
};

/// Residual loss of the prediction for every geometry, and Delta_max for the unit
/// sphere where the manufactured solution is the dipole field.
std::vector<EvaluationRow> evaluate(const MlpModel& model, const Dataset& dataset,
                                    std::span<const EfieSystem> systems,
                                    const Discretization& disc, const EvalSettings& eval);

bool is_unit_sphere(const GeometrySample& sample);

void write_training_log(const std::filesystem::path& path, std::span<const TrainLogRow> rows,
                        const std::vector<std::string>& header_lines = {});
void write_evaluation_csv(const std::filesystem::path& path, std::span<const EvaluationRow> rows,
                          const std::vector<std::string>& header_lines = {});
/// JSON: { "config_hash", "geometries": [ { "id", "r_semi", "split", "system_key",
/// "cache_file" } ] }.
void write_manifest(const std::filesystem::path& path, const Dataset& dataset,
                    const Discretization& disc, const std::filesystem::path& cache_dir,
                    const std::string& config_hash);

}  // namespace igabem
