#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "igabem/analytic.hpp"
#include "igabem/efie.hpp"
#include "igabem/linalg.hpp"
#include "igabem/neural.hpp"

namespace igabem {

/// Unknown key or unparsable value in a configuration file or override.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class SolverKind { Lu, Gmres };

struct RunConfig {
  ExcitationDipole dipole;
  int degree = 1;
  int refinement = 1;
  QuadratureConfig quadrature;
  SolverKind solver = SolverKind::Lu;
  GmresOptions gmres;
  std::vector<int> hidden{50, 50};
  std::uint64_t network_seed = 1;
  AdamOptions adam;
  double lr_decay = 1.0;  // lr multiplier applied every checkpoint interval
  double stop_epsilon = 2e-8;
  std::int64_t max_steps = 200000;
  std::int64_t checkpoint_every = 500;
  std::int64_t log_every = 100;
  int dataset_size = 100;
  double r_min = 0.6;
  double r_max = 1.0;
  std::uint64_t dataset_seed = 7;
  int eval_points = 200;
  double eval_radius = 2.0;
  std::uint64_t eval_seed = 1;
  std::string cache_dir = "cache";
  std::string output_dir = "out";
  int threads = 0;
};

/// Sets one dotted key, e.g. set_value(cfg, "efie.kappa", "2").
void set_value(RunConfig& config, std::string_view key, std::string_view value);

/// Applies "key=value".
void apply_override(RunConfig& config, std::string_view assignment);

/// Reads "key = value" lines. Text after '#' is a comment; blank lines are skipped.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// All keys in a fixed order, one "key = value" per line; load_config reads it back.
std::vector<std::string> config_lines(const RunConfig& config);
std::vector<std::string> config_keys();

/// Hash of every setting that can change numerical output (paths and thread count
/// excluded).
std::uint64_t config_hash(const RunConfig& config);

/// Provenance block for output headers: tool line, config hash, then config_lines.
std::vector<std::string> provenance_lines(const RunConfig& config, std::string_view command);

std::string hex(std::uint64_t v);

}  // namespace igabem
