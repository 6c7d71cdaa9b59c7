#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "igabem/errors.hpp"

namespace igabem {

/// Fully connected network with sigmoid hidden layers and an identity output layer.
/// The 2K outputs are read as K complex coefficients, interleaved (re, im).
///
/// All weights and biases live in one flat vector `theta`; layer l (mapping n_l
/// inputs to n_{l+1} outputs) stores its n_{l+1} x n_l weight matrix column-major,
/// followed by its bias. Inputs are standardized as (x - input_shift) .* input_scale
/// before the first layer.
class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  int num_layers() const noexcept { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  Eigen::Index num_params() const noexcept { return theta.size(); }
  /// Position of layer l's weight matrix in theta.
  Eigen::Index layer_offset(int layer) const { return offsets_[layer]; }

  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  Eigen::VectorXd theta;
  Eigen::VectorXd input_shift;
  Eigen::VectorXd input_scale;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
};

/// Weights ~ N(0, 1/fan_in) from a mt19937_64 seeded with `seed`, zero biases,
/// identity input normalization.
MlpModel init_model(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Per-coordinate standardization over a set of inputs. Coordinates that do not
/// vary keep scale 1.
void fit_input_normalization(MlpModel& model, std::span<const Eigen::VectorXd> inputs);

Eigen::VectorXcd forward(const MlpModel& model, const Eigen::VectorXd& input);

/// One geometry of a training batch.
struct LossTerm {
  Eigen::VectorXd input;
  Eigen::MatrixXcd V;
  Eigen::VectorXcd f;
};

struct LossGradient {
  double loss = 0;               // mean of the per-term losses
  std::vector<double> losses;    // (1/N) ||V j + f||^2 per term
  Eigen::VectorXd gradient;      // d loss / d theta
};

/// Mean residual loss over the batch and its gradient by backpropagation. The
/// output gradient of a term is (2/N) [Re, Im](V^H (V j + f)). Terms are processed
/// concurrently and reduced in batch order. Throws NumericalError on a non-finite loss.
LossGradient loss_and_gradient(const MlpModel& model, std::span<const LossTerm> batch,
                               int threads = 0);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamOptions options;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t t = 0;
};

AdamState make_adam(const MlpModel& model, const AdamOptions& options = {});

/// Bias-corrected ADAM update of model.theta.
void adam_step(MlpModel& model, AdamState& state, const Eigen::VectorXd& gradient);

/// Binary model file: magic "IGAMLP\0\0", uint32 version, uint32 layer count L+1,
/// L+1 uint64 layer sizes, then input_shift, input_scale and theta as little-endian
/// float64.
void write_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel read_model(const std::filesystem::path& path);

}  // namespace igabem
