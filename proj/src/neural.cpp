#include "igabem/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "igabem/parallel.hpp"

namespace igabem {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

struct Activations {
  std::vector<Eigen::VectorXd> a;  // a[0] = standardized input, a[l+1] = output of layer l
};

Activations run(const MlpModel& model, const Eigen::VectorXd& input) {
  if (input.size() != model.input_dim())
    throw ContractError("forward: input length " + std::to_string(input.size()) + ", expected " +
                        std::to_string(model.input_dim()));
  Activations act;
  act.a.reserve(model.num_layers() + 1);
  act.a.push_back((input - model.input_shift).cwiseProduct(model.input_scale));
  for (int l = 0; l < model.num_layers(); ++l) {
    Eigen::VectorXd z = model.weight(l) * act.a.back() + model.bias(l);
    act.a.push_back(l + 1 < model.num_layers() ? sigmoid(z) : std::move(z));
  }
  return act;
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd& out) {
  Eigen::VectorXcd j(out.size() / 2);
  for (Eigen::Index k = 0; k < j.size(); ++k) j[k] = {out[2 * k], out[2 * k + 1]};
  return j;
}

constexpr char kMagic[8] = {'I', 'G', 'A', 'M', 'L', 'P', '\0', '\0'};
constexpr std::uint32_t kModelVersion = 1;

}  // namespace

MlpModel::MlpModel(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ContractError("MlpModel: need at least input and output sizes");
  for (int n : sizes_)
    if (n < 1) throw ContractError("MlpModel: layer sizes must be positive");
  if (sizes_.back() % 2 != 0) throw ContractError("MlpModel: output size must be even (re, im)");
  Eigen::Index total = 0;
  for (int l = 0; l + 1 < static_cast<int>(sizes_.size()); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  theta = Eigen::VectorXd::Zero(total);
  input_shift = Eigen::VectorXd::Zero(sizes_.front());
  input_scale = Eigen::VectorXd::Ones(sizes_.front());
}

Eigen::Map<Eigen::MatrixXd> MlpModel::weight(int l) {
  return {theta.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<const Eigen::MatrixXd> MlpModel::weight(int l) const {
  return {theta.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<Eigen::VectorXd> MlpModel::bias(int l) {
  return {theta.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
          sizes_[l + 1]};
}
Eigen::Map<const Eigen::VectorXd> MlpModel::bias(int l) const {
  return {theta.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
          sizes_[l + 1]};
}

MlpModel init_model(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  MlpModel model(layer_sizes);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int l = 0; l < model.num_layers(); ++l) {
    auto W = model.weight(l);
    const double sd = 1.0 / std::sqrt(static_cast<double>(W.cols()));
    for (Eigen::Index c = 0; c < W.cols(); ++c)
      for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = sd * normal(rng);
  }
  return model;
}

void fit_input_normalization(MlpModel& model, std::span<const Eigen::VectorXd> inputs) {
  if (inputs.empty()) throw ContractError("fit_input_normalization: no inputs");
  const Eigen::Index d = model.input_dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  for (const auto& x : inputs) {
    if (x.size() != d) throw ContractError("fit_input_normalization: input length mismatch");
    mean += x;
  }
  mean /= static_cast<double>(inputs.size());
  for (const auto& x : inputs) sq += (x - mean).cwiseAbs2();
  model.input_shift = mean;
  model.input_scale.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sd = std::sqrt(sq[i] / static_cast<double>(inputs.size()));
    model.input_scale[i] = sd > 1e-12 * (1.0 + std::abs(mean[i])) ? 1.0 / sd : 1.0;
  }
}

Eigen::VectorXcd forward(const MlpModel& model, const Eigen::VectorXd& input) {
  return to_complex(run(model, input).a.back());
}

LossGradient loss_and_gradient(const MlpModel& model, std::span<const LossTerm> batch,
                               int threads) {
  if (batch.empty()) throw ContractError("loss_and_gradient: empty batch");
  const Eigen::Index K = model.output_dim() / 2;
  for (const auto& term : batch)
    if (term.V.rows() != K || term.V.cols() != K || term.f.size() != K)
      throw ContractError("loss_and_gradient: system size does not match the network output");

  std::vector<Eigen::VectorXd> grads(batch.size());
  LossGradient out;
  out.losses.resize(batch.size());
  parallel_for(
      batch.size(),
      [&](std::size_t b) {
        const LossTerm& term = batch[b];
        const Activations act = run(model, term.input);
        const Eigen::VectorXcd r = term.V * to_complex(act.a.back()) + term.f;
        out.losses[b] = r.squaredNorm() / static_cast<double>(K);
        const Eigen::VectorXcd vr = term.V.adjoint() * r * (2.0 / static_cast<double>(K));
        Eigen::VectorXd delta(2 * K);
        for (Eigen::Index k = 0; k < K; ++k) {
          delta[2 * k] = vr[k].real();
          delta[2 * k + 1] = vr[k].imag();
        }
        Eigen::VectorXd& g = grads[b];
        g.resize(model.num_params());
        for (int l = model.num_layers() - 1; l >= 0; --l) {
          const Eigen::Index rows = model.layer_sizes()[l + 1], cols = model.layer_sizes()[l];
          double* block = g.data() + model.layer_offset(l);
          Eigen::Map<Eigen::MatrixXd>(block, rows, cols).noalias() = delta * act.a[l].transpose();
          Eigen::Map<Eigen::VectorXd>(block + rows * cols, rows) = delta;
          if (l > 0) {
            const Eigen::VectorXd& s = act.a[l];
            delta = (model.weight(l).transpose() * delta).cwiseProduct(s - s.cwiseAbs2());
          }
        }
      },
      threads);
  out.gradient = Eigen::VectorXd::Zero(model.num_params());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    out.loss += out.losses[b];
    out.gradient += grads[b];
  }
  out.loss /= static_cast<double>(batch.size());
  out.gradient /= static_cast<double>(batch.size());
  if (!std::isfinite(out.loss) || !out.gradient.allFinite())
    throw NumericalError("loss_and_gradient: training diverged (non-finite loss)");
  return out;
}

AdamState make_adam(const MlpModel& model, const AdamOptions& options) {
  AdamState s;
  s.options = options;
  s.m = Eigen::VectorXd::Zero(model.num_params());
  s.v = Eigen::VectorXd::Zero(model.num_params());
  return s;
}

void adam_step(MlpModel& model, AdamState& state, const Eigen::VectorXd& gradient) {
  if (gradient.size() != model.num_params() || state.m.size() != model.num_params())
    throw ContractError("adam_step: gradient and state must match the model");
  const AdamOptions& o = state.options;
  ++state.t;
  state.m = o.beta1 * state.m + (1.0 - o.beta1) * gradient;
  state.v = o.beta2 * state.v + (1.0 - o.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));
  model.theta.array() -=
      o.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + o.eps);
}

void write_model(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
  auto put_vec = [&](const Eigen::VectorXd& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  os.write(kMagic, sizeof kMagic);
  put(kModelVersion);
  put(static_cast<std::uint32_t>(model.layer_sizes().size()));
  for (int n : model.layer_sizes()) put(static_cast<std::uint64_t>(n));
  put_vec(model.input_shift);
  put_vec(model.input_scale);
  put_vec(model.theta);
  if (!os) throw IoError("write failed for " + path.string());
}

MlpModel read_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  auto get = [&](auto& v) { is.read(reinterpret_cast<char*>(&v), sizeof v); };
  auto get_vec = [&](Eigen::VectorXd& v) {
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw IoError(path.string() + ": not a model file");
  std::uint32_t version = 0, count = 0;
  get(version);
  get(count);
  if (!is || version != kModelVersion || count < 2 || count > 64)
    throw IoError(path.string() + ": unsupported model file");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint64_t n = 0;
    get(n);
    if (!is || n == 0 || n > (1u << 24)) throw IoError(path.string() + ": bad layer size");
    sizes.push_back(static_cast<int>(n));
  }
  MlpModel model(sizes);
  get_vec(model.input_shift);
  get_vec(model.input_scale);
  get_vec(model.theta);
  if (!is) throw IoError(path.string() + ": truncated model file");
  return model;
}

}  // namespace igabem
