#include "cfmimo/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cfmimo/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

namespace cfmimo {

namespace {

constexpr double kClamp = 1e-12;
constexpr char kMagic[8] = {'C', 'F', 'M', 'I', 'M', 'O', 'N', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

MatrixXd apply_activation(const MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::Linear:
      return z;
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Sigmoid:
      return ((-z.array()).exp() + 1.0).inverse().matrix();
  }
  throw std::logic_error("unknown activation");
}

/// Derivative through the activation, expressed from the post-activation
/// values (exact for linear/relu/sigmoid).
MatrixXd activation_grad_from_output(const MatrixXd& a, Activation act) {
  switch (act) {
    case Activation::Linear:
      return MatrixXd::Ones(a.rows(), a.cols());
    case Activation::Relu:
      return (a.array() > 0.0).cast<double>().matrix();
    case Activation::Sigmoid:
      return (a.array() * (1.0 - a.array())).matrix();
  }
  throw std::logic_error("unknown activation");
}

void check_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw std::runtime_error(std::string("mlp: non-finite values in ") + what);
  }
}

}  // namespace

std::vector<LayerSpec> MlpModel::layer_specs() const {
  std::vector<LayerSpec> specs;
  specs.reserve(layers.size());
  for (const auto& layer : layers) {
    specs.push_back({static_cast<int>(layer.b.size()), layer.activation});
  }
  return specs;
}

MlpModel build_network(int input_size, const std::vector<LayerSpec>& layers,
                       std::uint64_t seed) {
  if (input_size < 1) throw std::invalid_argument("build_network: input_size must be >= 1");
  if (layers.empty()) throw std::invalid_argument("build_network: layer list is empty");
  for (const auto& spec : layers) {
    if (spec.size < 1) throw std::invalid_argument("build_network: layer size must be >= 1");
  }

  MlpModel model;
  model.input_size = input_size;
  model.rng_seed = seed;
  Rng rng(seed);
  int fan_in = input_size;
  for (const auto& spec : layers) {
    Layer layer;
    layer.activation = spec.activation;
    layer.w.resize(spec.size, fan_in);
    const double limit = std::sqrt(6.0 / (fan_in + spec.size));
    for (int r = 0; r < spec.size; ++r) {
      for (int c = 0; c < fan_in; ++c) {
        layer.w(r, c) = rng.uniform(-limit, limit);
      }
    }
    layer.b = VectorXd::Zero(spec.size);
    model.layers.push_back(std::move(layer));
    fan_in = spec.size;
  }
  return model;
}

std::int64_t param_count(int input_size, const std::vector<LayerSpec>& layers) {
  std::int64_t total = 0;
  std::int64_t prev = input_size;
  for (const auto& spec : layers) {
    total += (prev + 1) * spec.size;
    prev = spec.size;
  }
  return total;
}

std::int64_t mac_count(int input_size, const std::vector<LayerSpec>& layers) {
  std::int64_t total = 0;
  std::int64_t prev = input_size;
  for (const auto& spec : layers) {
    total += prev * spec.size;
    prev = spec.size;
  }
  return total;
}

AdamState make_adam_state(const MlpModel& model, double lr) {
  AdamState state;
  state.lr = lr;
  for (const auto& layer : model.layers) {
    state.m_w.push_back(MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
    state.v_w.push_back(MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
    state.m_b.push_back(VectorXd::Zero(layer.b.size()));
    state.v_b.push_back(VectorXd::Zero(layer.b.size()));
  }
  return state;
}

ForwardPass forward(const MlpModel& model, const MatrixXd& x) {
  if (x.cols() != model.input_size) {
    throw std::invalid_argument("forward: input width " + std::to_string(x.cols()) +
                                " != input_size " + std::to_string(model.input_size));
  }
  ForwardPass fp;
  fp.activations.reserve(model.layers.size() + 1);
  fp.activations.push_back(x);
  for (const auto& layer : model.layers) {
    MatrixXd z = fp.activations.back() * layer.w.transpose();
    z.rowwise() += layer.b.transpose();
    fp.activations.push_back(apply_activation(z, layer.activation));
  }
  return fp;
}

double bce_loss(const MatrixXd& pred, const MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("bce_loss: shape mismatch");
  }
  const auto p = pred.array().max(kClamp).min(1.0 - kClamp);
  const auto y = target.array();
  return -(y * p.log() + (1.0 - y) * (1.0 - p).log()).mean();
}

Gradients backward(const MlpModel& model, const ForwardPass& fp, const MatrixXd& target) {
  const std::size_t n_layers = model.layers.size();
  if (fp.activations.size() != n_layers + 1) {
    throw std::invalid_argument("backward: forward pass does not match model depth");
  }
  if (model.layers.back().activation != Activation::Sigmoid) {
    throw std::invalid_argument("backward: output layer must be sigmoid (fused BCE delta)");
  }
  const MatrixXd& pred = fp.output();
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("backward: target shape mismatch");
  }

  Gradients grads;
  grads.w.resize(n_layers);
  grads.b.resize(n_layers);

  const double inv_count = 1.0 / static_cast<double>(pred.size());
  MatrixXd delta = (pred - target) * inv_count;  // dL/dz of the sigmoid output
  for (std::size_t i = n_layers; i-- > 0;) {
    grads.w[i] = delta.transpose() * fp.activations[i];
    grads.b[i] = delta.colwise().sum().transpose();
    if (i > 0) {
      delta = (delta * model.layers[i].w).cwiseProduct(
          activation_grad_from_output(fp.activations[i], model.layers[i - 1].activation));
    }
  }
  return grads;
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state) {
  const std::size_t n_layers = model.layers.size();
  if (grads.w.size() != n_layers || state.m_w.size() != n_layers) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.t);
  const double bc2 = 1.0 - std::pow(state.beta2, state.t);
  for (std::size_t i = 0; i < n_layers; ++i) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
      const auto m_hat = m / bc1;
      const auto v_hat = v / bc2;
      param.array() -= state.lr * m_hat.array() / (v_hat.array().sqrt() + state.eps);
    };
    update(model.layers[i].w, state.m_w[i], state.v_w[i], grads.w[i]);
    update(model.layers[i].b, state.m_b[i], state.v_b[i], grads.b[i]);
  }
}

TrainResult train(MlpModel& model, const MatrixXd& features, const MatrixXd& labels,
                  const TrainConfig& cfg) {
  if (features.rows() != labels.rows()) {
    throw std::invalid_argument("train: feature/label row counts differ");
  }
  if (cfg.batch_size < 1 || cfg.epochs < 1) {
    throw std::invalid_argument("train: batch_size and epochs must be >= 1");
  }
  const Eigen::Index n_rows = features.rows();

  // Deterministic holdout slice for early stopping.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_rows));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::Index n_val = 0;
  if (cfg.early_stop_patience > 0) {
    n_val = static_cast<Eigen::Index>(std::floor(cfg.holdout_fraction * double(n_rows)));
    if (n_val > 0) {
      Rng holdout_rng(derive_seed(cfg.shuffle_seed, 0xb01dull));
      holdout_rng.shuffle(order);
    }
  }
  const Eigen::Index n_train = n_rows - n_val;
  if (n_train < 1) throw std::invalid_argument("train: holdout leaves no training rows");

  MatrixXd val_x, val_y;
  if (n_val > 0) {
    val_x.resize(n_val, features.cols());
    val_y.resize(n_val, labels.cols());
    for (Eigen::Index i = 0; i < n_val; ++i) {
      val_x.row(i) = features.row(order[static_cast<std::size_t>(n_train + i)]);
      val_y.row(i) = labels.row(order[static_cast<std::size_t>(n_train + i)]);
    }
  }

  std::vector<Eigen::Index> train_rows(order.begin(), order.begin() + n_train);
  AdamState state = make_adam_state(model);
  TrainResult result;

  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<Layer> best_layers;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng epoch_rng(derive_seed(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch) + 1));
    epoch_rng.shuffle(train_rows);

    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n_train; start += cfg.batch_size) {
      const Eigen::Index rows = std::min<Eigen::Index>(cfg.batch_size, n_train - start);
      MatrixXd bx(rows, features.cols());
      MatrixXd by(rows, labels.cols());
      for (Eigen::Index r = 0; r < rows; ++r) {
        bx.row(r) = features.row(train_rows[static_cast<std::size_t>(start + r)]);
        by.row(r) = labels.row(train_rows[static_cast<std::size_t>(start + r)]);
      }
      const ForwardPass fp = forward(model, bx);
      const double loss = bce_loss(fp.output(), by);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch offset " + std::to_string(start));
      }
      loss_sum += loss * static_cast<double>(rows);
      const Gradients grads = backward(model, fp, by);
      adam_step(model, grads, state);
    }
    result.train_loss.push_back(loss_sum / static_cast<double>(n_train));
    result.epochs_run = epoch + 1;

    if (n_val > 0) {
      const double val = bce_loss(forward(model, val_x).output(), val_y);
      if (!std::isfinite(val)) {
        throw std::runtime_error("train: non-finite validation loss at epoch " +
                                 std::to_string(epoch));
      }
      result.val_loss.push_back(val);
      if (val < best_val) {
        best_val = val;
        since_best = 0;
        result.best_epoch = epoch;
        best_layers = model.layers;
      } else if (++since_best >= cfg.early_stop_patience) {
        break;
      }
    }
  }

  if (!best_layers.empty()) {
    model.layers = std::move(best_layers);
  } else {
    result.best_epoch = result.epochs_run - 1;
  }
  return result;
}

BinaryMatrix predict_links(const MlpModel& model, const MatrixXd& features, double threshold) {
  const MatrixXd scores = forward(model, features).output();
  check_finite(scores, "predictions");
  return (scores.array() > threshold).cast<std::uint8_t>().matrix();
}

namespace {

template <typename T>
void write_raw(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("model file: truncated read");
  return value;
}

}  // namespace

void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open model file for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_raw(os, kFormatVersion);
  write_raw(os, static_cast<std::uint32_t>(model.layers.size()));
  int fan_in = model.input_size;
  for (const auto& layer : model.layers) {
    write_raw(os, static_cast<std::uint32_t>(fan_in));
    write_raw(os, static_cast<std::uint32_t>(layer.b.size()));
    write_raw(os, static_cast<std::uint8_t>(layer.activation));
    fan_in = static_cast<int>(layer.b.size());
  }
  for (const auto& layer : model.layers) {
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
        write_raw(os, layer.w(r, c));
      }
    }
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) {
      write_raw(os, layer.b(i));
    }
  }
  if (!os) throw std::runtime_error("model file: write failed: " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open model file: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("model file: bad magic: " + path);
  }
  const auto version = read_raw<std::uint32_t>(is);
  if (version != kFormatVersion) {
    throw std::runtime_error("model file: unsupported version " + std::to_string(version));
  }
  const auto n_layers = read_raw<std::uint32_t>(is);
  if (n_layers == 0) throw std::runtime_error("model file: zero layers");

  MlpModel model;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto in = read_raw<std::uint32_t>(is);
    const auto out = read_raw<std::uint32_t>(is);
    const auto act = read_raw<std::uint8_t>(is);
    if (act > static_cast<std::uint8_t>(Activation::Sigmoid)) {
      throw std::runtime_error("model file: bad activation tag");
    }
    if (i == 0) {
      model.input_size = static_cast<int>(in);
    } else if (in != dims.back().second) {
      throw std::runtime_error("model file: layer dimensions do not chain");
    }
    dims.emplace_back(in, out);
    Layer layer;
    layer.activation = static_cast<Activation>(act);
    layer.w.resize(out, in);
    layer.b.resize(out);
    model.layers.push_back(std::move(layer));
  }
  for (auto& layer : model.layers) {
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
        layer.w(r, c) = read_raw<double>(is);
      }
    }
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) {
      layer.b(i) = read_raw<double>(is);
    }
  }
  return model;
}

}  // namespace cfmimo
