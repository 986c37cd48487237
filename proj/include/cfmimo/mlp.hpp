#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cfmimo/netmodel.hpp"

namespace cfmimo {

enum class Activation { Linear, Relu, Sigmoid };

struct LayerSpec {
  int size = 1;
  Activation activation = Activation::Linear;
};

struct Layer {
  MatrixXd w;  // out x in
  VectorXd b;  // out
  Activation activation = Activation::Linear;
};

/// Dense feedforward network. Weights are Glorot-style uniform,
/// U(-sqrt(6/(fan_in+fan_out)), +...), drawn row-major layer by layer from
/// rng_seed; biases start at zero.
struct MlpModel {
  int input_size = 0;
  std::vector<Layer> layers;
  std::uint64_t rng_seed = 0;

  int output_size() const { return layers.empty() ? 0 : static_cast<int>(layers.back().b.size()); }
  std::vector<LayerSpec> layer_specs() const;
};

struct AdamState {
  std::vector<MatrixXd> m_w, v_w;
  std::vector<VectorXd> m_b, v_b;
  long t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam_state(const MlpModel& model, double lr = 1e-3);

struct TrainConfig {
  int batch_size = 64;
  int epochs = 100;
  std::uint64_t shuffle_seed = 0;
  int early_stop_patience = 10;   // 0 disables early stopping
  double holdout_fraction = 0.1;  // validation slice when patience > 0
};

struct Gradients {
  std::vector<MatrixXd> w;
  std::vector<VectorXd> b;
};

/// Activations of every layer, retained for backprop.
/// activations[0] is the input batch, activations[i+1] the output of layer i.
struct ForwardPass {
  std::vector<MatrixXd> activations;
  const MatrixXd& output() const { return activations.back(); }
};

struct TrainResult {
  std::vector<double> train_loss;  // per epoch, nats per element
  std::vector<double> val_loss;    // empty when no holdout slice
  int epochs_run = 0;
  int best_epoch = -1;  // epoch whose weights the model carries (early stop)
};

MlpModel build_network(int input_size, const std::vector<LayerSpec>& layers, std::uint64_t seed);

/// Trainable scalar count including biases: sum_i (n_{i-1} + 1) * n_i.
std::int64_t param_count(int input_size, const std::vector<LayerSpec>& layers);

/// Multiply-accumulates of one forward pass per sample: sum_i n_{i-1} * n_i.
std::int64_t mac_count(int input_size, const std::vector<LayerSpec>& layers);

/// x rows are samples. Throws on width mismatch.
ForwardPass forward(const MlpModel& model, const MatrixXd& x);

/// Mean element-wise binary cross-entropy in nats; predictions clamped to
/// [1e-12, 1 - 1e-12].
double bce_loss(const MatrixXd& pred, const MatrixXd& target);

/// Analytic gradients of bce_loss via the fused sigmoid-BCE output delta
/// (pred - target). Requires a sigmoid output layer.
Gradients backward(const MlpModel& model, const ForwardPass& fp, const MatrixXd& target);

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state);

/// Mini-batch Adam with seeded per-epoch shuffling. With early stopping
/// enabled, a deterministic holdout slice is carved from the rows and the
/// best-validation weights are restored on exit.
TrainResult train(MlpModel& model, const MatrixXd& features, const MatrixXd& labels,
                  const TrainConfig& cfg);

/// Strict comparison: entry is 1 iff score > threshold.
BinaryMatrix predict_links(const MlpModel& model, const MatrixXd& features,
                           double threshold = 0.5);

/// Versioned little-endian binary: magic "CFMIMONN", u32 version, u32 layer
/// count, per layer (u32 in, u32 out, u8 activation tag), then per layer the
/// row-major weights and the biases as f64.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace cfmimo
