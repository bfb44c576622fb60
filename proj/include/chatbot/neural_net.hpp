#ifndef CHATBOT_NEURAL_NET_HPP_
#define CHATBOT_NEURAL_NET_HPP_

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "chatbot/errors.hpp"
#include "chatbot/vectorizers.hpp"

namespace chatbot {

/// Hyperparameters of a two-hidden-layer perceptron. Defaults are artifact
/// choices; see docs/model-format.md.
struct MlpConfig {
  std::array<int, 4> layer_sizes{1, 128, 64, 1};  ///< input, hidden 1, hidden 2, output
  double learning_rate = 0.01;
  double l2_lambda = 1e-4;
  int max_epochs = 500;
  int patience = 10;
  int batch_size = 32;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;

  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

// ---------------------------------------------------------------------------
// Dense network core, templated on the scalar type.

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Weights are stored fan_in x fan_out so a batch of row samples maps as X * W + b.
template <typename Scalar>
struct Network {
  std::array<Matrix<Scalar>, 3> weights;
  std::array<RowVector<Scalar>, 3> biases;

  Eigen::Index input_size() const { return weights[0].rows(); }
  Eigen::Index output_size() const { return weights[2].cols(); }

  Scalar weight_norm_squared() const {
    Scalar total = 0;
    for (const auto& w : weights) total += w.squaredNorm();
    return total;
  }

  bool all_finite() const {
    for (int k = 0; k < 3; ++k) {
      if (!weights[k].allFinite() || !biases[k].allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const Network& a, const Network& b) {
    for (int k = 0; k < 3; ++k) {
      if (a.weights[k].rows() != b.weights[k].rows() || a.weights[k].cols() != b.weights[k].cols() ||
          a.biases[k].size() != b.biases[k].size())
        return false;
      if (a.weights[k] != b.weights[k] || a.biases[k] != b.biases[k]) return false;
    }
    return true;
  }
};

/// Gradients share the network's layout.
template <typename Scalar>
using Gradients = Network<Scalar>;

template <typename Scalar>
Network<Scalar> zero_network(const std::array<int, 4>& sizes) {
  Network<Scalar> net;
  for (int k = 0; k < 3; ++k) {
    net.weights[k] = Matrix<Scalar>::Zero(sizes[k], sizes[k + 1]);
    net.biases[k] = RowVector<Scalar>::Zero(sizes[k + 1]);
  }
  return net;
}

/// Row-wise softmax with the max logit subtracted first.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Scalar m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

/// log-softmax of each row, computed through log-sum-exp.
template <typename Derived>
Matrix<typename Derived::Scalar> log_softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Scalar m = out.row(i).maxCoeff();
    const Scalar lse = m + std::log((out.row(i).array() - m).exp().sum());
    out.row(i).array() -= lse;
  }
  return out;
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& z) {
  return z.cwiseMax(typename Derived::Scalar(0));
}

/// Intermediate activations of one forward pass over a batch.
template <typename Scalar>
struct Activations {
  Matrix<Scalar> z1, a1, z2, a2, logits;
};

template <typename Scalar, typename Derived>
Activations<Scalar> forward_activations(const Network<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  Activations<Scalar> act;
  act.z1 = (x * net.weights[0]).rowwise() + net.biases[0];
  act.a1 = relu(act.z1);
  act.z2 = (act.a1 * net.weights[1]).rowwise() + net.biases[1];
  act.a2 = relu(act.z2);
  act.logits = (act.a2 * net.weights[2]).rowwise() + net.biases[2];
  return act;
}

/// Class probabilities for each row of `x`.
template <typename Scalar, typename Derived>
Matrix<Scalar> forward_batch(const Network<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  return softmax_rows(forward_activations(net, x).logits);
}

/// Mean cross-entropy over the rows of `x` plus l2 * sum of squared weights.
/// When `grads` is non-null it receives the gradient of that objective.
template <typename Scalar, typename Derived>
Scalar loss_and_gradients(const Network<Scalar>& net, const Eigen::MatrixBase<Derived>& x, std::span<const int> labels,
                          std::type_identity_t<Scalar> l2, std::type_identity_t<Gradients<Scalar>>* grads) {
  const Eigen::Index m = x.rows();
  const auto act = forward_activations(net, x);
  const Matrix<Scalar> log_probs = log_softmax_rows(act.logits);

  Scalar data_loss = 0;
  for (Eigen::Index i = 0; i < m; ++i) data_loss -= log_probs(i, labels[static_cast<std::size_t>(i)]);
  data_loss /= static_cast<Scalar>(m);
  const Scalar loss = data_loss + l2 * net.weight_norm_squared();
  if (grads == nullptr) return loss;

  Matrix<Scalar> delta = log_probs.array().exp().matrix();  // softmax
  for (Eigen::Index i = 0; i < m; ++i) delta(i, labels[static_cast<std::size_t>(i)]) -= Scalar(1);
  delta /= static_cast<Scalar>(m);

  grads->weights[2] = act.a2.transpose() * delta + Scalar(2) * l2 * net.weights[2];
  grads->biases[2] = delta.colwise().sum();

  Matrix<Scalar> d2 = (delta * net.weights[2].transpose()).cwiseProduct((act.z2.array() > Scalar(0)).template cast<Scalar>().matrix());
  grads->weights[1] = act.a1.transpose() * d2 + Scalar(2) * l2 * net.weights[1];
  grads->biases[1] = d2.colwise().sum();

  Matrix<Scalar> d1 = (d2 * net.weights[1].transpose()).cwiseProduct((act.z1.array() > Scalar(0)).template cast<Scalar>().matrix());
  grads->weights[0] = x.transpose() * d1 + Scalar(2) * l2 * net.weights[0];
  grads->biases[0] = d1.colwise().sum();
  return loss;
}

// ---------------------------------------------------------------------------
// Trained model: network plus its codecs.

/// Deployment metadata stored alongside the parameters.
struct ModelInfo {
  std::string kind = "generic";  ///< "intent", "ner" or "generic"
  double threshold = 0.5;

  friend bool operator==(const ModelInfo&, const ModelInfo&) = default;
};

struct Mlp {
  MlpConfig config;
  Network<double> network;
  LabelCodec labels;
  /// Feature names in column order: vocabulary terms or alphabet characters.
  std::vector<std::string> features;
  ModelInfo info;

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

struct TrainReport {
  int epochs_run = 0;
  std::vector<double> train_loss;           ///< per epoch, full training objective
  std::vector<double> validation_accuracy;  ///< per epoch; empty without a validation set
  int best_epoch = 0;                       ///< 1-based
  bool stopped_early = false;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

/// Glorot-uniform weights from the seeded generator, zero biases.
Mlp init_mlp(const MlpConfig& config);

/// Probabilities for a single sample. Throws DimensionMismatch.
Eigen::RowVectorXd forward(const Mlp& mlp, const Eigen::Ref<const Eigen::RowVectorXd>& x);
/// Probabilities for each row of `x`. Throws DimensionMismatch.
Eigen::MatrixXd forward_rows(const Mlp& mlp, const Eigen::Ref<const Eigen::MatrixXd>& x);

struct Prediction {
  std::string label;
  int code = 0;
  double probability = 0.0;
};

/// Index of the largest entry; ties go to the lowest index.
Eigen::Index argmax(const Eigen::Ref<const Eigen::RowVectorXd>& probabilities);

Prediction predict(const Mlp& mlp, const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Mini-batch gradient descent on mean cross-entropy + L2, keeping the
/// parameters of the epoch with the best validation accuracy. With an empty
/// validation set every epoch runs and the final parameters are kept.
///
/// Throws EmptyDataset, DimensionMismatch, DivergenceDetected.
std::pair<Mlp, TrainReport> train(Mlp mlp, const Eigen::Ref<const Eigen::MatrixXd>& train_x,
                                  std::span<const int> train_y, const Eigen::Ref<const Eigen::MatrixXd>& valid_x,
                                  std::span<const int> valid_y);

/// Fraction of rows whose argmax equals the label.
double accuracy(const Mlp& mlp, const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y);

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary container documented in docs/model-format.md.
void save_model(const Mlp& mlp, std::ostream& sink);
/// Throws CorruptModel or VersionMismatch.
Mlp load_model(std::istream& source);

void save_model_file(const Mlp& mlp, const std::string& path);
Mlp load_model_file(const std::string& path);

}  // namespace chatbot

#endif  // CHATBOT_NEURAL_NET_HPP_
