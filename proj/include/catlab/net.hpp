#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace catlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { relu, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::relu;

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

/// Dense feedforward classifier. The last layer is an identity layer whose
/// outputs are the logits; dimensions of consecutive layers always chain.
class Network {
 public:
  explicit Network(std::vector<Layer> layers);

  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t num_classes() const { return layers_.back().out_dim(); }
  std::size_t depth() const { return layers_.size(); }

  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_[i]; }
  Layer& layer(std::size_t i) { return layers_[i]; }

  /// Layer sizes [input, hidden..., K].
  std::vector<std::size_t> arch() const;
  std::size_t parameter_count() const;

  bool all_finite() const;
  bool operator==(const Network& other) const;

 private:
  std::vector<Layer> layers_;
};

/// Glorot-uniform weights from a seed-derived stream, zero biases, ReLU on
/// hidden layers and identity on the logit layer.
Network init_network(std::span<const std::size_t> arch, std::size_t num_classes,
                     std::uint64_t seed);

struct ForwardTrace {
  std::vector<Vector> pre;   // pre-activation of every layer
  std::vector<Vector> post;  // post[0] is the input, post[i+1] = act(pre[i])
  Vector logits;
  Vector log_probs;
  Vector probs;

  const Vector& input() const { return post.front(); }
  std::size_t predicted() const;
};

ForwardTrace forward(const Network& net, const Vector& x);
Vector logits(const Network& net, const Vector& x);
std::size_t predict(const Network& net, const Vector& x);

/// Index of the maximum entry; ties go to the lowest index.
std::size_t argmax(const Vector& v);

enum class LossKind { ce, kl, cw_margin, mix };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

/// What a loss is measured against. `dist` is a point on the simplex used by
/// ce/kl/mix; `label` is the original class used by the margin term.
struct LossTarget {
  Vector dist;
  std::size_t label = 0;
  double kappa = 0.0;

  static LossTarget one_hot(std::size_t label, std::size_t num_classes, double kappa = 0.0);
};

struct GradientBundle {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
  std::optional<Vector> input;

  static GradientBundle zeros_like(const Network& net);
  void add(const GradientBundle& other);
  void scale(double s);
  bool all_finite() const;
  bool matches(const Network& net) const;
};

/// Backpropagates an arbitrary gradient on the logits.
GradientBundle backprop_logits(const Network& net, const ForwardTrace& trace,
                               const Vector& logit_grad, bool with_input = true);

/// Exact gradients of the selected loss with respect to every parameter and
/// the input.
GradientBundle backward(const Network& net, const ForwardTrace& trace, const LossTarget& target,
                        LossKind kind, bool with_input = true);

/// Backpropagates a logit gradient to the input only.
Vector input_gradient_from_logits(const Network& net, const ForwardTrace& trace,
                                  const Vector& logit_grad);

/// Gradient of the loss with respect to the input only.
Vector input_gradient(const Network& net, const Vector& x, const LossTarget& target,
                      LossKind kind, double* loss_out = nullptr);

struct SgdParams {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

struct MomentumState {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  bool empty() const { return weight.empty(); }
};

/// v <- momentum * v + (g + weight_decay * theta); theta <- theta - lr * v.
/// Biases are decayed like weights.
void sgd_step(Network& net, const GradientBundle& grads, const SgdParams& params,
              MomentumState& state);

}  // namespace catlab
