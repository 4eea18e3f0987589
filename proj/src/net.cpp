#include "catlab/net.hpp"

#include <cmath>
#include <string>

#include "catlab/errors.hpp"
#include "catlab/losses.hpp"
#include "catlab/rng.hpp"

namespace catlab {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::ce: return "ce";
    case LossKind::kl: return "kl";
    case LossKind::cw_margin: return "cw_margin";
    case LossKind::mix: return "mix";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "ce") return LossKind::ce;
  if (s == "kl") return LossKind::kl;
  if (s == "cw_margin" || s == "cw") return LossKind::cw_margin;
  if (s == "mix") return LossKind::mix;
  throw ConfigError("unknown loss kind '" + s + "'");
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.weight.rows() == 0 || l.weight.cols() == 0)
      throw ConfigError("layer " + std::to_string(i) + " has an empty weight matrix");
    if (l.bias.size() != l.weight.rows())
      throw ConfigError("layer " + std::to_string(i) + " bias size does not match weight rows");
    if (i + 1 < layers_.size() && layers_[i + 1].in_dim() != l.out_dim())
      throw ConfigError("layer " + std::to_string(i) + " output dim " +
                        std::to_string(l.out_dim()) + " does not chain into layer " +
                        std::to_string(i + 1) + " input dim " +
                        std::to_string(layers_[i + 1].in_dim()));
  }
  if (layers_.back().activation != Activation::identity)
    throw ConfigError("final layer must have identity activation");
  if (num_classes() < 2) throw ConfigError("network needs at least 2 classes");
  if (!all_finite()) throw ConfigError("network parameters must be finite");
}

std::vector<std::size_t> Network::arch() const {
  std::vector<std::size_t> a{input_dim()};
  for (const Layer& l : layers_) a.push_back(l.out_dim());
  return a;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool Network::all_finite() const {
  for (const Layer& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

bool Network::operator==(const Network& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& a = layers_[i];
    const Layer& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight || a.bias != b.bias)
      return false;
  }
  return true;
}

Network init_network(std::span<const std::size_t> arch, std::size_t num_classes,
                     std::uint64_t seed) {
  if (arch.size() < 2)
    throw ConfigError("architecture needs an input size and at least one layer size");
  if (arch.back() != num_classes)
    throw ConfigError("final layer size " + std::to_string(arch.back()) +
                      " does not equal the number of classes " + std::to_string(num_classes));
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < arch.size(); ++i) {
    const std::size_t in = arch[i];
    const std::size_t out = arch[i + 1];
    if (in == 0 || out == 0) throw ConfigError("layer sizes must be positive");
    Rng rng = make_stream(seed, "init", i);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer layer;
    layer.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = uniform(rng, -limit, limit);
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(out));
    layer.activation = (i + 2 == arch.size()) ? Activation::identity : Activation::relu;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

std::size_t argmax(const Vector& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  return best;
}

std::size_t ForwardTrace::predicted() const { return argmax(logits); }

ForwardTrace forward(const Network& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim())
    throw DimensionError("input has dim " + std::to_string(x.size()) + ", network expects " +
                         std::to_string(net.input_dim()));
  ForwardTrace t;
  t.pre.reserve(net.depth());
  t.post.reserve(net.depth() + 1);
  t.post.push_back(x);
  for (const Layer& l : net.layers()) {
    Vector z = l.weight * t.post.back() + l.bias;
    Vector a = (l.activation == Activation::relu) ? Vector(z.cwiseMax(0.0)) : z;
    t.pre.push_back(std::move(z));
    t.post.push_back(std::move(a));
  }
  t.logits = t.post.back();
  const double m = t.logits.maxCoeff();
  const double lse = m + std::log((t.logits.array() - m).exp().sum());
  t.log_probs = t.logits.array() - lse;
  t.probs = t.log_probs.array().exp();
  return t;
}

Vector logits(const Network& net, const Vector& x) { return forward(net, x).logits; }

std::size_t predict(const Network& net, const Vector& x) { return argmax(logits(net, x)); }

LossTarget LossTarget::one_hot(std::size_t label, std::size_t num_classes, double kappa) {
  LossTarget t;
  t.dist = Vector::Zero(static_cast<Eigen::Index>(num_classes));
  t.dist[static_cast<Eigen::Index>(label)] = 1.0;
  t.label = label;
  t.kappa = kappa;
  return t;
}

GradientBundle GradientBundle::zeros_like(const Network& net) {
  GradientBundle g;
  for (const Layer& l : net.layers()) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

void GradientBundle::add(const GradientBundle& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  if (input && other.input) *input += *other.input;
}

void GradientBundle::scale(double s) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] *= s;
    bias[i] *= s;
  }
  if (input) *input *= s;
}

bool GradientBundle::all_finite() const {
  for (std::size_t i = 0; i < weight.size(); ++i)
    if (!weight[i].allFinite() || !bias[i].allFinite()) return false;
  return !input || input->allFinite();
}

bool GradientBundle::matches(const Network& net) const {
  if (weight.size() != net.depth() || bias.size() != net.depth()) return false;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    const Layer& l = net.layer(i);
    if (weight[i].rows() != l.weight.rows() || weight[i].cols() != l.weight.cols() ||
        bias[i].size() != l.bias.size())
      return false;
  }
  return !input || static_cast<std::size_t>(input->size()) == net.input_dim();
}

GradientBundle backprop_logits(const Network& net, const ForwardTrace& trace,
                               const Vector& logit_grad, bool with_input) {
  const std::size_t depth = net.depth();
  GradientBundle g;
  g.weight.resize(depth);
  g.bias.resize(depth);
  Vector delta = logit_grad;  // dL/d(pre) of the current layer
  for (std::size_t k = depth; k-- > 0;) {
    const Layer& l = net.layer(k);
    if (l.activation == Activation::relu) {
      // subgradient of relu at 0 is 0
      delta = (trace.pre[k].array() > 0.0).select(delta, 0.0);
    }
    g.weight[k].noalias() = delta * trace.post[k].transpose();
    g.bias[k] = delta;
    if (k > 0 || with_input) delta = l.weight.transpose() * delta;
  }
  if (with_input) g.input = std::move(delta);
  return g;
}

GradientBundle backward(const Network& net, const ForwardTrace& trace, const LossTarget& target,
                        LossKind kind, bool with_input) {
  return backprop_logits(net, trace, loss_logit_gradient(kind, trace, target), with_input);
}

Vector input_gradient_from_logits(const Network& net, const ForwardTrace& trace,
                                  const Vector& logit_grad) {
  Vector delta = logit_grad;
  for (std::size_t k = net.depth(); k-- > 0;) {
    const Layer& l = net.layer(k);
    if (l.activation == Activation::relu) delta = (trace.pre[k].array() > 0.0).select(delta, 0.0);
    delta = l.weight.transpose() * delta;
  }
  return delta;
}

Vector input_gradient(const Network& net, const Vector& x, const LossTarget& target,
                      LossKind kind, double* loss_out) {
  const ForwardTrace t = forward(net, x);
  if (loss_out) *loss_out = loss_value(kind, t, target);
  return input_gradient_from_logits(net, t, loss_logit_gradient(kind, t, target));
}

void sgd_step(Network& net, const GradientBundle& grads, const SgdParams& params,
              MomentumState& state) {
  if (!grads.matches(net)) throw DimensionError("gradient shapes do not match the network");
  if (!grads.all_finite()) throw DivergenceError("non-finite gradient; training diverged");
  if (state.empty()) {
    for (const Layer& l : net.layers()) {
      state.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      state.bias.push_back(Vector::Zero(l.bias.size()));
    }
  }
  for (std::size_t i = 0; i < net.depth(); ++i) {
    Layer& l = net.layer(i);
    state.weight[i] = params.momentum * state.weight[i] + grads.weight[i] +
                      params.weight_decay * l.weight;
    state.bias[i] = params.momentum * state.bias[i] + grads.bias[i] + params.weight_decay * l.bias;
    l.weight -= params.lr * state.weight[i];
    l.bias -= params.lr * state.bias[i];
  }
}

}  // namespace catlab
