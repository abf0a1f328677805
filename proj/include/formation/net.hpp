#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "formation/errors.hpp"

namespace formation {

/// Default Q-network shape: 8 observation features, two hidden rectifier
/// layers, one linear output per action.
inline const std::vector<int> kDefaultArch = {8, 64, 64, 8};

template <typename Scalar>
struct DenseLayer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix w;  // out x in
  Vector b;  // out
};

/// Per-parameter arrays with the same layout as a network's layers. Used for
/// gradients and optimizer moments.
template <typename Scalar>
using LayerArrays = std::vector<DenseLayer<Scalar>>;

template <typename Scalar>
LayerArrays<Scalar> zeros_like(const LayerArrays<Scalar>& like) {
  LayerArrays<Scalar> out(like.size());
  for (std::size_t i = 0; i < like.size(); ++i) {
    out[i].w.setZero(like[i].w.rows(), like[i].w.cols());
    out[i].b.setZero(like[i].b.size());
  }
  return out;
}

/// Fully connected network: rectifier on every hidden layer, identity on the
/// output layer. Samples are stored column-wise in batched calls.
template <typename Scalar>
class Network {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Network() : Network(kDefaultArch) {}

  /// All-zero parameters of the given shape.
  explicit Network(std::vector<int> arch) : arch_(std::move(arch)) {
    if (arch_.size() < 2) throw ShapeError("network needs at least two layers");
    for (int n : arch_) {
      if (n <= 0) throw ShapeError("layer sizes must be positive");
    }
    layers_.resize(arch_.size() - 1);
    for (std::size_t i = 0; i + 1 < arch_.size(); ++i) {
      layers_[i].w.setZero(arch_[i + 1], arch_[i]);
      layers_[i].b.setZero(arch_[i + 1]);
    }
  }

  const std::vector<int>& arch() const { return arch_; }
  int input_size() const { return arch_.front(); }
  int output_size() const { return arch_.back(); }

  LayerArrays<Scalar>& layers() { return layers_; }
  const LayerArrays<Scalar>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) {
      n += static_cast<std::size_t>(l.w.size() + l.b.size());
    }
    return n;
  }

  /// Flat parameter access in layer order, weights (column-major) then biases.
  Scalar& parameter(std::size_t index) { return ref(layers_, index); }
  Scalar parameter(std::size_t index) const {
    return ref(const_cast<LayerArrays<Scalar>&>(layers_), index);
  }

  bool all_finite() const {
    for (const auto& l : layers_) {
      if (!l.w.allFinite() || !l.b.allFinite()) return false;
    }
    return true;
  }

  Matrix forward_batch(const Eigen::Ref<const Matrix>& x) const {
    if (x.rows() != input_size()) {
      throw ShapeError("forward: expected " + std::to_string(input_size()) +
                       " input rows, got " + std::to_string(x.rows()));
    }
    Matrix a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Matrix z = layers_[i].w * a;
      z.colwise() += layers_[i].b;
      if (i + 1 < layers_.size()) z = z.cwiseMax(Scalar(0));
      a = std::move(z);
    }
    return a;
  }

  Vector forward(const Eigen::Ref<const Vector>& x) const {
    return forward_batch(x);
  }

  friend bool operator==(const Network& l, const Network& r) {
    if (l.arch_ != r.arch_) return false;
    for (std::size_t i = 0; i < l.layers_.size(); ++i) {
      if (l.layers_[i].w != r.layers_[i].w || l.layers_[i].b != r.layers_[i].b)
        return false;
    }
    return true;
  }

  static Scalar& ref(LayerArrays<Scalar>& arrays, std::size_t index) {
    for (auto& l : arrays) {
      const auto nw = static_cast<std::size_t>(l.w.size());
      if (index < nw) return l.w.data()[index];
      index -= nw;
      const auto nb = static_cast<std::size_t>(l.b.size());
      if (index < nb) return l.b.data()[index];
      index -= nb;
    }
    throw ShapeError("parameter index out of range");
  }

 private:
  std::vector<int> arch_;
  LayerArrays<Scalar> layers_;
};

/// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
template <typename Scalar = double>
Network<Scalar> init_network(std::uint64_t seed,
                             const std::vector<int>& arch = kDefaultArch) {
  Network<Scalar> net(arch);
  std::mt19937_64 rng(seed);
  for (auto& l : net.layers()) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(l.w.rows() + l.w.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index j = 0; j < l.w.cols(); ++j) {
      for (Eigen::Index i = 0; i < l.w.rows(); ++i) {
        l.w(i, j) = static_cast<Scalar>(u(rng));
      }
    }
  }
  return net;
}

template <typename Scalar>
typename Network<Scalar>::Vector forward(
    const Network<Scalar>& net,
    const Eigen::Ref<const typename Network<Scalar>::Vector>& features) {
  return net.forward(features);
}

enum class LossKind { Mse, Huber };

template <typename Scalar>
struct LossAndGradients {
  Scalar loss = 0;
  LayerArrays<Scalar> grads;
};

/// Mean over the batch of the squared (or Huber, delta = 1) error between the
/// selected action's Q-value and its target. Only the selected output receives
/// gradient.
template <typename Scalar>
LossAndGradients<Scalar> loss_and_gradients(
    const Network<Scalar>& net,
    const Eigen::Ref<const typename Network<Scalar>::Matrix>& features,
    std::span<const int> actions, std::span<const Scalar> targets,
    LossKind kind = LossKind::Mse) {
  using Matrix = typename Network<Scalar>::Matrix;
  const Eigen::Index batch = features.cols();
  if (batch == 0) throw InvalidArgument("loss_and_gradients: empty batch");
  if (static_cast<std::size_t>(batch) != actions.size() ||
      actions.size() != targets.size()) {
    throw ShapeError("loss_and_gradients: batch arrays differ in length");
  }
  if (features.rows() != net.input_size()) {
    throw ShapeError("loss_and_gradients: wrong feature count");
  }
  const auto& layers = net.layers();
  const std::size_t depth = layers.size();

  // Forward, keeping every layer's input activation.
  std::vector<Matrix> acts(depth + 1);
  acts[0] = features;
  for (std::size_t i = 0; i < depth; ++i) {
    Matrix z = layers[i].w * acts[i];
    z.colwise() += layers[i].b;
    if (i + 1 < depth) z = z.cwiseMax(Scalar(0));
    acts[i + 1] = std::move(z);
  }

  const Matrix& q = acts[depth];
  Matrix delta = Matrix::Zero(q.rows(), batch);
  Scalar loss = 0;
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(batch);
  for (Eigen::Index k = 0; k < batch; ++k) {
    const int a = actions[static_cast<std::size_t>(k)];
    if (a < 0 || a >= q.rows()) {
      throw InvalidArgument("loss_and_gradients: action out of range");
    }
    const Scalar err = q(a, k) - targets[static_cast<std::size_t>(k)];
    if (kind == LossKind::Mse) {
      loss += err * err;
      delta(a, k) = 2 * err * inv_b;
    } else {
      const Scalar ae = std::abs(err);
      loss += ae <= 1 ? Scalar(0.5) * err * err : ae - Scalar(0.5);
      delta(a, k) = (ae <= 1 ? err : (err > 0 ? Scalar(1) : Scalar(-1))) * inv_b;
    }
  }

  LossAndGradients<Scalar> out;
  out.loss = loss * inv_b;
  out.grads.resize(depth);
  for (std::size_t i = depth; i-- > 0;) {
    out.grads[i].w.noalias() = delta * acts[i].transpose();
    out.grads[i].b = delta.rowwise().sum();
    if (i > 0) {
      Matrix back = layers[i].w.transpose() * delta;
      // Rectifier derivative: active where the post-activation is positive.
      delta = back.cwiseProduct(
          (acts[i].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
  }
  return out;
}

template <typename Scalar>
struct AdamState {
  LayerArrays<Scalar> m;
  LayerArrays<Scalar> v;
  std::int64_t step = 0;
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);

  AdamState() = default;
  explicit AdamState(const Network<Scalar>& net)
      : m(zeros_like(net.layers())), v(zeros_like(net.layers())) {}
};

namespace detail {

template <typename Scalar>
void check_same_shape(const LayerArrays<Scalar>& a,
                      const LayerArrays<Scalar>& b, const char* what) {
  bool ok = a.size() == b.size();
  for (std::size_t i = 0; ok && i < a.size(); ++i) {
    ok = a[i].w.rows() == b[i].w.rows() && a[i].w.cols() == b[i].w.cols() &&
         a[i].b.size() == b[i].b.size();
  }
  if (!ok) throw ShapeError(std::string(what) + ": shape mismatch");
}

}  // namespace detail

/// Bias-corrected Adam update applied to every parameter in place.
template <typename Scalar>
void adam_step(Network<Scalar>& net, AdamState<Scalar>& state,
               const LayerArrays<Scalar>& grads, Scalar lr = Scalar(0.0003)) {
  detail::check_same_shape(net.layers(), grads, "adam_step");
  detail::check_same_shape(net.layers(), state.m, "adam_step");
  detail::check_same_shape(net.layers(), state.v, "adam_step");
  ++state.step;
  const Scalar b1 = state.beta1;
  const Scalar b2 = state.beta2;
  const Scalar c1 =
      Scalar(1) - std::pow(b1, static_cast<Scalar>(state.step));
  const Scalar c2 =
      Scalar(1) - std::pow(b2, static_cast<Scalar>(state.step));
  const Scalar eps = state.epsilon;
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) /
                 ((v.array() / c2).sqrt() + eps);
  };
  auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].w, state.m[i].w, state.v[i].w, grads[i].w);
    update(layers[i].b, state.m[i].b, state.v[i].b, grads[i].b);
  }
}

template <typename Scalar>
using GradientFn = std::function<LossAndGradients<Scalar>(
    const Network<Scalar>&,
    const Eigen::Ref<const typename Network<Scalar>::Matrix>&,
    std::span<const int>, std::span<const Scalar>)>;

struct GradientCheckOptions {
  int batch_size = 16;
  int parameters = 100;
  double step = 1e-6;
  // Inputs whose hidden pre-activations fall inside this band are nudged by
  // `nudge` until they clear it, so no finite difference straddles a kink.
  double kink_margin = 1e-4;
  double nudge = 1e-3;
  // Denominator floor of the relative error; below it the check is absolute.
  double scale_floor = 1e-4;
  bool zero_inputs = false;
};

/// Worst relative error between analytic gradients and central finite
/// differences of the batch loss, over randomly chosen parameters.
template <typename Scalar>
Scalar gradient_check(const Network<Scalar>& net, std::mt19937_64& rng,
                      const GradientCheckOptions& opt = {},
                      GradientFn<Scalar> grad_fn = {}) {
  using Matrix = typename Network<Scalar>::Matrix;
  if (!grad_fn) {
    grad_fn = [](const Network<Scalar>& n,
                 const Eigen::Ref<const Matrix>& x, std::span<const int> a,
                 std::span<const Scalar> y) {
      return loss_and_gradients<Scalar>(n, x, a, y);
    };
  }
  const int in = net.input_size();
  const int out = net.output_size();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> pick_action(0, out - 1);

  Matrix x(in, opt.batch_size);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    x.data()[k] = opt.zero_inputs ? Scalar(0) : static_cast<Scalar>(unit(rng));
  }
  std::vector<int> actions(static_cast<std::size_t>(opt.batch_size));
  std::vector<Scalar> targets(actions.size());
  for (std::size_t k = 0; k < actions.size(); ++k) {
    actions[k] = pick_action(rng);
    targets[k] = static_cast<Scalar>(unit(rng));
  }

  // Move samples away from rectifier kinks.
  const auto& layers = net.layers();
  for (int attempt = 0; attempt < 100; ++attempt) {
    bool clear = true;
    Matrix a = x;
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
      Matrix z = layers[i].w * a;
      z.colwise() += layers[i].b;
      for (Eigen::Index k = 0; k < z.cols(); ++k) {
        if ((z.col(k).array().abs() < Scalar(opt.kink_margin)).any()) {
          clear = false;
          for (Eigen::Index r = 0; r < x.rows(); ++r) {
            x(r, k) += static_cast<Scalar>(opt.nudge * unit(rng));
          }
        }
      }
      a = z.cwiseMax(Scalar(0));
    }
    if (clear) break;
  }

  const auto analytic = grad_fn(net, x, actions, targets);
  const std::size_t total = net.parameter_count();
  std::uniform_int_distribution<std::size_t> pick_param(0, total - 1);
  Network<Scalar> probe = net;
  Scalar worst = 0;
  const Scalar h = static_cast<Scalar>(opt.step);
  for (int p = 0; p < opt.parameters; ++p) {
    const std::size_t idx = pick_param(rng);
    const Scalar orig = probe.parameter(idx);
    probe.parameter(idx) = orig + h;
    const Scalar up = loss_and_gradients<Scalar>(probe, x, actions, targets).loss;
    probe.parameter(idx) = orig - h;
    const Scalar down =
        loss_and_gradients<Scalar>(probe, x, actions, targets).loss;
    probe.parameter(idx) = orig;
    const Scalar numeric = (up - down) / (2 * h);
    const Scalar exact = Network<Scalar>::ref(
        const_cast<LayerArrays<Scalar>&>(analytic.grads), idx);
    const Scalar scale = std::max(std::abs(numeric) + std::abs(exact),
                                  static_cast<Scalar>(opt.scale_floor));
    worst = std::max(worst, std::abs(numeric - exact) / scale);
  }
  return worst;
}

// Weight files. Double precision only: the on-disk format is the contract for
// bit-exact reloading.

struct WeightMeta {
  std::string model_kind = "keep";  // "reach" | "keep"
  std::uint64_t seed = 0;
  std::int64_t episodes = 0;
};

struct WeightFile {
  Network<double> net;
  double d_max = 3.0;
  WeightMeta meta;
};

std::string serialize_weights(const WeightFile& file);
WeightFile parse_weights(const std::string& text,
                         const std::vector<int>& expected_arch = kDefaultArch);

void save_weights(const WeightFile& file, const std::string& path);
WeightFile load_weights(const std::string& path,
                        const std::vector<int>& expected_arch = kDefaultArch);

}  // namespace formation
