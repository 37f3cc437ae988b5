// Scalar-in, scalar-out feedforward network with batched forward/backward
// passes over Eigen matrices (one column per sample).

#ifndef CCIDENT_MLP_HPP
#define CCIDENT_MLP_HPP

#include "ccident/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccident {

enum class Activation {
  ReLU,
  LeakyReLU,
  Tanh,
  Sigmoid,
  SiLU,
  Sin,
  GeLU,
  SeLU,
  SoftPlus,
  RReLU  // evaluation mode: fixed negative slope (1/8 + 1/3) / 2
};

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view s);
const std::vector<Activation>& all_activations();

namespace act {

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kRReLUSlope = (1.0 / 8.0 + 1.0 / 3.0) / 2.0;
inline constexpr double kSeluScale = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline constexpr double kSoftplusThreshold = 20.0;

template <typename Scalar>
Scalar value(Activation a, Scalar z) {
  using std::exp;
  switch (a) {
    case Activation::ReLU: return z > 0 ? z : Scalar(0);
    case Activation::LeakyReLU: return z > 0 ? z : Scalar(kLeakySlope) * z;
    case Activation::RReLU: return z >= 0 ? z : Scalar(kRReLUSlope) * z;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return Scalar(1) / (Scalar(1) + exp(-z));
    case Activation::SiLU: return z / (Scalar(1) + exp(-z));
    case Activation::Sin: return std::sin(z);
    case Activation::GeLU:
      return Scalar(0.5) * z * (Scalar(1) + std::erf(z / Scalar(M_SQRT2)));
    case Activation::SeLU:
      return Scalar(kSeluScale) *
             (z > 0 ? z : Scalar(kSeluAlpha) * std::expm1(z));
    case Activation::SoftPlus:
      return z > Scalar(kSoftplusThreshold) ? z : std::log1p(exp(z));
  }
  return z;
}

template <typename Scalar>
Scalar derivative(Activation a, Scalar z) {
  using std::exp;
  switch (a) {
    case Activation::ReLU: return z > 0 ? Scalar(1) : Scalar(0);
    case Activation::LeakyReLU: return z > 0 ? Scalar(1) : Scalar(kLeakySlope);
    case Activation::RReLU: return z >= 0 ? Scalar(1) : Scalar(kRReLUSlope);
    case Activation::Tanh: {
      const Scalar t = std::tanh(z);
      return Scalar(1) - t * t;
    }
    case Activation::Sigmoid: {
      const Scalar s = Scalar(1) / (Scalar(1) + exp(-z));
      return s * (Scalar(1) - s);
    }
    case Activation::SiLU: {
      const Scalar s = Scalar(1) / (Scalar(1) + exp(-z));
      return s * (Scalar(1) + z * (Scalar(1) - s));
    }
    case Activation::Sin: return std::cos(z);
    case Activation::GeLU: {
      const Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(z / Scalar(M_SQRT2)));
      const Scalar pdf = exp(Scalar(-0.5) * z * z) / Scalar(std::sqrt(2 * M_PI));
      return cdf + z * pdf;
    }
    case Activation::SeLU:
      return Scalar(kSeluScale) * (z > 0 ? Scalar(1) : Scalar(kSeluAlpha) * exp(z));
    case Activation::SoftPlus:
      return z > Scalar(kSoftplusThreshold) ? Scalar(1)
                                            : Scalar(1) / (Scalar(1) + exp(-z));
  }
  return Scalar(1);
}

/// Elementwise value; the ReLU family uses vectorized array expressions.
template <typename Derived>
auto apply(Activation a, const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  switch (a) {
    case Activation::ReLU: return Array(z.cwiseMax(Scalar(0)));
    case Activation::LeakyReLU:
      return Array(z.cwiseMax(Scalar(0)) + Scalar(kLeakySlope) * z.cwiseMin(Scalar(0)));
    case Activation::RReLU:
      return Array(z.cwiseMax(Scalar(0)) + Scalar(kRReLUSlope) * z.cwiseMin(Scalar(0)));
    case Activation::Tanh: return Array(z.tanh());
    default:
      return Array(z.unaryExpr([a](Scalar v) { return value(a, v); }));
  }
}

template <typename Derived>
auto apply_derivative(Activation a, const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  switch (a) {
    case Activation::ReLU:
      return Array((z > Scalar(0)).template cast<Scalar>());
    case Activation::Tanh: return Array(Scalar(1) - z.tanh().square());
    default:
      return Array(z.unaryExpr([a](Scalar v) { return derivative(a, v); }));
  }
}

/// In-place variants writing into a preallocated `out` of the same shape.
template <typename In, typename Out>
void apply_into(Activation a, const Eigen::ArrayBase<In>& z,
                Eigen::ArrayBase<Out>& out) {
  using Scalar = typename In::Scalar;
  switch (a) {
    case Activation::ReLU: out = z.cwiseMax(Scalar(0)); return;
    case Activation::Tanh: out = z.tanh(); return;
    default: out = apply(a, z); return;
  }
}

/// out *= act'(z)
template <typename In, typename Out>
void scale_by_derivative(Activation a, const Eigen::ArrayBase<In>& z,
                         Eigen::ArrayBase<Out>& out) {
  using Scalar = typename In::Scalar;
  switch (a) {
    case Activation::ReLU:
      out = (z > Scalar(0)).select(out, Scalar(0));
      return;
    case Activation::Tanh: out *= Scalar(1) - z.tanh().square(); return;
    default: out *= apply_derivative(a, z); return;
  }
}

}  // namespace act

/// Layer widths [1, H, ..., H, 1]; hidden layers use the activation, the
/// output layer is affine.
template <typename Scalar = double>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  /// Pre-activations and activations of every layer from the last batch,
  /// plus backward scratch. Reusing a cache across calls of the same batch
  /// size avoids reallocation.
  struct Cache {
    Matrix input;  // 1 x N
    std::vector<Matrix> pre;   // Z_l = W_l A_{l-1} + b_l
    std::vector<Matrix> post;  // A_l = act(Z_l), hidden layers only
    Matrix delta, back;
  };

  Mlp() = default;

  /// All parameters zero.
  Mlp(std::vector<int> widths, Activation activation)
      : widths_(std::move(widths)), activation_(activation) {
    if (widths_.size() < 2)
      throw std::invalid_argument("mlp: need at least input and output widths");
    for (int w : widths_)
      if (w <= 0) throw std::invalid_argument("mlp: widths must be positive");
    if (widths_.front() != 1 || widths_.back() != 1)
      throw std::invalid_argument("mlp: input and output widths must be 1");
    for (std::size_t l = 1; l < widths_.size(); ++l) {
      weights_.push_back(Matrix::Zero(widths_[l], widths_[l - 1]));
      biases_.push_back(Vector::Zero(widths_[l]));
    }
  }

  /// Weights uniform in +-sqrt(6 / fan_in), biases zero.
  static Mlp init(std::vector<int> widths, Activation activation,
                  std::uint64_t seed) {
    Mlp net(std::move(widths), activation);
    Xoshiro256 rng(seed);
    for (auto& w : net.weights_) {
      const double bound = std::sqrt(6.0 / double(w.cols()));
      // Row-major fill order, matching the export order.
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c)
          w(r, c) = Scalar(rng.uniform(-bound, bound));
    }
    return net;
  }

  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return activation_; }
  std::size_t layers() const { return weights_.size(); }
  Matrix& weight(std::size_t l) { return weights_[l]; }
  const Matrix& weight(std::size_t l) const { return weights_[l]; }
  Vector& bias(std::size_t l) { return biases_[l]; }
  const Vector& bias(std::size_t l) const { return biases_[l]; }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < layers(); ++l)
      n += weights_[l].size() + biases_[l].size();
    return n;
  }

  /// Single-sample forward pass.
  Scalar operator()(Scalar z) const {
    const std::size_t n = layers();
    if (n == 1) return weights_[0](0, 0) * z + biases_[0][0];
    Vector h = (weights_[0].col(0) * z + biases_[0]).unaryExpr(
        [a = activation_](Scalar v) { return act::value(a, v); });
    for (std::size_t l = 1; l + 1 < n; ++l) {
      Vector zl = biases_[l];
      zl.noalias() += weights_[l] * h;
      h = act::apply(activation_, zl.array()).matrix();
    }
    return weights_[n - 1].row(0).dot(h) + biases_[n - 1][0];
  }

  RowVector forward(const RowVector& zs) const {
    Cache c;
    return forward(zs, c);
  }

  RowVector forward(const RowVector& zs, Cache& cache) const {
    const std::size_t n = layers();
    cache.input = zs;
    cache.pre.resize(n);
    cache.post.resize(n - 1);
    for (std::size_t l = 0; l < n; ++l) {
      const Matrix& prev = l == 0 ? cache.input : cache.post[l - 1];
      Matrix& z = cache.pre[l];
      z.resize(weights_[l].rows(), prev.cols());
      z.noalias() = weights_[l] * prev;
      z.colwise() += biases_[l];
      if (l + 1 < n) {
        cache.post[l].resize(z.rows(), z.cols());
        auto out = cache.post[l].array();
        act::apply_into(activation_, z.array(), out);
      }
    }
    return cache.pre[n - 1];
  }

  /// Reverse-mode pass for dL/d(output) = `dout`; writes parameter gradients
  /// into `grad`, which must have this network's shape.
  void backward(Cache& cache, const RowVector& dout, Mlp& grad) const {
    const std::size_t n = layers();
    Matrix& delta = cache.delta;
    Matrix& back = cache.back;
    delta = dout;
    for (std::size_t l = n; l-- > 0;) {
      const Matrix& prev = l == 0 ? cache.input : cache.post[l - 1];
      grad.weights_[l].noalias() = delta * prev.transpose();
      grad.biases_[l] = delta.rowwise().sum();
      if (l == 0) break;
      back.resize(weights_[l].cols(), delta.cols());
      back.noalias() = weights_[l].transpose() * delta;
      auto b = back.array();
      act::scale_by_derivative(activation_, cache.pre[l - 1].array(), b);
      delta.swap(back);
    }
  }

  /// Applies f(param, other...) to every tensor pair, layer by layer:
  /// weights then biases.
  template <typename F>
  void zip(const Mlp& other, F&& f) {
    for (std::size_t l = 0; l < layers(); ++l) {
      f(weights_[l], other.weights_[l]);
      f(biases_[l], other.biases_[l]);
    }
  }

  /// Parameters in export order: per layer, weights row-major then biases.
  Vector flatten() const {
    Vector out(parameter_count());
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < layers(); ++l) {
      for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights_[l].cols(); ++c)
          out[k++] = weights_[l](r, c);
      for (Eigen::Index r = 0; r < biases_[l].size(); ++r) out[k++] = biases_[l][r];
    }
    return out;
  }

  void unflatten(const Eigen::Ref<const Vector>& p) {
    if (p.size() != parameter_count())
      throw std::invalid_argument("mlp: parameter vector has wrong length");
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < layers(); ++l) {
      for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights_[l].cols(); ++c)
          weights_[l](r, c) = p[k++];
      for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l][r] = p[k++];
    }
  }

 private:
  std::vector<int> widths_;
  Activation activation_ = Activation::ReLU;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

/// [1, H x layers, 1]
inline std::vector<int> mlp_widths(int neurons, int hidden_layers) {
  std::vector<int> w{1};
  for (int i = 0; i < hidden_layers; ++i) w.push_back(neurons);
  w.push_back(1);
  return w;
}

}  // namespace ccident

#endif  // CCIDENT_MLP_HPP
