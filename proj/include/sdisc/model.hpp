#pragma once

// Predictor: learned alignment z = Q^T x with Q = exp(A), torus Fourier
// features (cos, sin of <m, theta>) plus block radii, and a ReLU MLP head.
//
// The forward pass is written once over the scalar type; T = double is the
// evaluation path and T = ad::Var records onto a tape for training.

#include <cstdint>
#include <map>
#include <span>
#include <type_traits>
#include <vector>

#include "sdisc/autodiff.hpp"
#include "sdisc/errors.hpp"
#include "sdisc/expm.hpp"
#include "sdisc/lie.hpp"
#include "sdisc/spectral.hpp"

namespace sdisc {

inline constexpr double kRadiusFloor = 1e-9;

struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weight;  // outputs x inputs, row-major
  std::vector<double> bias;
};

// Learnable state: skew parameters of A (Q = exp(A)), rotation rates lambda,
// and the MLP layers (hidden layers use ReLU, the last layer is linear).
struct GeneratorParams {
  int n = 0;
  std::vector<double> skew;
  std::vector<double> lambda;
  std::vector<DenseLayer> layers;

  int r() const noexcept { return n / 2; }
  std::size_t size() const;
  // skew, lambda, then weight and bias of each layer.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  // Offset of lambda inside the flattened vector.
  std::size_t lambda_offset() const noexcept { return skew.size(); }
};

struct ModelShape {
  int n = 4;
  int bandwidth = 1;
  int hidden = 16;
  int hidden_layers = 3;
  int outputs = 1;
};

// Width of the MLP input: cos/sin per frequency plus one radius per block.
inline int feature_width(std::size_t frequency_count, int r) {
  return static_cast<int>(2 * frequency_count) + r;
}

// Zero-initialised parameters with correctly chained layer shapes.
GeneratorParams zero_params(const ModelShape& shape);
void validate(const GeneratorParams& params, std::span<const FrequencyVector> freqs);

struct FeatureBundle {
  std::vector<double> cosine;  // one per frequency
  std::vector<double> sine;
  std::vector<double> radii;
};

template <class T>
struct ParamView {
  struct Layer {
    int inputs;
    int outputs;
    std::span<const T> weight;
    std::span<const T> bias;
  };
  int n = 0;
  std::span<const T> skew;
  std::span<const T> lambda;
  std::vector<Layer> layers;
};

// Views the flattened values laid out as GeneratorParams::flatten.
template <class T>
ParamView<T> view_params(const GeneratorParams& shape, std::span<const T> flat) {
  if (flat.size() != shape.size()) throw shape_error("flattened parameter length mismatch");
  ParamView<T> v;
  v.n = shape.n;
  std::size_t at = 0;
  v.skew = flat.subspan(at, shape.skew.size());
  at += shape.skew.size();
  v.lambda = flat.subspan(at, shape.lambda.size());
  at += shape.lambda.size();
  for (const DenseLayer& layer : shape.layers) {
    const std::size_t w = static_cast<std::size_t>(layer.inputs) * layer.outputs;
    typename ParamView<T>::Layer l{layer.inputs, layer.outputs, flat.subspan(at, w), {}};
    at += w;
    l.bias = flat.subspan(at, static_cast<std::size_t>(layer.outputs));
    at += static_cast<std::size_t>(layer.outputs);
    v.layers.push_back(l);
  }
  return v;
}

// Q = exp(A), row-major n x n.
template <class T>
std::vector<T> alignment_matrix(const ParamView<T>& p) {
  const int n = p.n;
  std::vector<T> a(static_cast<std::size_t>(n) * n, T(0.0));
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      a[static_cast<std::size_t>(i) * n + j] = p.skew[k];
      a[static_cast<std::size_t>(j) * n + i] = -p.skew[k];
      ++k;
    }
  }
  return expm<T>(a, n, 1.0);
}

// z = Q^T x.
template <class T>
std::vector<T> align_with(std::span<const T> q, int n, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(n)) throw shape_error("input length differs from n");
  std::vector<T> z(static_cast<std::size_t>(n));
  std::vector<T> col(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) col[j] = q[static_cast<std::size_t>(j) * n + i];
    z[i] = ad::linear(std::span<const T>(col), x);
  }
  return z;
}

// [cos <m_1,theta>, sin <m_1,theta>, ..., r_1, ..., r_r] from an aligned z.
template <class T>
std::vector<T> feature_vector(std::span<const T> z, std::span<const FrequencyVector> freqs) {
  const std::size_t r = z.size() / 2;
  std::vector<T> radii(r);
  std::vector<T> theta(r);
  for (std::size_t k = 0; k < r; ++k) {
    const T& a = z[2 * k];
    const T& b = z[2 * k + 1];
    const T rsq = a * a + b * b;
    if (ad::value_of(rsq) < kRadiusFloor * kRadiusFloor) {
      radii[k] = T(kRadiusFloor);
      theta[k] = T(0.0);
    } else {
      radii[k] = ad::sqrt(rsq);
      theta[k] = ad::atan2(b, a);
    }
  }
  std::vector<T> out;
  out.reserve(2 * freqs.size() + r);
  std::vector<double> coeffs(r);
  for (const FrequencyVector& m : freqs) {
    if (m.size() != r) throw dimension_error("frequency length differs from n / 2");
    for (std::size_t k = 0; k < r; ++k) coeffs[k] = m[k];
    const T phase = ad::linear(std::span<const T>(theta), coeffs);
    out.push_back(ad::cos(phase));
    out.push_back(ad::sin(phase));
  }
  for (std::size_t k = 0; k < r; ++k) out.push_back(radii[k]);
  return out;
}

template <class T>
std::vector<T> mlp_forward(const std::vector<typename ParamView<T>::Layer>& layers, std::vector<T> h) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (h.size() != static_cast<std::size_t>(layer.inputs)) throw shape_error("layer input width mismatch");
    if constexpr (std::is_same_v<T, ad::Var>) h = ad::pack(h);
    std::vector<T> next(static_cast<std::size_t>(layer.outputs));
    const std::span<const T> input(h);
    for (int j = 0; j < layer.outputs; ++j) {
      next[j] = ad::dot(layer.weight.subspan(static_cast<std::size_t>(j) * layer.inputs, layer.inputs), input,
                        layer.bias[j]);
    }
    if (l + 1 < layers.size()) {
      for (T& v : next) v = ad::relu(v);
    }
    h = std::move(next);
  }
  return h;
}

// Full forward pass given a precomputed alignment matrix.
template <class T>
std::vector<T> predict_with(const ParamView<T>& p, std::span<const T> q, std::span<const FrequencyVector> freqs,
                            std::span<const double> x) {
  const std::vector<T> z = align_with<T>(q, p.n, x);
  return mlp_forward<T>(p.layers, feature_vector<T>(z, freqs));
}

// Sum over m of C_m^2 <m, lambda>^2, where C_m^2 is the squared norm of the
// first-layer weights reading the cos and sin channels of m.
template <class T>
T resonance_penalty_of(const ParamView<T>& p, std::span<const FrequencyVector> freqs) {
  if (p.layers.empty()) throw shape_error("model has no layers");
  const auto& first = p.layers.front();
  std::vector<T> terms;
  terms.reserve(freqs.size());
  std::vector<T> column(2 * static_cast<std::size_t>(first.outputs));
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    for (int h = 0; h < first.outputs; ++h) {
      const std::size_t row = static_cast<std::size_t>(h) * first.inputs;
      column[2 * h] = first.weight[row + 2 * i];
      column[2 * h + 1] = first.weight[row + 2 * i + 1];
    }
    const T c_squared = ad::dot(std::span<const T>(column), std::span<const T>(column));
    T resonance = T(0.0);
    for (std::size_t k = 0; k < freqs[i].size(); ++k) resonance = resonance + p.lambda[k] * double(freqs[i][k]);
    terms.push_back(c_squared * ad::square(resonance));
  }
  return ad::sum(std::span<const T>(terms));
}

// Double-precision evaluation API.

Matrix alignment_matrix(const GeneratorParams& params);
std::vector<double> align(std::span<const double> x, const GeneratorParams& params);
FeatureBundle featurize(std::span<const double> x, const GeneratorParams& params,
                        std::span<const FrequencyVector> freqs);
std::vector<double> predict(std::span<const double> x, const GeneratorParams& params,
                            std::span<const FrequencyVector> freqs);
std::map<FrequencyVector, double> coefficient_norms(const GeneratorParams& params,
                                                    std::span<const FrequencyVector> freqs);
double resonance_penalty(const GeneratorParams& params, std::span<const FrequencyVector> freqs);

// Frozen snapshot with Q computed once; cheap repeated prediction.
class Predictor {
 public:
  Predictor(GeneratorParams params, std::vector<FrequencyVector> freqs);

  std::vector<double> operator()(std::span<const double> x) const;
  const GeneratorParams& params() const noexcept { return params_; }
  const std::vector<FrequencyVector>& frequencies() const noexcept { return freqs_; }

 private:
  GeneratorParams params_;
  std::vector<FrequencyVector> freqs_;
  std::vector<double> flat_;
  std::vector<double> q_;
};

}  // namespace sdisc
