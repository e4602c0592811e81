#include "sdisc/model.hpp"

#include <cmath>

namespace sdisc {

std::size_t GeneratorParams::size() const {
  std::size_t s = skew.size() + lambda.size();
  for (const DenseLayer& l : layers) s += l.weight.size() + l.bias.size();
  return s;
}

std::vector<double> GeneratorParams::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  out.insert(out.end(), skew.begin(), skew.end());
  out.insert(out.end(), lambda.begin(), lambda.end());
  for (const DenseLayer& l : layers) {
    out.insert(out.end(), l.weight.begin(), l.weight.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void GeneratorParams::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw shape_error("flattened parameter length mismatch");
  auto it = flat.begin();
  auto take = [&it](std::vector<double>& dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  take(skew);
  take(lambda);
  for (DenseLayer& l : layers) {
    take(l.weight);
    take(l.bias);
  }
}

GeneratorParams zero_params(const ModelShape& shape) {
  require_even_dimension(shape.n);
  if (shape.hidden < 1 || shape.hidden_layers < 0 || shape.outputs < 1) {
    throw argument_error("model widths must be positive");
  }
  const int r = shape.n / 2;
  const auto freqs = primitive_set(shape.bandwidth, r);
  GeneratorParams p;
  p.n = shape.n;
  p.skew.assign(static_cast<std::size_t>(shape.n * (shape.n - 1) / 2), 0.0);
  p.lambda.assign(static_cast<std::size_t>(r), 0.0);
  int in = feature_width(freqs.size(), r);
  for (int l = 0; l <= shape.hidden_layers; ++l) {
    const int out = l < shape.hidden_layers ? shape.hidden : shape.outputs;
    DenseLayer layer;
    layer.inputs = in;
    layer.outputs = out;
    layer.weight.assign(static_cast<std::size_t>(in) * out, 0.0);
    layer.bias.assign(static_cast<std::size_t>(out), 0.0);
    p.layers.push_back(std::move(layer));
    in = out;
  }
  return p;
}

void validate(const GeneratorParams& params, std::span<const FrequencyVector> freqs) {
  require_even_dimension(params.n);
  const int r = params.r();
  if (params.skew.size() != static_cast<std::size_t>(params.n * (params.n - 1) / 2)) {
    throw shape_error("skew parameter count must be n(n-1)/2");
  }
  if (params.lambda.size() != static_cast<std::size_t>(r)) throw shape_error("lambda must have length n / 2");
  if (params.layers.empty()) throw shape_error("model has no layers");
  int in = feature_width(freqs.size(), r);
  for (const DenseLayer& l : params.layers) {
    if (l.inputs != in) throw shape_error("layer shapes do not chain");
    if (l.weight.size() != static_cast<std::size_t>(l.inputs) * l.outputs ||
        l.bias.size() != static_cast<std::size_t>(l.outputs)) {
      throw shape_error("layer storage does not match its declared shape");
    }
    in = l.outputs;
  }
  for (const FrequencyVector& m : freqs) {
    if (m.size() != static_cast<std::size_t>(r)) throw dimension_error("frequency length differs from n / 2");
  }
}

Matrix alignment_matrix(const GeneratorParams& params) {
  require_even_dimension(params.n);
  return matrix_exp(Generator::from_matrix(skew_from_params(params.skew, params.n)), 1.0);
}

std::vector<double> align(std::span<const double> x, const GeneratorParams& params) {
  const Matrix q = alignment_matrix(params);
  if (x.size() != static_cast<std::size_t>(params.n)) throw shape_error("input length differs from n");
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Vector z = q.transpose() * xv;
  return {z.data(), z.data() + z.size()};
}

FeatureBundle featurize(std::span<const double> x, const GeneratorParams& params,
                        std::span<const FrequencyVector> freqs) {
  const std::vector<double> flat = params.flatten();
  const ParamView<double> view = view_params<double>(params, flat);
  const std::vector<double> q = alignment_matrix<double>(view);
  const std::vector<double> z = align_with<double>(q, params.n, x);
  const std::vector<double> f = feature_vector<double>(z, freqs);
  FeatureBundle b;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    b.cosine.push_back(f[2 * i]);
    b.sine.push_back(f[2 * i + 1]);
  }
  b.radii.assign(f.begin() + static_cast<std::ptrdiff_t>(2 * freqs.size()), f.end());
  return b;
}

std::vector<double> predict(std::span<const double> x, const GeneratorParams& params,
                            std::span<const FrequencyVector> freqs) {
  return Predictor(params, {freqs.begin(), freqs.end()})(x);
}

std::map<FrequencyVector, double> coefficient_norms(const GeneratorParams& params,
                                                    std::span<const FrequencyVector> freqs) {
  validate(params, freqs);
  const DenseLayer& first = params.layers.front();
  std::map<FrequencyVector, double> out;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    double s = 0.0;
    for (int h = 0; h < first.outputs; ++h) {
      const std::size_t row = static_cast<std::size_t>(h) * first.inputs;
      s += first.weight[row + 2 * i] * first.weight[row + 2 * i];
      s += first.weight[row + 2 * i + 1] * first.weight[row + 2 * i + 1];
    }
    out[freqs[i]] = std::sqrt(s);
  }
  return out;
}

double resonance_penalty(const GeneratorParams& params, std::span<const FrequencyVector> freqs) {
  validate(params, freqs);
  const std::vector<double> flat = params.flatten();
  return resonance_penalty_of<double>(view_params<double>(params, flat), freqs);
}

Predictor::Predictor(GeneratorParams params, std::vector<FrequencyVector> freqs)
    : params_(std::move(params)), freqs_(std::move(freqs)) {
  validate(params_, freqs_);
  flat_ = params_.flatten();
  q_ = alignment_matrix<double>(view_params<double>(params_, flat_));
}

std::vector<double> Predictor::operator()(std::span<const double> x) const {
  const ParamView<double> view = view_params<double>(params_, flat_);
  return predict_with<double>(view, q_, freqs_, x);
}

}  // namespace sdisc
