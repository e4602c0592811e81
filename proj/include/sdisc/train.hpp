#pragma once

// Joint optimisation of the predictor, the alignment Q = exp(A) and the
// rotation rates lambda under the resonance penalty, plus generator discovery
// from the trained parameters.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdisc/autodiff.hpp"
#include "sdisc/data.hpp"
#include "sdisc/errors.hpp"
#include "sdisc/eval.hpp"
#include "sdisc/lie.hpp"
#include "sdisc/model.hpp"
#include "sdisc/spectral.hpp"

namespace sdisc {

enum class LossKind { squared_error, logistic };
enum class MuRamp { constant, linear };

struct TrainConfig {
  int epochs = 40;
  double lr = 2e-3;
  int batch_size = 128;
  double mu_init = 0.1;
  double mu_max_scale = 2.0;
  int warmup_epochs = 10;
  MuRamp mu_ramp = MuRamp::linear;
  int bandwidth = 1;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::squared_error;
  int hidden = 16;
  int hidden_layers = 3;
  double init_skew_std = 0.1;
  double first_layer_gain = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double surviving_threshold = 0.1;
  InvarianceBudget invariance;

  // Throws argument_error on non-positive sizes or warmup_epochs > epochs.
  void validate() const;
};

// muInit during warm-up, then (linear ramp) up to muInit * muMaxScale at the
// final epoch.
double mu_schedule(int epoch, const TrainConfig& cfg);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then 80 / 10 / 10.
Split split_dataset(std::size_t samples, std::uint64_t seed);

class Adam {
 public:
  Adam(std::size_t size, double lr, double beta1, double beta2, double eps);
  void step(std::span<double> params, std::span<const double> grads);
  long steps() const noexcept { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

// Per-sample loss summed over output dimensions.
template <class T>
T sample_loss(LossKind kind, std::span<const T> out, std::span<const double> y) {
  T total = T(0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (kind == LossKind::squared_error) {
      total = total + ad::square(out[k] - y[k]);
    } else {
      total = total + (ad::softplus(out[k]) - out[k] * y[k]);
    }
  }
  return total;
}

struct ObjectiveParts {
  double data = 0.0;
  double penalty = 0.0;
};

// Mean data loss over `rows` plus mu times the resonance penalty, evaluated
// on flattened parameters laid out like `shape`.
template <class T>
T batch_objective(const GeneratorParams& shape, std::span<const T> flat, std::span<const FrequencyVector> freqs,
                  const Dataset& ds, std::span<const std::size_t> rows, double mu, LossKind kind,
                  ObjectiveParts* parts = nullptr) {
  if (rows.empty()) throw argument_error("batch_objective: empty batch");
  const ParamView<T> view = view_params<T>(shape, flat);
  const std::vector<T> q = alignment_matrix<T>(view);
  std::vector<T> losses;
  losses.reserve(rows.size());
  for (std::size_t i : rows) {
    const std::vector<T> out = predict_with<T>(view, q, freqs, ds.x_row(i));
    losses.push_back(sample_loss<T>(kind, std::span<const T>(out), ds.y_row(i)));
  }
  const double scale = 1.0 / static_cast<double>(rows.size() * static_cast<std::size_t>(ds.outputs));
  const T data = ad::sum(std::span<const T>(losses)) * scale;
  const T penalty = resonance_penalty_of<T>(view, freqs);
  if (parts) *parts = {ad::value_of(data), ad::value_of(penalty)};
  return data + penalty * mu;
}

// Randomly initialised parameters for the configured shape.
GeneratorParams init_params(int n, int outputs, const TrainConfig& cfg);

struct Discovery {
  Generator direct;                     // assemble(exp(A), lambda)
  std::optional<Generator> spectral;    // assemble(exp(A), estimated lambda)
  LambdaEstimate estimate;
  std::vector<FrequencyVector> surviving;
  std::map<FrequencyVector, double> coefficients;
  std::optional<double> agreement;      // cos(direct, spectral)
};

Discovery discover(const GeneratorParams& params, std::span<const FrequencyVector> freqs, double rel_threshold);

struct Metrics {
  std::optional<double> test_mse;
  std::optional<double> accuracy;
  std::optional<double> invariance_error;
  std::optional<double> cosine_similarity;           // signed, direct estimate
  std::optional<double> spectral_cosine_similarity;  // signed, spectral estimate
};

struct RunReport {
  std::string task;
  std::uint64_t seed = 0;
  TrainConfig config;
  std::string status = "ok";
  std::string failure_reason;
  Metrics metrics;
  std::vector<double> recovered_lambda;
  std::vector<double> spectral_lambda;
  int nullity = 0;
  std::vector<double> singular_values;
  std::vector<FrequencyVector> surviving;
  std::map<FrequencyVector, double> coefficients;
  std::optional<double> agreement;
  std::optional<Generator> generator;
  std::optional<Generator> spectral_generator;
  int best_epoch = -1;
  std::vector<double> loss_curve;
  std::vector<double> penalty_curve;
  std::vector<double> val_curve;
  std::vector<double> mu_curve;
  double wall_clock_seconds = 0.0;
  nlohmann::json extra = nlohmann::json::object();  // caller-provided echo (paths, flags)

  bool ok() const noexcept { return status == "ok"; }
};

// Test metrics and discovery for a trained model on the dataset's held-out
// split. Deterministic in (params, dataset, cfg).
void evaluate_into(RunReport& report, const GeneratorParams& params, std::span<const FrequencyVector> freqs,
                   const Dataset& ds, const TrainConfig& cfg);

struct TrainResult {
  GeneratorParams params;
  std::vector<FrequencyVector> frequencies;
  RunReport report;
};

// Called after every epoch with the epoch index and the current parameters.
using EpochObserver = std::function<void(int, const GeneratorParams&)>;

TrainResult train(const Dataset& ds, const TrainConfig& cfg, const EpochObserver& observer = {});

nlohmann::json config_to_json(const TrainConfig& cfg);
// Keys as written by config_to_json; unknown keys and malformed values throw
// argument_error.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
TrainConfig config_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const RunReport& report);
// The deterministic subset of a report (everything except timing).
nlohmann::json metric_fields(const nlohmann::json& report);

std::string to_string(LossKind k);
std::string to_string(MuRamp r);
LossKind parse_loss_kind(const std::string& s);
MuRamp parse_mu_ramp(const std::string& s);

}  // namespace sdisc
