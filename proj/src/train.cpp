#include "sdisc/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "sdisc/autodiff.hpp"
#include "sdisc/errors.hpp"
#include "sdisc/json_io.hpp"

namespace sdisc {

namespace {

constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamInit = 2;
constexpr std::uint64_t kStreamBatches = 3;

double mean_loss(const Predictor& f, const Dataset& ds, std::span<const std::size_t> rows, LossKind kind) {
  double total = 0.0;
  for (std::size_t i : rows) {
    const std::vector<double> out = f(ds.x_row(i));
    total += sample_loss<double>(kind, out, ds.y_row(i));
  }
  return total / static_cast<double>(rows.size() * static_cast<std::size_t>(ds.outputs));
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void normalize_lambda(std::span<double> lambda) {
  double s = 0.0;
  for (double v : lambda) s += v * v;
  s = std::sqrt(s);
  if (s > 0.0) {
    for (double& v : lambda) v /= s;
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw argument_error("epochs must be positive");
  if (!(lr > 0.0)) throw argument_error("learning rate must be positive");
  if (batch_size < 1) throw argument_error("batch size must be positive");
  if (!(mu_init >= 0.0)) throw argument_error("mu_init must be nonnegative");
  if (!(mu_max_scale > 0.0)) throw argument_error("mu_max_scale must be positive");
  if (warmup_epochs < 0 || warmup_epochs > epochs) throw argument_error("warmup_epochs must lie in [0, epochs]");
  if (bandwidth < 1) throw argument_error("bandwidth must be >= 1");
  if (hidden < 1 || hidden_layers < 0) throw argument_error("hidden width must be positive");
  if (!(init_skew_std >= 0.0)) throw argument_error("init_skew_std must be nonnegative");
  if (!(first_layer_gain > 0.0)) throw argument_error("first_layer_gain must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_eps > 0.0)) {
    throw argument_error("Adam constants out of range");
  }
  if (!(surviving_threshold > 0.0 && surviving_threshold < 1.0)) {
    throw argument_error("surviving_threshold must lie in (0, 1)");
  }
  if (invariance.x_samples < 1 || invariance.t_samples < 1 || !(invariance.t_range >= 0.0)) {
    throw argument_error("invariance budget must be positive");
  }
}

double mu_schedule(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) throw argument_error("mu_schedule: epoch out of range");
  if (cfg.mu_ramp == MuRamp::constant || epoch < cfg.warmup_epochs) return cfg.mu_init;
  const int span = cfg.epochs - 1 - cfg.warmup_epochs;
  if (span <= 0) return cfg.mu_init * cfg.mu_max_scale;
  const double frac = static_cast<double>(epoch - cfg.warmup_epochs) / span;
  return cfg.mu_init * (1.0 + (cfg.mu_max_scale - 1.0) * frac);
}

Split split_dataset(std::size_t samples, std::uint64_t seed) {
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, kStreamSplit);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = samples * 8 / 10;
  const std::size_t n_val = samples / 10;
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw shape_error("Adam: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

GeneratorParams init_params(int n, int outputs, const TrainConfig& cfg) {
  ModelShape shape{n, cfg.bandwidth, cfg.hidden, cfg.hidden_layers, outputs};
  GeneratorParams p = zero_params(shape);
  auto rng = make_rng(cfg.seed, kStreamInit);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& a : p.skew) a = cfg.init_skew_std * gauss(rng);
  for (double& l : p.lambda) l = gauss(rng);
  normalize_lambda(p.lambda);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    DenseLayer& layer = p.layers[l];
    const bool hidden = l + 1 < p.layers.size();
    double std_dev = std::sqrt((hidden ? 2.0 : 1.0) / layer.inputs);
    if (l == 0) std_dev *= cfg.first_layer_gain;
    for (double& w : layer.weight) w = std_dev * gauss(rng);
  }
  return p;
}

Discovery discover(const GeneratorParams& params, std::span<const FrequencyVector> freqs, double rel_threshold) {
  validate(params, freqs);
  const Matrix q = alignment_matrix(params);
  const Vector lambda = Eigen::Map<const Vector>(params.lambda.data(), params.r());
  Discovery d{assemble_generator(CanonicalForm::make(q, lambda)), std::nullopt, {}, {}, {}, std::nullopt};
  d.coefficients = coefficient_norms(params, freqs);
  d.surviving = surviving_frequencies(d.coefficients, rel_threshold);
  d.estimate = estimate_lambda(d.surviving, params.r());
  if (d.estimate.reliable()) {
    d.spectral = assemble_generator(CanonicalForm::make(q, d.estimate.lambda));
    d.agreement = generator_cosine_similarity(d.direct, *d.spectral).value;
  }
  return d;
}

void evaluate_into(RunReport& report, const GeneratorParams& params, std::span<const FrequencyVector> freqs,
                   const Dataset& ds, const TrainConfig& cfg) {
  const Predictor f(params, {freqs.begin(), freqs.end()});
  const Split split = split_dataset(ds.size(), cfg.seed);
  const std::vector<std::size_t>& rows = split.test.empty() ? split.train : split.test;
  if (ds.meta.target == TargetKind::binary) {
    report.metrics.accuracy = test_accuracy(f, ds, rows);
  } else {
    report.metrics.test_mse = test_mse(f, ds, rows);
  }

  const Discovery d = discover(params, freqs, cfg.surviving_threshold);
  report.generator = d.direct;
  report.recovered_lambda = params.lambda;
  report.spectral_generator = d.spectral;
  report.spectral_lambda.assign(d.estimate.lambda.data(), d.estimate.lambda.data() + d.estimate.lambda.size());
  report.nullity = d.estimate.nullity;
  report.singular_values = d.estimate.singular_values;
  report.surviving = d.surviving;
  report.coefficients = d.coefficients;
  report.agreement = d.agreement;

  if (ds.meta.true_generator) {
    const Generator& truth = *ds.meta.true_generator;
    report.metrics.cosine_similarity = generator_cosine_similarity(d.direct, truth).value;
    if (d.spectral) report.metrics.spectral_cosine_similarity = generator_cosine_similarity(*d.spectral, truth).value;
    std::vector<std::vector<double>> xs;
    const std::size_t count = std::min<std::size_t>(rows.size(), static_cast<std::size_t>(cfg.invariance.x_samples));
    for (std::size_t i = 0; i < count; ++i) {
      const auto x = ds.x_row(rows[i]);
      xs.emplace_back(x.begin(), x.end());
    }
    const std::vector<double> ts = sample_t(cfg.invariance, cfg.seed);
    report.metrics.invariance_error = invariance_error(f, xs, truth, ts);
  }
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  ds.validate();
  if (ds.size() < 10) throw argument_error("training needs at least 10 samples for the 80/10/10 split");
  if (cfg.loss == LossKind::logistic && ds.outputs != 1) throw shape_error("logistic loss needs one output");
  const auto started = std::chrono::steady_clock::now();

  TrainResult result;
  RunReport& report = result.report;
  report.task = ds.meta.task;
  report.seed = cfg.seed;
  report.config = cfg;

  const int r = ds.n / 2;
  require_even_dimension(ds.n);
  result.frequencies = primitive_set(cfg.bandwidth, r);
  const std::vector<FrequencyVector>& freqs = result.frequencies;
  GeneratorParams params = init_params(ds.n, ds.outputs, cfg);
  const Split split = split_dataset(ds.size(), cfg.seed);

  std::vector<double> flat = params.flatten();
  const std::size_t lambda_at = params.lambda_offset();
  Adam adam(flat.size(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  auto batch_rng = make_rng(cfg.seed, kStreamBatches);

  ad::Tape tape;
  std::vector<std::size_t> order = split.train;
  GeneratorParams best = params;
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.epochs && report.ok(); ++epoch) {
    const double mu = mu_schedule(epoch, cfg);
    std::shuffle(order.begin(), order.end(), batch_rng);
    double loss_sum = 0.0;
    double penalty_sum = 0.0;
    std::size_t batches = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      tape.clear();
      const std::vector<ad::Var> leaves = tape.variables(flat);
      ObjectiveParts parts;
      const ad::Var objective = batch_objective<ad::Var>(
          params, leaves, freqs, ds, std::span<const std::size_t>(order).subspan(begin, end - begin), mu, cfg.loss,
          &parts);

      if (!std::isfinite(objective.value())) {
        report.status = "failed";
        report.failure_reason = "non-finite objective at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batches);
        break;
      }
      const std::vector<double> grads = tape.backward(objective).of(leaves);
      if (!all_finite(grads)) {
        report.status = "failed";
        report.failure_reason = "non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batches);
        break;
      }
      adam.step(flat, grads);
      normalize_lambda(std::span<double>(flat).subspan(lambda_at, params.lambda.size()));
      loss_sum += parts.data;
      penalty_sum += parts.penalty;
      ++batches;
    }
    if (!report.ok()) break;

    params.assign(flat);
    const Predictor current(params, freqs);
    const double val =
        mean_loss(current, ds, split.val.empty() ? std::span<const std::size_t>(split.train) : split.val, cfg.loss);
    report.loss_curve.push_back(loss_sum / static_cast<double>(batches));
    report.penalty_curve.push_back(penalty_sum / static_cast<double>(batches));
    report.val_curve.push_back(val);
    report.mu_curve.push_back(mu);
    if (!std::isfinite(val)) {
      report.status = "failed";
      report.failure_reason = "non-finite validation loss at epoch " + std::to_string(epoch);
      break;
    }
    if (observer) observer(epoch, params);
    if (val < best_val) {
      best_val = val;
      best = params;
      report.best_epoch = epoch;
    }
  }

  result.params = report.best_epoch >= 0 ? best : params;
  if (report.best_epoch >= 0) evaluate_into(report, result.params, freqs, ds, cfg);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string to_string(LossKind k) { return k == LossKind::logistic ? "logistic" : "squared_error"; }
std::string to_string(MuRamp r) { return r == MuRamp::constant ? "constant" : "linear"; }

LossKind parse_loss_kind(const std::string& s) {
  if (s == "squared_error" || s == "mse") return LossKind::squared_error;
  if (s == "logistic") return LossKind::logistic;
  throw argument_error("unknown loss kind '" + s + "'");
}

MuRamp parse_mu_ramp(const std::string& s) {
  if (s == "linear") return MuRamp::linear;
  if (s == "constant") return MuRamp::constant;
  throw argument_error("unknown mu ramp '" + s + "'");
}

json config_to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"lr", cfg.lr},
          {"batch_size", cfg.batch_size},
          {"mu_init", cfg.mu_init},
          {"mu_max_scale", cfg.mu_max_scale},
          {"warmup_epochs", cfg.warmup_epochs},
          {"mu_ramp", to_string(cfg.mu_ramp)},
          {"bandwidth", cfg.bandwidth},
          {"seed", cfg.seed},
          {"loss", to_string(cfg.loss)},
          {"hidden", cfg.hidden},
          {"hidden_layers", cfg.hidden_layers},
          {"init_skew_std", cfg.init_skew_std},
          {"first_layer_gain", cfg.first_layer_gain},
          {"adam_beta1", cfg.adam_beta1},
          {"adam_beta2", cfg.adam_beta2},
          {"adam_eps", cfg.adam_eps},
          {"surviving_threshold", cfg.surviving_threshold},
          {"inv_x_samples", cfg.invariance.x_samples},
          {"inv_t_samples", cfg.invariance.t_samples},
          {"inv_t_range", cfg.invariance.t_range}};
}

namespace {

template <class T>
T parse_as(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  T value{};
  try {
    if constexpr (std::is_same_v<T, int>) {
      value = std::stoi(text, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative");
      value = std::stoull(text, &used);
    } else {
      value = std::stod(text, &used);
    }
  } catch (const std::exception&) {
    throw argument_error("config key '" + key + "': cannot parse '" + text + "'");
  }
  if (used != text.size()) throw argument_error("config key '" + key + "': trailing characters in '" + text + "'");
  return value;
}

}  // namespace

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "epochs") cfg.epochs = parse_as<int>(key, value);
  else if (key == "lr") cfg.lr = parse_as<double>(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_as<int>(key, value);
  else if (key == "mu_init") cfg.mu_init = parse_as<double>(key, value);
  else if (key == "mu_max_scale") cfg.mu_max_scale = parse_as<double>(key, value);
  else if (key == "warmup_epochs") cfg.warmup_epochs = parse_as<int>(key, value);
  else if (key == "mu_ramp") cfg.mu_ramp = parse_mu_ramp(value);
  else if (key == "bandwidth") cfg.bandwidth = parse_as<int>(key, value);
  else if (key == "seed") cfg.seed = parse_as<std::uint64_t>(key, value);
  else if (key == "loss") cfg.loss = parse_loss_kind(value);
  else if (key == "hidden") cfg.hidden = parse_as<int>(key, value);
  else if (key == "hidden_layers") cfg.hidden_layers = parse_as<int>(key, value);
  else if (key == "init_skew_std") cfg.init_skew_std = parse_as<double>(key, value);
  else if (key == "first_layer_gain") cfg.first_layer_gain = parse_as<double>(key, value);
  else if (key == "adam_beta1") cfg.adam_beta1 = parse_as<double>(key, value);
  else if (key == "adam_beta2") cfg.adam_beta2 = parse_as<double>(key, value);
  else if (key == "adam_eps") cfg.adam_eps = parse_as<double>(key, value);
  else if (key == "surviving_threshold") cfg.surviving_threshold = parse_as<double>(key, value);
  else if (key == "inv_x_samples") cfg.invariance.x_samples = parse_as<int>(key, value);
  else if (key == "inv_t_samples") cfg.invariance.t_samples = parse_as<int>(key, value);
  else if (key == "inv_t_range") cfg.invariance.t_range = parse_as<double>(key, value);
  else throw argument_error("unknown config key '" + key + "'");
}

TrainConfig config_from_json(const json& j) {
  if (!j.is_object()) throw argument_error("config must be a JSON object");
  TrainConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (v.is_string()) {
      set_config_value(cfg, key, v.get<std::string>());
    } else if (v.is_number_unsigned()) {
      set_config_value(cfg, key, std::to_string(v.get<std::uint64_t>()));
    } else if (v.is_number_integer()) {
      set_config_value(cfg, key, std::to_string(v.get<long long>()));
    } else if (v.is_number_float()) {
      // Shortest round-trip text keeps doubles bit-exact.
      set_config_value(cfg, key, v.dump());
    } else {
      throw argument_error("config key '" + key + "': expected a number or string");
    }
  }
  cfg.validate();
  return cfg;
}

json report_to_json(const RunReport& r) {
  json surviving = json::array();
  for (const auto& m : r.surviving) surviving.push_back(frequency_to_json(m));
  json coefficients = json::array();
  for (const auto& [m, c] : r.coefficients) coefficients.push_back({{"m", frequency_to_json(m)}, {"norm", c}});
  const auto abs_or_null = [](const std::optional<double>& v) {
    return v ? json(std::abs(*v)) : json(nullptr);
  };
  return {
      {"task", r.task},
      {"seed", r.seed},
      {"status", r.status},
      {"failureReason", r.failure_reason.empty() ? json(nullptr) : json(r.failure_reason)},
      {"config", config_to_json(r.config)},
      {"inputs", r.extra},
      {"metrics",
       {{"testMse", optional_number(r.metrics.test_mse)},
        {"accuracy", optional_number(r.metrics.accuracy)},
        {"invarianceError", optional_number(r.metrics.invariance_error)},
        {"cosineSimilarity", optional_number(r.metrics.cosine_similarity)},
        {"absCosineSimilarity", abs_or_null(r.metrics.cosine_similarity)},
        {"spectralCosineSimilarity", optional_number(r.metrics.spectral_cosine_similarity)},
        {"estimateAgreement", optional_number(r.agreement)}}},
      {"recoveredLambda", r.recovered_lambda},
      {"spectralLambda", r.spectral_lambda},
      {"nullity", r.nullity},
      {"singularValues", r.singular_values},
      {"survivingFrequencies", surviving},
      {"coefficientNorms", coefficients},
      {"generator", r.generator ? generator_to_json(*r.generator) : json(nullptr)},
      {"spectralGenerator", r.spectral_generator ? generator_to_json(*r.spectral_generator) : json(nullptr)},
      {"bestEpoch", r.best_epoch},
      {"curves", {{"loss", r.loss_curve}, {"penalty", r.penalty_curve}, {"valLoss", r.val_curve}, {"mu", r.mu_curve}}},
      {"invariance",
       {{"tDistribution", "uniform"},
        {"tRange", {-r.config.invariance.t_range, r.config.invariance.t_range}},
        {"xSamples", r.config.invariance.x_samples},
        {"tSamples", r.config.invariance.t_samples}}},
      {"wallClockSeconds", r.wall_clock_seconds}};
}

json metric_fields(const json& report) {
  json out = report;
  out.erase("wallClockSeconds");
  return out;
}

}  // namespace sdisc
