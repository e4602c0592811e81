#pragma once

// Repeated seeded runs along one axis (noise level or sample count) with
// mean / sample-std aggregation.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdisc/train.hpp"

namespace sdisc {

enum class SweepAxis { noise, samples };

struct SweepSpec {
  SweepAxis axis = SweepAxis::noise;
  std::vector<double> values;  // empty: axis defaults
  int repeats = 3;
  std::uint64_t base_seed = 1;  // repeat k uses seed base_seed + k at every axis value
  std::string task = "rotated4d";
  int n = 4;
  std::size_t samples = 8000;  // fixed when sweeping noise
  double noise = 0.1;          // fixed when sweeping samples
  TrainConfig base;
  int jobs = 1;

  // Values with defaults filled in.
  std::vector<double> axis_values() const;
  void validate() const;
};

std::vector<double> default_axis_values(SweepAxis axis);
std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& s);

struct SweepPoint {
  double value = 0.0;
  double mean_cos = 0.0;  // of |cosine similarity|
  double std_cos = 0.0;
  double mean_loss = 0.0;  // test MSE, or 1 - accuracy for binary targets
  double std_loss = 0.0;
  int runs = 0;
  int failed = 0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::noise;
  std::vector<nlohmann::json> reports;  // report_to_json, in (value, repeat) order
  std::vector<SweepPoint> points;
};

// A single sweep run: dataset generation and training for one (value, seed).
nlohmann::json run_sweep_point(const SweepSpec& spec, double value, std::uint64_t seed);

SweepResult run_sweep(const SweepSpec& spec);

// Aggregates per-run report JSON by the "axisValue" echoed in "inputs".
// Failed runs are counted and skipped.
std::vector<SweepPoint> aggregate_reports(const std::vector<nlohmann::json>& reports);

nlohmann::json sweep_to_json(SweepAxis axis, const std::vector<SweepPoint>& points);
std::string sweep_to_csv(const std::vector<SweepPoint>& points);

// runs/<index>.json per report, aggregate.json and aggregate.csv.
void write_sweep(const std::filesystem::path& dir, const SweepResult& result);

}  // namespace sdisc
