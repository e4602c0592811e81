#include "sdisc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "sdisc/data.hpp"
#include "sdisc/errors.hpp"
#include "sdisc/json_io.hpp"

namespace sdisc {

using json = nlohmann::json;

std::vector<double> default_axis_values(SweepAxis axis) {
  if (axis == SweepAxis::samples) return {8000, 16000, 32000, 64000};
  std::vector<double> v;
  for (int k = 1; k <= 10; ++k) v.push_back(k / 10.0);
  return v;
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::noise ? "noise" : "samples"; }

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "noise") return SweepAxis::noise;
  if (s == "samples") return SweepAxis::samples;
  throw argument_error("unknown sweep axis '" + s + "' (expected noise or samples)");
}

std::vector<double> SweepSpec::axis_values() const { return values.empty() ? default_axis_values(axis) : values; }

void SweepSpec::validate() const {
  base.validate();
  if (repeats < 1) throw argument_error("sweep repeats must be positive");
  if (jobs < 1) throw argument_error("sweep jobs must be positive");
  for (double v : axis_values()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw argument_error("sweep values must be positive");
    if (axis == SweepAxis::samples && v != std::floor(v)) throw argument_error("sample counts must be integers");
  }
  if (samples < 10) throw argument_error("sweep samples must be at least 10");
  if (!(noise >= 0.0)) throw argument_error("sweep noise must be nonnegative");
}

json run_sweep_point(const SweepSpec& spec, double value, std::uint64_t seed) {
  const bool noise_axis = spec.axis == SweepAxis::noise;
  const double sigma = noise_axis ? value : spec.noise;
  const auto samples = noise_axis ? spec.samples : static_cast<std::size_t>(value);
  TrainConfig cfg = spec.base;
  cfg.seed = seed;
  const Dataset ds = make_task(spec.task, spec.n, samples, sigma, seed, cfg.bandwidth);
  TrainResult res = train(ds, cfg);
  res.report.extra = {{"axis", to_string(spec.axis)}, {"axisValue", value}, {"task", spec.task}, {"n", spec.n},
                      {"samples", samples},           {"sigma", sigma},     {"seed", seed}};
  return report_to_json(res.report);
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::vector<double> values = spec.axis_values();
  struct Job {
    double value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double v : values)
    for (int k = 0; k < spec.repeats; ++k) jobs.push_back({v, spec.base_seed + static_cast<std::uint64_t>(k)});

  SweepResult out;
  out.axis = spec.axis;
  out.reports.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        out.reports[i] = run_sweep_point(spec, jobs[i].value, jobs[i].seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(spec.jobs, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  out.points = aggregate_reports(out.reports);
  return out;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<SweepPoint> aggregate_reports(const std::vector<json>& reports) {
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> cos_loss;
  std::map<double, int> failed;
  for (const json& r : reports) {
    const double value = r.at("inputs").at("axisValue").get<double>();
    const json& m = r.at("metrics");
    const bool usable = r.at("status") == "ok" && m.at("absCosineSimilarity").is_number();
    if (!usable) {
      ++failed[value];
      cos_loss.try_emplace(value);
      continue;
    }
    auto& [cs, ls] = cos_loss[value];
    cs.push_back(m.at("absCosineSimilarity").get<double>());
    ls.push_back(m.at("testMse").is_number() ? m.at("testMse").get<double>() : 1.0 - m.at("accuracy").get<double>());
  }
  std::vector<SweepPoint> points;
  for (const auto& [value, data] : cos_loss) {
    SweepPoint p;
    p.value = value;
    mean_std(data.first, p.mean_cos, p.std_cos);
    mean_std(data.second, p.mean_loss, p.std_loss);
    p.runs = static_cast<int>(data.first.size());
    p.failed = failed.count(value) ? failed.at(value) : 0;
    points.push_back(p);
  }
  return points;
}

json sweep_to_json(SweepAxis axis, const std::vector<SweepPoint>& points) {
  json arr = json::array();
  for (const SweepPoint& p : points) {
    arr.push_back({{"value", p.value},
                   {"meanCos", p.mean_cos},
                   {"stdCos", p.std_cos},
                   {"meanLoss", p.mean_loss},
                   {"stdLoss", p.std_loss},
                   {"nRuns", p.runs},
                   {"nFailed", p.failed}});
  }
  return {{"axis", to_string(axis)}, {"points", arr}};
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "axisValue,meanCos,stdCos,meanLoss,stdLoss,nRuns\n";
  for (const SweepPoint& p : points) {
    out << p.value << ',' << p.mean_cos << ',' << p.std_cos << ',' << p.mean_loss << ',' << p.std_loss << ','
        << p.runs << '\n';
  }
  return out.str();
}

void write_sweep(const std::filesystem::path& dir, const SweepResult& result) {
  std::filesystem::create_directories(dir / "runs");
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    std::ostringstream name;
    name << "run_" << std::setw(4) << std::setfill('0') << i << ".json";
    write_json_file(dir / "runs" / name.str(), result.reports[i]);
  }
  write_json_file(dir / "aggregate.json", sweep_to_json(result.axis, result.points));
  std::ofstream csv(dir / "aggregate.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "aggregate.csv").string());
  csv << sweep_to_csv(result.points);
}

}  // namespace sdisc
