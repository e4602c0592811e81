// spectral-discovery: dataset generation, training, evaluation, sweeps and
// report tables from one binary.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdisc/data.hpp"
#include "sdisc/errors.hpp"
#include "sdisc/json_io.hpp"
#include "sdisc/sweep.hpp"
#include "sdisc/train.hpp"

namespace fs = std::filesystem;
using namespace sdisc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

// Raised for bad user input; mapped to exit code 1.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat `key = value` lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw usage_error(path.string() + ": cannot open config file");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw usage_error(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

struct ConfigInputs {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
};

void add_config_options(CLI::App* cmd, ConfigInputs& in) {
  cmd->add_option("--config", in.config_file, "Flat key = value training config")->check(CLI::ExistingFile);
  cmd->add_option("--set", in.overrides, "Override one config key (key=value), repeatable");
  cmd->add_option("--seed", in.seed, "Run seed (overrides the config seed)");
}

// File values first, then --set, then --seed. Returns the effective config and
// an echo of where every non-default value came from.
TrainConfig resolve_config(const ConfigInputs& in, nlohmann::json& echo) {
  TrainConfig cfg;
  nlohmann::json file_values = nlohmann::json::object();
  nlohmann::json flag_values = nlohmann::json::object();
  if (!in.config_file.empty()) {
    for (const auto& [k, v] : read_config_file(in.config_file)) {
      try {
        set_config_value(cfg, k, v);
      } catch (const argument_error& e) {
        throw usage_error(in.config_file + ": " + e.what());
      }
      file_values[k] = v;
    }
  }
  for (const std::string& kv : in.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw usage_error("--set expects key=value, got '" + kv + "'");
    const std::string k = trim(kv.substr(0, eq));
    const std::string v = trim(kv.substr(eq + 1));
    set_config_value(cfg, k, v);
    flag_values[k] = v;
  }
  if (in.seed) {
    cfg.seed = *in.seed;
    flag_values["seed"] = std::to_string(*in.seed);
  }
  cfg.validate();
  echo = {{"configFile", in.config_file}, {"fileValues", file_values}, {"flagValues", flag_values}};
  return cfg;
}

std::string fmt(const nlohmann::json& v) {
  if (!v.is_number()) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
  return buf;
}

std::string summary_line(const nlohmann::json& report) {
  const auto& m = report.at("metrics");
  std::ostringstream s;
  s << "status=" << report.at("status").get<std::string>() << " task=" << report.at("task").get<std::string>()
    << " seed=" << report.at("seed").get<std::uint64_t>();
  if (m.at("testMse").is_number()) s << " testMse=" << fmt(m.at("testMse"));
  if (m.at("accuracy").is_number()) s << " accuracy=" << fmt(m.at("accuracy"));
  s << " invErr=" << fmt(m.at("invarianceError")) << " absCos=" << fmt(m.at("absCosineSimilarity"));
  return s.str();
}

// ---- gen-data ----

struct GenArgs {
  std::string task = "rotated4d";
  int n = 4;
  std::size_t samples = 8000;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  int bandwidth = 1;
  std::string out;
};

int cmd_gen_data(const GenArgs& a) {
  const Dataset ds = make_task(a.task, a.n, a.samples, a.sigma, a.seed, a.bandwidth);
  const std::string out = a.out.empty() ? a.task + "_seed" + std::to_string(a.seed) + ".jsonl" : a.out;
  save_dataset(ds, out);
  std::cout << "wrote " << out << " task=" << ds.meta.task << " n=" << ds.n << " samples=" << ds.size()
            << " sigma=" << a.sigma << " seed=" << a.seed << "\n";
  return kExitOk;
}

// ---- train / eval ----

struct TrainArgs {
  std::string data;
  std::string out;
  ConfigInputs config;
};

int cmd_train(const TrainArgs& a) {
  nlohmann::json echo;
  const TrainConfig cfg = resolve_config(a.config, echo);
  const Dataset ds = load_dataset(a.data);
  TrainResult res = train(ds, cfg);
  res.report.extra = {{"command", "train"}, {"data", a.data}, {"config", echo}};
  const nlohmann::json report = report_to_json(res.report);
  nlohmann::json checkpoint = checkpoint_to_json(res.params, cfg.bandwidth, res.frequencies);
  checkpoint["config"] = config_to_json(cfg);
  checkpoint["seed"] = cfg.seed;
  checkpoint["lossKind"] = to_string(cfg.loss);
  checkpoint["metrics"] = report.at("metrics");
  fs::create_directories(a.out);
  write_json_file(fs::path(a.out) / "checkpoint.json", checkpoint);
  write_json_file(fs::path(a.out) / "report.json", report);
  std::cout << summary_line(report) << " out=" << a.out << "\n";
  return res.report.ok() ? kExitOk : kExitRuntime;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const nlohmann::json j = read_json_file(a.checkpoint);
  const Checkpoint c = checkpoint_from_json(j);
  if (!j.contains("config")) throw usage_error(a.checkpoint + ": checkpoint has no config");
  const TrainConfig cfg = config_from_json(j.at("config"));
  const Dataset ds = load_dataset(a.data);
  if (ds.n != c.params.n) throw usage_error("dataset width differs from the checkpoint");
  RunReport report;
  report.task = ds.meta.task;
  report.seed = cfg.seed;
  report.config = cfg;
  evaluate_into(report, c.params, c.frequencies, ds, cfg);
  report.extra = {{"command", "eval"}, {"checkpoint", a.checkpoint}, {"data", a.data}};
  const nlohmann::json out = report_to_json(report);
  write_json_file(a.out, out);
  std::cout << summary_line(out) << " out=" << a.out << "\n";
  return kExitOk;
}

// ---- sweep ----

struct SweepArgs {
  std::string axis = "noise";
  std::vector<double> values;
  int repeats = 3;
  std::string task = "rotated4d";
  int n = 4;
  std::size_t samples = 8000;
  double sigma = 0.1;
  int jobs = 1;
  std::string out;
  ConfigInputs config;
};

int cmd_sweep(const SweepArgs& a) {
  SweepSpec spec;
  spec.axis = parse_sweep_axis(a.axis);
  spec.values = a.values;
  spec.repeats = a.repeats;
  spec.task = a.task;
  spec.n = a.n;
  spec.samples = a.samples;
  spec.noise = a.sigma;
  spec.jobs = a.jobs;
  nlohmann::json echo;
  spec.base = resolve_config(a.config, echo);
  spec.base_seed = a.config.seed.value_or(spec.base.seed);
  const SweepResult result = run_sweep(spec);
  write_sweep(a.out, result);
  std::ostringstream s;
  s << "axis=" << to_string(spec.axis) << " points=" << result.points.size() << " runs=" << result.reports.size();
  for (const SweepPoint& p : result.points) s << " [" << p.value << ": absCos=" << fmt(p.mean_cos) << "]";
  std::cout << s.str() << " out=" << a.out << "\n";
  return kExitOk;
}

// ---- report ----

struct Accum {
  std::vector<double> mse, acc, inv, cos;
  int failed = 0;
};

std::string mean_pm_std(const std::vector<double>& v) {
  if (v.empty()) return "n/a";
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5g ± %.2g", mean, sd);
  return buf;
}

int cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir)) throw usage_error(dir + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, Accum> groups;
  int reports = 0;
  for (const fs::path& f : files) {
    const nlohmann::json j = read_json_file(f);
    if (!j.is_object() || !j.contains("metrics") || !j.contains("status") || !j.contains("task")) continue;
    ++reports;
    std::string key = j.at("task").get<std::string>();
    const auto& in = j.value("inputs", nlohmann::json::object());
    if (in.contains("axis")) key += " " + in.at("axis").get<std::string>() + "=" + fmt(in.at("axisValue"));
    Accum& acc = groups[key];
    if (j.at("status") != "ok") {
      ++acc.failed;
      continue;
    }
    const auto& m = j.at("metrics");
    if (m.at("testMse").is_number()) acc.mse.push_back(m.at("testMse").get<double>());
    if (m.at("accuracy").is_number()) acc.acc.push_back(m.at("accuracy").get<double>());
    if (m.at("invarianceError").is_number()) acc.inv.push_back(m.at("invarianceError").get<double>());
    if (m.at("absCosineSimilarity").is_number()) acc.cos.push_back(m.at("absCosineSimilarity").get<double>());
  }
  if (reports == 0) throw usage_error(dir + ": no run reports found");
  std::ostringstream md;
  md << "| Task | Runs | Test MSE | Accuracy | Inv. Error | Cosine Similarity |\n";
  md << "|---|---|---|---|---|---|\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, a] : groups) {
    const int runs = static_cast<int>(std::max({a.mse.size(), a.acc.size(), a.cos.size()}));
    md << "| " << key << " | " << runs << (a.failed ? " (+" + std::to_string(a.failed) + " failed)" : "") << " | "
       << mean_pm_std(a.mse) << " | " << mean_pm_std(a.acc) << " | " << mean_pm_std(a.inv) << " | "
       << mean_pm_std(a.cos) << " |\n";
    rows.push_back({{"group", key}, {"runs", runs}, {"failed", a.failed}, {"testMse", a.mse},
                    {"accuracy", a.acc}, {"invarianceError", a.inv}, {"absCosineSimilarity", a.cos}});
  }
  const fs::path md_path = fs::path(dir) / "summary.md";
  std::ofstream(md_path) << md.str();
  write_json_file(fs::path(dir) / "summary.json", nlohmann::json{{"groups", rows}});
  std::cout << "reports=" << reports << " groups=" << groups.size() << " out=" << md_path.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie-algebra generator discovery with spectral resonance features"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic dataset (.jsonl)");
  g->add_option("--task", gen.task, "pendulum6d | rotated4d | diagonal4d | random | classify4d");
  g->add_option("--n", gen.n, "Ambient dimension (random task only)");
  g->add_option("--n-samples", gen.samples, "Number of samples");
  g->add_option("--sigma", gen.sigma, "Target noise standard deviation");
  g->add_option("--seed", gen.seed, "Seed");
  g->add_option("--bandwidth", gen.bandwidth, "Bandwidth for the target's resonant characters");
  g->add_option("--out", gen.out, "Output path (default <task>_seed<seed>.jsonl)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train and write checkpoint.json + report.json");
  t->add_option("--data", tr.data, "Dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "Output directory")->required();
  add_config_options(t, tr.config);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint without training");
  e->add_option("--checkpoint", ev.checkpoint, "checkpoint.json")->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data, "Dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "Report path")->required();

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Noise or sample-count sweep with repeated seeds");
  s->add_option("--axis", sw.axis, "noise | samples");
  s->add_option("--values", sw.values, "Axis values (default: 0.1..1.0 or 8k..64k)");
  s->add_option("--repeats", sw.repeats, "Seeds per value");
  s->add_option("--task", sw.task, "Task name");
  s->add_option("--n", sw.n, "Ambient dimension (random task only)");
  s->add_option("--n-samples", sw.samples, "Samples when sweeping noise");
  s->add_option("--sigma", sw.sigma, "Noise when sweeping samples");
  s->add_option("--jobs", sw.jobs, "Concurrent runs");
  s->add_option("--out", sw.out, "Output directory")->required();
  add_config_options(s, sw.config);

  std::string report_dir;
  auto* r = app.add_subcommand("report", "Summary table over run reports in a directory");
  r->add_option("--dir", report_dir, "Directory searched recursively for report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*s) return cmd_sweep(sw);
    if (*r) return cmd_report(report_dir);
  } catch (const usage_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInvalid;
  } catch (const parse_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& err) {
    std::cerr << "runtime failure: " << err.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}
