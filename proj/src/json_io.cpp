#include "sdisc/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sdisc/errors.hpp"

namespace sdisc {

namespace {

std::vector<double> row_major(const Matrix& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Matrix square_from_row_major(const std::vector<double>& v, Eigen::Index n) {
  if (v.size() != static_cast<std::size_t>(n * n)) throw shape_error("matrix entry count is not n*n");
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = v[static_cast<std::size_t>(i * n + j)];
  return m;
}

Eigen::Index isqrt_exact(std::size_t count) {
  auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(count))));
  if (static_cast<std::size_t>(n * n) != count) throw shape_error("matrix entry count is not a square");
  return n;
}

}  // namespace

json generator_to_json(const Generator& g) { return {{"n", g.n()}, {"entries", row_major(g.entries())}}; }

Generator generator_from_json(const json& j) {
  const auto n = j.at("n").get<Eigen::Index>();
  return Generator::from_matrix(square_from_row_major(j.at("entries").get<std::vector<double>>(), n), 1e-9);
}

json canonical_form_to_json(const CanonicalForm& cf) {
  return {{"q", row_major(cf.q)},
          {"lambda", std::vector<double>(cf.lambda.data(), cf.lambda.data() + cf.lambda.size())}};
}

CanonicalForm canonical_form_from_json(const json& j) {
  const auto q = j.at("q").get<std::vector<double>>();
  const auto lambda = j.at("lambda").get<std::vector<double>>();
  Matrix m = square_from_row_major(q, isqrt_exact(q.size()));
  // Repair drift from text round-trips before validating.
  if ((m.transpose() * m - Matrix::Identity(m.rows(), m.cols())).norm() > kOrthogonalityTolerance) {
    m = retract_orthogonal(m);
  }
  return CanonicalForm::make(m, Eigen::Map<const Vector>(lambda.data(), static_cast<Eigen::Index>(lambda.size())));
}

json frequency_to_json(const FrequencyVector& m) { return m.entries(); }

FrequencyVector frequency_from_json(const json& j) { return FrequencyVector(j.get<std::vector<int>>()); }

json resonant_set_to_json(const ResonantSet& s) {
  json members = json::array();
  for (const auto& m : s.members) members.push_back(frequency_to_json(m));
  return {{"lambda", s.lambda}, {"tol", s.tol}, {"members", members}};
}

ResonantSet resonant_set_from_json(const json& j) {
  ResonantSet s;
  s.lambda = j.at("lambda").get<std::vector<double>>();
  s.tol = j.at("tol").get<double>();
  for (const auto& m : j.at("members")) s.members.push_back(frequency_from_json(m));
  return s;
}

json dataset_meta_to_json(const DatasetMeta& meta) {
  json j{{"taskName", meta.task},
         {"n", meta.n},
         {"noiseSigma", meta.noise_sigma},
         {"seed", meta.seed},
         {"target", meta.target == TargetKind::binary ? "binary" : "regression"}};
  j["trueGenerator"] = meta.true_generator ? generator_to_json(*meta.true_generator) : json(nullptr);
  j["trueLambda"] = meta.true_lambda ? json(*meta.true_lambda) : json(nullptr);
  return j;
}

DatasetMeta dataset_meta_from_json(const json& j) {
  DatasetMeta meta;
  meta.task = j.at("taskName").get<std::string>();
  meta.n = j.at("n").get<int>();
  meta.noise_sigma = j.at("noiseSigma").get<double>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  const std::string target = j.value("target", "regression");
  if (target != "regression" && target != "binary") throw argument_error("unknown target kind '" + target + "'");
  meta.target = target == "binary" ? TargetKind::binary : TargetKind::regression;
  if (j.contains("trueGenerator") && !j["trueGenerator"].is_null()) {
    meta.true_generator = generator_from_json(j["trueGenerator"]);
  }
  if (j.contains("trueLambda") && !j["trueLambda"].is_null()) {
    meta.true_lambda = j["trueLambda"].get<std::vector<double>>();
  }
  return meta;
}

json checkpoint_to_json(const GeneratorParams& params, int bandwidth, std::span<const FrequencyVector> freqs) {
  json layers = json::array();
  for (const DenseLayer& l : params.layers) {
    layers.push_back({{"inputs", l.inputs}, {"outputs", l.outputs}, {"weight", l.weight}, {"bias", l.bias}});
  }
  json frequencies = json::array();
  for (const auto& m : freqs) frequencies.push_back(frequency_to_json(m));
  return {{"n", params.n},         {"bandwidth", bandwidth}, {"frequencies", frequencies},
          {"skewParams", params.skew}, {"lambda", params.lambda}, {"layers", layers}};
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint c;
  c.params.n = j.at("n").get<int>();
  c.bandwidth = j.at("bandwidth").get<int>();
  for (const auto& m : j.at("frequencies")) c.frequencies.push_back(frequency_from_json(m));
  c.params.skew = j.at("skewParams").get<std::vector<double>>();
  c.params.lambda = j.at("lambda").get<std::vector<double>>();
  for (const auto& l : j.at("layers")) {
    DenseLayer layer;
    layer.inputs = l.at("inputs").get<int>();
    layer.outputs = l.at("outputs").get<int>();
    layer.weight = l.at("weight").get<std::vector<double>>();
    layer.bias = l.at("bias").get<std::vector<double>>();
    c.params.layers.push_back(std::move(layer));
  }
  validate(c.params, c.frequencies);
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error(path.string() + ": " + e.what(), 1);
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  ds.validate();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  json header{{"meta", dataset_meta_to_json(ds.meta)}, {"outputs", ds.outputs}};
  out << header.dump() << '\n';
  std::vector<double> xr(static_cast<std::size_t>(ds.n));
  std::vector<double> yr(static_cast<std::size_t>(ds.outputs));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto x = ds.x_row(i);
    const auto y = ds.y_row(i);
    xr.assign(x.begin(), x.end());
    yr.assign(y.begin(), y.end());
    out << json{{"x", xr}, {"y", yr}}.dump() << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw parse_error(std::string("malformed JSON: ") + e.what(), line_no);
    }
    try {
      if (!have_header) {
        if (!j.contains("meta")) throw parse_error("first line must be the meta header", line_no);
        ds.meta = dataset_meta_from_json(j.at("meta"));
        ds.n = ds.meta.n;
        ds.outputs = j.value("outputs", 1);
        have_header = true;
        continue;
      }
      const auto x = j.at("x").get<std::vector<double>>();
      const auto y = j.at("y").get<std::vector<double>>();
      if (x.size() != static_cast<std::size_t>(ds.n) || y.size() != static_cast<std::size_t>(ds.outputs)) {
        throw parse_error("sample width differs from the header", line_no);
      }
      ds.x.insert(ds.x.end(), x.begin(), x.end());
      ds.y.insert(ds.y.end(), y.begin(), y.end());
    } catch (const json::exception& e) {
      throw parse_error(e.what(), line_no);
    } catch (const std::invalid_argument& e) {
      throw parse_error(e.what(), line_no);
    }
  }
  if (!have_header) throw parse_error("missing meta header", line_no);
  if (ds.size() == 0) throw parse_error("dataset has no samples", line_no);
  ds.validate();
  return ds;
}

}  // namespace sdisc
