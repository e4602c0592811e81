#pragma once

// JSON encodings of the public value types.

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "sdisc/data.hpp"
#include "sdisc/lie.hpp"
#include "sdisc/model.hpp"
#include "sdisc/spectral.hpp"

namespace sdisc {

using json = nlohmann::json;

// {"n": n, "entries": [row-major n*n values]}
json generator_to_json(const Generator& g);
Generator generator_from_json(const json& j);

// {"q": [row-major], "lambda": [...]}
json canonical_form_to_json(const CanonicalForm& cf);
CanonicalForm canonical_form_from_json(const json& j);

json frequency_to_json(const FrequencyVector& m);
FrequencyVector frequency_from_json(const json& j);

// {"lambda": [...], "tol": t, "members": [[...], ...]}
json resonant_set_to_json(const ResonantSet& s);
ResonantSet resonant_set_from_json(const json& j);

json dataset_meta_to_json(const DatasetMeta& meta);
DatasetMeta dataset_meta_from_json(const json& j);

// Model checkpoint: {n, bandwidth, frequencies, skewParams, lambda, layers}.
json checkpoint_to_json(const GeneratorParams& params, int bandwidth, std::span<const FrequencyVector> freqs);
struct Checkpoint {
  GeneratorParams params;
  int bandwidth = 0;
  std::vector<FrequencyVector> frequencies;
};
Checkpoint checkpoint_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
// Pretty-printed, trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace sdisc
