#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "sdisc/data.hpp"
#include "sdisc/errors.hpp"
#include "sdisc/json_io.hpp"

using namespace sdisc;

TEST_CASE("value types round-trip through JSON text") {
  const CanonicalForm cf = make_random_generator(6, 8);
  const Generator b = assemble_generator(cf);
  const Generator b2 = generator_from_json(json::parse(generator_to_json(b).dump()));
  CHECK(b2.entries() == b.entries());

  const CanonicalForm cf2 = canonical_form_from_json(json::parse(canonical_form_to_json(cf).dump()));
  CHECK(cf2.q == cf.q);
  CHECK(cf2.lambda == cf.lambda);

  const FrequencyVector m({2, -1, 0});
  CHECK(frequency_from_json(frequency_to_json(m)) == m);
  CHECK(frequency_to_json(m).dump() == "[2,-1,0]");

  const std::vector<double> lam{1.0, -1.0};
  const ResonantSet s = resonant_subset(lam, primitive_set(2, 2), 1e-9);
  const ResonantSet s2 = resonant_set_from_json(json::parse(resonant_set_to_json(s).dump()));
  CHECK(s2.members == s.members);
  CHECK(s2.lambda == s.lambda);
  CHECK(s2.tol == s.tol);

  CHECK_THROWS(generator_from_json(json{{"n", 2}, {"entries", {0.0, 1.0, 0.5, 0.0}}}));
  CHECK_THROWS(generator_from_json(json{{"n", 2}, {"entries", {0.0, 1.0}}}));
}

TEST_CASE("checkpoints round-trip bit-exactly and reproduce predictions") {
  const ModelShape shape{4, 2, 5, 3, 1};
  const GeneratorParams p = fixture::random_params(shape, 70);
  const auto freqs = primitive_set(2, 2);
  const json j = checkpoint_to_json(p, 2, freqs);
  for (const char* key : {"n", "bandwidth", "frequencies", "skewParams", "lambda", "layers"}) CHECK(j.contains(key));
  const Checkpoint c = checkpoint_from_json(json::parse(j.dump()));
  CHECK(c.bandwidth == 2);
  CHECK(c.frequencies == freqs);
  CHECK(c.params.flatten() == p.flatten());
  const std::vector<double> x{0.3, -0.2, 1.1, 0.4};
  CHECK(predict(x, c.params, c.frequencies) == predict(x, p, freqs));

  json broken = j;
  broken["layers"][0]["inputs"] = 3;
  CHECK_THROWS(checkpoint_from_json(broken));
}

TEST_CASE("JSON files: write, read, malformed") {
  const auto dir = std::filesystem::temp_directory_path() / "sdisc_test_json";
  write_json_file(dir / "a.json", json{{"k", 1.25}});
  CHECK(read_json_file(dir / "a.json")["k"] == 1.25);
  {
    std::ofstream out(dir / "bad.json");
    out << "{\"k\": ";
  }
  CHECK_THROWS_AS(read_json_file(dir / "bad.json"), parse_error);
  CHECK_THROWS(read_json_file(dir / "none.json"));
}
