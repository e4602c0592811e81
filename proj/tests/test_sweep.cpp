#include <doctest.h>

#include <cmath>

#include "sdisc/errors.hpp"
#include "sdisc/sweep.hpp"

using namespace sdisc;
using json = nlohmann::json;

namespace {

SweepSpec tiny(SweepAxis axis, std::vector<double> values, int repeats) {
  SweepSpec s;
  s.axis = axis;
  s.values = std::move(values);
  s.repeats = repeats;
  s.samples = 400;
  s.base.epochs = 2;
  s.base.warmup_epochs = 1;
  s.base.invariance.x_samples = 16;
  s.base.invariance.t_samples = 4;
  return s;
}

json fake_report(double value, double cos, double mse, const char* status = "ok") {
  return {{"status", status},
          {"inputs", {{"axisValue", value}}},
          {"metrics", {{"absCosineSimilarity", cos}, {"testMse", mse}, {"accuracy", nullptr}}}};
}

}  // namespace

TEST_CASE("default sweep axes") {
  const auto noise = default_axis_values(SweepAxis::noise);
  REQUIRE(noise.size() == 10);
  CHECK(noise.front() == doctest::Approx(0.1));
  CHECK(noise.back() == doctest::Approx(1.0));
  CHECK(default_axis_values(SweepAxis::samples) == std::vector<double>{8000, 16000, 32000, 64000});
  CHECK(parse_sweep_axis("samples") == SweepAxis::samples);
  CHECK_THROWS_AS(parse_sweep_axis("epochs"), argument_error);
}

TEST_CASE("sweep spec validation") {
  SweepSpec s = tiny(SweepAxis::samples, {100.5}, 1);
  CHECK_THROWS_AS(s.validate(), argument_error);
  s = tiny(SweepAxis::noise, {0.1}, 0);
  CHECK_THROWS_AS(s.validate(), argument_error);
  s = tiny(SweepAxis::noise, {-0.1}, 1);
  CHECK_THROWS_AS(s.validate(), argument_error);
}

TEST_CASE("aggregation mean and sample std") {
  const std::vector<json> reports{fake_report(0.5, 0.2, 1.0), fake_report(0.5, 0.4, 3.0), fake_report(0.1, 0.9, 0.5),
                                  fake_report(0.1, 0.0, 0.0, "failed")};
  const auto pts = aggregate_reports(reports);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].value == 0.1);
  CHECK(pts[0].runs == 1);
  CHECK(pts[0].failed == 1);
  CHECK(pts[0].std_cos == 0.0);
  CHECK(pts[1].mean_cos == doctest::Approx(0.3));
  CHECK(pts[1].std_cos == doctest::Approx(std::sqrt(0.02)));
  CHECK(pts[1].mean_loss == doctest::Approx(2.0));
  CHECK(pts[1].std_loss == doctest::Approx(std::sqrt(2.0)));
  const json j = sweep_to_json(SweepAxis::noise, pts);
  CHECK(j.at("points").size() == 2);
  CHECK(sweep_to_csv(pts).rfind("axisValue,meanCos,stdCos,meanLoss,stdLoss,nRuns\n", 0) == 0);
}

TEST_CASE("sweep runs are seeded per repeat and reproducible") {
  const SweepSpec s = tiny(SweepAxis::noise, {0.2}, 2);
  const SweepResult a = run_sweep(s);
  REQUIRE(a.reports.size() == 2);
  CHECK(a.reports[0].at("inputs").at("seed") == 1);
  CHECK(a.reports[1].at("inputs").at("seed") == 2);
  CHECK(a.reports[0].at("metrics") != a.reports[1].at("metrics"));

  SweepSpec par = s;
  par.jobs = 2;
  const SweepResult b = run_sweep(par);
  for (std::size_t i = 0; i < a.reports.size(); ++i) CHECK(a.reports[i].at("metrics") == b.reports[i].at("metrics"));

  REQUIRE(a.points.size() == 1);
  const auto again = aggregate_reports(a.reports);
  CHECK(again[0].mean_cos == a.points[0].mean_cos);
  CHECK(a.points[0].runs + a.points[0].failed == 2);
}

TEST_CASE("single repeat has zero spread") {
  const SweepResult r = run_sweep(tiny(SweepAxis::samples, {300}, 1));
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].std_cos == 0.0);
  CHECK(r.points[0].std_loss == 0.0);
  CHECK(r.reports[0].at("inputs").at("samples") == 300);
}
