#pragma once

// Synthetic tasks with known ground-truth generators, noise injection and the
// JSON-lines dataset format.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdisc/lie.hpp"
#include "sdisc/spectral.hpp"

namespace sdisc {

// mt19937_64 keyed by (seed, stream) so independent consumers of one seed do
// not share a sequence.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

enum class TargetKind { regression, binary };

struct DatasetMeta {
  std::string task;
  int n = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  TargetKind target = TargetKind::regression;
  std::optional<Generator> true_generator;
  std::optional<std::vector<double>> true_lambda;
};

struct Dataset {
  int n = 0;        // input width
  int outputs = 1;  // target width
  std::vector<double> x;  // size() x n, row-major
  std::vector<double> y;  // size() x outputs, row-major
  DatasetMeta meta;

  std::size_t size() const noexcept { return n > 0 ? x.size() / static_cast<std::size_t>(n) : 0; }
  std::span<const double> x_row(std::size_t i) const {
    return std::span<const double>(x).subspan(i * static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  }
  std::span<const double> y_row(std::size_t i) const {
    return std::span<const double>(y).subspan(i * static_cast<std::size_t>(outputs),
                                              static_cast<std::size_t>(outputs));
  }
  // N >= 1, matching row counts, skew true generator.
  void validate() const;
};

enum class GeneratorPreset { random, diagonal };

// Random Q in SO(n) and unit lambda; half of the draws use an integer-ratio
// lambda so that a resonant frequency exists within bandwidth 2. The diagonal
// preset (n = 4) is Q = I, lambda = (1, -1)/sqrt(2).
CanonicalForm make_random_generator(int n, std::uint64_t seed, GeneratorPreset preset = GeneratorPreset::random);

// Function of x that depends on the aligned torus coordinates of z = Q^T x only
// through block radii, resonant characters and pairwise angle differences.
struct InvariantTarget {
  CanonicalForm cf;
  std::vector<double> radial_weights;             // sum_k a_k r_k^2
  double coupling = 0.0;                          // c sum_{k<l} r_k r_l cos(theta_k - theta_l)
  std::vector<FrequencyVector> characters;        // sum_j amp_j cos(<m_j, theta> + phase_j)
  std::vector<double> amplitudes;
  std::vector<double> phases;

  double operator()(std::span<const double> x) const;
};

// Largest |f(exp(tB)x) - f(x)| over `pairs` random standard-normal x and
// t uniform in [-pi, pi].
double invariance_audit(const InvariantTarget& f, int pairs, std::uint64_t seed);

inline constexpr double kAuditTolerance = 1e-9;
inline constexpr int kAuditPairs = 64;

// Random resonant-character target for cf (radial-only when no resonant
// primitive exists within the bandwidth).
InvariantTarget make_invariant_target(const CanonicalForm& cf, int bandwidth, std::uint64_t seed);

Dataset synth_invariant_regression(const CanonicalForm& cf, std::size_t samples, double noise_sigma,
                                   std::uint64_t seed, int bandwidth);

// Labels 1[f(x) + noise > median f] for the same kind of target.
Dataset synth_invariant_classification(const CanonicalForm& cf, std::size_t samples, double noise_sigma,
                                       std::uint64_t seed, int bandwidth);

// Six-dimensional analog of a spring-coupled double pendulum whose target is
// invariant under the diagonal rotation of all three planes,
// B = (J (+) J (+) J) / sqrt(3).
InvariantTarget pendulum_target();
Dataset double_pendulum_task(std::size_t samples, double noise_sigma, std::uint64_t seed);

// y' = y + N(0, sigma^2) elementwise; x untouched.
Dataset add_noise(Dataset ds, double sigma, std::uint64_t seed);

// Builds one of the named tasks: pendulum6d, rotated4d, diagonal4d, random,
// classify4d. `n` is only consulted by `random`.
Dataset make_task(const std::string& task, int n, std::size_t samples, double noise_sigma, std::uint64_t seed,
                  int bandwidth = 1);
const std::vector<std::string>& task_names();

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace sdisc
