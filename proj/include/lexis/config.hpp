#pragma once

// Experiment configuration: a JSON schema with strict key validation, a
// built-in study preset (section5), and the parametric model family the
// preset draws from.
//
// Precedence: schema defaults (= the section-5 preset) <- config file
// <- command-line flags (--seed, --threads, --out).

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lexis/model.hpp"

namespace lexis {

// Parametric model family:
//   birth(t, a)  = birth_amplitude * 1{window_lo <= a <= window_hi}
//   death(t, a)  = death_scale * exp(death_age_rate * a) * exp(death_time_rate * t)
//   g0           = Gaussian(initial_mean, initial_variance) truncated to [0, max_age]
// Defaults are the section5 preset values.
struct ModelParams {
  double window_lo = 20.0;
  double window_hi = 40.0;
  double birth_amplitude = 1.0;
  double death_scale = 0.04;
  double death_age_rate = 0.0074;
  double death_time_rate = -0.005;
  double initial_mean = 40.0;
  double initial_variance = 152.0;
  double horizon = 20.0;
  double max_age = 120.0;
};

Demography build_model(const ModelParams& params);

struct ExperimentConfig {
  ModelParams model;

  // Convergence study.
  std::vector<long long> N_list{100, 500, 1000, 2000, 4000, 8000};
  int replications = 50;
  std::vector<std::pair<double, double>> density_points{{16.08, 20.82},
                                                        {19.10, 0.40}};
  std::vector<std::pair<double, double>> death_points{{14.07, 86.07},
                                                      {11.06, 0.00}};

  // Pointwise confidence-band study.
  long long ci_N = 4000;

  // Estimation settings.
  std::vector<double> varpi{0.01, 0.005};
  std::size_t grid_points = 30;
  std::string grid_mode = "geometric";  // or "uniform"
  double c_star = 0.1;
  bool order_restrict_bivariate = true;
  std::string kernel_time = "epanechnikov";
  std::string kernel_age = "epanechnikov";

  // Limit solver and trajectory persistence.
  double dt = 0.01;
  double snapshot_lattice = 0.5;

  // Concentration-tail study.
  std::vector<long long> conc_N{500, 2000, 8000};
  int conc_replications = 200;
  double conc_h = 0.1;
  double conc_center_age = 20.0;
  double u_max = 3.0;
  std::size_t u_points = 12;

  // Reporting: smoothness parameters for the theoretical exponents.
  double alpha = 2.0, beta = 2.0, gamma = 2.0, delta = 2.0;

  // Execution.
  std::uint64_t seed = 42;
  int threads = 1;
  std::string output_dir = "out";
};

// The defaults above, as a named preset.
ExperimentConfig section5_preset();

// Parses a JSON config file and overlays it on `base`. Unknown keys anywhere
// in the document are hard errors. Validates the invariants (sorted N_list,
// off-diagonal evaluation points, positive bandwidth/threshold parameters).
ExperimentConfig load_config(const std::filesystem::path& path,
                             const ExperimentConfig& base);

// Re-validates an in-memory config (used after flag overrides).
void validate_config(const ExperimentConfig& cfg);

// Canonical JSON serialization (sorted keys, shortest round-trip numbers).
// Excludes execution-only fields (threads, output_dir) so that runs that
// differ only in parallelism or placement hash identically.
std::string config_to_json(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical serialization, reported in run manifests.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace lexis
