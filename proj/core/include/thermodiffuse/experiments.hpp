#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermodiffuse/conditioning.hpp"
#include "thermodiffuse/energy.hpp"
#include "thermodiffuse/generators.hpp"
#include "thermodiffuse/langevin.hpp"
#include "thermodiffuse/report.hpp"
#include "thermodiffuse/substrate.hpp"
#include "thermodiffuse/tensor_io.hpp"

namespace tdiff {

// Skip-coupling rank sweep plus the no-skip oracle-recovery control.
struct ExperimentAConfig {
  std::string regime = "analytical";  // "analytical" | "ingested"
  std::size_t dim = 128;
  std::vector<std::size_t> ranks = {2, 4, 8, 16, 32, 48, 64};
  std::size_t n_samples = 64;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  SubstrateConfig substrate;
  double weight_scale = 0.2;
  bool parallel = false;
  const IngestedData* ingested = nullptr;
};

ExperimentReport run_experiment_a(const ExperimentAConfig& cfg);

// Conditioning-interface sweep over bottleneck rank and encoder kind.
struct ExperimentBConfig {
  std::size_t dim = 64;
  std::vector<std::size_t> k_list = {1, 2, 4, 8, 16, 32, 64};
  std::string encoder_kind = "both";  // "linear" | "mlp" | "both"
  std::uint64_t seed = 1;
  SubstrateConfig substrate;
  double weight_scale = 0.2;
  std::size_t skip_rank = 16;
  std::size_t latent_rank = 4;
  double noise = 0.1;
  std::size_t n_train = 256;
  std::size_t n_holdout = 64;
  TrainConfig train;
  EnergyModel energy;
  bool parallel = false;
};

ExperimentReport run_experiment_b(const ExperimentBConfig& cfg);

// Four-regime production test: oracle ceiling, full pipeline, skip-only
// conditioning, and the skip share of the decoder equilibrium.
struct ExperimentCConfig {
  std::string regime = "analytical";     // "analytical" | "ingested"
  std::string data_kind = "correlated";  // "correlated" | "random"
  std::size_t dim = 64;
  std::size_t k = 4;
  std::uint64_t seed = 1;
  SubstrateConfig substrate;
  double weight_scale = 0.2;
  std::size_t skip_rank = 16;
  std::size_t latent_rank = 4;
  double noise = 0.1;
  std::size_t n_train = 256;
  std::size_t n_holdout = 64;
  TrainConfig train;
  const IngestedData* ingested = nullptr;
};

ExperimentReport run_experiment_c(const ExperimentCConfig& cfg);

// Simulator validation: stationary moments against the exact solve, noise-free
// relaxation step counts across dimensions, and the quartic response.
struct LangevinCheckConfig {
  std::size_t dim = 4;
  std::uint64_t seed = 1;
  SubstrateConfig substrate;
  double weight_scale = 0.2;
  std::size_t n_replicas = 64;
  std::size_t n_steps = 49152;
  std::size_t burn_in = 16384;
  std::vector<std::size_t> mixing_dims = {16, 32, 64, 128};
  double mixing_coordinate_tol = 1e-3;
  double quartic_j4 = 2e-4;
};

ExperimentReport run_langevin_check(const LangevinCheckConfig& cfg);

// Signal-deficit study: rank-1 prediction check plus the spectral-span report
// on a trained-style synthetic spectrum.
struct DeficitRunConfig {
  std::size_t dim = 128;
  double lambda_max = 0.034;
  double decades = 6.0;
  std::size_t n_samples = 64;
  double noise = 0.05;
  std::uint64_t seed = 1;
  SubstrateConfig substrate;
};

ExperimentReport run_deficit(const DeficitRunConfig& cfg);

ExperimentReport run_energy_report(const EnergyModel& model);

// Least-squares fit y = a + b x with the coefficient of determination.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tdiff
