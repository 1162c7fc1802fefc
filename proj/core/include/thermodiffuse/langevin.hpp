#pragma once

#include <cstdint>

#include "thermodiffuse/substrate.hpp"

namespace tdiff {

struct LangevinConfig {
  double mobility = 1.0;
  double dt = 0.0;  // 0 selects the default 0.01 / (mobility * lambda_max(M))
  std::size_t n_steps = 400;
  std::size_t burn_in = 200;  // default: half of n_steps
  std::uint64_t seed = 1;
  std::size_t n_replicas = 64;

  void validate() const;
};

struct TrajectoryStats {
  Vector mean;             // length 2D
  Vector covariance_diag;  // length 2D
  Vector mean_std_error;   // per-coordinate standard error from replica spread
  std::size_t n_effective_samples = 0;
};

// Gradient of V(z) = z.M.z/2 - b.z + j4 * sum z_i^4.
Vector potential_gradient(const Vector& z, const BlockSystem& sys, const SubstrateConfig& cfg);

// Euler-Maruyama simulation from z = 0: one independent noise stream per
// replica, moments accumulated after burn_in.
TrajectoryStats simulate(const BlockSystem& sys, const SubstrateConfig& scfg,
                         const LangevinConfig& lcfg);

// Relative stationary-mean shift caused by the quartic term, estimated with
// matched noise streams for the j4 = 0 and j4 > 0 runs.
double quartic_perturbation(const BlockSystem& sys, const SubstrateConfig& scfg,
                            const LangevinConfig& lcfg);

struct MixingReport {
  std::size_t steps = 0;
  double theoretical_bound = 0.0;  // log(D/eps) / (mobility * dt * gamma)
};

// Noise-free relaxation step count from z = 0 until |z - z*|/|z*| <= eps.
MixingReport mixing_estimate(const BlockSystem& sys, const SubstrateConfig& scfg,
                             const LangevinConfig& lcfg, double epsilon);

// Resolves the configured dt, applying the default when dt == 0, and checks
// the explicit-Euler stability bound dt * mobility * lambda_max < 2.
double resolve_dt(const LangevinConfig& lcfg, double lambda_max);

}  // namespace tdiff
