#include "thermodiffuse/langevin.hpp"

#include <cmath>
#include <string>

#include "thermodiffuse/errors.hpp"
#include "thermodiffuse/linalg.hpp"
#include "thermodiffuse/rng.hpp"

namespace tdiff {

void LangevinConfig::validate() const {
  if (mobility <= 0.0) throw ContractViolation("langevin config: mobility must be > 0");
  if (dt < 0.0) throw ContractViolation("langevin config: dt must be >= 0");
  if (n_steps == 0) throw ContractViolation("langevin config: n_steps must be positive");
  if (burn_in >= n_steps) throw ContractViolation("langevin config: burn_in must be < n_steps");
  if (n_replicas == 0) throw ContractViolation("langevin config: n_replicas must be positive");
}

Vector potential_gradient(const Vector& z, const BlockSystem& sys, const SubstrateConfig& cfg) {
  if (z.size() != sys.m.rows()) {
    throw DimensionMismatch("potential_gradient: state length " + std::to_string(z.size()) +
                            " vs system size " + std::to_string(sys.m.rows()));
  }
  Vector g = sys.m * z;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] -= sys.bias[i];
    if (cfg.j4 != 0.0) g[i] += 4.0 * cfg.j4 * z[i] * z[i] * z[i];
  }
  return g;
}

double resolve_dt(const LangevinConfig& lcfg, double lambda_max) {
  const double dt = lcfg.dt > 0.0 ? lcfg.dt : 0.01 / (lcfg.mobility * lambda_max);
  if (dt * lcfg.mobility * lambda_max >= 2.0) {
    throw ContractViolation("langevin: dt * mobility * lambda_max = " +
                            std::to_string(dt * lcfg.mobility * lambda_max) +
                            " violates the explicit-Euler stability bound (< 2)");
  }
  return dt;
}

TrajectoryStats simulate(const BlockSystem& sys, const SubstrateConfig& scfg,
                         const LangevinConfig& lcfg) {
  lcfg.validate();
  const std::size_t n = sys.m.rows();
  const double lambda_max = validate_pd(sys).lambda_max;
  const double dt = resolve_dt(lcfg, lambda_max);
  const double noise_scale = std::sqrt(2.0 * lcfg.mobility * scfg.kbt * dt);
  const double step_scale = lcfg.mobility * dt;

  Vector sum(n, 0.0), sum_sq(n, 0.0);
  Matrix replica_means(lcfg.n_replicas, n);
  const std::size_t kept = lcfg.n_steps - lcfg.burn_in;

  for (std::size_t rep = 0; rep < lcfg.n_replicas; ++rep) {
    Rng rng(lcfg.seed, rep);
    Vector z(n, 0.0), rep_sum(n, 0.0);
    for (std::size_t step = 0; step < lcfg.n_steps; ++step) {
      const Vector g = potential_gradient(z, sys, scfg);
      bool finite = true;
      for (std::size_t i = 0; i < n; ++i) {
        z[i] += -step_scale * g[i] + noise_scale * rng.next_normal();
        finite = finite && std::isfinite(z[i]);
      }
      if (!finite) {
        throw DivergedSimulation(
            "langevin state became non-finite at step " + std::to_string(step) + " (replica " +
                std::to_string(rep) + ")",
            step);
      }
      if (step >= lcfg.burn_in) {
        for (std::size_t i = 0; i < n; ++i) {
          sum[i] += z[i];
          sum_sq[i] += z[i] * z[i];
          rep_sum[i] += z[i];
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) replica_means(rep, i) = rep_sum[i] / kept;
  }

  TrajectoryStats st;
  const double total = static_cast<double>(kept) * lcfg.n_replicas;
  st.n_effective_samples = kept * lcfg.n_replicas;
  st.mean.resize(n);
  st.covariance_diag.resize(n);
  st.mean_std_error.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    st.mean[i] = sum[i] / total;
    st.covariance_diag[i] = std::max(0.0, sum_sq[i] / total - st.mean[i] * st.mean[i]);
  }
  if (lcfg.n_replicas > 1) {
    const double r = static_cast<double>(lcfg.n_replicas);
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t rep = 0; rep < lcfg.n_replicas; ++rep) {
        const double d = replica_means(rep, i) - st.mean[i];
        v += d * d;
      }
      st.mean_std_error[i] = std::sqrt(v / (r - 1.0) / r);
    }
  }
  return st;
}

double quartic_perturbation(const BlockSystem& sys, const SubstrateConfig& scfg,
                            const LangevinConfig& lcfg) {
  if (scfg.j4 < 0.0) {
    throw ContractViolation("quartic_perturbation: config j4 must be >= 0");
  }
  SubstrateConfig linear = scfg;
  linear.j4 = 0.0;
  const TrajectoryStats base = simulate(sys, linear, lcfg);
  const TrajectoryStats pert = simulate(sys, scfg, lcfg);
  const double nb = norm(base.mean);
  if (nb < 1e-14) {
    throw DegenerateBaseline("quartic_perturbation: linear-regime mean has near-zero norm");
  }
  return norm(pert.mean - base.mean) / nb;
}

MixingReport mixing_estimate(const BlockSystem& sys, const SubstrateConfig& scfg,
                             const LangevinConfig& lcfg, double epsilon) {
  if (scfg.j4 != 0.0) {
    throw ContractViolation("mixing_estimate: requires the linear regime (j4 = 0)");
  }
  if (epsilon <= 0.0) throw ContractViolation("mixing_estimate: epsilon must be > 0");
  const SpectralReport spec = validate_pd(sys);
  const double dt = resolve_dt(lcfg, spec.lambda_max);
  const Vector z_star = solve_spd(sys.m, sys.bias);
  const double nz = norm(z_star);
  if (nz < 1e-14) {
    throw DegenerateBaseline("mixing_estimate: equilibrium has near-zero norm");
  }

  MixingReport rep;
  const double d_over_eps = static_cast<double>(sys.m.rows() / 2) / epsilon;
  rep.theoretical_bound = std::log(d_over_eps) / (lcfg.mobility * dt * spec.gamma);

  Vector z(sys.m.rows(), 0.0);
  const double step_scale = lcfg.mobility * dt;
  constexpr std::size_t kCap = 1000000;
  for (std::size_t step = 0;; ++step) {
    if (norm(z - z_star) / nz <= epsilon) {
      rep.steps = step;
      return rep;
    }
    if (step >= kCap) {
      throw NonConvergence("mixing_estimate: no convergence within 1e6 steps");
    }
    const Vector g = potential_gradient(z, sys, scfg);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= step_scale * g[i];
  }
}

}  // namespace tdiff
