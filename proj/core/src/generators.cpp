#include "thermodiffuse/generators.hpp"

#include <cmath>
#include <string>

#include "thermodiffuse/errors.hpp"
#include "thermodiffuse/linalg.hpp"
#include "thermodiffuse/rng.hpp"

namespace tdiff {

namespace {

Vector normal_vector(Rng& rng, std::size_t n, double std_dev = 1.0) {
  Vector v(n);
  for (double& x : v) x = std_dev * rng.next_normal();
  return v;
}

}  // namespace

Matrix gen_random_weights(std::size_t dim, std::uint64_t seed, double scale) {
  if (dim < 2) throw ContractViolation("gen_random_weights: dim must be >= 2");
  if (scale <= 0.0) throw ContractViolation("gen_random_weights: scale must be > 0");
  Rng rng(seed);
  const double std_dev = scale / std::sqrt(static_cast<double>(dim));
  Matrix w(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) w(i, j) = std_dev * rng.next_normal();
  }
  return w;
}

ActivationSet gen_random_activations(std::size_t dim, std::size_t n, std::uint64_t seed) {
  if (dim == 0 || n == 0) throw ContractViolation("gen_random_activations: empty request");
  Rng rng(seed);
  ActivationSet set;
  set.provenance = "random";
  set.x_enc.reserve(n);
  set.x_dec_target.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    set.x_enc.push_back(normal_vector(rng, dim));
    set.x_dec_target.push_back(normal_vector(rng, dim));
  }
  return set;
}

ActivationSet gen_correlated_activations(std::size_t dim, std::size_t n,
                                         std::size_t correlation_rank, std::uint64_t seed,
                                         double noise) {
  if (correlation_rank < 1 || correlation_rank > dim) {
    throw ContractViolation("gen_correlated_activations: correlation rank " +
                            std::to_string(correlation_rank) + " outside [1, " +
                            std::to_string(dim) + "]");
  }
  if (n == 0) throw ContractViolation("gen_correlated_activations: n must be positive");
  if (noise < 0.0) throw ContractViolation("gen_correlated_activations: noise must be >= 0");
  Rng rng(seed);
  const double mix_std = 1.0 / std::sqrt(static_cast<double>(correlation_rank));
  Matrix g(dim, correlation_rank), h(dim, correlation_rank);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < correlation_rank; ++j) g(i, j) = mix_std * rng.next_normal();
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < correlation_rank; ++j) h(i, j) = mix_std * rng.next_normal();
  }
  ActivationSet set;
  set.provenance = "synthetic-correlated";
  set.x_enc.reserve(n);
  set.x_dec_target.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const Vector z = normal_vector(rng, correlation_rank);
    Vector x = g * z;
    for (double& v : x) v += noise * rng.next_normal();
    Vector y = h * z;
    for (double& v : y) v += noise * rng.next_normal();
    set.x_enc.push_back(std::move(x));
    set.x_dec_target.push_back(std::move(y));
  }
  return set;
}

Matrix gen_spectral_weights(std::size_t dim, double lambda_max, double decades, double kbt,
                            std::uint64_t seed) {
  if (dim < 2) throw ContractViolation("gen_spectral_weights: dim must be >= 2");
  if (lambda_max <= 0.0 || decades < 0.0 || kbt <= 0.0) {
    throw ContractViolation("gen_spectral_weights: lambda_max and kbt must be > 0, decades >= 0");
  }
  // random orthogonal basis from the SVD of a Gaussian matrix
  Rng rng(seed);
  Matrix gauss(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) gauss(i, j) = rng.next_normal();
  }
  const Matrix v = svd(gauss).v;
  Matrix w(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double lam =
        lambda_max * std::pow(10.0, -decades * static_cast<double>(i) /
                                        static_cast<double>(dim - 1));
    const double s = std::sqrt(4.0 * kbt * lam);
    for (std::size_t j = 0; j < dim; ++j) w(i, j) = s * v(j, i);
  }
  return w;
}

std::vector<Vector> gen_aligned_targets(const Matrix& j, std::size_t n, double noise,
                                        std::uint64_t seed) {
  if (n == 0) throw ContractViolation("gen_aligned_targets: n must be positive");
  if (noise < 0.0) throw ContractViolation("gen_aligned_targets: noise must be >= 0");
  const Matrix u = sym_eig(j).vectors;
  const std::size_t d = j.rows();
  Rng rng(seed);
  std::vector<Vector> targets;
  targets.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double amp = rng.next_normal();
    Vector x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = amp * u(i, 0) + noise * rng.next_normal();
    targets.push_back(std::move(x));
  }
  return targets;
}

}  // namespace tdiff
