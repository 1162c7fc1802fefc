#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermodiffuse/matrix.hpp"

namespace tdiff {

// Paired encoder/decoder activation samples.
// provenance: "random" | "synthetic-correlated" | "ingested".
struct ActivationSet {
  std::vector<Vector> x_enc;
  std::vector<Vector> x_dec_target;
  std::string provenance;
};

// Square weight matrix, entries i.i.d. Gaussian with std scale/sqrt(dim).
Matrix gen_random_weights(std::size_t dim, std::uint64_t seed, double scale = 0.2);

// Independent standard-normal activation pairs.
ActivationSet gen_random_activations(std::size_t dim, std::size_t n, std::uint64_t seed);

// Shared-latent pairs: x_enc = G z + noise*eps, x_dec_target = H z + noise*eps',
// with fixed dim x r mixing matrices G, H (entries std 1/sqrt(r)).
ActivationSet gen_correlated_activations(std::size_t dim, std::size_t n,
                                         std::size_t correlation_rank, std::uint64_t seed,
                                         double noise = 0.1);

// Weight matrix whose Gram coupling W^T W / (4 kbt) has a log-spaced spectrum
// from lambda_max down across the given number of decades.
Matrix gen_spectral_weights(std::size_t dim, double lambda_max, double decades, double kbt,
                            std::uint64_t seed);

// Targets concentrated along the top eigenvector of j: x = s*u1 + noise*eps.
std::vector<Vector> gen_aligned_targets(const Matrix& j, std::size_t n, double noise,
                                        std::uint64_t seed);

}  // namespace tdiff
