#pragma once

#include <cstdint>
#include <optional>

#include "thermodiffuse/linalg.hpp"
#include "thermodiffuse/matrix.hpp"

namespace tdiff {

struct SubstrateConfig {
  double kbt = 1.0;  // thermal energy
  double j2 = 0.1;   // self-coupling strength
  double j4 = 0.0;   // quartic coefficient, 0 in the linear regime
  std::size_t dim = 128;

  void validate() const;
};

// Symmetric PSD interaction matrix J = W^T W / (4 kbt).
struct CouplingMatrix {
  Matrix j;
};

// Rank-k cross-module coupling. Factors are stored before normalization;
// normalizer = |left * right^T|_F, and
// dense = left * right^T / (normalizer * 4 kbt).
struct SkipCoupling {
  std::size_t rank = 0;
  Matrix left_factor;   // D x k
  Matrix right_factor;  // D x k
  double normalizer = 0.0;
  Matrix dense;  // D x D
};

// 2D x 2D symmetric block system: m = [[A, S], [S^T, B]], bias = b_enc|b_dec.
struct BlockSystem {
  Matrix m;
  Vector bias;
  Matrix a_block;
  Matrix b_block;
};

struct Equilibrium {
  Vector x_star;
  Vector y_star;
};

struct SpectralReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double gamma = 0.0;  // = lambda_min
};

struct RhoSkipResult {
  double mean_rho = 0.0;
  double cv = 0.0;           // relative standard error of the mean
  Vector per_dim_shift;      // mean decoder shift per dimension
};

CouplingMatrix gram_coupling(const Matrix& w, const SubstrateConfig& cfg);

SkipCoupling skip_coupling(const CouplingMatrix& j_enc, const CouplingMatrix& j_dec,
                           std::size_t k, const SubstrateConfig& cfg);

BlockSystem assemble_block(const CouplingMatrix& j_enc, const CouplingMatrix& j_dec,
                           const SkipCoupling* skip, const Vector& b_enc, const Vector& b_dec,
                           const SubstrateConfig& cfg);

SpectralReport validate_pd(const BlockSystem& sys);

Equilibrium solve_equilibrium(const BlockSystem& sys);

// Mean relative decoder shift over oracle-target samples: the same biases are
// solved with and without the skip coupling and compared on the decoder half.
RhoSkipResult rho_skip(const CouplingMatrix& j_enc, const CouplingMatrix& j_dec,
                       const SkipCoupling& skip,
                       const std::vector<std::pair<Vector, Vector>>& target_samples,
                       const SubstrateConfig& cfg);

}  // namespace tdiff
