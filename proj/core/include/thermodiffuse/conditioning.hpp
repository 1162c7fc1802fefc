#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "thermodiffuse/matrix.hpp"
#include "thermodiffuse/substrate.hpp"

namespace tdiff {

// Target biases for one sample: encoder-block bias and decoder-block bias.
struct BiasPair {
  Vector b_enc;
  Vector b_dec;
};

// Bottleneck encoder (w2*w1, rank k) plus a 16-unit ReLU transfer net
// mapping the encoder bias to the decoder bias. Bias-free by default.
struct ConditioningInterface {
  Matrix w1;      // k x D
  Matrix w2;      // D x k
  Matrix t_in;    // 16 x D
  Matrix t_out;   // D x 16
  bool use_bias = false;
  Vector t_in_bias;   // length 16 when use_bias
  Vector t_out_bias;  // length D when use_bias

  std::size_t bottleneck_rank() const { return w1.rows(); }
  std::size_t dim() const { return w1.cols(); }
};

inline constexpr std::size_t kTransferHidden = 16;

struct TrainConfig {
  double learning_rate = 0.05;
  double growth = 1.1;             // step growth after an accepted iteration
  std::size_t max_iterations = 5000;
  double rel_tol = 1e-9;           // relative improvement threshold
  std::size_t stall_window = 100;  // iterations per improvement check
  std::uint64_t init_seed = 1;
  double init_gain = 0.1;          // multiplies the 1/sqrt(fan-in) init std
  std::size_t bottleneck_rank = 4;
  bool use_bias = false;
};

struct TrainResult {
  ConditioningInterface iface;
  std::vector<double> loss_history;
};

// Same shapes as the interface; holds d(loss)/d(parameter).
struct InterfaceGradient {
  Matrix w1;
  Matrix w2;
  Matrix t_in;
  Matrix t_out;
  Vector t_in_bias;
  Vector t_out_bias;
};

struct DeficitReport {
  double sigma_naive = 0.0;
  double sigma_oracle = 0.0;
  double empirical_ratio = 0.0;
  double predicted_ratio = 0.0;     // lambda_max / (2 j2)
  Vector spectrum;                  // eigenvalues, non-increasing
  double spectral_span_decades = 0.0;
  // Compounded attenuation across the spectrum, published under both
  // readings: per-mode geometric mean and aggregate std ratio.
  double compound_geometric = 0.0;
  double compound_aggregate = 0.0;
};

Vector oracle_bias(const Vector& x_target, const Matrix& a_block);
Vector naive_bias(const Vector& x, const CouplingMatrix& j_enc);

DeficitReport deficit_analysis(const CouplingMatrix& j_enc, const std::vector<Vector>& targets,
                               const SubstrateConfig& cfg);

ConditioningInterface make_interface(std::size_t bottleneck_rank, std::size_t dim,
                                     bool use_bias, std::uint64_t seed, double init_gain);

BiasPair interface_forward(const ConditioningInterface& iface, const Vector& x_enc);

// Mean squared error per entry, encoder and decoder terms weighted equally.
double interface_loss(const ConditioningInterface& iface,
                      const std::vector<std::pair<Vector, BiasPair>>& pairs);

InterfaceGradient interface_gradient(const ConditioningInterface& iface,
                                     const std::vector<std::pair<Vector, BiasPair>>& pairs);

TrainResult train_interface(const std::vector<std::pair<Vector, BiasPair>>& train_pairs,
                            const TrainConfig& hyper);

std::size_t count_parameters(const ConditioningInterface& iface);

}  // namespace tdiff
