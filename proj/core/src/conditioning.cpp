#include "thermodiffuse/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "thermodiffuse/errors.hpp"
#include "thermodiffuse/linalg.hpp"
#include "thermodiffuse/rng.hpp"

namespace tdiff {

Vector oracle_bias(const Vector& x_target, const Matrix& a_block) {
  return a_block * x_target;
}

Vector naive_bias(const Vector& x, const CouplingMatrix& j_enc) {
  return transpose_times(j_enc.j, x);
}

namespace {

double entry_std(const std::vector<Vector>& rows) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    for (double v : r) sum += v;
    n += r.size();
  }
  const double mean = sum / n;
  double var = 0.0;
  for (const auto& r : rows) {
    for (double v : r) var += (v - mean) * (v - mean);
  }
  return std::sqrt(var / n);
}

void fill_gaussian(Matrix& m, Rng& rng, double std_dev) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = std_dev * rng.next_normal();
  }
}

void step_matrix(Matrix& m, const Matrix& g, double lr) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) -= lr * g(i, j);
  }
}

void step_vector(Vector& v, const Vector& g, double lr) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
}

}  // namespace

DeficitReport deficit_analysis(const CouplingMatrix& j_enc, const std::vector<Vector>& targets,
                               const SubstrateConfig& cfg) {
  if (targets.size() < 16) {
    throw ContractViolation("deficit_analysis: needs at least 16 samples, got " +
                            std::to_string(targets.size()));
  }
  cfg.validate();
  const std::size_t d = j_enc.j.rows();

  DeficitReport rep;
  rep.spectrum = sym_eig(j_enc.j).values;
  const double lambda_max = rep.spectrum.front();
  if (lambda_max <= 1e-14) {
    throw DegenerateSpectrum("deficit_analysis: coupling spectrum is numerically zero");
  }
  double lambda_min_pos = lambda_max;
  double log_sum = 0.0;
  std::size_t n_pos = 0;
  for (double lam : rep.spectrum) {
    if (lam > 1e-14) {
      lambda_min_pos = lam;
      log_sum += std::log(lam / (2.0 * cfg.j2));
      ++n_pos;
    }
  }
  rep.spectral_span_decades = std::log10(lambda_max / lambda_min_pos);
  rep.predicted_ratio = lambda_max / (2.0 * cfg.j2);
  rep.compound_geometric = std::exp(log_sum / n_pos);

  Matrix a_block = j_enc.j + j_enc.j.transposed();
  for (std::size_t i = 0; i < d; ++i) a_block(i, i) += 2.0 * cfg.j2;

  std::vector<Vector> naive_rows, oracle_rows;
  naive_rows.reserve(targets.size());
  oracle_rows.reserve(targets.size());
  for (const auto& x : targets) {
    naive_rows.push_back(naive_bias(x, j_enc));
    oracle_rows.push_back(oracle_bias(x, a_block));
  }
  rep.sigma_naive = entry_std(naive_rows);
  rep.sigma_oracle = entry_std(oracle_rows);
  if (rep.sigma_oracle < 1e-300) {
    throw DegenerateBaseline("deficit_analysis: oracle biases have zero spread");
  }
  rep.empirical_ratio = rep.sigma_naive / rep.sigma_oracle;
  rep.compound_aggregate = rep.empirical_ratio;
  return rep;
}

ConditioningInterface make_interface(std::size_t bottleneck_rank, std::size_t dim,
                                     bool use_bias, std::uint64_t seed, double init_gain) {
  if (bottleneck_rank == 0 || dim == 0) {
    throw ContractViolation("make_interface: rank and dim must be positive");
  }
  ConditioningInterface iface;
  iface.w1 = Matrix(bottleneck_rank, dim);
  iface.w2 = Matrix(dim, bottleneck_rank);
  iface.t_in = Matrix(kTransferHidden, dim);
  iface.t_out = Matrix(dim, kTransferHidden);
  iface.use_bias = use_bias;
  if (use_bias) {
    iface.t_in_bias.assign(kTransferHidden, 0.0);
    iface.t_out_bias.assign(dim, 0.0);
  }
  Rng rng(seed);
  fill_gaussian(iface.w1, rng, init_gain / std::sqrt(static_cast<double>(dim)));
  fill_gaussian(iface.w2, rng, init_gain / std::sqrt(static_cast<double>(bottleneck_rank)));
  fill_gaussian(iface.t_in, rng, init_gain / std::sqrt(static_cast<double>(dim)));
  fill_gaussian(iface.t_out, rng, init_gain / std::sqrt(static_cast<double>(kTransferHidden)));
  return iface;
}

BiasPair interface_forward(const ConditioningInterface& iface, const Vector& x_enc) {
  BiasPair out;
  out.b_enc = iface.w2 * (iface.w1 * x_enc);
  Vector pre = iface.t_in * out.b_enc;
  if (iface.use_bias) pre = pre + iface.t_in_bias;
  for (double& p : pre) p = std::max(0.0, p);
  out.b_dec = iface.t_out * pre;
  if (iface.use_bias) out.b_dec = out.b_dec + iface.t_out_bias;
  return out;
}

double interface_loss(const ConditioningInterface& iface,
                      const std::vector<std::pair<Vector, BiasPair>>& pairs) {
  if (pairs.empty()) throw ContractViolation("interface_loss: empty sample set");
  const double scale = 1.0 / (static_cast<double>(pairs.size()) * iface.dim());
  double total = 0.0;
  for (const auto& [x, target] : pairs) {
    const BiasPair pred = interface_forward(iface, x);
    for (std::size_t i = 0; i < pred.b_enc.size(); ++i) {
      const double de = pred.b_enc[i] - target.b_enc[i];
      const double dd = pred.b_dec[i] - target.b_dec[i];
      total += de * de + dd * dd;
    }
  }
  return total * scale;
}

InterfaceGradient interface_gradient(const ConditioningInterface& iface,
                                     const std::vector<std::pair<Vector, BiasPair>>& pairs) {
  if (pairs.empty()) throw ContractViolation("interface_gradient: empty sample set");
  const std::size_t d = iface.dim();
  const std::size_t k = iface.bottleneck_rank();
  InterfaceGradient g;
  g.w1 = Matrix(k, d);
  g.w2 = Matrix(d, k);
  g.t_in = Matrix(kTransferHidden, d);
  g.t_out = Matrix(d, kTransferHidden);
  if (iface.use_bias) {
    g.t_in_bias.assign(kTransferHidden, 0.0);
    g.t_out_bias.assign(d, 0.0);
  }
  const double scale = 2.0 / (static_cast<double>(pairs.size()) * d);

  for (const auto& [x, target] : pairs) {
    const Vector h = iface.w1 * x;
    const Vector e_hat = iface.w2 * h;
    Vector pre = iface.t_in * e_hat;
    if (iface.use_bias) pre = pre + iface.t_in_bias;
    Vector r = pre;
    for (double& p : r) p = std::max(0.0, p);
    Vector d_hat = iface.t_out * r;
    if (iface.use_bias) d_hat = d_hat + iface.t_out_bias;

    Vector ge(d), gd(d);
    for (std::size_t i = 0; i < d; ++i) {
      ge[i] = scale * (e_hat[i] - target.b_enc[i]);
      gd[i] = scale * (d_hat[i] - target.b_dec[i]);
    }

    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < kTransferHidden; ++j) g.t_out(i, j) += gd[i] * r[j];
    }
    Vector gp = transpose_times(iface.t_out, gd);
    for (std::size_t j = 0; j < kTransferHidden; ++j) {
      if (pre[j] <= 0.0) gp[j] = 0.0;
    }
    if (iface.use_bias) {
      for (std::size_t i = 0; i < d; ++i) g.t_out_bias[i] += gd[i];
      for (std::size_t j = 0; j < kTransferHidden; ++j) g.t_in_bias[j] += gp[j];
    }
    for (std::size_t j = 0; j < kTransferHidden; ++j) {
      for (std::size_t i = 0; i < d; ++i) g.t_in(j, i) += gp[j] * e_hat[i];
    }
    // the encoder output feeds both its own loss term and the transfer net
    const Vector ge_total = ge + transpose_times(iface.t_in, gp);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < k; ++j) g.w2(i, j) += ge_total[i] * h[j];
    }
    const Vector gh = transpose_times(iface.w2, ge_total);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < d; ++i) g.w1(j, i) += gh[j] * x[i];
    }
  }
  return g;
}

TrainResult train_interface(const std::vector<std::pair<Vector, BiasPair>>& train_pairs,
                            const TrainConfig& hyper) {
  if (train_pairs.size() < 2) {
    throw ContractViolation("train_interface: needs at least 2 pairs");
  }
  const std::size_t d = train_pairs.front().first.size();
  for (const auto& [x, target] : train_pairs) {
    if (x.size() != d || target.b_enc.size() != d || target.b_dec.size() != d) {
      throw DimensionMismatch("train_interface: inconsistent sample dimensions");
    }
  }
  if (hyper.learning_rate <= 0.0 || hyper.max_iterations == 0 || hyper.stall_window == 0) {
    throw ContractViolation("train_interface: bad hyperparameters");
  }

  TrainResult res;
  res.iface = make_interface(hyper.bottleneck_rank, d, hyper.use_bias, hyper.init_seed,
                             hyper.init_gain);
  double loss = interface_loss(res.iface, train_pairs);
  if (!std::isfinite(loss)) throw DivergedTraining("train_interface: non-finite initial loss", 0);
  res.loss_history.push_back(loss);

  double lr = hyper.learning_rate;
  double window_best = loss;
  std::size_t accepted = 0;
  InterfaceGradient grad = interface_gradient(res.iface, train_pairs);

  for (std::size_t iter = 1; iter <= hyper.max_iterations; ++iter) {
    ConditioningInterface cand = res.iface;
    step_matrix(cand.w1, grad.w1, lr);
    step_matrix(cand.w2, grad.w2, lr);
    step_matrix(cand.t_in, grad.t_in, lr);
    step_matrix(cand.t_out, grad.t_out, lr);
    if (cand.use_bias) {
      step_vector(cand.t_in_bias, grad.t_in_bias, lr);
      step_vector(cand.t_out_bias, grad.t_out_bias, lr);
    }
    const double cand_loss = interface_loss(cand, train_pairs);
    if (std::isfinite(cand_loss) && cand_loss <= loss) {
      res.iface = std::move(cand);
      loss = cand_loss;
      res.loss_history.push_back(loss);
      lr *= hyper.growth;
      grad = interface_gradient(res.iface, train_pairs);
      ++accepted;
      if (loss == 0.0) break;
      if (accepted % hyper.stall_window == 0) {
        if ((window_best - loss) <= hyper.rel_tol * window_best) break;
        window_best = loss;
      }
    } else {
      lr *= 0.5;
      if (lr < 1e-18) {
        if (!std::isfinite(cand_loss)) {
          throw DivergedTraining("train_interface: loss non-finite at every step size", iter);
        }
        break;  // step size exhausted; current point is the converged result
      }
    }
  }
  return res;
}

std::size_t count_parameters(const ConditioningInterface& iface) {
  std::size_t n = iface.w1.rows() * iface.w1.cols() + iface.w2.rows() * iface.w2.cols() +
                  iface.t_in.rows() * iface.t_in.cols() + iface.t_out.rows() * iface.t_out.cols();
  if (iface.use_bias) n += iface.t_in_bias.size() + iface.t_out_bias.size();
  return n;
}

}  // namespace tdiff
