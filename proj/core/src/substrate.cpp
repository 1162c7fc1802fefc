#include "thermodiffuse/substrate.hpp"

#include <cmath>
#include <string>

#include "thermodiffuse/errors.hpp"

namespace tdiff {

void SubstrateConfig::validate() const {
  if (kbt <= 0.0) throw ContractViolation("substrate config: kbt must be > 0");
  if (j2 <= 0.0) throw ContractViolation("substrate config: j2 must be > 0");
  if (j4 < 0.0) throw ContractViolation("substrate config: j4 must be >= 0");
  if (dim < 1) throw ContractViolation("substrate config: dim must be >= 1");
}

CouplingMatrix gram_coupling(const Matrix& w, const SubstrateConfig& cfg) {
  cfg.validate();
  if (w.cols() != cfg.dim) {
    throw DimensionMismatch("gram_coupling: weight matrix has " + std::to_string(w.cols()) +
                            " columns, config dim is " + std::to_string(cfg.dim));
  }
  const double scale = 1.0 / (4.0 * cfg.kbt);
  Matrix j(cfg.dim, cfg.dim);
  for (std::size_t i = 0; i < cfg.dim; ++i) {
    for (std::size_t k = i; k < cfg.dim; ++k) {
      double s = 0.0;
      for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, i) * w(r, k);
      j(i, k) = s * scale;
      j(k, i) = j(i, k);
    }
  }
  return {std::move(j)};
}

SkipCoupling skip_coupling(const CouplingMatrix& j_enc, const CouplingMatrix& j_dec,
                           std::size_t k, const SubstrateConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.dim;
  if (j_enc.j.rows() != d || j_enc.j.cols() != d || j_dec.j.rows() != d || j_dec.j.cols() != d) {
    throw DimensionMismatch("skip_coupling: coupling matrices must be DxD");
  }
  if (k < 1 || k > d) {
    throw ContractViolation("skip_coupling: rank " + std::to_string(k) +
                            " outside [1, " + std::to_string(d) + "]");
  }

  const SvdResult se = svd(j_enc.j);
  const SvdResult sd = svd(j_dec.j);
  if (se.sigma[0] < 1e-14 || sd.sigma[0] < 1e-14) {
    throw DegenerateSpectrum("skip_coupling: a coupling spectrum is entirely below 1e-14");
  }

  SkipCoupling out;
  out.rank = k;
  out.left_factor = Matrix(d, k);
  out.right_factor = Matrix(d, k);
  for (std::size_t j = 0; j < k; ++j) {
    const double re = std::sqrt(se.sigma[j]);
    const double rd = std::sqrt(sd.sigma[j]);
    for (std::size_t i = 0; i < d; ++i) {
      out.left_factor(i, j) = se.u(i, j) * re;
      out.right_factor(i, j) = sd.u(i, j) * rd;
    }
  }

  // |P|_F for P = L R^T without forming P: trace((L^T L)(R^T R)).
  Matrix ltl = out.left_factor.transposed() * out.left_factor;
  Matrix rtr = out.right_factor.transposed() * out.right_factor;
  double fro2 = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) fro2 += ltl(i, j) * rtr(j, i);
  out.normalizer = std::sqrt(fro2);
  if (!(out.normalizer > 0.0)) {
    throw DegenerateSpectrum("skip_coupling: zero-norm factor product");
  }

  const double scale = 1.0 / (out.normalizer * 4.0 * cfg.kbt);
  out.dense = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j2i = 0; j2i < d; ++j2i) {
      double s = 0.0;
      for (std::size_t r = 0; r < k; ++r) s += out.left_factor(i, r) * out.right_factor(j2i, r);
      out.dense(i, j2i) = s * scale;
    }
  return out;
}

BlockSystem assemble_block(const CouplingMatrix& j_enc, const CouplingMatrix& j_dec,
                           const SkipCoupling* skip, const Vector& b_enc, const Vector& b_dec,
                           const SubstrateConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.dim;
  if (j_enc.j.rows() != d || j_dec.j.rows() != d) {
    throw DimensionMismatch("assemble_block: coupling dimension mismatch");
  }
  if (b_enc.size() != d || b_dec.size() != d) {
    throw DimensionMismatch("assemble_block: bias length mismatch");
  }
  if (skip && (skip->dense.rows() != d || skip->dense.cols() != d)) {
    throw DimensionMismatch("assemble_block: skip coupling dimension mismatch");
  }

  BlockSystem sys;
  sys.a_block = Matrix(d, d);
  sys.b_block = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      sys.a_block(i, j) = j_enc.j(i, j) + j_enc.j(j, i);
      sys.b_block(i, j) = j_dec.j(i, j) + j_dec.j(j, i);
    }
    sys.a_block(i, i) += 2.0 * cfg.j2;
    sys.b_block(i, i) += 2.0 * cfg.j2;
  }

  sys.m = Matrix(2 * d, 2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      sys.m(i, j) = sys.a_block(i, j);
      sys.m(d + i, d + j) = sys.b_block(i, j);
      const double s = skip ? skip->dense(i, j) : 0.0;
      sys.m(i, d + j) = s;
      sys.m(d + j, i) = s;
    }
  }

  sys.bias.resize(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    sys.bias[i] = b_enc[i];
    sys.bias[d + i] = b_dec[i];
  }
  return sys;
}

SpectralReport validate_pd(const BlockSystem& sys) {
  const EigResult eig = sym_eig(sys.m);
  SpectralReport rep;
  rep.lambda_max = eig.values.front();
  rep.lambda_min = eig.values.back();
  rep.gamma = rep.lambda_min;
  if (rep.lambda_min <= 0.0) {
    throw NotPositiveDefinite("substrate block system is not positive definite (lambda_min = " +
                                  std::to_string(rep.lambda_min) +
                                  "); reduce the skip rank or increase j2",
                              0);
  }
  return rep;
}

Equilibrium solve_equilibrium(const BlockSystem& sys) {
  const Vector z = solve_spd(sys.m, sys.bias);
  const std::size_t d = z.size() / 2;
  Equilibrium eq;
  eq.x_star.assign(z.begin(), z.begin() + d);
  eq.y_star.assign(z.begin() + d, z.end());
  return eq;
}

RhoSkipResult rho_skip(const CouplingMatrix& j_enc, const CouplingMatrix& j_dec,
                       const SkipCoupling& skip,
                       const std::vector<std::pair<Vector, Vector>>& target_samples,
                       const SubstrateConfig& cfg) {
  if (target_samples.size() < 2) {
    throw ContractViolation("rho_skip: need at least 2 target samples");
  }
  const std::size_t d = cfg.dim;
  const Vector zero(d, 0.0);

  // The biases depend on the targets only through the diagonal blocks, so
  // both systems can be factored once and reused for every sample.
  BlockSystem with_skip = assemble_block(j_enc, j_dec, &skip, zero, zero, cfg);
  BlockSystem no_skip = assemble_block(j_enc, j_dec, nullptr, zero, zero, cfg);
  const CholeskyFactor f_skip(with_skip.m);
  const CholeskyFactor f_base(no_skip.m);

  double sum = 0.0, sum_sq = 0.0;
  Vector shift(d, 0.0);
  for (const auto& [x_t, y_t] : target_samples) {
    if (x_t.size() != d || y_t.size() != d) {
      throw DimensionMismatch("rho_skip: target sample dimension mismatch");
    }
    const Vector be = with_skip.a_block * x_t;
    const Vector bd = with_skip.b_block * y_t;
    Vector bias(2 * d);
    for (std::size_t i = 0; i < d; ++i) {
      bias[i] = be[i];
      bias[d + i] = bd[i];
    }
    const Vector z1 = f_skip.solve(bias);
    const Vector z0 = f_base.solve(bias);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double dv = z1[d + i] - z0[d + i];
      num += dv * dv;
      den += z0[d + i] * z0[d + i];
      shift[i] += dv;
    }
    if (std::sqrt(den) < 1e-14) {
      throw DegenerateBaseline("rho_skip: baseline decoder equilibrium has near-zero norm");
    }
    const double rho = std::sqrt(num / den);
    sum += rho;
    sum_sq += rho * rho;
  }

  const double n = static_cast<double>(target_samples.size());
  RhoSkipResult res;
  res.mean_rho = sum / n;
  const double var = std::max(0.0, sum_sq / n - res.mean_rho * res.mean_rho) * n / (n - 1.0);
  // cv reported as the relative standard error of the mean estimate.
  res.cv = res.mean_rho > 0.0 ? std::sqrt(var / n) / res.mean_rho : 0.0;
  res.per_dim_shift = (1.0 / n) * shift;
  return res;
}

}  // namespace tdiff
