#include "thermodiffuse/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <sstream>
#include <utility>

#include "thermodiffuse/errors.hpp"
#include "thermodiffuse/linalg.hpp"
#include "thermodiffuse/rng.hpp"

namespace tdiff {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<std::size_t>& xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? " " : "") << xs[i];
  return os.str();
}

std::string join_seeds(const std::vector<std::uint64_t>& xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? " " : "") << xs[i];
  return os.str();
}

void echo_substrate(ExperimentReport& rep, const SubstrateConfig& sub) {
  rep.config.emplace_back("j2", fmt(sub.j2));
  rep.config.emplace_back("kbt", fmt(sub.kbt));
  rep.config.emplace_back("j4", fmt(sub.j4));
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Vector decoder_half(const Vector& z) {
  return Vector(z.begin() + static_cast<std::ptrdiff_t>(z.size() / 2), z.end());
}

std::vector<std::pair<Vector, Vector>> random_target_pairs(std::size_t dim, std::size_t n,
                                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<Vector, Vector>> pairs;
  pairs.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Vector x(dim), y(dim);
    for (double& v : x) v = rng.next_normal();
    for (double& v : y) v = rng.next_normal();
    pairs.emplace_back(std::move(x), std::move(y));
  }
  return pairs;
}

// mean over samples of cos(decoder equilibrium, target)
double mean_decoder_cosine(const CholeskyFactor& chol, const std::vector<Vector>& b_enc,
                           const std::vector<Vector>& b_dec, const std::vector<Vector>& y_true,
                           std::vector<double>* per_sample = nullptr) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const Vector z = chol.solve(concat(b_enc[i], b_dec[i]));
    const double c = cosine(decoder_half(z), y_true[i]);
    if (per_sample) per_sample->push_back(c);
    acc += c;
  }
  return acc / static_cast<double>(y_true.size());
}

}  // namespace

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ContractViolation("fit_line: needs two equal-length samples of at least 2 points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw ContractViolation("fit_line: abscissae are all identical");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy <= 0.0) {
    fit.r_squared = 1.0;
  } else {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (fit.intercept + fit.slope * x[i]);
      sse += e * e;
    }
    fit.r_squared = 1.0 - sse / syy;
  }
  return fit;
}

ExperimentReport run_experiment_a(const ExperimentAConfig& cfg) {
  if (cfg.regime != "analytical" && cfg.regime != "ingested") {
    throw ContractViolation("skip-sweep: regime must be analytical or ingested");
  }
  if (cfg.ranks.empty() || cfg.seeds.empty() || cfg.n_samples < 2) {
    throw ContractViolation("skip-sweep: needs ranks, seeds and at least 2 samples");
  }
  SubstrateConfig sub = cfg.substrate;
  sub.dim = cfg.dim;

  std::optional<Matrix> ingest_we, ingest_wd;
  std::vector<std::pair<Vector, Vector>> ingest_samples;
  ExperimentReport rep;
  rep.experiment = "skip-sweep";
  rep.timestamp = utc_timestamp();
  rep.prng_algorithm = kPrngAlgorithmId;

  if (cfg.regime == "ingested") {
    if (!cfg.ingested || !cfg.ingested->w_enc || !cfg.ingested->w_dec) {
      throw ContractViolation("skip-sweep: ingested regime needs w_enc and w_dec in the manifest");
    }
    ingest_we = *cfg.ingested->w_enc;
    ingest_wd = *cfg.ingested->w_dec;
    if (ingest_we->rows() != ingest_we->cols() || ingest_wd->rows() != ingest_we->rows() ||
        ingest_wd->rows() != ingest_wd->cols()) {
      throw ContractViolation("skip-sweep: ingested weights must be square and equally sized");
    }
    sub.dim = ingest_we->rows();
    const auto& act = cfg.ingested->activations;
    for (std::size_t i = 0; i < act.x_enc.size(); ++i) {
      ingest_samples.emplace_back(act.x_enc[i], act.x_dec_target[i]);
    }
    if (!ingest_samples.empty() && ingest_samples.size() < cfg.n_samples) {
      rep.notes.push_back("ingested activation count below n_samples; using all " +
                          std::to_string(ingest_samples.size()));
    }
  }

  rep.config.emplace_back("regime", cfg.regime);
  rep.config.emplace_back("dim", std::to_string(sub.dim));
  rep.config.emplace_back("ranks", join(cfg.ranks));
  rep.config.emplace_back("n_samples", std::to_string(cfg.n_samples));
  rep.config.emplace_back("seeds", join_seeds(cfg.seeds));
  echo_substrate(rep, sub);
  rep.config.emplace_back("weight_scale", fmt(cfg.weight_scale));
  rep.config.emplace_back("parallel", cfg.parallel ? "true" : "false");

  struct SeedData {
    CouplingMatrix je, jd;
    std::vector<std::pair<Vector, Vector>> samples;
  };
  std::vector<SeedData> data;
  double oracle_mse_max = 0.0;
  for (std::uint64_t seed : cfg.seeds) {
    SeedData sd;
    const Matrix we = ingest_we ? *ingest_we
                                : gen_random_weights(sub.dim, derive_seed(seed, 1),
                                                     cfg.weight_scale);
    const Matrix wd = ingest_wd ? *ingest_wd
                                : gen_random_weights(sub.dim, derive_seed(seed, 2),
                                                     cfg.weight_scale);
    sd.je = gram_coupling(we, sub);
    sd.jd = gram_coupling(wd, sub);
    if (!ingest_samples.empty()) {
      const std::size_t n = std::min(cfg.n_samples, ingest_samples.size());
      sd.samples.assign(ingest_samples.begin(),
                        ingest_samples.begin() + static_cast<std::ptrdiff_t>(n));
    } else {
      sd.samples = random_target_pairs(sub.dim, cfg.n_samples, derive_seed(seed, 3));
    }

    const BlockSystem sys = assemble_block(sd.je, sd.jd, nullptr, Vector(sub.dim, 0.0),
                                           Vector(sub.dim, 0.0), sub);
    const CholeskyFactor chol(sys.m);
    double se = 0.0;
    for (const auto& [x, y] : sd.samples) {
      const Vector z = chol.solve(concat(sys.a_block * x, sys.b_block * y));
      const Vector target = concat(x, y);
      for (std::size_t i = 0; i < z.size(); ++i) {
        se += (z[i] - target[i]) * (z[i] - target[i]);
      }
    }
    const double mse = se / (static_cast<double>(sd.samples.size()) * 2.0 *
                             static_cast<double>(sub.dim));
    oracle_mse_max = std::max(oracle_mse_max, mse);
    data.push_back(std::move(sd));
  }
  rep.metrics.emplace_back("oracle_mse", oracle_mse_max);

  struct CellOut {
    double rho = 0.0, cv = 0.0;
    Vector shift;
  };
  const std::size_t n_cells = data.size() * cfg.ranks.size();
  std::vector<CellOut> cells(n_cells);
  const auto run_cell = [&](std::size_t idx) {
    const SeedData& sd = data[idx / cfg.ranks.size()];
    const std::size_t rank = cfg.ranks[idx % cfg.ranks.size()];
    const SkipCoupling skip = skip_coupling(sd.je, sd.jd, rank, sub);
    const RhoSkipResult r = rho_skip(sd.je, sd.jd, skip, sd.samples, sub);
    cells[idx] = {r.mean_rho, r.cv, r.per_dim_shift};
  };
  if (cfg.parallel) {
    std::vector<std::future<void>> jobs;
    jobs.reserve(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      jobs.push_back(std::async(std::launch::async, run_cell, i));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t i = 0; i < n_cells; ++i) run_cell(i);
  }

  PlotTable sweep{"rank_sweep", {"rank", "rho_percent", "cv_percent"}, {}};
  for (std::uint64_t seed : cfg.seeds) {
    sweep.columns.push_back("rho_percent_seed" + std::to_string(seed));
  }
  PlotTable shifts{"per_dim_shift", {"dim_index"}, {}};
  for (std::size_t rank : cfg.ranks) shifts.columns.push_back("shift_k" + std::to_string(rank));
  shifts.rows.assign(sub.dim, {});
  for (std::size_t i = 0; i < sub.dim; ++i) shifts.rows[i].push_back(static_cast<double>(i));

  for (std::size_t ri = 0; ri < cfg.ranks.size(); ++ri) {
    const std::size_t rank = cfg.ranks[ri];
    double mean = 0.0, var = 0.0;
    Vector shift(sub.dim, 0.0);
    for (std::size_t si = 0; si < data.size(); ++si) {
      const CellOut& c = cells[si * cfg.ranks.size() + ri];
      mean += c.rho;
      const double se = c.cv * c.rho;
      var += se * se;
      for (std::size_t i = 0; i < sub.dim; ++i) shift[i] += c.shift[i];
    }
    const double n_seeds = static_cast<double>(data.size());
    mean /= n_seeds;
    const double pooled_cv = std::sqrt(var) / n_seeds / mean;
    rep.metrics.emplace_back("rho_percent_k" + std::to_string(rank), 100.0 * mean);
    rep.metrics.emplace_back("cv_percent_k" + std::to_string(rank), 100.0 * pooled_cv);
    std::vector<double> row = {static_cast<double>(rank), 100.0 * mean, 100.0 * pooled_cv};
    for (std::size_t si = 0; si < data.size(); ++si) {
      const CellOut& c = cells[si * cfg.ranks.size() + ri];
      rep.metrics.emplace_back("rho_percent_k" + std::to_string(rank) + "_seed" +
                                   std::to_string(cfg.seeds[si]),
                               100.0 * c.rho);
      row.push_back(100.0 * c.rho);
    }
    sweep.rows.push_back(std::move(row));
    for (std::size_t i = 0; i < sub.dim; ++i) shifts.rows[i].push_back(shift[i] / n_seeds);
  }
  rep.plot_tables.push_back(std::move(sweep));
  rep.plot_tables.push_back(std::move(shifts));
  return rep;
}

namespace {

// Encoder with paired rectifier features [relu(Rx); relu(-Rx)]. The second
// factor starts as [V0, -V0], so the map is exactly linear at initialization.
struct MlpInterface {
  Matrix r;      // k x D
  Matrix v;      // D x 2k
  Matrix t_in;   // 16 x D
  Matrix t_out;  // D x 16
};

MlpInterface make_mlp_interface(std::size_t k, std::size_t d, std::uint64_t seed, double gain) {
  Rng rng(seed);
  MlpInterface m;
  m.r = Matrix(k, d);
  const double r_std = gain / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) m.r(i, j) = r_std * rng.next_normal();
  }
  m.v = Matrix(d, 2 * k);
  const double v_std = gain / std::sqrt(static_cast<double>(k));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double v0 = v_std * rng.next_normal();
      m.v(i, j) = v0;
      m.v(i, j + k) = -v0;
    }
  }
  m.t_in = Matrix(kTransferHidden, d);
  const double tin_std = gain / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < kTransferHidden; ++i) {
    for (std::size_t j = 0; j < d; ++j) m.t_in(i, j) = tin_std * rng.next_normal();
  }
  m.t_out = Matrix(d, kTransferHidden);
  const double tout_std = gain / std::sqrt(static_cast<double>(kTransferHidden));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < kTransferHidden; ++j) m.t_out(i, j) = tout_std * rng.next_normal();
  }
  return m;
}

Vector mlp_features(const MlpInterface& m, const Vector& x) {
  const Vector p = m.r * x;
  Vector f(2 * p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    f[j] = std::max(0.0, p[j]);
    f[j + p.size()] = std::max(0.0, -p[j]);
  }
  return f;
}

BiasPair mlp_forward(const MlpInterface& m, const Vector& x) {
  BiasPair out;
  out.b_enc = m.v * mlp_features(m, x);
  Vector pre = m.t_in * out.b_enc;
  for (double& v : pre) v = std::max(0.0, v);
  out.b_dec = m.t_out * pre;
  return out;
}

double mlp_loss(const MlpInterface& m, const std::vector<std::pair<Vector, BiasPair>>& pairs) {
  const std::size_t d = m.r.cols();
  const double scale = 1.0 / (static_cast<double>(pairs.size()) * d);
  double total = 0.0;
  for (const auto& [x, target] : pairs) {
    const BiasPair pred = mlp_forward(m, x);
    for (std::size_t i = 0; i < d; ++i) {
      const double de = pred.b_enc[i] - target.b_enc[i];
      const double dd = pred.b_dec[i] - target.b_dec[i];
      total += de * de + dd * dd;
    }
  }
  return total * scale;
}

MlpInterface mlp_gradient(const MlpInterface& m,
                          const std::vector<std::pair<Vector, BiasPair>>& pairs) {
  const std::size_t d = m.r.cols();
  const std::size_t k = m.r.rows();
  MlpInterface g;
  g.r = Matrix(k, d);
  g.v = Matrix(d, 2 * k);
  g.t_in = Matrix(kTransferHidden, d);
  g.t_out = Matrix(d, kTransferHidden);
  const double scale = 2.0 / (static_cast<double>(pairs.size()) * d);

  for (const auto& [x, target] : pairs) {
    const Vector p = m.r * x;
    Vector f(2 * k);
    for (std::size_t j = 0; j < k; ++j) {
      f[j] = std::max(0.0, p[j]);
      f[j + k] = std::max(0.0, -p[j]);
    }
    const Vector e_hat = m.v * f;
    const Vector pre = m.t_in * e_hat;
    Vector r_act = pre;
    for (double& v : r_act) v = std::max(0.0, v);
    const Vector d_hat = m.t_out * r_act;

    Vector ge(d), gd(d);
    for (std::size_t i = 0; i < d; ++i) {
      ge[i] = scale * (e_hat[i] - target.b_enc[i]);
      gd[i] = scale * (d_hat[i] - target.b_dec[i]);
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < kTransferHidden; ++j) g.t_out(i, j) += gd[i] * r_act[j];
    }
    Vector gp_hidden = transpose_times(m.t_out, gd);
    for (std::size_t j = 0; j < kTransferHidden; ++j) {
      if (pre[j] <= 0.0) gp_hidden[j] = 0.0;
    }
    for (std::size_t j = 0; j < kTransferHidden; ++j) {
      for (std::size_t i = 0; i < d; ++i) g.t_in(j, i) += gp_hidden[j] * e_hat[i];
    }
    const Vector ge_total = ge + transpose_times(m.t_in, gp_hidden);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < 2 * k; ++j) g.v(i, j) += ge_total[i] * f[j];
    }
    const Vector gf = transpose_times(m.v, ge_total);
    for (std::size_t j = 0; j < k; ++j) {
      double gpj = 0.0;
      if (p[j] > 0.0) gpj += gf[j];
      if (p[j] < 0.0) gpj -= gf[j + k];
      for (std::size_t i = 0; i < d; ++i) g.r(j, i) += gpj * x[i];
    }
  }
  return g;
}

void mlp_step(MlpInterface& m, const MlpInterface& g, double lr) {
  const auto step = [lr](Matrix& a, const Matrix& b) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= lr * b(i, j);
    }
  };
  step(m.r, g.r);
  step(m.v, g.v);
  step(m.t_in, g.t_in);
  step(m.t_out, g.t_out);
}

struct MlpTrainResult {
  MlpInterface iface;
  std::vector<double> loss_history;
};

MlpTrainResult mlp_train(const std::vector<std::pair<Vector, BiasPair>>& pairs,
                         const TrainConfig& hyper) {
  if (pairs.size() < 2) throw ContractViolation("mlp_train: needs at least 2 pairs");
  const std::size_t d = pairs.front().first.size();
  MlpTrainResult res;
  res.iface = make_mlp_interface(hyper.bottleneck_rank, d, hyper.init_seed, hyper.init_gain);
  double loss = mlp_loss(res.iface, pairs);
  if (!std::isfinite(loss)) throw DivergedTraining("mlp_train: non-finite initial loss", 0);
  res.loss_history.push_back(loss);

  double lr = hyper.learning_rate;
  double window_best = loss;
  std::size_t accepted = 0;
  MlpInterface grad = mlp_gradient(res.iface, pairs);
  for (std::size_t iter = 1; iter <= hyper.max_iterations; ++iter) {
    MlpInterface cand = res.iface;
    mlp_step(cand, grad, lr);
    const double cand_loss = mlp_loss(cand, pairs);
    if (std::isfinite(cand_loss) && cand_loss <= loss) {
      res.iface = std::move(cand);
      loss = cand_loss;
      res.loss_history.push_back(loss);
      lr *= hyper.growth;
      grad = mlp_gradient(res.iface, pairs);
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
          throw DivergedTraining("mlp_train: loss non-finite at every step size", iter);
        }
        break;
      }
    }
  }
  return res;
}

struct TrainedCell {
  bool ok = false;
  std::string error;
  double cosine = 0.0;
  std::size_t params = 0;
  double net_gain = 0.0;
  double final_loss = 0.0;
  std::size_t iterations = 0;
};

}  // namespace

ExperimentReport run_experiment_b(const ExperimentBConfig& cfg) {
  if (cfg.encoder_kind != "linear" && cfg.encoder_kind != "mlp" && cfg.encoder_kind != "both") {
    throw ContractViolation("train-interface: encoder kind must be linear, mlp or both");
  }
  if (cfg.k_list.empty() || cfg.n_train < 2 || cfg.n_holdout < 1) {
    throw ContractViolation("train-interface: needs a k list, 2 train and 1 holdout samples");
  }
  SubstrateConfig sub = cfg.substrate;
  sub.dim = cfg.dim;

  ExperimentReport rep;
  rep.experiment = "train-interface";
  rep.timestamp = utc_timestamp();
  rep.prng_algorithm = kPrngAlgorithmId;
  rep.config.emplace_back("dim", std::to_string(cfg.dim));
  rep.config.emplace_back("k_list", join(cfg.k_list));
  rep.config.emplace_back("encoder_kind", cfg.encoder_kind);
  rep.config.emplace_back("seed", std::to_string(cfg.seed));
  echo_substrate(rep, sub);
  rep.config.emplace_back("weight_scale", fmt(cfg.weight_scale));
  rep.config.emplace_back("skip_rank", std::to_string(cfg.skip_rank));
  rep.config.emplace_back("latent_rank", std::to_string(cfg.latent_rank));
  rep.config.emplace_back("noise", fmt(cfg.noise));
  rep.config.emplace_back("n_train", std::to_string(cfg.n_train));
  rep.config.emplace_back("n_holdout", std::to_string(cfg.n_holdout));
  rep.config.emplace_back("learning_rate", fmt(cfg.train.learning_rate));
  rep.config.emplace_back("max_iterations", std::to_string(cfg.train.max_iterations));
  rep.config.emplace_back("init_gain", fmt(cfg.train.init_gain));
  rep.config.emplace_back("parallel", cfg.parallel ? "true" : "false");

  const Matrix we = gen_random_weights(cfg.dim, derive_seed(cfg.seed, 1), cfg.weight_scale);
  const Matrix wd = gen_random_weights(cfg.dim, derive_seed(cfg.seed, 2), cfg.weight_scale);
  const CouplingMatrix je = gram_coupling(we, sub);
  const CouplingMatrix jd = gram_coupling(wd, sub);
  const SkipCoupling skip = skip_coupling(je, jd, cfg.skip_rank, sub);
  const BlockSystem sys = assemble_block(je, jd, &skip, Vector(cfg.dim, 0.0),
                                         Vector(cfg.dim, 0.0), sub);
  const CholeskyFactor chol(sys.m);

  const ActivationSet set = gen_correlated_activations(
      cfg.dim, cfg.n_train + cfg.n_holdout, cfg.latent_rank, derive_seed(cfg.seed, 3), cfg.noise);
  std::vector<std::pair<Vector, BiasPair>> train_pairs;
  train_pairs.reserve(cfg.n_train);
  for (std::size_t i = 0; i < cfg.n_train; ++i) {
    train_pairs.push_back({set.x_enc[i], {sys.a_block * set.x_enc[i],
                                          sys.b_block * set.x_dec_target[i]}});
  }
  std::vector<Vector> hold_x(set.x_enc.begin() + static_cast<std::ptrdiff_t>(cfg.n_train),
                             set.x_enc.end());
  std::vector<Vector> hold_y(set.x_dec_target.begin() + static_cast<std::ptrdiff_t>(cfg.n_train),
                             set.x_dec_target.end());

  {
    std::vector<Vector> be, bd;
    for (std::size_t i = 0; i < hold_x.size(); ++i) {
      be.push_back(sys.a_block * hold_x[i]);
      bd.push_back(sys.b_block * hold_y[i]);
    }
    rep.metrics.emplace_back("cosine_oracle", mean_decoder_cosine(chol, be, bd, hold_y));
  }

  std::vector<std::string> kinds;
  if (cfg.encoder_kind == "both") {
    kinds = {"linear", "mlp"};
  } else {
    kinds = {cfg.encoder_kind};
  }

  const auto run_cell = [&](const std::string& kind, std::size_t k) -> TrainedCell {
    TrainedCell cell;
    try {
      std::vector<Vector> be, bd;
      if (kind == "linear") {
        TrainConfig tc = cfg.train;
        tc.bottleneck_rank = k;
        tc.init_seed = derive_seed(cfg.seed, 1000 + k);
        const TrainResult res = train_interface(train_pairs, tc);
        for (const auto& x : hold_x) {
          BiasPair p = interface_forward(res.iface, x);
          be.push_back(std::move(p.b_enc));
          bd.push_back(std::move(p.b_dec));
        }
        cell.params = count_parameters(res.iface);
        cell.final_loss = res.loss_history.back();
        cell.iterations = res.loss_history.size() - 1;
      } else {
        TrainConfig tc = cfg.train;
        tc.bottleneck_rank = k;
        tc.init_seed = derive_seed(cfg.seed, 2000 + k);
        const MlpTrainResult res = mlp_train(train_pairs, tc);
        for (const auto& x : hold_x) {
          BiasPair p = mlp_forward(res.iface, x);
          be.push_back(std::move(p.b_enc));
          bd.push_back(std::move(p.b_dec));
        }
        cell.params = 3 * k * cfg.dim + 32 * cfg.dim;
        cell.final_loss = res.loss_history.back();
        cell.iterations = res.loss_history.size() - 1;
      }
      cell.cosine = mean_decoder_cosine(chol, be, bd, hold_y);
      EnergyModel em = cfg.energy;
      em.n_units = cfg.dim;
      em.interface_overhead_fraction = interface_overhead(cell.params);
      cell.net_gain = energy_chain(em).net_gain;
      cell.ok = true;
    } catch (const DivergedTraining& e) {
      cell.error = e.what();
    }
    return cell;
  };

  std::vector<TrainedCell> cells(kinds.size() * cfg.k_list.size());
  if (cfg.parallel) {
    std::vector<std::future<TrainedCell>> jobs;
    for (const auto& kind : kinds) {
      for (std::size_t k : cfg.k_list) {
        jobs.push_back(std::async(std::launch::async, run_cell, kind, k));
      }
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) cells[i] = jobs[i].get();
  } else {
    std::size_t i = 0;
    for (const auto& kind : kinds) {
      for (std::size_t k : cfg.k_list) cells[i++] = run_cell(kind, k);
    }
  }

  PlotTable table{"cosine_vs_k", {"k"}, {}};
  for (const auto& kind : kinds) {
    table.columns.push_back("cosine_" + kind);
    table.columns.push_back("params_" + kind);
    table.columns.push_back("net_gain_" + kind);
  }
  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    std::vector<double> row = {static_cast<double>(cfg.k_list[ki])};
    for (std::size_t kindi = 0; kindi < kinds.size(); ++kindi) {
      const TrainedCell& cell = cells[kindi * cfg.k_list.size() + ki];
      const std::string suffix = "_" + kinds[kindi] + "_k" + std::to_string(cfg.k_list[ki]);
      if (cell.ok) {
        rep.metrics.emplace_back("cosine" + suffix, cell.cosine);
        rep.metrics.emplace_back("params" + suffix, static_cast<double>(cell.params));
        rep.metrics.emplace_back("net_gain" + suffix, cell.net_gain);
        rep.metrics.emplace_back("train_loss" + suffix, cell.final_loss);
        rep.metrics.emplace_back("train_iterations" + suffix,
                                 static_cast<double>(cell.iterations));
        row.push_back(cell.cosine);
        row.push_back(static_cast<double>(cell.params));
        row.push_back(cell.net_gain);
      } else {
        rep.notes.push_back("cell " + kinds[kindi] + " k=" + std::to_string(cfg.k_list[ki]) +
                            " diverged: " + cell.error);
        row.insert(row.end(), {std::nan(""), std::nan(""), std::nan("")});
      }
    }
    table.rows.push_back(std::move(row));
  }
  rep.plot_tables.push_back(std::move(table));
  return rep;
}

ExperimentReport run_experiment_c(const ExperimentCConfig& cfg) {
  if (cfg.regime != "analytical" && cfg.regime != "ingested") {
    throw ContractViolation("production-test: regime must be analytical or ingested");
  }
  if (cfg.data_kind != "correlated" && cfg.data_kind != "random") {
    throw ContractViolation("production-test: data kind must be correlated or random");
  }
  SubstrateConfig sub = cfg.substrate;
  sub.dim = cfg.dim;

  ExperimentReport rep;
  rep.experiment = "production-test";
  rep.timestamp = utc_timestamp();
  rep.prng_algorithm = kPrngAlgorithmId;

  Matrix we, wd;
  if (cfg.regime == "ingested") {
    if (!cfg.ingested || !cfg.ingested->w_enc || !cfg.ingested->w_dec) {
      throw ContractViolation(
          "production-test: ingested regime needs w_enc and w_dec in the manifest");
    }
    we = *cfg.ingested->w_enc;
    wd = *cfg.ingested->w_dec;
    if (we.rows() != we.cols() || wd.rows() != we.rows() || wd.rows() != wd.cols()) {
      throw ContractViolation("production-test: ingested weights must be square, equal size");
    }
    sub.dim = we.rows();
  } else {
    we = gen_random_weights(cfg.dim, derive_seed(cfg.seed, 1), cfg.weight_scale);
    wd = gen_random_weights(cfg.dim, derive_seed(cfg.seed, 2), cfg.weight_scale);
  }
  const std::size_t dim = sub.dim;

  rep.config.emplace_back("regime", cfg.regime);
  rep.config.emplace_back("data_kind", cfg.data_kind);
  rep.config.emplace_back("dim", std::to_string(dim));
  rep.config.emplace_back("k", std::to_string(cfg.k));
  rep.config.emplace_back("seed", std::to_string(cfg.seed));
  echo_substrate(rep, sub);
  rep.config.emplace_back("weight_scale", fmt(cfg.weight_scale));
  rep.config.emplace_back("skip_rank", std::to_string(cfg.skip_rank));
  rep.config.emplace_back("latent_rank", std::to_string(cfg.latent_rank));
  rep.config.emplace_back("noise", fmt(cfg.noise));
  rep.config.emplace_back("n_train", std::to_string(cfg.n_train));
  rep.config.emplace_back("n_holdout", std::to_string(cfg.n_holdout));

  const CouplingMatrix je = gram_coupling(we, sub);
  const CouplingMatrix jd = gram_coupling(wd, sub);
  const SkipCoupling skip = skip_coupling(je, jd, cfg.skip_rank, sub);
  const BlockSystem sys = assemble_block(je, jd, &skip, Vector(dim, 0.0), Vector(dim, 0.0), sub);
  const CholeskyFactor chol(sys.m);

  ActivationSet set;
  if (cfg.regime == "ingested" && cfg.ingested && !cfg.ingested->activations.x_enc.empty()) {
    set = cfg.ingested->activations;
    if (set.x_enc.front().size() != dim) {
      throw ContractViolation("production-test: ingested activations do not match weight dim");
    }
  } else if (cfg.data_kind == "random") {
    set = gen_random_activations(dim, cfg.n_train + cfg.n_holdout, derive_seed(cfg.seed, 3));
  } else {
    set = gen_correlated_activations(dim, cfg.n_train + cfg.n_holdout, cfg.latent_rank,
                                     derive_seed(cfg.seed, 3), cfg.noise);
  }
  rep.config.emplace_back("data_provenance", set.provenance);

  std::size_t n_train = cfg.n_train;
  if (set.x_enc.size() < cfg.n_train + cfg.n_holdout) {
    n_train = std::max<std::size_t>(2, set.x_enc.size() * 4 / 5);
    rep.notes.push_back("sample count below n_train + n_holdout; split " +
                        std::to_string(n_train) + "/" +
                        std::to_string(set.x_enc.size() - n_train));
  }
  if (set.x_enc.size() < n_train + 1) {
    throw ContractViolation("production-test: too few samples to train and hold out");
  }

  std::vector<std::pair<Vector, BiasPair>> train_pairs;
  for (std::size_t i = 0; i < n_train; ++i) {
    train_pairs.push_back({set.x_enc[i], {sys.a_block * set.x_enc[i],
                                          sys.b_block * set.x_dec_target[i]}});
  }
  std::vector<Vector> hold_x(set.x_enc.begin() + static_cast<std::ptrdiff_t>(n_train),
                             set.x_enc.end());
  std::vector<Vector> hold_y(set.x_dec_target.begin() + static_cast<std::ptrdiff_t>(n_train),
                             set.x_dec_target.end());

  std::vector<Vector> oracle_be, oracle_bd;
  std::vector<std::pair<Vector, Vector>> hold_pairs;
  for (std::size_t i = 0; i < hold_x.size(); ++i) {
    oracle_be.push_back(sys.a_block * hold_x[i]);
    oracle_bd.push_back(sys.b_block * hold_y[i]);
    hold_pairs.emplace_back(hold_x[i], hold_y[i]);
  }
  std::vector<double> per_oracle;
  rep.metrics.emplace_back("cosine_oracle",
                           mean_decoder_cosine(chol, oracle_be, oracle_bd, hold_y, &per_oracle));
  rep.metrics.emplace_back("params_oracle", 0.0);

  std::vector<double> per_full, per_skip;
  try {
    TrainConfig tc = cfg.train;
    tc.bottleneck_rank = cfg.k;
    tc.init_seed = derive_seed(cfg.seed, 1000 + cfg.k);
    const TrainResult res = train_interface(train_pairs, tc);
    std::vector<Vector> full_be, full_bd, zero_bd;
    for (const auto& x : hold_x) {
      BiasPair p = interface_forward(res.iface, x);
      full_be.push_back(std::move(p.b_enc));
      full_bd.push_back(std::move(p.b_dec));
      zero_bd.emplace_back(dim, 0.0);
    }
    rep.metrics.emplace_back("cosine_full",
                             mean_decoder_cosine(chol, full_be, full_bd, hold_y, &per_full));
    rep.metrics.emplace_back("params_full", static_cast<double>(count_parameters(res.iface)));
    rep.metrics.emplace_back("cosine_skip_only",
                             mean_decoder_cosine(chol, full_be, zero_bd, hold_y, &per_skip));
    rep.metrics.emplace_back("params_skip_only", static_cast<double>(2 * cfg.k * dim));
    rep.metrics.emplace_back("train_loss_final", res.loss_history.back());
    rep.metrics.emplace_back("train_iterations",
                             static_cast<double>(res.loss_history.size() - 1));
  } catch (const DivergedTraining& e) {
    rep.notes.push_back(std::string("interface training diverged: ") + e.what());
  }

  const RhoSkipResult rho = rho_skip(je, jd, skip, hold_pairs, sub);
  rep.metrics.emplace_back("rho_skip_percent", 100.0 * rho.mean_rho);
  rep.metrics.emplace_back("rho_skip_cv_percent", 100.0 * rho.cv);

  if (cfg.regime == "ingested") {
    rep.notes.push_back(
        "comparison baselines for trained exports: full-pipeline cosine 0.9906, oracle 1.0000");
  }

  PlotTable table{"holdout_cosines", {"sample", "cosine_oracle"}, {}};
  const bool have_trained = !per_full.empty();
  if (have_trained) {
    table.columns.push_back("cosine_full");
    table.columns.push_back("cosine_skip_only");
  }
  for (std::size_t i = 0; i < per_oracle.size(); ++i) {
    std::vector<double> row = {static_cast<double>(i), per_oracle[i]};
    if (have_trained) {
      row.push_back(per_full[i]);
      row.push_back(per_skip[i]);
    }
    table.rows.push_back(std::move(row));
  }
  rep.plot_tables.push_back(std::move(table));
  return rep;
}

ExperimentReport run_langevin_check(const LangevinCheckConfig& cfg) {
  if (cfg.dim < 1 || cfg.dim > 8) {
    throw ContractViolation("langevin-check: moment validation expects dim in [1, 8]");
  }
  SubstrateConfig sub = cfg.substrate;
  sub.dim = cfg.dim;
  sub.j4 = 0.0;

  ExperimentReport rep;
  rep.experiment = "langevin-check";
  rep.timestamp = utc_timestamp();
  rep.prng_algorithm = kPrngAlgorithmId;
  rep.config.emplace_back("dim", std::to_string(cfg.dim));
  rep.config.emplace_back("seed", std::to_string(cfg.seed));
  echo_substrate(rep, sub);
  rep.config.emplace_back("weight_scale", fmt(cfg.weight_scale));
  rep.config.emplace_back("n_replicas", std::to_string(cfg.n_replicas));
  rep.config.emplace_back("n_steps", std::to_string(cfg.n_steps));
  rep.config.emplace_back("burn_in", std::to_string(cfg.burn_in));
  rep.config.emplace_back("mixing_dims", join(cfg.mixing_dims));
  rep.config.emplace_back("mixing_coordinate_tol", fmt(cfg.mixing_coordinate_tol));
  rep.config.emplace_back("quartic_j4", fmt(cfg.quartic_j4));

  // stationary moments vs the exact solve
  {
    const Matrix we = gen_random_weights(cfg.dim, derive_seed(cfg.seed, 1), cfg.weight_scale);
    const Matrix wd = gen_random_weights(cfg.dim, derive_seed(cfg.seed, 2), cfg.weight_scale);
    const CouplingMatrix je = gram_coupling(we, sub);
    const CouplingMatrix jd = gram_coupling(wd, sub);
    const auto targets = random_target_pairs(cfg.dim, 1, derive_seed(cfg.seed, 3));
    BlockSystem sys = assemble_block(je, jd, nullptr, Vector(cfg.dim, 0.0), Vector(cfg.dim, 0.0),
                                     sub);
    sys.bias = concat(sys.a_block * targets[0].first, sys.b_block * targets[0].second);

    const CholeskyFactor chol(sys.m);
    const Vector z_star = chol.solve(sys.bias);
    LangevinConfig lc;
    lc.seed = derive_seed(cfg.seed, 4);
    lc.n_replicas = cfg.n_replicas;
    lc.n_steps = cfg.n_steps;
    lc.burn_in = cfg.burn_in;
    const TrajectoryStats stats = simulate(sys, sub, lc);

    double mean_err = 0.0, var_err = 0.0;
    const std::size_t n = 2 * cfg.dim;
    for (std::size_t i = 0; i < n; ++i) {
      mean_err = std::max(mean_err,
                          std::abs(stats.mean[i] - z_star[i]) / stats.mean_std_error[i]);
      Vector e(n, 0.0);
      e[i] = 1.0;
      const double expected = sub.kbt * chol.solve(e)[i];
      var_err = std::max(var_err, std::abs(stats.covariance_diag[i] / expected - 1.0));
    }
    rep.metrics.emplace_back("moment_mean_max_err_se", mean_err);
    rep.metrics.emplace_back("moment_var_max_rel_err", var_err);
    rep.metrics.emplace_back("moment_samples", static_cast<double>(stats.n_effective_samples));
  }

  // noise-free relaxation step counts across dimensions, fixed per-coordinate
  // tolerance (the relative threshold shrinks as 1/sqrt(2 dim))
  {
    PlotTable table{"mixing_vs_dim", {"dim", "steps", "bound"}, {}};
    std::vector<double> log_d, steps;
    const double gamma = 2.0 * sub.j2;
    for (std::size_t d : cfg.mixing_dims) {
      SubstrateConfig msub = sub;
      msub.dim = d;
      BlockSystem sys;
      sys.m = Matrix(2 * d, 2 * d);
      for (std::size_t i = 0; i < 2 * d; ++i) sys.m(i, i) = gamma;
      sys.bias.assign(2 * d, gamma);
      sys.a_block = Matrix(d, d);
      sys.b_block = Matrix(d, d);
      for (std::size_t i = 0; i < d; ++i) {
        sys.a_block(i, i) = gamma;
        sys.b_block(i, i) = gamma;
      }
      LangevinConfig lc;
      const double eps = cfg.mixing_coordinate_tol / std::sqrt(2.0 * static_cast<double>(d));
      const MixingReport mix = mixing_estimate(sys, msub, lc, eps);
      table.rows.push_back({static_cast<double>(d), static_cast<double>(mix.steps),
                            mix.theoretical_bound});
      log_d.push_back(std::log(static_cast<double>(d)));
      steps.push_back(static_cast<double>(mix.steps));
      rep.metrics.emplace_back("mixing_steps_d" + std::to_string(d),
                               static_cast<double>(mix.steps));
      rep.metrics.emplace_back("mixing_bound_d" + std::to_string(d), mix.theoretical_bound);
    }
    const LinearFit fit = fit_line(log_d, steps);
    rep.metrics.emplace_back("mixing_fit_slope", fit.slope);
    rep.metrics.emplace_back("mixing_fit_intercept", fit.intercept);
    rep.metrics.emplace_back("mixing_fit_r2", fit.r_squared);
    rep.plot_tables.push_back(std::move(table));
  }

  // quartic linear-response check on a 2-unit substrate with zero Gram terms
  {
    SubstrateConfig qsub = sub;
    qsub.dim = 2;
    const CouplingMatrix zero{Matrix(2, 2)};
    const double gamma = 2.0 * qsub.j2;
    const BlockSystem sys = assemble_block(zero, zero, nullptr, Vector(2, gamma),
                                           Vector(2, gamma), qsub);
    LangevinConfig lc;
    lc.dt = 0.05 / gamma;
    lc.n_steps = 20000;
    lc.burn_in = 5000;
    lc.n_replicas = 32;
    lc.seed = derive_seed(cfg.seed, 5);

    qsub.j4 = cfg.quartic_j4;
    const double shift_low = quartic_perturbation(sys, qsub, lc);
    qsub.j4 = 2.0 * cfg.quartic_j4;
    const double shift_high = quartic_perturbation(sys, qsub, lc);
    qsub.j4 = 4e-5;
    const double shift_operating = quartic_perturbation(sys, qsub, lc);
    rep.metrics.emplace_back("quartic_shift_low", shift_low);
    rep.metrics.emplace_back("quartic_shift_high", shift_high);
    rep.metrics.emplace_back("quartic_slope_ratio", shift_high / shift_low);
    rep.metrics.emplace_back("quartic_shift_operating", shift_operating);
  }
  return rep;
}

ExperimentReport run_deficit(const DeficitRunConfig& cfg) {
  SubstrateConfig sub = cfg.substrate;
  sub.dim = cfg.dim;

  ExperimentReport rep;
  rep.experiment = "deficit";
  rep.timestamp = utc_timestamp();
  rep.prng_algorithm = kPrngAlgorithmId;
  rep.config.emplace_back("dim", std::to_string(cfg.dim));
  rep.config.emplace_back("lambda_max", fmt(cfg.lambda_max));
  rep.config.emplace_back("decades", fmt(cfg.decades));
  rep.config.emplace_back("n_samples", std::to_string(cfg.n_samples));
  rep.config.emplace_back("noise", fmt(cfg.noise));
  rep.config.emplace_back("seed", std::to_string(cfg.seed));
  echo_substrate(rep, sub);

  // rank-1 coupling at lambda_max
  {
    Rng rng(derive_seed(cfg.seed, 1));
    Vector u(cfg.dim);
    for (double& v : u) v = rng.next_normal();
    const double nu = norm(u);
    Matrix j1(cfg.dim, cfg.dim);
    for (std::size_t i = 0; i < cfg.dim; ++i) {
      for (std::size_t jj = 0; jj < cfg.dim; ++jj) {
        j1(i, jj) = cfg.lambda_max * (u[i] / nu) * (u[jj] / nu);
      }
    }
    const CouplingMatrix coupling{j1};
    const auto targets = gen_aligned_targets(j1, cfg.n_samples, cfg.noise,
                                             derive_seed(cfg.seed, 2));
    const DeficitReport r = deficit_analysis(coupling, targets, sub);
    rep.metrics.emplace_back("rank1_predicted_ratio", r.predicted_ratio);
    rep.metrics.emplace_back("rank1_empirical_ratio", r.empirical_ratio);
    rep.metrics.emplace_back("rank1_sigma_naive", r.sigma_naive);
    rep.metrics.emplace_back("rank1_sigma_oracle", r.sigma_oracle);
  }

  // trained-style log-spaced spectrum
  {
    const Matrix w = gen_spectral_weights(cfg.dim, cfg.lambda_max, cfg.decades, sub.kbt,
                                          derive_seed(cfg.seed, 3));
    const CouplingMatrix jt = gram_coupling(w, sub);
    const auto targets = gen_aligned_targets(jt.j, cfg.n_samples, cfg.noise,
                                             derive_seed(cfg.seed, 4));
    const DeficitReport r = deficit_analysis(jt, targets, sub);
    rep.metrics.emplace_back("spectrum_span_decades", r.spectral_span_decades);
    rep.metrics.emplace_back("spectrum_predicted_ratio", r.predicted_ratio);
    rep.metrics.emplace_back("spectrum_empirical_ratio", r.empirical_ratio);
    rep.metrics.emplace_back("compound_geometric", r.compound_geometric);
    rep.metrics.emplace_back("compound_aggregate", r.compound_aggregate);
    rep.metrics.emplace_back("compound_deficit_factor", 1.0 / r.compound_geometric);
    PlotTable table{"spectrum", {"index", "eigenvalue"}, {}};
    for (std::size_t i = 0; i < r.spectrum.size(); ++i) {
      table.rows.push_back({static_cast<double>(i), r.spectrum[i]});
    }
    rep.plot_tables.push_back(std::move(table));
  }
  return rep;
}

ExperimentReport run_energy_report(const EnergyModel& model) {
  const EnergyChain chain = energy_chain(model);
  ExperimentReport rep;
  rep.experiment = "energy";
  rep.timestamp = utc_timestamp();
  rep.prng_algorithm = kPrngAlgorithmId;
  rep.config.emplace_back("kbt_joules", fmt(model.kbt_joules));
  rep.config.emplace_back("units_multiplier", fmt(model.units_multiplier));
  rep.config.emplace_back("n_units", std::to_string(model.n_units));
  rep.config.emplace_back("n_steps", std::to_string(model.n_steps));
  rep.config.emplace_back("gpu_joules_per_step", fmt(model.gpu_joules_per_step));
  rep.config.emplace_back("adc_dac_derating", fmt(model.adc_dac_derating));
  rep.config.emplace_back("extra_system_derating", fmt(model.extra_system_derating));
  rep.config.emplace_back("interface_overhead_fraction", fmt(model.interface_overhead_fraction));
  rep.metrics.emplace_back("e_thermo_joules", chain.e_thermo);
  rep.metrics.emplace_back("raw_gain", chain.raw_gain);
  rep.metrics.emplace_back("derated_gain", chain.derated_gain);
  rep.metrics.emplace_back("net_gain", chain.net_gain);
  return rep;
}

}  // namespace tdiff
