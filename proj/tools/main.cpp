#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thermodiffuse/experiments.hpp"
#include "thermodiffuse/rng.hpp"

namespace {

using namespace tdiff;

struct CommonOpts {
  std::size_t dim = 0;  // 0 keeps the subcommand default
  std::vector<std::size_t> ranks;
  std::uint64_t seed = 1;
  std::size_t samples = 0;
  double j2 = 0.1;
  double kbt = 1.0;
  double j4 = 0.0;
  double weight_scale = 0.2;
  std::string manifest;
  std::string out = "reports";
  std::string format = "json";
  bool parallel = false;
};

SubstrateConfig substrate_from(const CommonOpts& o) {
  SubstrateConfig sub;
  sub.j2 = o.j2;
  sub.kbt = o.kbt;
  sub.j4 = o.j4;
  return sub;
}

ReportFormat format_from(const CommonOpts& o) {
  return o.format == "csv" ? ReportFormat::kCsv : ReportFormat::kJson;
}

double metric(const ExperimentReport& rep, const std::string& key) {
  for (const auto& [k, v] : rep.metrics) {
    if (k == key) return v;
  }
  throw ContractViolation("missing metric " + key);
}

std::optional<IngestedData> maybe_ingest(const CommonOpts& o) {
  if (o.manifest.empty()) return std::nullopt;
  return load_ingested(o.manifest);
}

void emit(const ExperimentReport& rep, const CommonOpts& o) {
  const std::string dir = write_report(rep, o.out, format_from(o));
  std::cerr << "report: " << dir << "\n";
}

int run_skip_sweep(const CommonOpts& o) {
  ExperimentAConfig cfg;
  if (o.dim) cfg.dim = o.dim;
  if (!o.ranks.empty()) cfg.ranks = o.ranks;
  if (o.samples) cfg.n_samples = o.samples;
  cfg.seeds = {o.seed, o.seed + 1, o.seed + 2};
  cfg.substrate = substrate_from(o);
  cfg.weight_scale = o.weight_scale;
  cfg.parallel = o.parallel;
  std::optional<IngestedData> ingest = maybe_ingest(o);
  if (ingest) {
    cfg.regime = "ingested";
    cfg.ingested = &*ingest;
  }
  const ExperimentReport rep = run_experiment_a(cfg);
  std::cout << "rank,rho_percent,cv_percent\n";
  for (std::size_t k : cfg.ranks) {
    std::cout << k << "," << metric(rep, "rho_percent_k" + std::to_string(k)) << ","
              << metric(rep, "cv_percent_k" + std::to_string(k)) << "\n";
  }
  emit(rep, o);
  return 0;
}

int run_train_interface(const CommonOpts& o, const std::string& encoder, std::size_t holdout) {
  ExperimentBConfig cfg;
  if (o.dim) cfg.dim = o.dim;
  if (!o.ranks.empty()) cfg.k_list = o.ranks;
  cfg.encoder_kind = encoder;
  cfg.seed = o.seed;
  cfg.substrate = substrate_from(o);
  cfg.weight_scale = o.weight_scale;
  if (o.samples) cfg.n_train = o.samples;
  cfg.n_holdout = holdout;
  cfg.parallel = o.parallel;
  const ExperimentReport rep = run_experiment_b(cfg);
  std::cout << "encoder,k,cosine,params,net_gain\n";
  for (const auto& kind : std::vector<std::string>{"linear", "mlp"}) {
    if (encoder != "both" && encoder != kind) continue;
    for (std::size_t k : cfg.k_list) {
      const std::string suffix = "_" + kind + "_k" + std::to_string(k);
      try {
        std::cout << kind << "," << k << "," << metric(rep, "cosine" + suffix) << ","
                  << metric(rep, "params" + suffix) << "," << metric(rep, "net_gain" + suffix)
                  << "\n";
      } catch (const ContractViolation&) {
        std::cout << kind << "," << k << ",diverged,,\n";
      }
    }
  }
  std::cout << "oracle,," << metric(rep, "cosine_oracle") << ",0,\n";
  emit(rep, o);
  return 0;
}

int run_production_test(const CommonOpts& o, const std::string& data_kind,
                        std::size_t skip_rank) {
  ExperimentCConfig cfg;
  if (o.dim) cfg.dim = o.dim;
  if (o.ranks.size() > 1) throw CLI::ValidationError("--rank", "takes one value here");
  if (!o.ranks.empty()) cfg.k = o.ranks.front();
  cfg.seed = o.seed;
  cfg.data_kind = data_kind;
  cfg.skip_rank = skip_rank;
  cfg.substrate = substrate_from(o);
  cfg.weight_scale = o.weight_scale;
  if (o.samples) cfg.n_train = o.samples;
  std::optional<IngestedData> ingest = maybe_ingest(o);
  if (ingest) {
    cfg.regime = "ingested";
    cfg.ingested = &*ingest;
  }
  const ExperimentReport rep = run_experiment_c(cfg);
  std::cout << "regime,cosine,params\n";
  std::cout << "oracle," << metric(rep, "cosine_oracle") << ",0\n";
  try {
    std::cout << "skip_only," << metric(rep, "cosine_skip_only") << ","
              << metric(rep, "params_skip_only") << "\n";
    std::cout << "full," << metric(rep, "cosine_full") << "," << metric(rep, "params_full")
              << "\n";
  } catch (const ContractViolation&) {
    std::cout << "skip_only,diverged,\nfull,diverged,\n";
  }
  std::cout << "rho_skip_percent," << metric(rep, "rho_skip_percent") << ",\n";
  emit(rep, o);
  return 0;
}

int run_langevin(const CommonOpts& o, std::size_t replicas, std::size_t steps,
                 std::size_t burn_in) {
  LangevinCheckConfig cfg;
  if (o.dim) cfg.dim = o.dim;
  cfg.seed = o.seed;
  cfg.substrate = substrate_from(o);
  cfg.weight_scale = o.weight_scale;
  cfg.n_replicas = replicas;
  cfg.n_steps = steps;
  cfg.burn_in = burn_in;
  const ExperimentReport rep = run_langevin_check(cfg);
  for (const auto& [k, v] : rep.metrics) std::cout << k << "," << v << "\n";
  emit(rep, o);
  return 0;
}

int run_deficit_cmd(const CommonOpts& o, double lambda_max, double decades, double noise) {
  DeficitRunConfig cfg;
  if (o.dim) cfg.dim = o.dim;
  cfg.lambda_max = lambda_max;
  cfg.decades = decades;
  cfg.noise = noise;
  if (o.samples) cfg.n_samples = o.samples;
  cfg.seed = o.seed;
  cfg.substrate = substrate_from(o);
  const ExperimentReport rep = run_deficit(cfg);
  for (const auto& [k, v] : rep.metrics) std::cout << k << "," << v << "\n";
  emit(rep, o);
  return 0;
}

int run_energy_cmd(const CommonOpts& o, EnergyModel model, std::size_t overhead_params) {
  if (overhead_params) {
    model.interface_overhead_fraction = interface_overhead(overhead_params);
  }
  const ExperimentReport rep = run_energy_report(model);
  for (const auto& [k, v] : rep.metrics) std::cout << k << "," << v << "\n";
  emit(rep, o);
  return 0;
}

int run_gen_data(const CommonOpts& o, std::size_t latent_rank, double noise) {
  const std::size_t dim = o.dim ? o.dim : 64;
  const std::size_t n = o.samples ? o.samples : 320;
  const std::string dir = o.out;
  std::filesystem::create_directories(dir);

  const Matrix we = gen_random_weights(dim, derive_seed(o.seed, 1), o.weight_scale);
  const Matrix wd = gen_random_weights(dim, derive_seed(o.seed, 2), o.weight_scale);
  const ActivationSet set =
      gen_correlated_activations(dim, n, latent_rank, derive_seed(o.seed, 3), noise);
  Matrix xe(n, dim), xd(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      xe(i, j) = set.x_enc[i][j];
      xd(i, j) = set.x_dec_target[i][j];
    }
  }
  std::vector<ManifestEntry> entries;
  const auto save = [&](const std::string& role, const Matrix& m) {
    write_matrix(m, dir + "/" + role + ".tdif");
    entries.push_back({role, role + ".tdif", m.rows(), m.cols()});
  };
  save("w_enc", we);
  save("w_dec", wd);
  save("x_enc", xe);
  save("x_dec_target", xd);
  write_manifest(entries, dir + "/manifest.json");
  std::cout << dir << "/manifest.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled encoder-decoder Langevin substrate toolkit"};
  app.require_subcommand(1);

  CommonOpts o;
  app.add_option("--dim", o.dim, "module dimension D");
  app.add_option("--rank", o.ranks, "skip/bottleneck rank(s)");
  app.add_option("--seed", o.seed, "base PRNG seed")->envname("THERMO_DIFFUSE_SEED");
  app.add_option("--samples", o.samples, "sample count");
  app.add_option("--j2", o.j2, "self-coupling strength");
  app.add_option("--kbt", o.kbt, "thermal energy");
  app.add_option("--j4", o.j4, "quartic coefficient");
  app.add_option("--weight-scale", o.weight_scale, "random weight scale");
  app.add_option("--manifest", o.manifest, "TDIF manifest for ingested weights/activations");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--format", o.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--parallel", o.parallel, "run independent cells concurrently");

  auto* sweep = app.add_subcommand("skip-sweep", "rank sweep of the skip share rho_skip");
  auto* deficit = app.add_subcommand("deficit", "naive vs oracle conditioning signal deficit");
  double lambda_max = 0.034, dec_decades = 6.0, dec_noise = 0.05;
  deficit->add_option("--lambda-max", lambda_max, "top Gram eigenvalue");
  deficit->add_option("--decades", dec_decades, "spectral span in decades");
  deficit->add_option("--noise", dec_noise, "target noise level");

  auto* train = app.add_subcommand("train-interface", "conditioning interface sweep over k");
  std::string encoder = "both";
  std::size_t holdout = 64;
  train->add_option("--encoder", encoder, "encoder kind")
      ->check(CLI::IsMember({"linear", "mlp", "both"}));
  train->add_option("--holdout", holdout, "held-out sample count");

  auto* prod = app.add_subcommand("production-test", "four-regime conditioning comparison");
  std::string data_kind = "correlated";
  std::size_t skip_rank = 16;
  prod->add_option("--data", data_kind, "activation data kind")
      ->check(CLI::IsMember({"correlated", "random"}));
  prod->add_option("--skip-rank", skip_rank, "substrate skip-coupling rank");

  auto* langevin = app.add_subcommand("langevin-check", "simulator vs exact solve");
  std::size_t replicas = 64, steps = 49152, burn_in = 16384;
  langevin->add_option("--replicas", replicas, "independent replicas");
  langevin->add_option("--steps", steps, "steps per replica");
  langevin->add_option("--burn-in", burn_in, "discarded steps per replica");

  auto* energy = app.add_subcommand("energy", "thermodynamic energy-gain chain");
  EnergyModel model;
  std::size_t overhead_params = 0;
  energy->add_option("--units", model.n_units, "substrate units per module");
  energy->add_option("--steps", model.n_steps, "equilibration steps");
  energy->add_option("--multiplier", model.units_multiplier, "module count multiplier");
  energy->add_option("--gpu-joules", model.gpu_joules_per_step, "digital baseline J/step");
  energy->add_option("--adc-derating", model.adc_dac_derating, "conversion derating");
  energy->add_option("--system-derating", model.extra_system_derating, "system derating");
  energy->add_option("--overhead-params", overhead_params,
                     "interface parameter count for the overhead fraction");

  auto* gen = app.add_subcommand("gen-data", "write synthetic TDIF weights + activations");
  std::size_t latent_rank = 4;
  double gen_noise = 0.1;
  gen->add_option("--latent-rank", latent_rank, "shared latent rank");
  gen->add_option("--noise", gen_noise, "additive noise level");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!o.manifest.empty() && !std::filesystem::exists(o.manifest)) {
    std::cerr << "manifest not found: " << o.manifest << "\n";
    return 1;
  }

  try {
    if (sweep->parsed()) return run_skip_sweep(o);
    if (deficit->parsed()) return run_deficit_cmd(o, lambda_max, dec_decades, dec_noise);
    if (train->parsed()) return run_train_interface(o, encoder, holdout);
    if (prod->parsed()) return run_production_test(o, data_kind, skip_rank);
    if (langevin->parsed()) return run_langevin(o, replicas, steps, burn_in);
    if (energy->parsed()) return run_energy_cmd(o, model, overhead_params);
    if (gen->parsed()) return run_gen_data(o, latent_rank, gen_noise);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
