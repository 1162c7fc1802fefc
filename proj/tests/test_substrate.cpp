#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "thermodiffuse/generators.hpp"
#include "thermodiffuse/linalg.hpp"
#include "thermodiffuse/rng.hpp"
#include "thermodiffuse/substrate.hpp"

using namespace tdiff;

namespace {

SubstrateConfig config(std::size_t dim, double kbt = 1.0, double j2 = 0.1) {
  SubstrateConfig cfg;
  cfg.dim = dim;
  cfg.kbt = kbt;
  cfg.j2 = j2;
  return cfg;
}

std::vector<std::pair<Vector, Vector>> sample_pairs(std::size_t dim, std::size_t n,
                                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<Vector, Vector>> out;
  for (std::size_t s = 0; s < n; ++s) {
    Vector x(dim), y(dim);
    for (double& v : x) v = rng.next_normal();
    for (double& v : y) v = rng.next_normal();
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace

TEST_CASE("gram_coupling matches the hand formula") {
  const Matrix w(2, 2, Vector{1.0, 2.0, 0.0, 1.0});
  const CouplingMatrix j = gram_coupling(w, config(2, 2.0));
  // W^T W = [[1,2],[2,5]], divided by 4*kbt = 8
  CHECK(j.j(0, 0) == doctest::Approx(1.0 / 8.0));
  CHECK(j.j(0, 1) == doctest::Approx(2.0 / 8.0));
  CHECK(j.j(1, 0) == doctest::Approx(2.0 / 8.0));
  CHECK(j.j(1, 1) == doctest::Approx(5.0 / 8.0));
}

TEST_CASE("gram coupling is symmetric PSD for random weights") {
  const SubstrateConfig cfg = config(16);
  const CouplingMatrix j = gram_coupling(gen_random_weights(16, 5), cfg);
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t k = 0; k < 16; ++k) CHECK(j.j(i, k) == doctest::Approx(j.j(k, i)));
  }
  const EigResult e = sym_eig(j.j);
  CHECK(e.values.back() > -1e-12);
}

TEST_CASE("rank-1 skip of diagonal couplings selects the top modes") {
  const SubstrateConfig cfg = config(3);
  // gram couplings diag(4,1,0)/4 and diag(0,1,9)/4 via diagonal weights
  const Matrix we(3, 3, Vector{2, 0, 0, 0, 1, 0, 0, 0, 0});
  const Matrix wd(3, 3, Vector{0, 0, 0, 0, 1, 0, 0, 0, 3});
  const SkipCoupling skip = skip_coupling(gram_coupling(we, cfg), gram_coupling(wd, cfg), 1, cfg);
  CHECK(skip.rank == 1);
  // dense support is e0 (encoder top mode) x e2 (decoder top mode), norm 1/(4 kbt)
  CHECK(std::abs(skip.dense(0, 2)) == doctest::Approx(0.25).epsilon(1e-10));
  double rest = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != 0 || j != 2) rest += std::abs(skip.dense(i, j));
    }
  }
  CHECK(rest < 1e-10);
}

TEST_CASE("skip normalizer equals the factor-product frobenius norm") {
  const SubstrateConfig cfg = config(24);
  const CouplingMatrix je = gram_coupling(gen_random_weights(24, 11), cfg);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(24, 12), cfg);
  for (std::size_t k : {1u, 4u, 16u}) {
    const SkipCoupling skip = skip_coupling(je, jd, k, cfg);
    const Matrix prod = skip.left_factor * skip.right_factor.transposed();
    CHECK(prod.frobenius_norm() / skip.normalizer == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(skip.dense.frobenius_norm() ==
          doctest::Approx(1.0 / (4.0 * cfg.kbt)).epsilon(1e-10));
    CHECK(skip.left_factor.cols() == k);
  }
}

TEST_CASE("skip rank above dim is rejected") {
  const SubstrateConfig cfg = config(4);
  const CouplingMatrix je = gram_coupling(gen_random_weights(4, 1), cfg);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(4, 2), cfg);
  CHECK_THROWS_AS(skip_coupling(je, jd, 5, cfg), ContractViolation);
  CHECK_THROWS_AS(skip_coupling(je, jd, 0, cfg), ContractViolation);
}

TEST_CASE("assemble_block layout and oracle-bias equilibrium") {
  const SubstrateConfig cfg = config(4);
  const CouplingMatrix je = gram_coupling(gen_random_weights(4, 21), cfg);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(4, 22), cfg);

  Rng rng(23);
  Vector x(4), y(4);
  for (double& v : x) v = rng.next_normal();
  for (double& v : y) v = rng.next_normal();

  BlockSystem sys = assemble_block(je, jd, nullptr, Vector(4, 0.0), Vector(4, 0.0), cfg);
  // a_block = 2 j2 I + J + J^T
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double expected = je.j(i, j) + je.j(j, i) + (i == j ? 2.0 * cfg.j2 : 0.0);
      CHECK(sys.a_block(i, j) == doctest::Approx(expected));
      CHECK(sys.m(i, j) == doctest::Approx(expected));
      CHECK(sys.m(4 + i, 4 + j) == doctest::Approx(sys.b_block(i, j)));
      CHECK(sys.m(i, 4 + j) == 0.0);  // no skip
    }
  }

  sys = assemble_block(je, jd, nullptr, sys.a_block * x, sys.b_block * y, cfg);
  const Equilibrium eq = solve_equilibrium(sys);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(eq.x_star[i] == doctest::Approx(x[i]).epsilon(1e-10));
    CHECK(eq.y_star[i] == doctest::Approx(y[i]).epsilon(1e-10));
  }
}

TEST_CASE("skip blocks enter the off-diagonal corners") {
  const SubstrateConfig cfg = config(6);
  const CouplingMatrix je = gram_coupling(gen_random_weights(6, 31), cfg);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(6, 32), cfg);
  const SkipCoupling skip = skip_coupling(je, jd, 2, cfg);
  const BlockSystem sys = assemble_block(je, jd, &skip, Vector(6, 0.0), Vector(6, 0.0), cfg);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(sys.m(i, 6 + j) == doctest::Approx(skip.dense(i, j)));
      CHECK(sys.m(6 + i, j) == doctest::Approx(skip.dense(j, i)));
    }
  }
  const SpectralReport spec = validate_pd(sys);
  CHECK(spec.gamma > 0.0);
  CHECK(spec.gamma == doctest::Approx(spec.lambda_min));
  CHECK(spec.lambda_max >= spec.lambda_min);
}

TEST_CASE("weak self-coupling with a strong skip is flagged") {
  const SubstrateConfig cfg = config(8, 1.0, 0.01);
  const CouplingMatrix je = gram_coupling(gen_random_weights(8, 41), cfg);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(8, 42), cfg);
  const SkipCoupling skip = skip_coupling(je, jd, 1, cfg);
  const BlockSystem sys = assemble_block(je, jd, &skip, Vector(8, 0.0), Vector(8, 0.0), cfg);
  CHECK_THROWS_AS(validate_pd(sys), NotPositiveDefinite);
}

TEST_CASE("rho_skip is positive, finite, and reproducible") {
  const SubstrateConfig cfg = config(16);
  const CouplingMatrix je = gram_coupling(gen_random_weights(16, 51), cfg);
  const CouplingMatrix jd = gram_coupling(gen_random_weights(16, 52), cfg);
  const SkipCoupling skip = skip_coupling(je, jd, 4, cfg);
  const auto samples = sample_pairs(16, 24, 53);
  const RhoSkipResult a = rho_skip(je, jd, skip, samples, cfg);
  const RhoSkipResult b = rho_skip(je, jd, skip, samples, cfg);
  CHECK(a.mean_rho > 0.0);
  CHECK(a.mean_rho < 1.0);
  CHECK(a.cv > 0.0);
  CHECK(a.per_dim_shift.size() == 16);
  CHECK(a.mean_rho == b.mean_rho);  // bit-identical: exact solves only
  CHECK(a.cv == b.cv);
  CHECK_THROWS_AS(rho_skip(je, jd, skip, sample_pairs(16, 1, 54), cfg), ContractViolation);
}

TEST_CASE("top gram eigenvalue on wide random weights matches the spectral edge") {
  // entries std 1/sqrt(D) at D=256: lambda_max(W^T W) concentrates near 4
  const SubstrateConfig cfg = config(256);
  const CouplingMatrix j = gram_coupling(gen_random_weights(256, 61, 1.0), cfg);
  const EigResult e = sym_eig(j.j);
  const double lambda_max_wtw = e.values[0] * 4.0 * cfg.kbt;
  CHECK(lambda_max_wtw > 3.6);
  CHECK(lambda_max_wtw < 4.4);
}

TEST_CASE("substrate config validation") {
  CHECK_THROWS_AS(config(0).validate(), ContractViolation);
  CHECK_THROWS_AS(config(4, -1.0).validate(), ContractViolation);
  CHECK_THROWS_AS(config(4, 1.0, 0.0).validate(), ContractViolation);
  SubstrateConfig bad = config(4);
  bad.j4 = -1e-9;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}
