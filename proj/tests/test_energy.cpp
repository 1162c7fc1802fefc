#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "thermodiffuse/energy.hpp"
#include "thermodiffuse/errors.hpp"

using namespace tdiff;

TEST_CASE("default chain against a hand computation") {
  const EnergyChain chain = energy_chain(EnergyModel{});
  const double e_thermo = 4.141e-21 * 2.0 * 128.0 * 400.0;
  const double raw = 8e-3 / e_thermo;
  CHECK(std::abs(chain.e_thermo - e_thermo) / e_thermo < 1e-12);
  CHECK(std::abs(chain.raw_gain - raw) / raw < 1e-12);
  CHECK(std::abs(chain.derated_gain - raw / 1e3) / (raw / 1e3) < 1e-12);
  CHECK(std::abs(chain.net_gain - raw / 1e6) / (raw / 1e6) < 1e-12);
}

TEST_CASE("chain magnitudes match the published figures") {
  const EnergyChain chain = energy_chain(EnergyModel{});
  CHECK(chain.e_thermo == doctest::Approx(4.2e-16).epsilon(0.03));
  CHECK(chain.raw_gain == doctest::Approx(2e13).epsilon(0.1));
  CHECK(chain.derated_gain > 1e10);
  CHECK(chain.derated_gain < 1e11);
  CHECK(chain.net_gain > 1e7);
  CHECK(chain.net_gain < 1e8);
}

TEST_CASE("overhead fraction reduces only the net stage") {
  EnergyModel model;
  model.interface_overhead_fraction = 0.25;
  const EnergyChain base = energy_chain(EnergyModel{});
  const EnergyChain cut = energy_chain(model);
  CHECK(cut.raw_gain == base.raw_gain);
  CHECK(cut.derated_gain == base.derated_gain);
  CHECK(cut.net_gain == doctest::Approx(0.75 * base.net_gain).epsilon(1e-12));
}

TEST_CASE("interface overhead from parameter counts") {
  CHECK(interface_overhead(2560) == doctest::Approx(2560.0 / 8.1e6).epsilon(1e-12));
  CHECK(interface_overhead(2560) < 1e-3);  // well under 0.1% of the reference workload
  CHECK(interface_overhead(0) == 0.0);
}

TEST_CASE("model validation") {
  EnergyModel model;
  model.n_units = 0;
  CHECK_THROWS_AS(model.validate(), ContractViolation);
  model = EnergyModel{};
  model.kbt_joules = -1.0;
  CHECK_THROWS_AS(model.validate(), ContractViolation);
  model = EnergyModel{};
  model.interface_overhead_fraction = 1.0;
  CHECK_THROWS_AS(model.validate(), ContractViolation);
}
