#include "thermodiffuse/energy.hpp"

#include "thermodiffuse/errors.hpp"

namespace tdiff {

void EnergyModel::validate() const {
  if (kbt_joules <= 0.0 || units_multiplier <= 0.0 || n_units == 0 || n_steps == 0 ||
      gpu_joules_per_step <= 0.0 || adc_dac_derating <= 0.0 || extra_system_derating <= 0.0) {
    throw ContractViolation("energy model: all factors must be positive");
  }
  if (interface_overhead_fraction < 0.0 || interface_overhead_fraction >= 1.0) {
    throw ContractViolation("energy model: interface overhead fraction must be in [0, 1)");
  }
}

EnergyChain energy_chain(const EnergyModel& model) {
  model.validate();
  EnergyChain chain;
  chain.e_thermo = model.kbt_joules * model.units_multiplier *
                   static_cast<double>(model.n_units) * static_cast<double>(model.n_steps);
  chain.raw_gain = model.gpu_joules_per_step / chain.e_thermo;
  chain.derated_gain = chain.raw_gain / model.adc_dac_derating;
  chain.net_gain = chain.derated_gain / model.extra_system_derating *
                   (1.0 - model.interface_overhead_fraction);
  return chain;
}

double interface_overhead(std::size_t interface_params, double reference_macs) {
  if (reference_macs <= 0.0) {
    throw ContractViolation("interface_overhead: reference_macs must be > 0");
  }
  return static_cast<double>(interface_params) / reference_macs;
}

}  // namespace tdiff
