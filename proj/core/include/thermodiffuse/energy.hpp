#pragma once

#include <cstddef>

namespace tdiff {

// Per-equilibration energy accounting. units_multiplier = 2 counts the encoder
// and decoder modules separately; the derating factors are explicit stand-ins
// for conversion overhead and unmodeled system cost.
struct EnergyModel {
  double kbt_joules = 4.141e-21;  // k_B * 300 K
  double units_multiplier = 2.0;
  std::size_t n_units = 128;
  std::size_t n_steps = 400;
  double gpu_joules_per_step = 8e-3;
  double adc_dac_derating = 1e3;
  double extra_system_derating = 1e3;
  double interface_overhead_fraction = 0.0;

  void validate() const;
};

struct EnergyChain {
  double e_thermo = 0.0;      // joules per equilibration
  double raw_gain = 0.0;      // gpu_joules_per_step / e_thermo
  double derated_gain = 0.0;  // raw / adc_dac_derating
  double net_gain = 0.0;      // derated / extra_system_derating * (1 - overhead)
};

EnergyChain energy_chain(const EnergyModel& model);

// Digital conditioning cost as a fraction of a reference network's
// multiply-accumulates per step.
double interface_overhead(std::size_t interface_params, double reference_macs = 8.1e6);

}  // namespace tdiff
