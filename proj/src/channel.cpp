#include "sqsum/channel.hpp"

#include <bit>
#include <cmath>

namespace sqsum {

ChannelConfig ChannelConfig::noiseless() {
  ChannelConfig cfg;
  cfg.mode = ChannelMode::Noiseless;
  return cfg;
}

ChannelConfig ChannelConfig::dephasing() {
  ChannelConfig cfg;
  cfg.mode = ChannelMode::CollectiveDephasing;
  cfg.phase_distribution = PhaseDistribution::UniformOnCircle;
  return cfg;
}

ChannelConfig ChannelConfig::dephasing_fixed(double phase) {
  if (!(phase >= 0.0) || phase >= kTwoPi) {
    throw Error("fixed dephasing phase must lie in [0, 2*pi)");
  }
  ChannelConfig cfg;
  cfg.mode = ChannelMode::CollectiveDephasing;
  cfg.phase_distribution = PhaseDistribution::FixedPhase;
  cfg.fixed_phase = phase;
  return cfg;
}

DephasingWindow sample_window(const ChannelConfig& cfg, Rng& rng) {
  if (cfg.mode == ChannelMode::Noiseless) return DephasingWindow{0.0};
  if (cfg.phase_distribution == PhaseDistribution::FixedPhase) {
    return DephasingWindow{cfg.fixed_phase};
  }
  return DephasingWindow{rng.uniform_angle()};
}

StateVector transmit(const StateVector& s, DephasingWindow window) {
  if (window.phase == 0.0) return s;
  // Every |1> in a computational basis component picks up the same phase, so
  // a component of Hamming weight h is multiplied by e^{i*h*phase}.
  std::vector<Amplitude> out(s.amplitudes());
  const std::size_t max_weight = s.num_qubits();
  std::vector<Amplitude> factor(max_weight + 1);
  for (std::size_t h = 0; h <= max_weight; ++h) {
    factor[h] = std::polar(1.0, window.phase * static_cast<double>(h));
  }
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b] *= factor[std::popcount(b)];
  }
  return StateVector(s.num_qubits(), std::move(out));
}

}  // namespace sqsum
