#pragma once

#include "sqsum/qcore.hpp"

namespace sqsum {

enum class ChannelMode { Noiseless, CollectiveDephasing };
enum class PhaseDistribution { UniformOnCircle, FixedPhase };

// One coherence window of the fiber: every qubit transmitted inside it sees
// the same dephasing angle.
struct DephasingWindow {
  double phase = 0.0;  // in [0, 2*pi)
};

struct ChannelConfig {
  ChannelMode mode = ChannelMode::Noiseless;
  PhaseDistribution phase_distribution = PhaseDistribution::UniformOnCircle;
  double fixed_phase = 0.0;  // used only with PhaseDistribution::FixedPhase

  static ChannelConfig noiseless();
  static ChannelConfig dephasing();
  static ChannelConfig dephasing_fixed(double phase);
};

DephasingWindow sample_window(const ChannelConfig& cfg, Rng& rng);

// Collective dephasing |0> -> |0>, |1> -> e^{i phase}|1> on every qubit of the
// register: each amplitude picks up phase * (Hamming weight of its index).
StateVector transmit(const StateVector& s, DephasingWindow window);

}  // namespace sqsum
