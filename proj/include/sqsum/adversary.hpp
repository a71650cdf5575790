#pragma once

#include <array>
#include <memory>
#include <string_view>
#include <vector>

#include "sqsum/protocol_types.hpp"

namespace sqsum {

// One traveling logical particle. Qubits (0,1) are always the pair the user
// acts on; an eavesdropper may extend the register with an ancilla pair at
// (2,3) while the particle is in flight, but must detach it again before the
// particle re-enters the channel toward the receiver.
struct InFlight {
  StateVector state;
  bool has_ancilla() const { return state.num_qubits() == 4; }
};

// What an attacker wrote down about one intercepted particle.
struct EveRecord {
  TargetUser user = TargetUser::Alice;
  std::size_t index = 0;
  LogicalBasisLabel outcome = LogicalBasisLabel::Zdp0;  // the Z_dp reading
  std::optional<UserOp> guess;                          // CTRL/SIFT inference, when attempted
  // True when the pre-measurement ancilla amplitude-matched |0_dp> (within
  // 1e-12, up to global phase). Only the double-CNOT attacker fills this.
  bool ancilla_exact_zdp0 = false;
};

// A strategy instance is owned by a single run; it may carry state between
// hooks (recorded preparations, ancilla readings) but never across runs.
class AdversaryStrategy {
 public:
  virtual ~AdversaryStrategy() = default;
  virtual std::string_view name() const = 0;
  // Dishonest-TP variants forge the step-3 verdict, so the run loop skips the
  // genuine eavesdropping check when this is true.
  virtual bool dishonest_tp() const { return false; }

  // Step 1: the state TP loads into slot `index` of the user's sequence.
  virtual StateVector tp_prepare(TargetUser user, std::size_t index, Rng& rng);
  // Step 4: TP's public double Bell announcement for one stored group.
  virtual DoubleBellOutcome tp_announce(std::size_t group, const StateVector& alice_half,
                                        const StateVector& bob_half, Rng& rng);

  // Channel hooks, called once per hop. Default: pass through untouched.
  virtual void on_forward(TargetUser user, std::size_t index, InFlight& particle, Rng& rng);
  virtual void on_return(TargetUser user, std::size_t index, InFlight& particle, Rng& rng);

  // A dishonest TP's best guess of the user's key bit for one group, if the
  // strategy collected enough to guess. 0/1, or nullopt for "no idea".
  virtual std::optional<int> key_bit_guess(TargetUser user, std::size_t group) const;

  const std::vector<EveRecord>& eve_log() const { return eve_log_; }
  // Every (user, index) transmission a channel hook actually acted on; lets
  // tests assert the untargeted channel was never touched.
  const std::vector<std::pair<TargetUser, std::size_t>>& touched() const { return touched_; }

 protected:
  void note_touch(TargetUser user, std::size_t index) { touched_.emplace_back(user, index); }
  std::vector<EveRecord> eve_log_;
  std::vector<std::pair<TargetUser, std::size_t>> touched_;
};

// Building blocks for the CNOT-based interceptions, usable standalone.
//
// Forward hop: attach the ancilla and apply the logical CNOT controlled on
// the particle pair (0,1), targeting the ancilla pair (2,3).
StateVector eve_double_cnot_forward(const StateVector& particle, const StateVector& ancilla);
// Return hop: apply the same logical CNOT again and split the register into
// (particle, ancilla). Throws FactorizationFailed if the cut stays entangled,
// which would signal an implementation bug rather than a protocol event.
std::pair<StateVector, StateVector> eve_double_cnot_return(const StateVector& joint);
// Intercept-measure-resend in Z_dp: returns the freshly prepared forwarded
// particle and the label the attacker recorded.
std::pair<StateVector, LogicalBasisLabel> eve_measure_resend(const StateVector& particle, Rng& rng);

class PassiveAdversary final : public AdversaryStrategy {
 public:
  std::string_view name() const override { return "passive"; }
};

// Outside attacker, entangling CNOT on both hops of one user's channel.
class EveDoubleCnot final : public AdversaryStrategy {
 public:
  explicit EveDoubleCnot(TargetUser target) : target_(target) {}
  std::string_view name() const override { return "eve-double-cnot"; }
  void on_forward(TargetUser user, std::size_t index, InFlight& particle, Rng& rng) override;
  void on_return(TargetUser user, std::size_t index, InFlight& particle, Rng& rng) override;

 private:
  TargetUser target_;
};

// Outside attacker, forward CNOT only; reads the ancilla after the user acts.
class EveSingleCnot final : public AdversaryStrategy {
 public:
  explicit EveSingleCnot(TargetUser target) : target_(target) {}
  std::string_view name() const override { return "eve-single-cnot"; }
  void on_forward(TargetUser user, std::size_t index, InFlight& particle, Rng& rng) override;
  void on_return(TargetUser user, std::size_t index, InFlight& particle, Rng& rng) override;

 private:
  TargetUser target_;
};

// Outside attacker, Z_dp measure-and-resend on the forward hop.
class EveMeasureResend final : public AdversaryStrategy {
 public:
  explicit EveMeasureResend(TargetUser target) : target_(target) {}
  std::string_view name() const override { return "eve-measure-resend"; }
  void on_forward(TargetUser user, std::size_t index, InFlight& particle, Rng& rng) override;

 private:
  TargetUser target_;
};

// Dishonest TP: prepares random Z_dp states instead of |+_dp> and announces
// genuine double Bell results, hoping the check groups stay quiet.
class TpAttack1 final : public AdversaryStrategy {
 public:
  std::string_view name() const override { return "tp-attack-1"; }
  bool dishonest_tp() const override { return true; }
  StateVector tp_prepare(TargetUser user, std::size_t index, Rng& rng) override;
  std::optional<int> key_bit_guess(TargetUser user, std::size_t group) const override;

 private:
  std::array<std::vector<std::uint8_t>, 2> prepared_;
};

// Dishonest TP: prepares honestly but measures every stored group in
// Z_dp (x) Z_dp and announces a random pair of the matching type.
class TpAttack2 final : public AdversaryStrategy {
 public:
  std::string_view name() const override { return "tp-attack-2"; }
  bool dishonest_tp() const override { return true; }
  DoubleBellOutcome tp_announce(std::size_t group, const StateVector& alice_half,
                                const StateVector& bob_half, Rng& rng) override;
  std::optional<int> key_bit_guess(TargetUser user, std::size_t group) const override;

 private:
  std::array<std::vector<std::int8_t>, 2> observed_;  // -1 = not seen
};

// Factory keyed by the CLI spelling: passive, eve-double-cnot,
// eve-single-cnot, eve-measure-resend, tp-attack-1, tp-attack-2.
std::unique_ptr<AdversaryStrategy> make_adversary(std::string_view name,
                                                  TargetUser eve_target = TargetUser::Alice);
const std::vector<std::string>& adversary_names();
bool is_tp_attack(std::string_view name);

}  // namespace sqsum
