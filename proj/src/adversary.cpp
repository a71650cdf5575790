#include "sqsum/adversary.hpp"

namespace sqsum {

StateVector AdversaryStrategy::tp_prepare(TargetUser /*user*/, std::size_t /*index*/,
                                          Rng& /*rng*/) {
  return encode(LogicalBasisLabel::XdpPlus);
}

DoubleBellOutcome AdversaryStrategy::tp_announce(std::size_t /*group*/,
                                                 const StateVector& alice_half,
                                                 const StateVector& bob_half, Rng& rng) {
  return double_bell_measure(tensor(alice_half, bob_half), rng).outcome;
}

void AdversaryStrategy::on_forward(TargetUser /*user*/, std::size_t /*index*/,
                                   InFlight& /*particle*/, Rng& /*rng*/) {}

void AdversaryStrategy::on_return(TargetUser /*user*/, std::size_t /*index*/,
                                  InFlight& /*particle*/, Rng& /*rng*/) {}

std::optional<int> AdversaryStrategy::key_bit_guess(TargetUser /*user*/,
                                                    std::size_t /*group*/) const {
  return std::nullopt;
}

StateVector eve_double_cnot_forward(const StateVector& particle, const StateVector& ancilla) {
  if (particle.num_qubits() != 2 || ancilla.num_qubits() != 2) {
    throw WrongRegisterSize("CNOT interception couples two 2-qubit registers");
  }
  return apply_logical_cnot(tensor(particle, ancilla), {0, 1}, {2, 3});
}

std::pair<StateVector, StateVector> eve_double_cnot_return(const StateVector& joint) {
  if (joint.num_qubits() != 4) {
    throw WrongRegisterSize("CNOT disentangling expects particle plus ancilla");
  }
  const StateVector undone = apply_logical_cnot(joint, {0, 1}, {2, 3});
  const std::size_t pair[2] = {0, 1};
  FactorResult split = factor_subsystem(undone, pair);
  return {std::move(split.sub), std::move(split.rest)};
}

std::pair<StateVector, LogicalBasisLabel> eve_measure_resend(const StateVector& particle,
                                                             Rng& rng) {
  if (particle.num_qubits() != 2) {
    throw WrongRegisterSize("a traveling particle is a 2-qubit register");
  }
  auto [label, post] = measure_logical_z(particle, 0, 1, rng);
  (void)post;
  return {encode(label), label};
}

void EveDoubleCnot::on_forward(TargetUser user, std::size_t index, InFlight& particle,
                               Rng& /*rng*/) {
  if (user != target_) return;
  note_touch(user, index);
  particle.state = eve_double_cnot_forward(particle.state, encode(LogicalBasisLabel::Zdp0));
}

void EveDoubleCnot::on_return(TargetUser user, std::size_t index, InFlight& particle, Rng& rng) {
  if (user != target_) return;
  note_touch(user, index);
  auto [freed, ancilla] = eve_double_cnot_return(particle.state);
  EveRecord rec;
  rec.user = user;
  rec.index = index;
  rec.ancilla_exact_zdp0 =
      ancilla.equal_up_to_phase(encode(LogicalBasisLabel::Zdp0), kAlgebraTol);
  auto [label, post] = measure_logical_z(ancilla, 0, 1, rng);
  (void)post;
  rec.outcome = label;
  // The second CNOT resets the ancilla no matter what the user did, so this
  // inference carries no information; it is logged to make that measurable.
  rec.guess = (label == LogicalBasisLabel::Zdp0) ? UserOp::Ctrl : UserOp::Sift;
  eve_log_.push_back(std::move(rec));
  particle.state = std::move(freed);
}

void EveSingleCnot::on_forward(TargetUser user, std::size_t index, InFlight& particle,
                               Rng& /*rng*/) {
  if (user != target_) return;
  note_touch(user, index);
  particle.state = eve_double_cnot_forward(particle.state, encode(LogicalBasisLabel::Zdp0));
}

void EveSingleCnot::on_return(TargetUser user, std::size_t index, InFlight& particle, Rng& rng) {
  if (user != target_) return;
  note_touch(user, index);
  if (!particle.has_ancilla()) {
    throw WrongRegisterSize("returning particle lost the attached ancilla");
  }
  auto [label, post] = measure_logical_z(particle.state, 2, 3, rng);
  EveRecord rec;
  rec.user = user;
  rec.index = index;
  rec.outcome = label;
  eve_log_.push_back(std::move(rec));
  const std::size_t anc[2] = {2, 3};
  FactorResult split = factor_subsystem(post, anc);
  particle.state = std::move(split.rest);
}

void EveMeasureResend::on_forward(TargetUser user, std::size_t index, InFlight& particle,
                                  Rng& rng) {
  if (user != target_) return;
  note_touch(user, index);
  auto [fresh, label] = eve_measure_resend(particle.state, rng);
  EveRecord rec;
  rec.user = user;
  rec.index = index;
  rec.outcome = label;
  eve_log_.push_back(std::move(rec));
  particle.state = std::move(fresh);
}

StateVector TpAttack1::tp_prepare(TargetUser user, std::size_t index, Rng& rng) {
  auto& bits = prepared_[user == TargetUser::Alice ? 0 : 1];
  if (bits.size() <= index) bits.resize(index + 1, 0);
  const bool one = rng.coin();
  bits[index] = one ? 1 : 0;
  return encode(one ? LogicalBasisLabel::Zdp1 : LogicalBasisLabel::Zdp0);
}

std::optional<int> TpAttack1::key_bit_guess(TargetUser user, std::size_t group) const {
  const auto& bits = prepared_[user == TargetUser::Alice ? 0 : 1];
  if (group >= bits.size()) return std::nullopt;
  return static_cast<int>(bits[group]);
}

DoubleBellOutcome TpAttack2::tp_announce(std::size_t group, const StateVector& alice_half,
                                         const StateVector& bob_half, Rng& rng) {
  auto [alice_label, mid] = measure_logical_z(tensor(alice_half, bob_half), 0, 1, rng);
  auto [bob_label, post] = measure_logical_z(mid, 2, 3, rng);
  (void)post;
  for (auto& seen : observed_) {
    if (seen.size() <= group) seen.resize(group + 1, -1);
  }
  observed_[0][group] = (alice_label == LogicalBasisLabel::Zdp1) ? 1 : 0;
  observed_[1][group] = (bob_label == LogicalBasisLabel::Zdp1) ? 1 : 0;

  const bool phi = (alice_label == bob_label);
  const std::uint64_t pick = rng.uniform_below(4);
  const auto label_of = [phi](bool plus) {
    if (phi) return plus ? BellLabel::PhiPlus : BellLabel::PhiMinus;
    return plus ? BellLabel::PsiPlus : BellLabel::PsiMinus;
  };
  return DoubleBellOutcome{label_of((pick & 2) == 0), label_of((pick & 1) == 0)};
}

std::optional<int> TpAttack2::key_bit_guess(TargetUser user, std::size_t group) const {
  const auto& seen = observed_[user == TargetUser::Alice ? 0 : 1];
  if (group >= seen.size() || seen[group] < 0) return std::nullopt;
  return static_cast<int>(seen[group]);
}

std::unique_ptr<AdversaryStrategy> make_adversary(std::string_view name, TargetUser eve_target) {
  if (name == "passive") return std::make_unique<PassiveAdversary>();
  if (name == "eve-double-cnot") return std::make_unique<EveDoubleCnot>(eve_target);
  if (name == "eve-single-cnot") return std::make_unique<EveSingleCnot>(eve_target);
  if (name == "eve-measure-resend") return std::make_unique<EveMeasureResend>(eve_target);
  if (name == "tp-attack-1") return std::make_unique<TpAttack1>();
  if (name == "tp-attack-2") return std::make_unique<TpAttack2>();
  throw UnsupportedAttack("unknown adversary '" + std::string(name) + "'");
}

const std::vector<std::string>& adversary_names() {
  static const std::vector<std::string> names = {"passive",
                                                 "eve-double-cnot",
                                                 "eve-single-cnot",
                                                 "eve-measure-resend",
                                                 "tp-attack-1",
                                                 "tp-attack-2"};
  return names;
}

bool is_tp_attack(std::string_view name) {
  return name == "tp-attack-1" || name == "tp-attack-2";
}

}  // namespace sqsum
