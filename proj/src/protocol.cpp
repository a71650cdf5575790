#include "sqsum/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqsum {

Bits bits_from_string(std::string_view text) {
  if (text.empty()) throw Error("bit string is empty");
  Bits out;
  out.reserve(text.size());
  for (const char c : text) {
    if (c != '0' && c != '1') {
      throw Error("bit string may contain only 0 and 1, got '" + std::string(1, c) + "'");
    }
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

std::string bits_to_string(const Bits& bits) {
  std::string out;
  out.reserve(bits.size());
  for (const std::uint8_t b : bits) out += (b ? '1' : '0');
  return out;
}

Bits xor_bits(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw DimensionMismatch("xor of bit strings of different lengths");
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

Bits random_bits(std::size_t n, Rng& rng) {
  Bits out(n);
  for (auto& b : out) b = rng.coin() ? 1 : 0;
  return out;
}

std::string to_string(TargetUser user) {
  return user == TargetUser::Alice ? "alice" : "bob";
}

std::string to_string(UserOp op) { return op == UserOp::Ctrl ? "CTRL" : "SIFT"; }

std::string to_string(Role role) {
  switch (role) {
    case Role::EveCheck: return "eve-check";
    case Role::TpHonestyCheck: return "honesty-check";
    case Role::SummationKey: return "summation-key";
    case Role::Surplus: return "surplus";
  }
  throw Error("unknown group role");
}

std::string to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::EveDetectedCtrl: return "eve-detected-ctrl";
    case AbortReason::EveDetectedSift: return "eve-detected-sift";
    case AbortReason::TpDishonest: return "tp-dishonest";
    case AbortReason::InsufficientSiftGroups: return "insufficient-sift-groups";
  }
  throw Error("unknown abort reason");
}

std::string to_string(HonestyCheck check) {
  switch (check) {
    case HonestyCheck::BothCtrlPass: return "both-ctrl-pass";
    case HonestyCheck::BothCtrlFail: return "both-ctrl-fail";
    case HonestyCheck::BothSiftPass: return "both-sift-pass";
    case HonestyCheck::BothSiftFail: return "both-sift-fail";
    case HonestyCheck::MixedNoCheck: return "mixed-no-check";
  }
  throw Error("unknown honesty-check outcome");
}

void ProtocolParams::validate() const {
  if (n < 1) throw Error("result length n must be at least 1");
  if (r < 1) throw Error("eavesdropping-check multiplier r must be at least 1");
  if (d < 1) throw Error("honesty-check multiplier d must be at least 1");
  if (!(delta > 0.0)) throw Error("surplus factor delta must be positive");
  sequence_length();  // n*q must come out an integer
}

std::size_t ProtocolParams::sequence_length() const {
  const double groups = static_cast<double>(n) * q();
  const double rounded = std::round(groups);
  if (std::abs(groups - rounded) > 1e-9 || rounded < 1.0) {
    throw NonIntegerParticleCount("n*(4+r+d+delta) = " + std::to_string(groups) +
                                  " is not a positive integer");
  }
  return static_cast<std::size_t>(rounded);
}

void validate_transcript(const std::vector<GroupRecord>& records, bool reached_step4) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const GroupRecord& rec = records[i];
    if (rec.index != i) throw Error("transcript group indices are not consecutive");
    if (rec.alice_result.has_value() != (rec.alice_op == UserOp::Sift)) {
      throw Error("group " + std::to_string(i) + ": presence of a SIFT result must match the op");
    }
    if (rec.bob_result.has_value() != (rec.bob_op == UserOp::Sift)) {
      throw Error("group " + std::to_string(i) + ": presence of a SIFT result must match the op");
    }
    if (rec.honesty_check.has_value() != (rec.role == Role::TpHonestyCheck)) {
      throw Error("group " + std::to_string(i) +
                  ": honesty-check marker must match the honesty-check role");
    }
    const bool announced = rec.tp_announcement.has_value();
    if (rec.role == Role::EveCheck && announced) {
      throw Error("group " + std::to_string(i) + ": eavesdropping-check groups are not announced");
    }
    if (reached_step4 && rec.role != Role::EveCheck && !announced) {
      throw Error("group " + std::to_string(i) + ": surviving group lacks an announcement");
    }
    if (!reached_step4 && announced) {
      throw Error("group " + std::to_string(i) + ": announcement before the check step completed");
    }
    if (rec.honesty_check && *rec.honesty_check != evaluate_honesty_check(rec)) {
      throw Error("group " + std::to_string(i) + ": recorded honesty check cannot be reproduced");
    }
  }
}

std::pair<std::vector<StateVector>, std::vector<StateVector>> step1_prepare(
    const ProtocolParams& params) {
  params.validate();
  const std::size_t total = params.sequence_length();
  const StateVector plus = encode(LogicalBasisLabel::XdpPlus);
  return {std::vector<StateVector>(total, plus), std::vector<StateVector>(total, plus)};
}

std::optional<LogicalBasisLabel> user_action(InFlight& flight, UserOp op, Rng& rng) {
  if (op == UserOp::Ctrl) return std::nullopt;
  auto [label, post] = measure_logical_z(flight.state, 0, 1, rng);
  if (flight.has_ancilla()) {
    // A complete measurement of the pair leaves it factorized from the rest,
    // so the cut below always succeeds; the fresh particle replaces it.
    const std::size_t pair[2] = {0, 1};
    FactorResult split = factor_subsystem(post, pair);
    flight.state = tensor(encode(label), split.rest);
  } else {
    flight.state = encode(label);
  }
  return label;
}

std::pair<StateVector, std::optional<LogicalBasisLabel>> step2_user_action(
    const StateVector& incoming, UserOp op, Rng& rng) {
  if (incoming.num_qubits() != 2) {
    throw WrongRegisterSize("a traveling particle is a 2-qubit register");
  }
  InFlight flight{incoming};
  auto label = user_action(flight, op, rng);
  return {std::move(flight.state), label};
}

CheckVerdict step3_eve_check(std::vector<GroupRecord>& records,
                             const std::vector<StateVector>& stored_alice,
                             const std::vector<StateVector>& stored_bob,
                             const ProtocolParams& params, const CheckPolicy& policy,
                             bool tp_forges_check, Rng& rng) {
  const std::size_t total = records.size();
  const std::size_t want = params.eve_check_groups();
  if (want >= total) throw Error("eavesdropping check would consume every group");
  const std::vector<std::size_t> picked = sample_indices(rng, total, want);
  for (const std::size_t g : picked) records[g].role = Role::EveCheck;

  CheckVerdict verdict;
  if (tp_forges_check) return verdict;  // dishonest TP declares the channel clean

  const auto check_particle = [&](const StateVector& stored, UserOp op,
                                  std::optional<LogicalBasisLabel> announced) {
    if (op == UserOp::Ctrl) {
      ++verdict.stats.ctrl_checked;
      auto [label, post] = measure_logical_x(stored, 0, 1, rng);
      (void)post;
      if (label != LogicalBasisLabel::XdpPlus) ++verdict.stats.ctrl_errors;
    } else {
      ++verdict.stats.sift_checked;
      auto [label, post] = measure_logical_z(stored, 0, 1, rng);
      (void)post;
      if (label != *announced) ++verdict.stats.sift_errors;
    }
  };
  for (const std::size_t g : picked) {
    check_particle(stored_alice[g], records[g].alice_op, records[g].alice_result);
    check_particle(stored_bob[g], records[g].bob_op, records[g].bob_result);
  }

  const auto rate = [](std::size_t errors, std::size_t checked) {
    return checked == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(checked);
  };
  if (rate(verdict.stats.ctrl_errors, verdict.stats.ctrl_checked) > policy.error_rate_threshold) {
    verdict.pass = false;
    verdict.reason = AbortReason::EveDetectedCtrl;
  } else if (rate(verdict.stats.sift_errors, verdict.stats.sift_checked) >
             policy.error_rate_threshold) {
    verdict.pass = false;
    verdict.reason = AbortReason::EveDetectedSift;
  }
  return verdict;
}

void announce_remaining(std::vector<GroupRecord>& records,
                        const std::vector<StateVector>& stored_alice,
                        const std::vector<StateVector>& stored_bob, AdversaryStrategy& adversary,
                        Rng& rng) {
  for (GroupRecord& rec : records) {
    if (rec.role == Role::EveCheck) continue;
    rec.tp_announcement =
        adversary.tp_announce(rec.index, stored_alice[rec.index], stored_bob[rec.index], rng);
  }
}

HonestyCheck evaluate_honesty_check(const GroupRecord& record) {
  if (!record.tp_announcement) {
    throw Error("honesty check on a group without an announcement");
  }
  if (record.alice_op != record.bob_op) return HonestyCheck::MixedNoCheck;
  if (record.alice_op == UserOp::Ctrl) {
    return equal_labels(*record.tp_announcement) ? HonestyCheck::BothCtrlPass
                                                 : HonestyCheck::BothCtrlFail;
  }
  const bool results_equal = (*record.alice_result == *record.bob_result);
  const bool expect_phi = results_equal;
  return is_phi_type(*record.tp_announcement) == expect_phi ? HonestyCheck::BothSiftPass
                                                            : HonestyCheck::BothSiftFail;
}

CheckVerdict step4_honesty_check(std::vector<GroupRecord>& records, const ProtocolParams& params,
                                 Rng& rng) {
  std::vector<std::size_t> announced;
  for (const GroupRecord& rec : records) {
    if (rec.role != Role::EveCheck) announced.push_back(rec.index);
  }
  const std::size_t want = params.honesty_check_groups();
  if (want >= announced.size()) throw Error("honesty check would consume every announced group");
  const std::vector<std::size_t> picked = sample_indices(rng, announced.size(), want);

  CheckVerdict verdict;
  for (const std::size_t p : picked) {
    GroupRecord& rec = records[announced[p]];
    rec.role = Role::TpHonestyCheck;
    rec.honesty_check = evaluate_honesty_check(rec);
    if (*rec.honesty_check == HonestyCheck::BothCtrlFail ||
        *rec.honesty_check == HonestyCheck::BothSiftFail) {
      verdict.pass = false;
      verdict.reason = AbortReason::TpDishonest;
    }
  }
  return verdict;
}

RunOutcome step5_summation(std::vector<GroupRecord> records, const Bits& x, const Bits& y,
                           const ProtocolParams& params) {
  std::vector<std::size_t> key_groups;
  for (GroupRecord& rec : records) {
    if (key_groups.size() == params.n) break;
    if (rec.role != Role::Surplus) continue;
    if (rec.alice_op == UserOp::Sift && rec.bob_op == UserOp::Sift) {
      rec.role = Role::SummationKey;
      key_groups.push_back(rec.index);
    }
  }

  RunOutcome outcome;
  if (key_groups.size() < params.n) {
    outcome.abort = Abort{AbortReason::InsufficientSiftGroups, 5};
    outcome.transcript = std::move(records);
    return outcome;
  }

  KeyMaterial keys;
  keys.groups = key_groups;
  for (const std::size_t g : key_groups) {
    const GroupRecord& rec = records[g];
    keys.ka.push_back(*rec.alice_result == LogicalBasisLabel::Zdp1 ? 1 : 0);
    keys.kb.push_back(*rec.bob_result == LogicalBasisLabel::Zdp1 ? 1 : 0);
    keys.ct.push_back(is_phi_type(*rec.tp_announcement) ? 0 : 1);
  }
  keys.ca = xor_bits(keys.ka, x);
  keys.cb = xor_bits(keys.kb, y);
  outcome.result = xor_bits(xor_bits(keys.ca, keys.cb), keys.ct);
  outcome.keys = std::move(keys);
  outcome.transcript = std::move(records);
  return outcome;
}

namespace {

// One full round trip of one particle: TP -> channel -> (adversary) -> user
// -> (adversary) -> channel -> TP. The dephasing window is sampled afresh for
// each hop; the adversary hooks run at the user's end of both hops, so a
// window only ever acts on a bare 2-qubit particle.
StateVector round_trip(const StateVector& outgoing, TargetUser user, std::size_t index, UserOp op,
                       std::optional<LogicalBasisLabel>& result, AdversaryStrategy& adversary,
                       const ChannelConfig& channel, ResourceCounters& counters, Rng& rng) {
  InFlight flight{transmit(outgoing, sample_window(channel, rng))};
  adversary.on_forward(user, index, flight, rng);

  result = user_action(flight, op, rng);
  if (result) {
    auto& prepared = (user == TargetUser::Alice) ? counters.alice_physical_prepared
                                                 : counters.bob_physical_prepared;
    prepared += 2;
  }

  adversary.on_return(user, index, flight, rng);
  if (flight.has_ancilla()) {
    throw std::logic_error("adversary left an ancilla attached to a returning particle");
  }
  return transmit(flight.state, sample_window(channel, rng));
}

}  // namespace

RunOutcome run_protocol(const ProtocolParams& params, const Bits& x, const Bits& y,
                        AdversaryStrategy& adversary, const ChannelConfig& channel, Rng& rng,
                        const CheckPolicy& policy) {
  params.validate();
  if (x.size() != params.n || y.size() != params.n) {
    throw DimensionMismatch("input bit strings must have length n");
  }
  const std::size_t total = params.sequence_length();

  RunOutcome outcome;
  std::vector<StateVector> prepared_alice, prepared_bob;
  prepared_alice.reserve(total);
  prepared_bob.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    prepared_alice.push_back(adversary.tp_prepare(TargetUser::Alice, i, rng));
  }
  for (std::size_t i = 0; i < total; ++i) {
    prepared_bob.push_back(adversary.tp_prepare(TargetUser::Bob, i, rng));
  }
  outcome.counters.tp_physical_prepared = 4 * total;

  std::vector<GroupRecord> records(total);
  std::vector<StateVector> stored_alice, stored_bob;
  stored_alice.reserve(total);
  stored_bob.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    GroupRecord& rec = records[i];
    rec.index = i;
    rec.alice_op = rng.coin() ? UserOp::Ctrl : UserOp::Sift;
    stored_alice.push_back(round_trip(prepared_alice[i], TargetUser::Alice, i, rec.alice_op,
                                      rec.alice_result, adversary, channel, outcome.counters,
                                      rng));
    rec.bob_op = rng.coin() ? UserOp::Ctrl : UserOp::Sift;
    stored_bob.push_back(round_trip(prepared_bob[i], TargetUser::Bob, i, rec.bob_op,
                                    rec.bob_result, adversary, channel, outcome.counters, rng));
  }

  const CheckVerdict step3 = step3_eve_check(records, stored_alice, stored_bob, params, policy,
                                             adversary.dishonest_tp(), rng);
  outcome.step3 = step3.stats;
  if (!step3.pass) {
    outcome.abort = Abort{*step3.reason, 3};
    outcome.transcript = std::move(records);
    validate_transcript(outcome.transcript, false);
    return outcome;
  }

  announce_remaining(records, stored_alice, stored_bob, adversary, rng);
  const CheckVerdict step4 = step4_honesty_check(records, params, rng);
  if (!step4.pass) {
    outcome.abort = Abort{*step4.reason, 4};
    outcome.transcript = std::move(records);
    validate_transcript(outcome.transcript, true);
    return outcome;
  }

  RunOutcome final = step5_summation(std::move(records), x, y, params);
  final.step3 = outcome.step3;
  final.counters = outcome.counters;
  validate_transcript(final.transcript, true);
  return final;
}

}  // namespace sqsum
