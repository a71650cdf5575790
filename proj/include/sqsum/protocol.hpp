#pragma once

#include "sqsum/adversary.hpp"
#include "sqsum/channel.hpp"
#include "sqsum/protocol_types.hpp"

namespace sqsum {

struct CheckPolicy {
  // Step-3 tolerated error fraction, applied separately to the CTRL and SIFT
  // particle classes. 0 = any error aborts.
  double error_rate_threshold = 0.0;
};

// Step 1 (honest): the two length-n*q sequences of |+_dp> particles.
std::pair<std::vector<StateVector>, std::vector<StateVector>> step1_prepare(
    const ProtocolParams& params);

// Step 2: CTRL reflects the incoming 2-qubit particle unchanged; SIFT
// measures it in Z_dp and sends back a freshly prepared copy of the result.
std::pair<StateVector, std::optional<LogicalBasisLabel>> step2_user_action(
    const StateVector& incoming, UserOp op, Rng& rng);

// Same action applied in place to a particle that may carry an attached
// eavesdropper ancilla at qubits (2,3); the user only ever touches (0,1).
// Returns the SIFT result, or nullopt for CTRL.
std::optional<LogicalBasisLabel> user_action(InFlight& flight, UserOp op, Rng& rng);

struct CheckVerdict {
  bool pass = true;
  std::optional<AbortReason> reason;
  Step3Stats stats;  // filled by step 3 only
};

// Step 3: TP picks n*r groups, users disclose ops (and SIFT results) there,
// TP measures the stored particles (X_dp for CTRL, Z_dp for SIFT) and aborts
// when either class's error rate exceeds the policy threshold. A dishonest TP
// (tp_forges_check) skips the measurements and declares the channel secure.
CheckVerdict step3_eve_check(std::vector<GroupRecord>& records,
                             const std::vector<StateVector>& stored_alice,
                             const std::vector<StateVector>& stored_bob,
                             const ProtocolParams& params, const CheckPolicy& policy,
                             bool tp_forges_check, Rng& rng);

// Step 4a: TP announces a double Bell outcome for every group that survived
// step 3, before the users reveal anything about those groups.
void announce_remaining(std::vector<GroupRecord>& records,
                        const std::vector<StateVector>& stored_alice,
                        const std::vector<StateVector>& stored_bob, AdversaryStrategy& adversary,
                        Rng& rng);

// Admissibility of one announced group against the users' private data:
//   both CTRL  -> the two Bell labels must be equal;
//   both SIFT  -> the pair type must be phi for equal results, psi otherwise;
//   mixed      -> nothing can be checked.
HonestyCheck evaluate_honesty_check(const GroupRecord& record);

// Step 4b: users jointly pick n*d announced groups, reveal their ops there
// and test every admissible group; any failure is TP dishonesty.
CheckVerdict step4_honesty_check(std::vector<GroupRecord>& records, const ProtocolParams& params,
                                 Rng& rng);

// Step 5: the first n both-SIFT groups among the unconsumed ones become the
// key groups; K_A/K_B come from the SIFT results, K_T from the announcement
// types, and the result is C_A xor C_B xor K_T. Aborts with
// InsufficientSiftGroups when fewer than n both-SIFT groups survive.
RunOutcome step5_summation(std::vector<GroupRecord> records, const Bits& x, const Bits& y,
                           const ProtocolParams& params);

// Full protocol run. Exactly one adversary variant is active; the channel
// applies one dephasing window per particle per hop. The run loop keeps at
// most one particle in flight per channel (TP sends the next one only after
// the previous one returned).
RunOutcome run_protocol(const ProtocolParams& params, const Bits& x, const Bits& y,
                        AdversaryStrategy& adversary, const ChannelConfig& channel, Rng& rng,
                        const CheckPolicy& policy = {});

}  // namespace sqsum
