#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqsum/qcore.hpp"

namespace sqsum {

using Bits = std::vector<std::uint8_t>;
Bits bits_from_string(std::string_view text);  // MSB-first plain 0/1 text
std::string bits_to_string(const Bits& bits);
Bits xor_bits(const Bits& a, const Bits& b);
Bits random_bits(std::size_t n, Rng& rng);

enum class TargetUser { Alice, Bob };
enum class UserOp { Ctrl, Sift };
enum class Role { EveCheck, TpHonestyCheck, SummationKey, Surplus };
enum class AbortReason { EveDetectedCtrl, EveDetectedSift, TpDishonest, InsufficientSiftGroups };
// Outcome of evaluating one honesty-check group. Mixed CTRL/SIFT groups are
// deliberately not checkable and get an explicit marker so the per-group
// detection bookkeeping stays auditable in the transcript.
enum class HonestyCheck { BothCtrlPass, BothCtrlFail, BothSiftPass, BothSiftFail, MixedNoCheck };

std::string to_string(TargetUser user);
std::string to_string(UserOp op);
std::string to_string(Role role);
std::string to_string(AbortReason reason);
std::string to_string(HonestyCheck check);

struct ProtocolParams {
  std::size_t n = 1;   // result length in bits
  int r = 1;           // eavesdropping-check groups per result bit
  int d = 1;           // honesty-check groups per result bit
  double delta = 1.0;  // surplus factor so enough both-SIFT groups survive

  double q() const { return 4.0 + r + d + delta; }
  void validate() const;
  // n*q particles per sequence; throws NonIntegerParticleCount when n*q is
  // not an integer (within 1e-9).
  std::size_t sequence_length() const;
  std::size_t eve_check_groups() const { return n * static_cast<std::size_t>(r); }
  std::size_t honesty_check_groups() const { return n * static_cast<std::size_t>(d); }
};

struct GroupRecord {
  std::size_t index = 0;
  UserOp alice_op = UserOp::Ctrl;
  UserOp bob_op = UserOp::Ctrl;
  std::optional<LogicalBasisLabel> alice_result;  // present iff alice_op == Sift
  std::optional<LogicalBasisLabel> bob_result;    // present iff bob_op == Sift
  Role role = Role::Surplus;
  std::optional<DoubleBellOutcome> tp_announcement;
  std::optional<HonestyCheck> honesty_check;  // present iff role == TpHonestyCheck
};

// Per-run key material kept for test introspection. groups lists the indices
// of the summation groups in ascending order.
struct KeyMaterial {
  Bits ka, kb, ct, ca, cb;
  std::vector<std::size_t> groups;
};

struct Abort {
  AbortReason reason;
  int step;  // 3, 4 or 5
};

struct Step3Stats {
  std::size_t ctrl_checked = 0, ctrl_errors = 0;
  std::size_t sift_checked = 0, sift_errors = 0;
};

// Physical qubits freshly prepared during a run (for the resource audit).
struct ResourceCounters {
  std::size_t tp_physical_prepared = 0;
  std::size_t alice_physical_prepared = 0;
  std::size_t bob_physical_prepared = 0;
  std::size_t total() const {
    return tp_physical_prepared + alice_physical_prepared + bob_physical_prepared;
  }
};

struct RunOutcome {
  std::optional<Bits> result;  // R = X xor Y on success
  std::optional<Abort> abort;
  std::vector<GroupRecord> transcript;
  std::optional<KeyMaterial> keys;
  Step3Stats step3;
  ResourceCounters counters;
  bool success() const { return result.has_value(); }
};

// Throws Error on any broken transcript invariant (result presence vs op,
// announcement presence vs role, honesty marker placement). reached_step4
// relaxes the announcement requirement for runs aborted earlier.
void validate_transcript(const std::vector<GroupRecord>& records, bool reached_step4);

}  // namespace sqsum
