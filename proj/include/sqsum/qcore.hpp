#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sqsum/errors.hpp"
#include "sqsum/random.hpp"

namespace sqsum {

using Amplitude = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 6;
// Runtime normalization / orthonormality contract.
inline constexpr double kNormTol = 1e-9;
// Exact algebraic identities (state equalities that hold by construction).
inline constexpr double kAlgebraTol = 1e-12;

// Dense statevector over 1..6 physical qubits. Qubit 0 is the leftmost symbol
// of a ket, so the amplitude index of |q0 q1 .. q_{n-1}> is that bit string
// read as a binary number (e.g. |01> lives at index 1).
class StateVector {
 public:
  StateVector(std::size_t num_qubits, std::vector<Amplitude> amplitudes);
  static StateVector basis_state(std::size_t num_qubits, std::size_t index);

  std::size_t num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<Amplitude>& amplitudes() const { return amps_; }
  Amplitude amplitude(std::size_t basis_index) const;

  double norm() const;
  bool approx_equal(const StateVector& other, double tol) const;
  bool equal_up_to_phase(const StateVector& other, double tol) const;
  // Multiplies by the global phase that makes the first nonzero amplitude
  // real and positive; collapse results are reported in this fixed gauge so
  // repeated runs compare byte-for-byte.
  StateVector canonical_phase() const;

 private:
  std::size_t num_qubits_;
  std::vector<Amplitude> amps_;
};

// Logical (dephasing-protected) single-particle states: |0_dp> = |01>,
// |1_dp> = |10>, |+/-_dp> = (|01> +/- |10>)/sqrt(2).
enum class LogicalBasisLabel { Zdp0, Zdp1, XdpPlus, XdpMinus };

enum class BellLabel { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

struct DoubleBellOutcome {
  BellLabel first;   // Bell result on physical qubits (0,2)
  BellLabel second;  // Bell result on physical qubits (1,3)
  bool operator==(const DoubleBellOutcome&) const = default;
};

std::string to_string(LogicalBasisLabel label);
std::string to_string(BellLabel label);
std::string to_string(const DoubleBellOutcome& outcome);
std::optional<DoubleBellOutcome> parse_double_bell(std::string_view text);

bool is_phi_type(BellLabel label);
// Pair type is read off the first component; every announcement produced in
// this simulator pairs two results of the same type.
bool is_phi_type(const DoubleBellOutcome& outcome);
bool equal_labels(const DoubleBellOutcome& outcome);

StateVector encode(LogicalBasisLabel label);    // 2 physical qubits
StateVector bell_state(BellLabel label);        // 2 physical qubits
// 4-qubit entangled logical pairs in the Z_dp product form, e.g.
// PhiPlus -> (|0_dp 0_dp> + |1_dp 1_dp>)/sqrt(2).
StateVector logical_bell(BellLabel label);

StateVector tensor(const StateVector& a, const StateVector& b);
StateVector superposition(std::initializer_list<std::pair<Amplitude, StateVector>> terms);
// Permutes qubits: input qubit j becomes output qubit new_position_of[j].
StateVector reorder_qubits(const StateVector& s, std::span<const std::size_t> new_position_of);

StateVector apply_physical_cnot(const StateVector& s, std::size_t control, std::size_t target);

using QubitPair = std::pair<std::size_t, std::size_t>;
// Logical NOT on the target pair controlled on the control pair's logical
// value, realized as two physical CNOTs from the control pair's first qubit
// onto both target qubits (|0_dp>/|1_dp> differ exactly in that first qubit).
StateVector apply_logical_cnot(const StateVector& s, QubitPair control, QubitPair target);

Amplitude inner_product(const StateVector& a, const StateVector& b);  // conjugate-linear in a

struct MeasurementBasis {
  std::vector<std::size_t> qubits;   // ordered register qubits the vectors address
  std::vector<StateVector> vectors;  // complete orthonormal set, 2^k entries
  std::vector<std::string> labels;   // outcome names, parallel to vectors

  static MeasurementBasis computational(std::vector<std::size_t> qubits);
  // Outcomes 0,1 are |0_dp>,|1_dp>; outcomes 2,3 complete the basis with the
  // |00>,|11> leakage states, which carry zero weight on any protocol state.
  static MeasurementBasis logical_z(std::size_t q0, std::size_t q1);
  // Outcomes 0,1 are |+_dp>,|-_dp>; completed with (|00> +/- |11>)/sqrt(2).
  static MeasurementBasis logical_x(std::size_t q0, std::size_t q1);
  static MeasurementBasis bell(std::size_t q0, std::size_t q1);
};

struct MeasureResult {
  std::size_t outcome;
  StateVector post;  // collapsed, renormalized, canonical phase
};
MeasureResult measure(const StateVector& s, const MeasurementBasis& basis, Rng& rng);

std::pair<LogicalBasisLabel, StateVector> measure_logical_z(const StateVector& s, std::size_t q0,
                                                            std::size_t q1, Rng& rng);
std::pair<LogicalBasisLabel, StateVector> measure_logical_x(const StateVector& s, std::size_t q0,
                                                            std::size_t q1, Rng& rng);
std::pair<BellLabel, StateVector> measure_bell(const StateVector& s, std::size_t q0, std::size_t q1,
                                               Rng& rng);

struct DoubleBellResult {
  DoubleBellOutcome outcome;
  StateVector post;
};
// Sequential Bell measurements on the fixed pairs (0,2) then (1,3) of a
// 4-qubit register; equivalent to the joint 16-outcome projective measurement
// (a property the tests check explicitly).
DoubleBellResult double_bell_measure(const StateVector& s, Rng& rng);

struct FactorResult {
  StateVector sub;   // state of the listed qubits
  StateVector rest;  // state of the remaining qubits, ascending order
};
// Splits s into sub (x) rest, throwing FactorizationFailed when the cut is
// entangled beyond tol.
FactorResult factor_subsystem(const StateVector& s, std::span<const std::size_t> sub_qubits,
                              double tol = kNormTol);

}  // namespace sqsum
