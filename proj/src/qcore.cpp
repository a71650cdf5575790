#include "sqsum/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace sqsum {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::size_t checked_dim(std::size_t num_qubits) {
  if (num_qubits == 0) throw Error("register must hold at least one qubit");
  if (num_qubits > kMaxQubits) {
    throw CapacityExceeded("register of " + std::to_string(num_qubits) +
                           " qubits exceeds the " + std::to_string(kMaxQubits) +
                           "-qubit capacity");
  }
  return std::size_t{1} << num_qubits;
}

void check_qubit_index(const StateVector& s, std::size_t q, const char* what) {
  if (q >= s.num_qubits()) {
    throw IndexOutOfRange(std::string(what) + " qubit " + std::to_string(q) +
                          " out of range for a " + std::to_string(s.num_qubits()) +
                          "-qubit register");
  }
}

// Bit mask of register qubit q (qubit 0 = most significant bit of the index).
std::size_t qubit_mask(std::size_t num_qubits, std::size_t q) {
  return std::size_t{1} << (num_qubits - 1 - q);
}

}  // namespace

StateVector::StateVector(std::size_t num_qubits, std::vector<Amplitude> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
  const std::size_t dim = checked_dim(num_qubits);
  if (amps_.size() != dim) {
    throw DimensionMismatch("amplitude vector has length " + std::to_string(amps_.size()) +
                            ", expected " + std::to_string(dim));
  }
  const double n = norm();
  if (n < kNormTol) throw DegenerateState("state norm below tolerance");
  if (std::abs(n - 1.0) > kNormTol) {
    throw Error("state vector is not normalized (norm " + std::to_string(n) + ")");
  }
}

StateVector StateVector::basis_state(std::size_t num_qubits, std::size_t index) {
  const std::size_t dim = checked_dim(num_qubits);
  if (index >= dim) {
    throw IndexOutOfRange("basis index " + std::to_string(index) + " out of range");
  }
  std::vector<Amplitude> amps(dim, Amplitude{0.0, 0.0});
  amps[index] = Amplitude{1.0, 0.0};
  return StateVector(num_qubits, std::move(amps));
}

Amplitude StateVector::amplitude(std::size_t basis_index) const {
  if (basis_index >= amps_.size()) {
    throw IndexOutOfRange("basis index " + std::to_string(basis_index) + " out of range");
  }
  return amps_[basis_index];
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

bool StateVector::approx_equal(const StateVector& other, double tol) const {
  if (num_qubits_ != other.num_qubits_) return false;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (std::abs(amps_[i] - other.amps_[i]) > tol) return false;
  }
  return true;
}

bool StateVector::equal_up_to_phase(const StateVector& other, double tol) const {
  if (num_qubits_ != other.num_qubits_) return false;
  Amplitude overlap{0.0, 0.0};
  for (std::size_t i = 0; i < amps_.size(); ++i) overlap += std::conj(amps_[i]) * other.amps_[i];
  // If other == e^{i theta} * this then overlap == e^{i theta}.
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (std::abs(other.amps_[i] - overlap * amps_[i]) > tol) return false;
  }
  return true;
}

StateVector StateVector::canonical_phase() const {
  for (const auto& a : amps_) {
    const double mag = std::abs(a);
    if (mag > kNormTol) {
      const Amplitude rot = std::conj(a) / mag;
      std::vector<Amplitude> out(amps_);
      for (auto& v : out) v *= rot;
      return StateVector(num_qubits_, std::move(out));
    }
  }
  return *this;  // unreachable for normalized states
}

std::string to_string(LogicalBasisLabel label) {
  switch (label) {
    case LogicalBasisLabel::Zdp0: return "0_dp";
    case LogicalBasisLabel::Zdp1: return "1_dp";
    case LogicalBasisLabel::XdpPlus: return "+_dp";
    case LogicalBasisLabel::XdpMinus: return "-_dp";
  }
  throw Error("unknown logical basis label");
}

std::string to_string(BellLabel label) {
  switch (label) {
    case BellLabel::PhiPlus: return "phi+";
    case BellLabel::PhiMinus: return "phi-";
    case BellLabel::PsiPlus: return "psi+";
    case BellLabel::PsiMinus: return "psi-";
  }
  throw Error("unknown Bell label");
}

std::string to_string(const DoubleBellOutcome& outcome) {
  return to_string(outcome.first) + "," + to_string(outcome.second);
}

std::optional<DoubleBellOutcome> parse_double_bell(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  const auto parse_one = [](std::string_view part) -> std::optional<BellLabel> {
    if (part == "phi+") return BellLabel::PhiPlus;
    if (part == "phi-") return BellLabel::PhiMinus;
    if (part == "psi+") return BellLabel::PsiPlus;
    if (part == "psi-") return BellLabel::PsiMinus;
    return std::nullopt;
  };
  const auto first = parse_one(text.substr(0, comma));
  const auto second = parse_one(text.substr(comma + 1));
  if (!first || !second) return std::nullopt;
  return DoubleBellOutcome{*first, *second};
}

bool is_phi_type(BellLabel label) {
  return label == BellLabel::PhiPlus || label == BellLabel::PhiMinus;
}

bool is_phi_type(const DoubleBellOutcome& outcome) { return is_phi_type(outcome.first); }

bool equal_labels(const DoubleBellOutcome& outcome) { return outcome.first == outcome.second; }

StateVector encode(LogicalBasisLabel label) {
  // Basis order |00>, |01>, |10>, |11>.
  switch (label) {
    case LogicalBasisLabel::Zdp0:
      return StateVector(2, {{0, 0}, {1, 0}, {0, 0}, {0, 0}});
    case LogicalBasisLabel::Zdp1:
      return StateVector(2, {{0, 0}, {0, 0}, {1, 0}, {0, 0}});
    case LogicalBasisLabel::XdpPlus:
      return StateVector(2, {{0, 0}, {kInvSqrt2, 0}, {kInvSqrt2, 0}, {0, 0}});
    case LogicalBasisLabel::XdpMinus:
      return StateVector(2, {{0, 0}, {kInvSqrt2, 0}, {-kInvSqrt2, 0}, {0, 0}});
  }
  throw Error("unknown logical basis label");
}

StateVector bell_state(BellLabel label) {
  switch (label) {
    case BellLabel::PhiPlus:
      return StateVector(2, {{kInvSqrt2, 0}, {0, 0}, {0, 0}, {kInvSqrt2, 0}});
    case BellLabel::PhiMinus:
      return StateVector(2, {{kInvSqrt2, 0}, {0, 0}, {0, 0}, {-kInvSqrt2, 0}});
    case BellLabel::PsiPlus:
      return StateVector(2, {{0, 0}, {kInvSqrt2, 0}, {kInvSqrt2, 0}, {0, 0}});
    case BellLabel::PsiMinus:
      return StateVector(2, {{0, 0}, {kInvSqrt2, 0}, {-kInvSqrt2, 0}, {0, 0}});
  }
  throw Error("unknown Bell label");
}

StateVector logical_bell(BellLabel label) {
  const StateVector z0 = encode(LogicalBasisLabel::Zdp0);
  const StateVector z1 = encode(LogicalBasisLabel::Zdp1);
  switch (label) {
    case BellLabel::PhiPlus:
      return superposition({{kInvSqrt2, tensor(z0, z0)}, {kInvSqrt2, tensor(z1, z1)}});
    case BellLabel::PhiMinus:
      return superposition({{kInvSqrt2, tensor(z0, z0)}, {-kInvSqrt2, tensor(z1, z1)}});
    case BellLabel::PsiPlus:
      return superposition({{kInvSqrt2, tensor(z0, z1)}, {kInvSqrt2, tensor(z1, z0)}});
    case BellLabel::PsiMinus:
      return superposition({{kInvSqrt2, tensor(z0, z1)}, {-kInvSqrt2, tensor(z1, z0)}});
  }
  throw Error("unknown Bell label");
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  const std::size_t total = a.num_qubits() + b.num_qubits();
  if (total > kMaxQubits) {
    throw CapacityExceeded("tensor product of " + std::to_string(a.num_qubits()) + " and " +
                           std::to_string(b.num_qubits()) + " qubits exceeds the " +
                           std::to_string(kMaxQubits) + "-qubit capacity");
  }
  std::vector<Amplitude> out(std::size_t{1} << total);
  const auto& av = a.amplitudes();
  const auto& bv = b.amplitudes();
  for (std::size_t ia = 0; ia < av.size(); ++ia) {
    const std::size_t base = ia << b.num_qubits();
    for (std::size_t ib = 0; ib < bv.size(); ++ib) out[base | ib] = av[ia] * bv[ib];
  }
  return StateVector(total, std::move(out));
}

StateVector superposition(std::initializer_list<std::pair<Amplitude, StateVector>> terms) {
  if (terms.size() == 0) throw Error("superposition needs at least one term");
  const std::size_t n = terms.begin()->second.num_qubits();
  std::vector<Amplitude> out(std::size_t{1} << n, Amplitude{0.0, 0.0});
  for (const auto& [coeff, state] : terms) {
    if (state.num_qubits() != n) {
      throw DimensionMismatch("superposition terms act on different register sizes");
    }
    const auto& amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) out[i] += coeff * amps[i];
  }
  return StateVector(n, std::move(out));  // constructor enforces normalization
}

StateVector reorder_qubits(const StateVector& s, std::span<const std::size_t> new_position_of) {
  const std::size_t n = s.num_qubits();
  if (new_position_of.size() != n) {
    throw DimensionMismatch("permutation length does not match the register size");
  }
  std::vector<bool> seen(n, false);
  for (const std::size_t p : new_position_of) {
    if (p >= n) throw IndexOutOfRange("permutation target out of range");
    if (seen[p]) throw Error("permutation repeats a target position");
    seen[p] = true;
  }
  std::vector<Amplitude> out(s.dim());
  for (std::size_t src = 0; src < s.dim(); ++src) {
    std::size_t dst = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (src & qubit_mask(n, j)) dst |= qubit_mask(n, new_position_of[j]);
    }
    out[dst] = s.amplitudes()[src];
  }
  return StateVector(n, std::move(out));
}

StateVector apply_physical_cnot(const StateVector& s, std::size_t control, std::size_t target) {
  check_qubit_index(s, control, "control");
  check_qubit_index(s, target, "target");
  if (control == target) throw ControlEqualsTarget("CNOT control and target coincide");
  const std::size_t n = s.num_qubits();
  const std::size_t cmask = qubit_mask(n, control);
  const std::size_t tmask = qubit_mask(n, target);
  std::vector<Amplitude> out(s.amplitudes());
  for (std::size_t b = 0; b < out.size(); ++b) {
    if ((b & cmask) && !(b & tmask)) std::swap(out[b], out[b | tmask]);
  }
  return StateVector(n, std::move(out));
}

StateVector apply_logical_cnot(const StateVector& s, QubitPair control, QubitPair target) {
  const std::size_t ids[4] = {control.first, control.second, target.first, target.second};
  for (const std::size_t q : ids) check_qubit_index(s, q, "logical CNOT");
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (ids[i] == ids[j]) {
        throw OverlappingPairs("logical CNOT pairs share qubit " + std::to_string(ids[i]));
      }
    }
  }
  StateVector out = apply_physical_cnot(s, control.first, target.first);
  return apply_physical_cnot(out, control.first, target.second);
}

Amplitude inner_product(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw DimensionMismatch("inner product of different register sizes");
  }
  Amplitude acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) {
    acc += std::conj(a.amplitudes()[i]) * b.amplitudes()[i];
  }
  return acc;
}

MeasurementBasis MeasurementBasis::computational(std::vector<std::size_t> qubits) {
  MeasurementBasis basis;
  const std::size_t k = qubits.size();
  basis.qubits = std::move(qubits);
  for (std::size_t i = 0; i < (std::size_t{1} << k); ++i) {
    basis.vectors.push_back(StateVector::basis_state(k, i));
    std::string label;
    for (std::size_t j = 0; j < k; ++j) label += (i & qubit_mask(k, j)) ? '1' : '0';
    basis.labels.push_back(label);
  }
  return basis;
}

MeasurementBasis MeasurementBasis::logical_z(std::size_t q0, std::size_t q1) {
  MeasurementBasis basis;
  basis.qubits = {q0, q1};
  basis.vectors = {StateVector::basis_state(2, 1), StateVector::basis_state(2, 2),
                   StateVector::basis_state(2, 0), StateVector::basis_state(2, 3)};
  basis.labels = {"0_dp", "1_dp", "00", "11"};
  return basis;
}

MeasurementBasis MeasurementBasis::logical_x(std::size_t q0, std::size_t q1) {
  MeasurementBasis basis;
  basis.qubits = {q0, q1};
  basis.vectors = {encode(LogicalBasisLabel::XdpPlus), encode(LogicalBasisLabel::XdpMinus),
                   bell_state(BellLabel::PhiPlus), bell_state(BellLabel::PhiMinus)};
  basis.labels = {"+_dp", "-_dp", "phi+", "phi-"};
  return basis;
}

MeasurementBasis MeasurementBasis::bell(std::size_t q0, std::size_t q1) {
  MeasurementBasis basis;
  basis.qubits = {q0, q1};
  basis.vectors = {bell_state(BellLabel::PhiPlus), bell_state(BellLabel::PhiMinus),
                   bell_state(BellLabel::PsiPlus), bell_state(BellLabel::PsiMinus)};
  basis.labels = {"phi+", "phi-", "psi+", "psi-"};
  return basis;
}

namespace {

void validate_basis(const StateVector& s, const MeasurementBasis& basis) {
  const std::size_t n = s.num_qubits();
  const std::size_t k = basis.qubits.size();
  if (k == 0 || k > n) throw IndexOutOfRange("measured subsystem size out of range");
  std::vector<bool> seen(n, false);
  for (const std::size_t q : basis.qubits) {
    if (q >= n) throw IndexOutOfRange("measured qubit out of range");
    if (seen[q]) throw Error("measured qubit listed twice");
    seen[q] = true;
  }
  const std::size_t dim = std::size_t{1} << k;
  if (basis.vectors.size() != dim) {
    throw NonOrthonormalBasis("basis has " + std::to_string(basis.vectors.size()) +
                              " vectors, expected " + std::to_string(dim) +
                              " to span the measured subsystem");
  }
  if (basis.labels.size() != basis.vectors.size()) {
    throw Error("basis labels do not match its vectors");
  }
  for (const auto& v : basis.vectors) {
    if (v.num_qubits() != k) {
      throw DimensionMismatch("basis vector register size does not match the measured subsystem");
    }
  }
  for (std::size_t i = 0; i < basis.vectors.size(); ++i) {
    for (std::size_t j = i; j < basis.vectors.size(); ++j) {
      const Amplitude ov = inner_product(basis.vectors[i], basis.vectors[j]);
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(ov - Amplitude{want, 0.0}) > kNormTol) {
        throw NonOrthonormalBasis("basis vectors " + std::to_string(i) + " and " +
                                  std::to_string(j) + " are not orthonormal");
      }
    }
  }
}

}  // namespace

MeasureResult measure(const StateVector& s, const MeasurementBasis& basis, Rng& rng) {
  validate_basis(s, basis);
  if (s.norm() < kNormTol) throw DegenerateState("cannot measure a near-zero state");

  const std::size_t n = s.num_qubits();
  const std::size_t k = basis.qubits.size();
  const std::size_t sub_dim = std::size_t{1} << k;
  const std::size_t rest_dim = std::size_t{1} << (n - k);

  // Precompute the register index for each (subsystem, rest) bit pattern.
  std::vector<std::size_t> sub_spread(sub_dim, 0);
  for (std::size_t u = 0; u < sub_dim; ++u) {
    for (std::size_t j = 0; j < k; ++j) {
      if (u & qubit_mask(k, j)) sub_spread[u] |= qubit_mask(n, basis.qubits[j]);
    }
  }
  std::vector<std::size_t> rest_qubits;
  for (std::size_t q = 0; q < n; ++q) {
    if (std::find(basis.qubits.begin(), basis.qubits.end(), q) == basis.qubits.end()) {
      rest_qubits.push_back(q);
    }
  }
  std::vector<std::size_t> rest_spread(rest_dim, 0);
  for (std::size_t w = 0; w < rest_dim; ++w) {
    for (std::size_t j = 0; j < rest_qubits.size(); ++j) {
      if (w & qubit_mask(n - k, j)) rest_spread[w] |= qubit_mask(n, rest_qubits[j]);
    }
  }

  // Project onto each outcome: coeff[i][w] = <v_i (x) w | s>.
  std::vector<std::vector<Amplitude>> coeff(sub_dim, std::vector<Amplitude>(rest_dim));
  std::vector<double> prob(sub_dim, 0.0);
  for (std::size_t i = 0; i < sub_dim; ++i) {
    const auto& v = basis.vectors[i].amplitudes();
    for (std::size_t w = 0; w < rest_dim; ++w) {
      Amplitude c{0.0, 0.0};
      for (std::size_t u = 0; u < sub_dim; ++u) {
        c += std::conj(v[u]) * s.amplitudes()[sub_spread[u] | rest_spread[w]];
      }
      coeff[i][w] = c;
      prob[i] += std::norm(c);
    }
  }
  double total = 0.0;
  for (const double p : prob) total += p;
  if (std::abs(total - 1.0) > kNormTol) {
    throw Error("measurement probabilities sum to " + std::to_string(total));
  }

  // Sample; zero-probability outcomes are never selected.
  std::size_t pick = 0;
  bool found = false;
  double u = rng.uniform_unit();
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < sub_dim; ++i) {
    if (prob[i] <= 1e-15) continue;
    last_positive = i;
    if (u < prob[i]) {
      pick = i;
      found = true;
      break;
    }
    u -= prob[i];
  }
  if (!found) pick = last_positive;

  // Collapse: |v_pick> (x) (projected rest), renormalized.
  const double scale = 1.0 / std::sqrt(prob[pick]);
  std::vector<Amplitude> post(s.dim(), Amplitude{0.0, 0.0});
  const auto& v = basis.vectors[pick].amplitudes();
  for (std::size_t w = 0; w < rest_dim; ++w) {
    const Amplitude c = coeff[pick][w] * scale;
    for (std::size_t uu = 0; uu < sub_dim; ++uu) {
      post[sub_spread[uu] | rest_spread[w]] = v[uu] * c;
    }
  }
  return MeasureResult{pick, StateVector(n, std::move(post)).canonical_phase()};
}

namespace {

LogicalBasisLabel logical_outcome(std::size_t outcome, LogicalBasisLabel zero,
                                  LogicalBasisLabel one) {
  if (outcome == 0) return zero;
  if (outcome == 1) return one;
  throw Error("state has support outside the dephasing-protected subspace");
}

}  // namespace

std::pair<LogicalBasisLabel, StateVector> measure_logical_z(const StateVector& s, std::size_t q0,
                                                            std::size_t q1, Rng& rng) {
  auto res = measure(s, MeasurementBasis::logical_z(q0, q1), rng);
  return {logical_outcome(res.outcome, LogicalBasisLabel::Zdp0, LogicalBasisLabel::Zdp1),
          std::move(res.post)};
}

std::pair<LogicalBasisLabel, StateVector> measure_logical_x(const StateVector& s, std::size_t q0,
                                                            std::size_t q1, Rng& rng) {
  auto res = measure(s, MeasurementBasis::logical_x(q0, q1), rng);
  return {logical_outcome(res.outcome, LogicalBasisLabel::XdpPlus, LogicalBasisLabel::XdpMinus),
          std::move(res.post)};
}

std::pair<BellLabel, StateVector> measure_bell(const StateVector& s, std::size_t q0,
                                               std::size_t q1, Rng& rng) {
  auto res = measure(s, MeasurementBasis::bell(q0, q1), rng);
  static constexpr BellLabel kOrder[4] = {BellLabel::PhiPlus, BellLabel::PhiMinus,
                                          BellLabel::PsiPlus, BellLabel::PsiMinus};
  return {kOrder[res.outcome], std::move(res.post)};
}

DoubleBellResult double_bell_measure(const StateVector& s, Rng& rng) {
  if (s.num_qubits() != 4) {
    throw WrongRegisterSize("double Bell measurement expects a 4-qubit register");
  }
  auto [first, mid] = measure_bell(s, 0, 2, rng);
  auto [second, post] = measure_bell(mid, 1, 3, rng);
  return DoubleBellResult{DoubleBellOutcome{first, second}, std::move(post)};
}

FactorResult factor_subsystem(const StateVector& s, std::span<const std::size_t> sub_qubits,
                              double tol) {
  const std::size_t n = s.num_qubits();
  const std::size_t k = sub_qubits.size();
  if (k == 0 || k >= n) throw IndexOutOfRange("factored subsystem size out of range");
  std::vector<bool> seen(n, false);
  for (const std::size_t q : sub_qubits) {
    if (q >= n) throw IndexOutOfRange("factored qubit out of range");
    if (seen[q]) throw Error("factored qubit listed twice");
    seen[q] = true;
  }

  const std::size_t sub_dim = std::size_t{1} << k;
  const std::size_t rest_dim = std::size_t{1} << (n - k);
  std::vector<std::size_t> sub_spread(sub_dim, 0);
  for (std::size_t u = 0; u < sub_dim; ++u) {
    for (std::size_t j = 0; j < k; ++j) {
      if (u & qubit_mask(k, j)) sub_spread[u] |= qubit_mask(n, sub_qubits[j]);
    }
  }
  std::vector<std::size_t> rest_qubits;
  for (std::size_t q = 0; q < n; ++q) {
    if (!seen[q]) rest_qubits.push_back(q);
  }
  std::vector<std::size_t> rest_spread(rest_dim, 0);
  for (std::size_t w = 0; w < rest_dim; ++w) {
    for (std::size_t j = 0; j < rest_qubits.size(); ++j) {
      if (w & qubit_mask(n - k, j)) rest_spread[w] |= qubit_mask(n, rest_qubits[j]);
    }
  }

  // Coefficient matrix C[u][w]; a product state makes it rank one.
  const auto at = [&](std::size_t u, std::size_t w) {
    return s.amplitudes()[sub_spread[u] | rest_spread[w]];
  };
  std::size_t u0 = 0, w0 = 0;
  double best = 0.0;
  for (std::size_t u = 0; u < sub_dim; ++u) {
    for (std::size_t w = 0; w < rest_dim; ++w) {
      const double mag = std::abs(at(u, w));
      if (mag > best) {
        best = mag;
        u0 = u;
        w0 = w;
      }
    }
  }
  if (best < tol) throw DegenerateState("cannot factor a near-zero state");

  const Amplitude pivot = at(u0, w0);
  std::vector<Amplitude> sub_raw(sub_dim), rest_raw(rest_dim);
  for (std::size_t u = 0; u < sub_dim; ++u) sub_raw[u] = at(u, w0);
  for (std::size_t w = 0; w < rest_dim; ++w) rest_raw[w] = at(u0, w);
  for (std::size_t u = 0; u < sub_dim; ++u) {
    for (std::size_t w = 0; w < rest_dim; ++w) {
      const Amplitude predicted = sub_raw[u] * rest_raw[w] / pivot;
      if (std::abs(at(u, w) - predicted) > tol) {
        throw FactorizationFailed("subsystem is entangled with the rest of the register");
      }
    }
  }

  const auto normalize = [](std::vector<Amplitude> raw, std::size_t qubits) {
    double acc = 0.0;
    for (const auto& a : raw) acc += std::norm(a);
    const double inv = 1.0 / std::sqrt(acc);
    for (auto& a : raw) a *= inv;
    return StateVector(qubits, std::move(raw)).canonical_phase();
  };
  return FactorResult{normalize(std::move(sub_raw), k), normalize(std::move(rest_raw), n - k)};
}

}  // namespace sqsum
