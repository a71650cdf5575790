#include <doctest.h>

#include <cmath>
#include <map>

#include "sqsum/qcore.hpp"
#include "test_support.hpp"

using namespace sqsum;
using oracle::C;
using oracle::Ket;

namespace {

constexpr double kInv = 0.70710678118654752440;

Ket raw(const StateVector& s) {
  Ket out(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) out[i] = s.amplitudes()[i];
  return out;
}

// A fixed, fully complex 2-qubit state for oracle comparisons.
StateVector dense2() {
  return StateVector(2, {Amplitude{0.5, 0.1}, Amplitude{-0.3, 0.2}, Amplitude{0.1, -0.4},
                         Amplitude{0.6144102863722254, 0.25}});
}

}  // namespace

TEST_SUITE_BEGIN("qcore");

TEST_CASE("statevector constructor enforces its register contract") {
  CHECK_THROWS_AS(StateVector(0, {Amplitude{1.0, 0.0}}), Error);
  CHECK_THROWS_AS(StateVector(7, std::vector<Amplitude>(128, Amplitude{0.0, 0.0})), Error);
  CHECK_THROWS_AS(StateVector(2, {Amplitude{1.0, 0.0}}), DimensionMismatch);
  CHECK_THROWS_AS(StateVector(1, {Amplitude{0.0, 0.0}, Amplitude{0.0, 0.0}}), DegenerateState);
  CHECK_THROWS_AS(StateVector(1, {Amplitude{1.0, 0.0}, Amplitude{1.0, 0.0}}), Error);
  const StateVector ok = StateVector::basis_state(2, 3);
  CHECK(ok.dim() == 4);
  CHECK(ok.amplitude(3) == Amplitude{1.0, 0.0});
  CHECK_THROWS_AS(ok.amplitude(4), IndexOutOfRange);
  CHECK_THROWS_AS(StateVector::basis_state(2, 4), IndexOutOfRange);
}

TEST_CASE("qubit 0 is the leftmost ket symbol") {
  // |01> must live at binary index 01 = 1.
  const StateVector s = tensor(StateVector::basis_state(1, 0), StateVector::basis_state(1, 1));
  CHECK(s.amplitude(1) == Amplitude{1.0, 0.0});
  CHECK(encode(LogicalBasisLabel::Zdp0).amplitude(1) == Amplitude{1.0, 0.0});
  CHECK(encode(LogicalBasisLabel::Zdp1).amplitude(2) == Amplitude{1.0, 0.0});
}

TEST_CASE("phase-insensitive equality distinguishes global from relative phase") {
  const StateVector s = dense2();
  std::vector<Amplitude> rotated;
  for (const auto& a : s.amplitudes()) rotated.push_back(a * std::polar(1.0, 1.234));
  const StateVector t(2, rotated);
  CHECK(!s.approx_equal(t, 1e-9));
  CHECK(s.equal_up_to_phase(t, 1e-9));

  std::vector<Amplitude> relative = s.amplitudes();
  relative[3] *= std::polar(1.0, 0.5);
  CHECK(!s.equal_up_to_phase(StateVector(2, relative), 1e-6));

  // Canonical gauge: first nonzero amplitude becomes real positive.
  const StateVector canon = t.canonical_phase();
  CHECK(canon.amplitude(0).imag() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(canon.amplitude(0).real() > 0.0);
  CHECK(canon.approx_equal(s.canonical_phase(), 1e-12));
}

TEST_CASE("logical single-particle states match their two-qubit definitions") {
  const Ket k01 = oracle::basis(4, 1);
  const Ket k10 = oracle::basis(4, 2);
  CHECK(oracle::max_abs_diff(raw(encode(LogicalBasisLabel::Zdp0)), k01) == 0.0);
  CHECK(oracle::max_abs_diff(raw(encode(LogicalBasisLabel::Zdp1)), k10) == 0.0);
  CHECK(oracle::max_abs_diff(raw(encode(LogicalBasisLabel::XdpPlus)),
                             oracle::lincomb({{C{kInv, 0}, k01}, {C{kInv, 0}, k10}})) < 1e-15);
  CHECK(oracle::max_abs_diff(raw(encode(LogicalBasisLabel::XdpMinus)),
                             oracle::lincomb({{C{kInv, 0}, k01}, {C{-kInv, 0}, k10}})) < 1e-15);
}

TEST_CASE("bell states and logical pairs match brute-force constructions") {
  CHECK(oracle::max_abs_diff(
            raw(bell_state(BellLabel::PhiPlus)),
            oracle::lincomb({{C{kInv, 0}, oracle::basis(4, 0)}, {C{kInv, 0}, oracle::basis(4, 3)}})) <
        1e-15);
  CHECK(oracle::max_abs_diff(
            raw(bell_state(BellLabel::PsiMinus)),
            oracle::lincomb({{C{kInv, 0}, oracle::basis(4, 1)}, {C{-kInv, 0}, oracle::basis(4, 2)}})) <
        1e-15);

  // (|0_dp 0_dp> + |1_dp 1_dp>)/sqrt(2) spelled out over 4 physical qubits.
  const Ket z0 = oracle::basis(4, 1), z1 = oracle::basis(4, 2);
  CHECK(oracle::max_abs_diff(raw(logical_bell(BellLabel::PhiPlus)),
                             oracle::lincomb({{C{kInv, 0}, oracle::kron(z0, z0)},
                                              {C{kInv, 0}, oracle::kron(z1, z1)}})) < 1e-15);
  CHECK(oracle::max_abs_diff(raw(logical_bell(BellLabel::PsiMinus)),
                             oracle::lincomb({{C{kInv, 0}, oracle::kron(z0, z1)},
                                              {C{-kInv, 0}, oracle::kron(z1, z0)}})) < 1e-15);
}

TEST_CASE("tensor products agree with the kron oracle and respect capacity") {
  const StateVector a = dense2();
  const StateVector b = encode(LogicalBasisLabel::XdpMinus);
  CHECK(oracle::max_abs_diff(raw(tensor(a, b)), oracle::kron(raw(a), raw(b))) < 1e-15);
  const StateVector four = tensor(a, b);
  CHECK(four.num_qubits() == 4);
  CHECK_THROWS_AS(tensor(four, four), CapacityExceeded);
}

TEST_CASE("superposition builds normalized sums and rejects bad input") {
  const StateVector plus = superposition({{Amplitude{kInv, 0.0}, StateVector::basis_state(2, 1)},
                                          {Amplitude{kInv, 0.0}, StateVector::basis_state(2, 2)}});
  CHECK(plus.approx_equal(encode(LogicalBasisLabel::XdpPlus), 1e-15));
  CHECK_THROWS_AS(
      superposition({{Amplitude{1.0, 0.0}, StateVector::basis_state(1, 0)},
                     {Amplitude{1.0, 0.0}, StateVector::basis_state(2, 0)}}),
      DimensionMismatch);
  // Norm discipline: an unnormalized combination is a caller bug.
  CHECK_THROWS_AS(superposition({{Amplitude{1.0, 0.0}, StateVector::basis_state(2, 1)},
                                 {Amplitude{1.0, 0.0}, StateVector::basis_state(2, 2)}}),
                  Error);
  // Interference to zero is degenerate, not silently renormalized.
  CHECK_THROWS_AS(superposition({{Amplitude{1.0, 0.0}, StateVector::basis_state(2, 1)},
                                 {Amplitude{-1.0, 0.0}, StateVector::basis_state(2, 1)}}),
                  DegenerateState);
}

TEST_CASE("qubit reordering is the exact index scatter") {
  const StateVector joint = tensor(dense2(), encode(LogicalBasisLabel::XdpPlus));
  const std::size_t perm[4] = {0, 2, 1, 3};  // input qubit j -> output slot perm[j]
  const StateVector moved = reorder_qubits(joint, perm);
  const Ket in = raw(joint);
  Ket expect(16, C{0.0, 0.0});
  for (std::size_t i = 0; i < 16; ++i) {
    std::size_t target = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (oracle::bit_of(i, j, 4)) target |= std::size_t{1} << (4 - 1 - perm[j]);
    }
    expect[target] = in[i];
  }
  CHECK(oracle::max_abs_diff(raw(moved), expect) == 0.0);

  const std::size_t identity[4] = {0, 1, 2, 3};
  CHECK(reorder_qubits(joint, identity).approx_equal(joint, 0.0));
  const std::size_t bad[4] = {0, 1, 2, 2};
  CHECK_THROWS_AS(reorder_qubits(joint, bad), Error);
  const std::size_t short_perm[2] = {0, 1};
  CHECK_THROWS_AS(reorder_qubits(joint, short_perm), DimensionMismatch);
}

TEST_CASE("physical controlled-not matches the permutation oracle") {
  const StateVector joint = tensor(dense2(), dense2());
  for (std::size_t control = 0; control < 4; ++control) {
    for (std::size_t target = 0; target < 4; ++target) {
      if (control == target) {
        CHECK_THROWS_AS(apply_physical_cnot(joint, control, target), ControlEqualsTarget);
        continue;
      }
      CHECK(oracle::max_abs_diff(raw(apply_physical_cnot(joint, control, target)),
                                 oracle::cnot(raw(joint), control, target, 4)) == 0.0);
    }
  }
  CHECK_THROWS_AS(apply_physical_cnot(joint, 0, 4), IndexOutOfRange);
}

TEST_CASE("logical controlled-not implements the protected-subspace truth table") {
  const LogicalBasisLabel z[2] = {LogicalBasisLabel::Zdp0, LogicalBasisLabel::Zdp1};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const StateVector in = tensor(encode(z[a]), encode(z[b]));
      const StateVector out = apply_logical_cnot(in, {0, 1}, {2, 3});
      const StateVector expect = tensor(encode(z[a]), encode(z[a ^ b]));
      CHECK(out.approx_equal(expect, 1e-15));
      // Involution: applying it twice restores the input.
      CHECK(apply_logical_cnot(out, {0, 1}, {2, 3}).approx_equal(in, 1e-15));
    }
  }
  // Control |+_dp> on target |0_dp> entangles into the phi+ logical pair.
  const StateVector entangled = apply_logical_cnot(
      tensor(encode(LogicalBasisLabel::XdpPlus), encode(LogicalBasisLabel::Zdp0)), {0, 1}, {2, 3});
  CHECK(entangled.approx_equal(logical_bell(BellLabel::PhiPlus), 1e-15));
  // And the same primitive as two physical CNOTs from the control's first qubit.
  const Ket via_oracle = oracle::cnot(
      oracle::cnot(raw(tensor(encode(LogicalBasisLabel::XdpPlus), encode(LogicalBasisLabel::Zdp0))),
                   0, 2, 4),
      0, 3, 4);
  CHECK(oracle::max_abs_diff(raw(entangled), via_oracle) == 0.0);

  CHECK_THROWS_AS(apply_logical_cnot(entangled, {0, 1}, {1, 2}), OverlappingPairs);
}

TEST_CASE("inner product is conjugate-linear in its first argument") {
  const StateVector a = dense2();
  const StateVector b = encode(LogicalBasisLabel::XdpMinus);
  const Amplitude lhs = inner_product(a, b);
  CHECK(std::abs(lhs - oracle::dot(raw(a), raw(b))) < 1e-15);
  CHECK(std::abs(inner_product(b, a) - std::conj(lhs)) < 1e-15);
  CHECK(std::abs(inner_product(a, a) - Amplitude{1.0, 0.0}) < 1e-12);
  CHECK_THROWS_AS(inner_product(a, logical_bell(BellLabel::PhiPlus)), DimensionMismatch);
}

TEST_CASE("measurement bases are validated for orthonormality") {
  MeasurementBasis basis = MeasurementBasis::logical_z(0, 1);
  CHECK(basis.vectors.size() == 4);
  basis.vectors[1] = basis.vectors[0];  // now degenerate
  Rng rng(1);
  CHECK_THROWS_AS(measure(encode(LogicalBasisLabel::XdpPlus), basis, rng), NonOrthonormalBasis);
}

TEST_CASE("measurement frequencies follow the Born rule") {
  // P(outcome) for |+_dp> in the computational basis: 1/2 on |01>, 1/2 on |10>.
  Rng rng(20240817);
  std::map<std::size_t, int> freq;
  const StateVector plus = encode(LogicalBasisLabel::XdpPlus);
  const int shots = 4000;
  for (int i = 0; i < shots; ++i) {
    const auto res = measure(plus, MeasurementBasis::computational({0, 1}), rng);
    ++freq[res.outcome];
    // Collapse lands exactly on the measured basis state, canonical gauge.
    CHECK(res.post.approx_equal(StateVector::basis_state(2, res.outcome), 1e-12));
  }
  CHECK(freq.size() == 2);
  CHECK(std::abs(freq[1] / double(shots) - 0.5) < 0.03);
  CHECK(std::abs(freq[2] / double(shots) - 0.5) < 0.03);
}

TEST_CASE("probability-zero outcomes never fire") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto [label, post] = measure_bell(bell_state(BellLabel::PhiPlus), 0, 1, rng);
    CHECK(label == BellLabel::PhiPlus);
    CHECK(post.equal_up_to_phase(bell_state(BellLabel::PhiPlus), 1e-12));
  }
}

TEST_CASE("logical measurements are deterministic on their eigenstates") {
  Rng rng(3);
  for (const auto label : {LogicalBasisLabel::Zdp0, LogicalBasisLabel::Zdp1}) {
    const auto [out, post] = measure_logical_z(encode(label), 0, 1, rng);
    CHECK(out == label);
    CHECK(post.approx_equal(encode(label), 1e-12));
  }
  for (const auto label : {LogicalBasisLabel::XdpPlus, LogicalBasisLabel::XdpMinus}) {
    const auto [out, post] = measure_logical_x(encode(label), 0, 1, rng);
    CHECK(out == label);
    CHECK(post.equal_up_to_phase(encode(label), 1e-12));
  }
  // Outside the protected subspace the protocol-level wrappers must bail.
  CHECK_THROWS_AS(measure_logical_z(StateVector::basis_state(2, 0), 0, 1, rng), Error);
  CHECK_THROWS_AS(measure_logical_x(StateVector::basis_state(2, 3), 0, 1, rng), Error);
}

TEST_CASE("measuring half a logical pair collapses the partner") {
  Rng rng(11);
  int ones = 0;
  const int shots = 2000;
  for (int i = 0; i < shots; ++i) {
    const auto [first, post] = measure_logical_z(logical_bell(BellLabel::PsiPlus), 0, 1, rng);
    const auto [second, rest] = measure_logical_z(post, 2, 3, rng);
    CHECK(first != second);  // psi-type pairs anti-correlate in Z_dp
    if (first == LogicalBasisLabel::Zdp1) ++ones;
  }
  CHECK(std::abs(ones / double(shots) - 0.5) < 0.04);
}

TEST_CASE("double Bell measurement equals the joint sixteen-outcome projector") {
  // Oracle: P(i,j) = |<reordered B_i (x) B_j | psi>|^2 with qubits (0,2)(1,3).
  const StateVector psi = logical_bell(BellLabel::PhiMinus);
  const std::size_t perm[4] = {0, 2, 1, 3};
  std::map<std::string, double> expect;
  const BellLabel all[4] = {BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus,
                            BellLabel::PsiMinus};
  for (const auto first : all) {
    for (const auto second : all) {
      const StateVector projector = reorder_qubits(tensor(bell_state(first), bell_state(second)), perm);
      const double p = std::norm(inner_product(projector, psi));
      if (p > 1e-15) expect[to_string(DoubleBellOutcome{first, second})] = p;
    }
  }
  Rng rng(5);
  std::map<std::string, double> seen;
  const int shots = 4000;
  for (int i = 0; i < shots; ++i) {
    const auto res = double_bell_measure(psi, rng);
    seen[to_string(res.outcome)] += 1.0 / shots;
  }
  for (const auto& [key, value] : seen) {
    REQUIRE(expect.count(key));  // nothing outside the oracle's support
  }
  CHECK(oracle::total_variation(expect, seen) < 0.03);
  CHECK_THROWS_AS(double_bell_measure(encode(LogicalBasisLabel::Zdp0), rng), WrongRegisterSize);
}

TEST_CASE("factoring splits product states and rejects entangled cuts") {
  const StateVector a = dense2();
  const StateVector b = encode(LogicalBasisLabel::XdpMinus);
  const std::size_t front[2] = {0, 1};
  const auto split = factor_subsystem(tensor(a, b), front);
  CHECK(split.sub.equal_up_to_phase(a, 1e-12));
  CHECK(split.rest.equal_up_to_phase(b, 1e-12));

  // Factoring out the middle qubits permutes correctly: a (x) b with b at (1,2).
  const StateVector mixed = reorder_qubits(tensor(a, b), std::vector<std::size_t>{0, 3, 1, 2});
  const std::size_t middle[2] = {1, 2};
  const auto split2 = factor_subsystem(mixed, middle);
  CHECK(split2.sub.equal_up_to_phase(b, 1e-12));

  CHECK_THROWS_AS(factor_subsystem(logical_bell(BellLabel::PhiPlus), front),
                  FactorizationFailed);
}

TEST_CASE("labels serialize to their documented spellings") {
  CHECK(to_string(LogicalBasisLabel::Zdp0) == "0_dp");
  CHECK(to_string(LogicalBasisLabel::XdpMinus) == "-_dp");
  CHECK(to_string(BellLabel::PsiPlus) == "psi+");
  CHECK(to_string(DoubleBellOutcome{BellLabel::PhiMinus, BellLabel::PsiPlus}) == "phi-,psi+");
  const auto parsed = parse_double_bell("phi-,psi+");
  REQUIRE(parsed.has_value());
  CHECK((parsed->first == BellLabel::PhiMinus && parsed->second == BellLabel::PsiPlus));
  CHECK(!parse_double_bell("phi-").has_value());
  CHECK(!parse_double_bell("phi-,nope").has_value());
  CHECK(is_phi_type(BellLabel::PhiMinus));
  CHECK(!is_phi_type(DoubleBellOutcome{BellLabel::PsiPlus, BellLabel::PsiMinus}));
  CHECK(equal_labels(DoubleBellOutcome{BellLabel::PsiPlus, BellLabel::PsiPlus}));
  CHECK(!equal_labels(DoubleBellOutcome{BellLabel::PsiPlus, BellLabel::PsiMinus}));
}

TEST_SUITE_END();
