#pragma once

// Small dense statevector simulator, big-endian qubit order: qubit 0 is the
// most significant bit of the basis index, matching the convention that the
// leftmost factor of a tensor product acts on the first qubit. Includes the
// fixed 4-qubit gate realization of the separable 4x4 transform, amplitude
// encoding, shot sampling (magnitudes only — measurement loses signs), and
// a per-qubit Pauli noise channel.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "haarkit/matrix.hpp"
#include "haarkit/rng.hpp"

namespace haarkit {

using Complex = std::complex<double>;

struct StateVector {
  int n_qubits = 0;
  std::vector<Complex> amps;

  static StateVector basis(int n_qubits, std::size_t index = 0) {
    if (n_qubits < 1 || n_qubits > 24) {
      throw std::invalid_argument("StateVector: n_qubits out of range");
    }
    StateVector s;
    s.n_qubits = n_qubits;
    s.amps.assign(std::size_t{1} << n_qubits, Complex{});
    if (index >= s.amps.size()) throw std::invalid_argument("StateVector: basis index out of range");
    s.amps[index] = Complex{1.0, 0.0};
    return s;
  }

  double norm() const {
    double acc = 0.0;
    for (const Complex& a : amps) acc += std::norm(a);
    return std::sqrt(acc);
  }
};

enum class GateKind { I, H, X, Swap, CH };

struct Gate {
  GateKind kind = GateKind::I;
  int q0 = -1;  // single-qubit target; control for CH; first qubit for Swap
  int q1 = -1;  // CH target; second qubit for Swap

  static Gate i(int q) { return {GateKind::I, q, -1}; }
  static Gate h(int q) { return {GateKind::H, q, -1}; }
  static Gate x(int q) { return {GateKind::X, q, -1}; }
  static Gate swap(int a, int b) { return {GateKind::Swap, a, b}; }
  static Gate ch(int control, int target) { return {GateKind::CH, control, target}; }
};

using GateSeq = std::vector<Gate>;

enum class PauliKind { X, Y, Z };

namespace detail {

inline void check_qubit(const StateVector& s, int q, const char* what) {
  if (q < 0 || q >= s.n_qubits) {
    throw std::invalid_argument(std::string(what) + ": qubit index " + std::to_string(q) +
                                " out of range for " + std::to_string(s.n_qubits) +
                                " qubits");
  }
}

// Big-endian: qubit q owns bit (n_qubits - 1 - q) of the basis index.
inline std::size_t qubit_mask(int n_qubits, int q) {
  return std::size_t{1} << (n_qubits - 1 - q);
}

}  // namespace detail

inline void apply_gate(StateVector& state, const Gate& gate) {
  const std::size_t dim = state.amps.size();
  constexpr double inv_sqrt2 = 0.7071067811865475244;  // 1/sqrt(2)
  switch (gate.kind) {
    case GateKind::I: {
      detail::check_qubit(state, gate.q0, "apply_gate(I)");
      return;
    }
    case GateKind::H: {
      detail::check_qubit(state, gate.q0, "apply_gate(H)");
      const std::size_t mask = detail::qubit_mask(state.n_qubits, gate.q0);
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & mask) continue;
        const Complex a = state.amps[i];
        const Complex b = state.amps[i | mask];
        state.amps[i] = (a + b) * inv_sqrt2;
        state.amps[i | mask] = (a - b) * inv_sqrt2;
      }
      return;
    }
    case GateKind::X: {
      detail::check_qubit(state, gate.q0, "apply_gate(X)");
      const std::size_t mask = detail::qubit_mask(state.n_qubits, gate.q0);
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & mask) continue;
        std::swap(state.amps[i], state.amps[i | mask]);
      }
      return;
    }
    case GateKind::Swap: {
      detail::check_qubit(state, gate.q0, "apply_gate(Swap)");
      detail::check_qubit(state, gate.q1, "apply_gate(Swap)");
      if (gate.q0 == gate.q1) return;
      const std::size_t m0 = detail::qubit_mask(state.n_qubits, gate.q0);
      const std::size_t m1 = detail::qubit_mask(state.n_qubits, gate.q1);
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & m0) && !(i & m1)) std::swap(state.amps[i], state.amps[i ^ m0 ^ m1]);
      }
      return;
    }
    case GateKind::CH: {
      detail::check_qubit(state, gate.q0, "apply_gate(CH)");
      detail::check_qubit(state, gate.q1, "apply_gate(CH)");
      if (gate.q0 == gate.q1) {
        throw std::invalid_argument("apply_gate(CH): control equals target");
      }
      const std::size_t mc = detail::qubit_mask(state.n_qubits, gate.q0);
      const std::size_t mt = detail::qubit_mask(state.n_qubits, gate.q1);
      for (std::size_t i = 0; i < dim; ++i) {
        if (!(i & mc) || (i & mt)) continue;  // control |1> only, target bit low
        const Complex a = state.amps[i];
        const Complex b = state.amps[i | mt];
        state.amps[i] = (a + b) * inv_sqrt2;
        state.amps[i | mt] = (a - b) * inv_sqrt2;
      }
      return;
    }
  }
  throw std::invalid_argument("apply_gate: unknown gate kind");
}

inline void apply_gates(StateVector& state, const GateSeq& seq) {
  for (const Gate& g : seq) apply_gate(state, g);
}

inline void apply_pauli(StateVector& state, PauliKind pauli, int q) {
  detail::check_qubit(state, q, "apply_pauli");
  const std::size_t mask = detail::qubit_mask(state.n_qubits, q);
  const std::size_t dim = state.amps.size();
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & mask) continue;
    Complex& a = state.amps[i];
    Complex& b = state.amps[i | mask];
    switch (pauli) {
      case PauliKind::X:
        std::swap(a, b);
        break;
      case PauliKind::Y: {
        const Complex a0 = a;
        a = Complex{0.0, -1.0} * b;
        b = Complex{0.0, 1.0} * a0;
        break;
      }
      case PauliKind::Z:
        b = -b;
        break;
    }
  }
}

// Row-major flatten of a 4x4 patch, normalized to a unit statevector; the
// discarded L2 norm is returned so readouts can be rescaled.
inline std::pair<StateVector, double> encode_patch(const Matrix& patch) {
  if (patch.rows() != 4 || patch.cols() != 4) {
    throw std::invalid_argument("encode_patch: patch must be 4x4");
  }
  double norm2 = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) norm2 += patch(r, c) * patch(r, c);
  if (norm2 == 0.0) throw std::invalid_argument("encode_patch: all-zero patch");
  const double norm = std::sqrt(norm2);
  StateVector s;
  s.n_qubits = 4;
  s.amps.resize(16);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) s.amps[4 * r + c] = Complex{patch(r, c) / norm, 0.0};
  return {std::move(s), norm};
}

// The fixed 4-qubit realization of the separable 4x4 transform: per qubit
// pair (0,1) and (2,3), a swap, then H / X / controlled-H / X with the
// pair's first qubit as the single-qubit target and the control. With this
// qubit assignment the circuit's unitary equals the Kronecker square of the
// 4x4 transform exactly; see kHaarCircuitReadout.
inline GateSeq haar_circuit() {
  return {
      Gate::swap(0, 1), Gate::swap(2, 3),
      Gate::h(0), Gate::h(2),
      Gate::x(0), Gate::x(2),
      Gate::ch(0, 1), Gate::ch(2, 3),
      Gate::x(0), Gate::x(2),
  };
}

// Basis reordering between the circuit's output and the row-major
// coefficient layout: coefficient slot i reads amplitude
// kHaarCircuitReadout[i]. For haar_circuit() the map is the identity — the
// regression test re-derives it against the dense Kronecker oracle and
// fails if the circuit and this constant ever drift apart.
inline constexpr std::array<int, 16> kHaarCircuitReadout = {0, 1, 2,  3,  4,  5,  6,  7,
                                                            8, 9, 10, 11, 12, 13, 14, 15};

// Dense lift of one gate on n qubits, built directly from bit arithmetic —
// an independent code path from apply_gate, so the two can cross-check.
inline Matrix gate_lift(const Gate& gate, int n_qubits) {
  StateVector probe = StateVector::basis(n_qubits, 0);  // for index validation only
  const std::size_t dim = probe.amps.size();
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  Matrix lift(static_cast<int>(dim), static_cast<int>(dim));
  switch (gate.kind) {
    case GateKind::I: {
      detail::check_qubit(probe, gate.q0, "gate_lift(I)");
      for (std::size_t j = 0; j < dim; ++j) lift(j, j) = 1.0;
      break;
    }
    case GateKind::H: {
      detail::check_qubit(probe, gate.q0, "gate_lift(H)");
      const std::size_t mask = detail::qubit_mask(n_qubits, gate.q0);
      for (std::size_t j = 0; j < dim; ++j) {
        const bool hi = (j & mask) != 0;
        lift(static_cast<int>(j & ~mask), static_cast<int>(j)) = inv_sqrt2;
        lift(static_cast<int>(j | mask), static_cast<int>(j)) = hi ? -inv_sqrt2 : inv_sqrt2;
      }
      break;
    }
    case GateKind::X: {
      detail::check_qubit(probe, gate.q0, "gate_lift(X)");
      const std::size_t mask = detail::qubit_mask(n_qubits, gate.q0);
      for (std::size_t j = 0; j < dim; ++j) lift(static_cast<int>(j ^ mask), static_cast<int>(j)) = 1.0;
      break;
    }
    case GateKind::Swap: {
      detail::check_qubit(probe, gate.q0, "gate_lift(Swap)");
      detail::check_qubit(probe, gate.q1, "gate_lift(Swap)");
      const std::size_t m0 = detail::qubit_mask(n_qubits, gate.q0);
      const std::size_t m1 = detail::qubit_mask(n_qubits, gate.q1);
      for (std::size_t j = 0; j < dim; ++j) {
        std::size_t out = j;
        const bool b0 = (j & m0) != 0;
        const bool b1 = (j & m1) != 0;
        if (b0 != b1) out = j ^ m0 ^ m1;
        lift(static_cast<int>(out), static_cast<int>(j)) = 1.0;
      }
      break;
    }
    case GateKind::CH: {
      detail::check_qubit(probe, gate.q0, "gate_lift(CH)");
      detail::check_qubit(probe, gate.q1, "gate_lift(CH)");
      if (gate.q0 == gate.q1) {
        throw std::invalid_argument("gate_lift(CH): control equals target");
      }
      const std::size_t mc = detail::qubit_mask(n_qubits, gate.q0);
      const std::size_t mt = detail::qubit_mask(n_qubits, gate.q1);
      for (std::size_t j = 0; j < dim; ++j) {
        if (!(j & mc)) {
          lift(static_cast<int>(j), static_cast<int>(j)) = 1.0;
          continue;
        }
        const bool hi = (j & mt) != 0;
        lift(static_cast<int>(j & ~mt), static_cast<int>(j)) = inv_sqrt2;
        lift(static_cast<int>(j | mt), static_cast<int>(j)) = hi ? -inv_sqrt2 : inv_sqrt2;
      }
      break;
    }
  }
  return lift;
}

// Dense product of lifted gates in application order (all gate kinds here
// are real, so the unitary is a real orthogonal matrix).
inline Matrix circuit_unitary(const GateSeq& seq, int n_qubits = 4) {
  Matrix u = Matrix::identity(1 << n_qubits);
  for (const Gate& g : seq) u = gate_lift(g, n_qubits) * u;
  return u;
}

struct MeasurementResult {
  std::uint64_t shots = 0;
  std::vector<std::uint64_t> counts;
  std::vector<double> magnitudes;  // sqrt(counts / shots)
};

// Shot sampling by inverse-CDF walk over |amplitude|^2; deterministic given
// the generator state.
inline MeasurementResult measure(const StateVector& state, std::uint64_t shots,
                                 Xoshiro256StarStar& rng) {
  if (shots == 0) throw std::invalid_argument("measure: shots must be positive");
  const std::size_t dim = state.amps.size();
  std::vector<double> cdf(dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    acc += std::norm(state.amps[i]);
    cdf[i] = acc;
  }
  MeasurementResult result;
  result.shots = shots;
  result.counts.assign(dim, 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * acc;  // acc ~ 1; scaling absorbs rounding
    std::size_t idx = dim - 1;
    for (std::size_t i = 0; i < dim; ++i) {
      if (u < cdf[i]) {
        idx = i;
        break;
      }
    }
    ++result.counts[idx];
  }
  result.magnitudes.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    result.magnitudes[i] =
        std::sqrt(static_cast<double>(result.counts[i]) / static_cast<double>(shots));
  }
  return result;
}

enum class ReadoutMode { ExactStatevector, ShotMagnitudes };

namespace detail {

// Signed readout of a (possibly noisy) state: the real part is the unique
// linear choice that agrees with the exact coefficients on noiseless states,
// which are real throughout this circuit.
inline Matrix readout_real(const StateVector& state, double norm) {
  Matrix out(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      out(r, c) = state.amps[kHaarCircuitReadout[4 * r + c]].real() * norm;
  return out;
}

}  // namespace detail

// Full quantum pipeline for one 4x4 patch: encode, run the fixed circuit,
// read out. ExactStatevector returns signed coefficients; ShotMagnitudes
// samples `shots` measurements and returns sqrt(empirical probability) x
// norm — nonnegative, signs lost.
inline Matrix run_2d_haar_quantum(const Matrix& patch, ReadoutMode mode,
                                  std::uint64_t shots = 20000, std::uint64_t seed = 0) {
  auto [state, norm] = encode_patch(patch);
  apply_gates(state, haar_circuit());
  if (mode == ReadoutMode::ExactStatevector) return detail::readout_real(state, norm);
  if (shots == 0) {
    throw std::invalid_argument("run_2d_haar_quantum: shots must be positive");
  }
  Xoshiro256StarStar rng(seed);
  const MeasurementResult m = measure(state, shots, rng);
  Matrix out(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = m.magnitudes[kHaarCircuitReadout[4 * r + c]] * norm;
  return out;
}

enum class NoisePlacement { AfterCircuit, PerGate };

// One noisy run: each qubit independently suffers a uniformly chosen Pauli
// {X, Y, Z} with probability p (after the whole circuit by default, after
// every gate with PerGate). Stream order: qubits ascending, one uniform per
// qubit plus one integer draw when the error fires. Readout is the signed
// real part, rescaled.
inline Matrix pauli_noise_trial(const Matrix& patch, double p, std::uint64_t seed,
                                NoisePlacement placement = NoisePlacement::AfterCircuit) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("pauli_noise_trial: p must be in [0, 1]");
  }
  Xoshiro256StarStar rng(seed);
  auto [state, norm] = encode_patch(patch);
  const auto noise_round = [&](StateVector& s) {
    for (int q = 0; q < s.n_qubits; ++q) {
      if (rng.uniform() < p) {
        const auto which = static_cast<int>(rng.uniform_below(3));
        apply_pauli(s, static_cast<PauliKind>(which), q);
      }
    }
  };
  for (const Gate& g : haar_circuit()) {
    apply_gate(state, g);
    if (placement == NoisePlacement::PerGate) noise_round(state);
  }
  if (placement == NoisePlacement::AfterCircuit) noise_round(state);
  return detail::readout_real(state, norm);
}

inline double mse(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("mse: shape mismatch");
  }
  double acc = 0.0;
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) {
      const double d = a(r, c) - b(r, c);
      acc += d * d;
    }
  return acc / (static_cast<double>(a.rows()) * a.cols());
}

inline double max_abs_error(const Matrix& ideal, const Matrix& noisy) {
  return max_abs_diff(ideal, noisy);
}

}  // namespace haarkit
