#ifndef PQGATE_PQG_HPP
#define PQGATE_PQG_HPP

#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include "pqgate/gates.hpp"
#include "pqgate/qstate.hpp"
#include "pqgate/rng.hpp"

// Probabilistic and approximate programmable gates for the U_alpha family.
//
// Register layout for every joint state in this module: qubit 0 is the data
// qubit, qubits 1..N are the program register in program order.
namespace pqgate::pqg {

inline constexpr int kDefaultMaxRounds = 64;
// One data qubit plus the program must fit the 16-qubit register.
inline constexpr int kMaxProgramQubits = kMaxQubits - 1;

class ProgramSpec {
 public:
  ProgramSpec(double alpha, int n_qubits);

  double alpha() const { return alpha_; }
  int n_qubits() const { return n_qubits_; }
  // 2^-N; derived, never stored.
  double epsilon() const { return std::ldexp(1.0, -n_qubits_); }

 private:
  double alpha_;
  int n_qubits_;
};

/// (e^{i alpha}|0> + e^{-i alpha}|1>) / sqrt(2)
StateVectord program_qubit(double alpha);

/// Stored program (x)_{l=1..N} |2^l alpha>.
StateVectord program_state(const ProgramSpec& spec);

/// Program consumed by the gate circuits:(x)_{l=0..N-1} |2^l alpha>.
/// Its qubit l is the program for attempt l+1 of the elementary gate, so
/// gate_program(ProgramSpec(a, N)) == program_state(ProgramSpec(a / 2, N)).
StateVectord gate_program(const ProgramSpec& spec);

/// Product over l = 1..N of a C-NOT from the data qubit onto program qubit l,
/// additionally controlled on program qubits 1..l-1. Acts on N+1 qubits.
GateMatrixd cascade_unitary(int n_program_qubits);

/// Applies the cascade gate-by-gate to a joint (data, program) state.
StateVectord apply_cascade(const StateVectord& joint);

/// U_alpha^{(2^N - 1) dagger} = U_{(1 - 2^N) alpha}, the heralded-failure action.
GateMatrixd failure_unitary(const ProgramSpec& spec);

struct GateOutcome {
  bool success = false;
  StateVectord data_state;
  std::vector<int> program_outcome_bits;
  // Born probability of this exact program outcome string.
  double attempts_weight = 0.0;
  // 1-based index of the first program qubit that read 0 (N on failure):
  // the number of elementary attempts the outcome corresponds to.
  int attempts = 0;
};

GateOutcome run_probabilistic(const StateVectord& data, const ProgramSpec& spec, Rng& rng);

// ---------------------------------------------------------------------------
// Measured (several-step) form

/// Angle of the round-k program qubit of the repeat-until-success loop.
inline double round_angle(double alpha, int round) { return std::ldexp(alpha, round - 1); }

struct ElementaryStep {
  int outcome = 0;
  double probability = 0.0;
  StateVectord data;
};

/// One elementary gate: C-NOT from data onto |program_angle>, then measure
/// the program qubit.
ElementaryStep elementary_step(const StateVectord& data, double program_angle, Rng& rng);

/// Same, with an explicitly supplied one-qubit program state.
ElementaryStep elementary_step(const StateVectord& data, const StateVectord& program, Rng& rng);

/// The elementary gate with the program outcome forced to `outcome`.
ElementaryStep elementary_step(const StateVectord& data, double program_angle, int outcome);

struct RusResult {
  StateVectord state;
  // Rounds executed; max_rounds + 1 flags an exhausted session.
  int rounds_used = 0;
  int qubits_consumed = 0;

  bool succeeded(int max_rounds) const { return rounds_used <= max_rounds; }
};

RusResult run_repeat_until_success(const StateVectord& data, double alpha, Rng& rng,
                                   int max_rounds = kDefaultMaxRounds);

/// Exact data-register output of the measured scheme truncated at N rounds,
/// outcomes averaged over (every branch enumerated, no sampling).
DensityMatrixd truncated_rus_output(const StateVectord& data, const ProgramSpec& spec);

/// Data-register state of the unitary cascade with the program register
/// ignored (partial trace over qubits 1..N).
DensityMatrixd cascade_data_output(const StateVectord& data, const ProgramSpec& spec);

// ---------------------------------------------------------------------------
// Approximate gate

struct ChannelBranch {
  double probability;
  GateMatrixd unitary;
};

/// rho -> sum_i p_i V_i rho V_i^dagger
class MixedUnitaryChannel {
 public:
  explicit MixedUnitaryChannel(std::vector<ChannelBranch> branches);

  const std::vector<ChannelBranch>& branches() const { return branches_; }
  int arity() const { return branches_.front().unitary.arity(); }

  DensityMatrixd apply(const DensityMatrixd& rho) const;

 private:
  std::vector<ChannelBranch> branches_;
};

/// (1 - eps) U_alpha rho U_alpha^dagger + eps U~ rho U~^dagger with U~ = U_{(1-2^N) alpha}.
MixedUnitaryChannel approx_channel(const ProgramSpec& spec);

struct MonteCarlo {
  std::size_t trials;
  std::uint64_t seed;
};
struct ClosedForm {};
using FidelityMethod = std::variant<MonteCarlo, ClosedForm>;

struct FidelityEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for the closed form
  std::size_t trials = 0;
};

/// Average over Haar-random |psi> of <psi|U^dagger E(|psi><psi|) U|psi>.
/// Closed form for qubits: sum_i p_i (|Tr(U^dagger V_i)|^2 + 2) / 6.
FidelityEstimate avg_gate_fidelity(const MixedUnitaryChannel& channel, const GateMatrixd& target,
                                   const FidelityMethod& method);

}  // namespace pqgate::pqg

#endif  // PQGATE_PQG_HPP
