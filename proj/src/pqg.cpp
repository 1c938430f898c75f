#include "pqgate/pqg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pqgate/parallel.hpp"

namespace pqgate::pqg {

ProgramSpec::ProgramSpec(double alpha, int n_qubits) : alpha_(alpha), n_qubits_(n_qubits) {
  detail::require(std::isfinite(alpha), "alpha must be finite");
  detail::require(n_qubits >= 1 && n_qubits <= kMaxProgramQubits,
                  "program size N must be in [1, " + std::to_string(kMaxProgramQubits) + "], got " +
                      std::to_string(n_qubits));
}

StateVectord program_qubit(double alpha) {
  return qubit_state<double>(std::polar(1.0, alpha), std::polar(1.0, -alpha));
}

namespace {

StateVectord doubling_product(double first_angle, int n) {
  StateVectord out = program_qubit(first_angle);
  for (int l = 1; l < n; ++l) out = tensor(out, program_qubit(std::ldexp(first_angle, l)));
  return out;
}

std::vector<int> ladder_targets(int l) {
  // data qubit, program qubits 1..l-1 as controls; program qubit l as target
  std::vector<int> targets(static_cast<std::size_t>(l) + 1);
  std::iota(targets.begin(), targets.end(), 0);
  return targets;
}

}  // namespace

StateVectord program_state(const ProgramSpec& spec) {
  return doubling_product(2.0 * spec.alpha(), spec.n_qubits());
}

StateVectord gate_program(const ProgramSpec& spec) {
  return doubling_product(spec.alpha(), spec.n_qubits());
}

GateMatrixd cascade_unitary(int n_program_qubits) {
  detail::require(n_program_qubits >= 1 && n_program_qubits <= kMaxProgramQubits,
                  "cascade needs N in [1, 15]");
  const int n = n_program_qubits + 1;
  MatrixC<double> total = MatrixC<double>::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (int l = 1; l <= n_program_qubits; ++l) {
    const auto targets = ladder_targets(l);
    total = embed(multi_controlled(pauli_x<double>(), l), targets, n).matrix() * total;
  }
  return GateMatrixd(std::move(total));
}

StateVectord apply_cascade(const StateVectord& joint) {
  const int n_program = joint.n_qubits() - 1;
  detail::require(n_program >= 1, "cascade needs a data qubit and at least one program qubit");
  StateVectord out = joint;
  for (int l = 1; l <= n_program; ++l) {
    const auto targets = ladder_targets(l);
    out = apply_gate(out, multi_controlled(pauli_x<double>(), l), targets);
  }
  return out;
}

GateMatrixd failure_unitary(const ProgramSpec& spec) {
  return u_alpha((1.0 - std::ldexp(1.0, spec.n_qubits())) * spec.alpha());
}

GateOutcome run_probabilistic(const StateVectord& data, const ProgramSpec& spec, Rng& rng) {
  detail::require(data.n_qubits() == 1, "data register must be one qubit");
  const int n = spec.n_qubits();
  StateVectord joint = apply_cascade(tensor(data, gate_program(spec)));

  std::vector<int> bits;
  std::vector<int> program_qubits;
  double weight = 1.0;
  for (int q = 1; q <= n; ++q) {
    auto [record, collapsed] = measure_qubit(joint, q, rng);
    joint = std::move(collapsed);
    bits.push_back(record.outcome);
    program_qubits.push_back(q);
    weight *= record.probability;
  }
  auto data_out = postselect(joint, program_qubits, bits).state;

  int attempts = n;
  for (int j = 0; j < n; ++j) {
    if (bits[j] == 0) {
      attempts = j + 1;
      break;
    }
  }
  const bool failed = std::all_of(bits.begin(), bits.end(), [](int b) { return b == 1; });
  return GateOutcome{!failed, std::move(data_out), std::move(bits), weight, attempts};
}

// ---------------------------------------------------------------------------

namespace {

StateVectord cnot_onto_program(const StateVectord& data, const StateVectord& program) {
  return apply_gate(tensor(data, program), cnot<double>(), {0, 1});
}

}  // namespace

ElementaryStep elementary_step(const StateVectord& data, double program_angle, Rng& rng) {
  return elementary_step(data, program_qubit(program_angle), rng);
}

ElementaryStep elementary_step(const StateVectord& data, const StateVectord& program, Rng& rng) {
  detail::require(data.n_qubits() == 1 && program.n_qubits() == 1,
                  "elementary gate takes one data and one program qubit");
  const StateVectord joint = cnot_onto_program(data, program);
  auto [record, collapsed] = measure_qubit(joint, 1, rng);
  return {record.outcome, record.probability, postselect(collapsed, {1}, {record.outcome}).state};
}

ElementaryStep elementary_step(const StateVectord& data, double program_angle, int outcome) {
  detail::require(data.n_qubits() == 1, "data register must be one qubit");
  const auto branch = postselect(cnot_onto_program(data, program_qubit(program_angle)), {1}, {outcome});
  return {outcome, branch.probability, branch.state};
}

RusResult run_repeat_until_success(const StateVectord& data, double alpha, Rng& rng,
                                   int max_rounds) {
  detail::require(max_rounds >= 1, "max_rounds must be at least 1");
  StateVectord current = data;
  for (int round = 1; round <= max_rounds; ++round) {
    auto step = elementary_step(current, round_angle(alpha, round), rng);
    current = std::move(step.data);
    if (step.outcome == 0) return {std::move(current), round, round};
  }
  return {std::move(current), max_rounds + 1, max_rounds};
}

DensityMatrixd truncated_rus_output(const StateVectord& data, const ProgramSpec& spec) {
  MatrixC<double> rho = MatrixC<double>::Zero(2, 2);
  StateVectord wrong = data;
  double weight = 1.0;
  for (int round = 1; round <= spec.n_qubits(); ++round) {
    const double angle = round_angle(spec.alpha(), round);
    const auto ok = elementary_step(wrong, angle, 0);
    rho += weight * ok.probability * ok.data.amplitudes() * ok.data.amplitudes().adjoint();
    const auto bad = elementary_step(wrong, angle, 1);
    weight *= bad.probability;
    wrong = bad.data;
  }
  rho += weight * wrong.amplitudes() * wrong.amplitudes().adjoint();
  rho = (rho + rho.adjoint()).eval() * 0.5;
  return DensityMatrixd(std::move(rho));
}

DensityMatrixd cascade_data_output(const StateVectord& data, const ProgramSpec& spec) {
  detail::require(data.n_qubits() == 1, "data register must be one qubit");
  return reduced_density(apply_cascade(tensor(data, gate_program(spec))), {0});
}

// ---------------------------------------------------------------------------

MixedUnitaryChannel::MixedUnitaryChannel(std::vector<ChannelBranch> branches)
    : branches_(std::move(branches)) {
  detail::require(!branches_.empty(), "channel needs at least one branch");
  double total = 0.0;
  for (const auto& b : branches_) {
    detail::require(b.probability >= 0.0, "branch probabilities must be non-negative");
    detail::require(b.unitary.arity() == branches_.front().unitary.arity(),
                    "channel branches must share arity");
    total += b.probability;
  }
  detail::require(std::abs(total - 1.0) <= kExactTol, "branch probabilities must sum to 1");
}

DensityMatrixd MixedUnitaryChannel::apply(const DensityMatrixd& rho) const {
  detail::require(rho.n_qubits() == arity(), "channel and state dimensions differ");
  MatrixC<double> out = MatrixC<double>::Zero(rho.dim(), rho.dim());
  for (const auto& b : branches_)
    out += b.probability * b.unitary.matrix() * rho.entries() * b.unitary.matrix().adjoint();
  out = (out + out.adjoint()).eval() * 0.5;
  return DensityMatrixd(std::move(out));
}

MixedUnitaryChannel approx_channel(const ProgramSpec& spec) {
  const double eps = spec.epsilon();
  return MixedUnitaryChannel({{1.0 - eps, u_alpha(spec.alpha())}, {eps, failure_unitary(spec)}});
}

FidelityEstimate avg_gate_fidelity(const MixedUnitaryChannel& channel, const GateMatrixd& target,
                                   const FidelityMethod& method) {
  detail::require(channel.arity() == 1 && target.arity() == 1,
                  "average gate fidelity is implemented for single-qubit channels");

  // Relative operators U^dagger V_i.
  std::vector<std::pair<double, Matrix2cd>> relative;
  for (const auto& b : channel.branches())
    relative.emplace_back(b.probability, target.matrix().adjoint() * b.unitary.matrix());

  if (std::holds_alternative<ClosedForm>(method)) {
    double f = 0.0;
    for (const auto& [p, m] : relative) f += p * (std::norm(m.trace()) + 2.0) / 6.0;
    return {f, 0.0, 0};
  }

  const auto& mc = std::get<MonteCarlo>(method);
  detail::require(mc.trials >= 1, "Monte Carlo fidelity needs at least one trial");
  const auto samples = parallel_map<double>(mc.trials, [&](std::size_t k) {
    Rng rng(mc.seed, {k});
    const Vector2cd psi = haar_random_qubit(rng).amplitudes();
    double f = 0.0;
    for (const auto& [p, m] : relative) f += p * std::norm(psi.dot(m * psi));
    return f;
  });
  double sum = 0.0;
  for (double s : samples) sum += s;
  const double mean = sum / static_cast<double>(mc.trials);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double n = static_cast<double>(mc.trials);
  const double se = mc.trials > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return {mean, se, mc.trials};
}

}  // namespace pqgate::pqg
