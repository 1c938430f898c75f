#include "pqgate/remote.hpp"

#include <exception>
#include <thread>

#include "pqgate/gates.hpp"

namespace pqgate::remote {

namespace {

StateVectord bell_phi_plus() {
  const double h = 1.0 / std::sqrt(2.0);
  VectorC<double> v(4);
  v << h, 0, 0, h;
  return StateVectord(std::move(v));
}

// Columns |-alpha> and sigma_z|-alpha>; measuring in this basis steers the
// receiver's half of Phi+ to |alpha> or sigma_z|alpha>.
GateMatrixd steering_basis(double alpha) {
  const double h = 1.0 / std::sqrt(2.0);
  const auto lo = std::polar(h, -alpha);
  const auto hi = std::polar(h, alpha);
  MatrixC<double> m(2, 2);
  m << lo, lo, hi, -hi;
  return GateMatrixd(std::move(m));
}

constexpr std::uint64_t kAliceStream = 0xA11CE;
constexpr std::uint64_t kBobStream = 0xB0B;

}  // namespace

EntangledPair::EntangledPair() : joint_(bell_phi_plus()) {}

int EntangledPair::sender_measure(double alpha, Rng& rng) {
  if (consumed()) throw ProtocolError("entangled pair already consumed");
  const StateVectord rotated = apply_gate(joint_, steering_basis(alpha).adjoint(), {0});
  auto [record, collapsed] = measure_qubit(rotated, 0, rng);
  joint_ = std::move(collapsed);
  outcome_ = record.outcome;
  return record.outcome;
}

StateVectord EntangledPair::receiver_half(int bit) const {
  if (!outcome_) throw ProtocolError("receiver half requested before the sender measured");
  const StateVectord half = postselect(joint_, {0}, {*outcome_}).state;
  return bit == 1 ? apply_gate(half, pauli_z<double>(), {0}) : half;
}

RspResult rsp_equatorial(double alpha, EntangledPair& pair, Rng& rng) {
  const int bit = pair.sender_measure(alpha, rng);
  return {bit, pair.receiver_half(bit)};
}

ResourceLedger& ResourceLedger::operator+=(const ResourceLedger& other) {
  ebits_used += other.ebits_used;
  cbits_sent += other.cbits_sent;
  program_qubits_delivered += other.program_qubits_delivered;
  rounds += other.rounds;
  prepared_ebits += other.prepared_ebits;
  prepared_cbits += other.prepared_cbits;
  return *this;
}

std::vector<StateVectord> teleport_program(const pqg::ProgramSpec& spec,
                                           std::span<EntangledPair> pairs, Rng& rng,
                                           ResourceLedger& ledger) {
  const auto n = static_cast<std::size_t>(spec.n_qubits());
  if (pairs.size() < n)
    throw ProtocolError("need " + std::to_string(n) + " entangled pairs, have " +
                        std::to_string(pairs.size()));
  for (std::size_t l = 0; l < n; ++l)
    if (pairs[l].consumed()) throw ProtocolError("entangled pair " + std::to_string(l) + " already consumed");

  std::vector<StateVectord> delivered;
  delivered.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double angle = std::ldexp(spec.alpha(), static_cast<int>(l) + 1);
    delivered.push_back(rsp_equatorial(angle, pairs[l], rng).receiver_state);
  }
  ledger.ebits_used += n;
  ledger.cbits_sent += n;
  ledger.program_qubits_delivered += n;
  ledger.prepared_ebits += n;
  ledger.prepared_cbits += n;
  return delivered;
}

// ---------------------------------------------------------------------------

EntanglementSource::EntanglementSource(int capacity) {
  detail::require(capacity >= 1, "entanglement source needs at least one pair");
  pairs_.resize(static_cast<std::size_t>(capacity));
}

EntangledPair& EntanglementSource::at(int round) {
  if (round < 1 || round > capacity())
    throw ProtocolError("no entangled pair for round " + std::to_string(round));
  return pairs_[static_cast<std::size_t>(round - 1)];
}

const EntangledPair& EntanglementSource::at(int round) const {
  if (round < 1 || round > capacity())
    throw ProtocolError("no entangled pair for round " + std::to_string(round));
  return pairs_[static_cast<std::size_t>(round - 1)];
}

int EntanglementSource::sender_measure(int round, double alpha, Rng& rng) {
  std::lock_guard lock(mutex_);
  return at(round).sender_measure(alpha, rng);
}

StateVectord EntanglementSource::receiver_half(int round, int bit) const {
  std::lock_guard lock(mutex_);
  return at(round).receiver_half(bit);
}

// ---------------------------------------------------------------------------

Alice::Alice(double alpha, int max_rounds, Mode mode, SessionKeys keys, Endpoint& link,
             EntanglementSource& source)
    : alpha_(alpha), max_rounds_(max_rounds), mode_(mode), keys_(keys), link_(link), source_(source) {
  detail::require(max_rounds >= 1 && max_rounds <= source.capacity(),
                  "max_rounds must be within the entanglement supply");
}

void Alice::announce(int round) {
  Rng rng(keys_.seed, {keys_.session, kAliceStream, static_cast<std::uint64_t>(round)});
  const int bit = source_.sender_measure(round, pqg::round_angle(alpha_, round), rng);
  link_.send({MessageKind::rsp_bit, static_cast<std::uint32_t>(round),
              static_cast<std::uint32_t>(bit)});
}

void Alice::run() {
  link_.send({MessageKind::hello, 0, kProtocolVersion});
  if (mode_ == Mode::unidirectional) {
    for (int round = 1; round <= max_rounds_; ++round) announce(round);
    link_.send({MessageKind::done, static_cast<std::uint32_t>(max_rounds_), 0});
  } else {
    int round = 1;
    announce(round);
    for (;;) {
      const WireMessage msg = link_.receive();
      if (msg.kind != MessageKind::round_result || msg.round != static_cast<std::uint32_t>(round))
        throw ProtocolError("expected ROUND_RESULT for round " + std::to_string(round));
      if (msg.payload == 0) {
        link_.send({MessageKind::done, msg.round, 0});
        break;
      }
      if (round == max_rounds_) {
        link_.send({MessageKind::done, msg.round, 1});
        break;
      }
      announce(++round);
    }
  }
  link_.close();
}

Bob::Bob(StateVectord data, int max_rounds, Mode mode, SessionKeys keys, Endpoint& link,
         const EntanglementSource& source)
    : data_(std::move(data)), max_rounds_(max_rounds), mode_(mode), keys_(keys), link_(link),
      source_(source) {
  detail::require(data_.n_qubits() == 1, "Bob's data register must be one qubit");
  detail::require(max_rounds >= 1, "max_rounds must be at least 1");
}

BobResult Bob::run() {
  ResourceLedger ledger;
  StateVectord current = data_;
  int rounds_used = 0;
  try {
    const WireMessage hello = link_.receive();
    if (hello.kind != MessageKind::hello || hello.payload != kProtocolVersion)
      throw ProtocolError("session must open with HELLO version " + std::to_string(kProtocolVersion));

    int expected = 1;
    for (;;) {
      const WireMessage msg = link_.receive();
      if (msg.kind == MessageKind::done) break;
      if (msg.kind != MessageKind::rsp_bit || msg.round != static_cast<std::uint32_t>(expected))
        throw ProtocolError("expected RSP_BIT for round " + std::to_string(expected));
      if (expected > max_rounds_) throw ProtocolError("sender exceeded max_rounds");
      ++ledger.prepared_ebits;
      ++ledger.prepared_cbits;
      if (rounds_used == 0) {
        const int round = expected;
        const StateVectord program = source_.receiver_half(round, static_cast<int>(msg.payload));
        Rng rng(keys_.seed, {keys_.session, kBobStream, static_cast<std::uint64_t>(round)});
        auto step = pqg::elementary_step(current, program, rng);
        current = std::move(step.data);
        ++ledger.ebits_used;
        ++ledger.cbits_sent;
        ++ledger.program_qubits_delivered;
        ++ledger.rounds;
        if (step.outcome == 0) rounds_used = round;
        if (mode_ == Mode::feedback)
          link_.send({MessageKind::round_result, msg.round, static_cast<std::uint32_t>(step.outcome)});
      }
      ++expected;
    }
  } catch (const std::exception& e) {
    throw SessionError(std::string("remote session failed: ") + e.what(), ledger);
  }
  link_.close();
  const bool ok = rounds_used != 0;
  return {std::move(current), ledger, ok ? rounds_used : max_rounds_ + 1, ok};
}

// ---------------------------------------------------------------------------

BobResult remote_control_session(const StateVectord& data, const SessionConfig& config,
                                 const Transport& transport, TransportLog* log) {
  EntanglementSource source(config.max_rounds);

  if (transport.kind == Transport::Kind::in_process) {
    InProcessLink link(log);
    Alice alice(config.alpha, config.max_rounds, config.mode, config.keys, link.alice(), source);
    Bob bob(data, config.max_rounds, config.mode, config.keys, link.bob(), source);
    if (config.mode == Mode::unidirectional) {
      alice.run();
      return bob.run();
    }
    std::exception_ptr alice_error;
    std::thread sender([&] {
      try {
        alice.run();
      } catch (...) {
        alice_error = std::current_exception();
        link.alice().close();
      }
    });
    std::optional<BobResult> result;
    std::exception_ptr bob_error;
    try {
      result = bob.run();
    } catch (...) {
      bob_error = std::current_exception();
      link.bob().close();
    }
    sender.join();
    if (bob_error) std::rethrow_exception(bob_error);
    if (alice_error) std::rethrow_exception(alice_error);
    return std::move(*result);
  }

  std::optional<TcpListener> own;
  TcpListener* listener = transport.listener;
  if (listener == nullptr) listener = &own.emplace(transport.listen);
  const std::string address = transport.connect.empty() ? listener->address() : transport.connect;
  std::exception_ptr alice_error;
  std::thread sender([&] {
    try {
      auto endpoint = listener->accept(Party::alice, log);
      Alice(config.alpha, config.max_rounds, config.mode, config.keys, *endpoint, source).run();
    } catch (...) {
      alice_error = std::current_exception();
    }
  });
  std::optional<BobResult> result;
  std::exception_ptr bob_error;
  try {
    auto endpoint = TcpEndpoint::connect(address, Party::bob, log);
    result = Bob(data, config.max_rounds, config.mode, config.keys, *endpoint, source).run();
  } catch (...) {
    bob_error = std::current_exception();
    listener->interrupt();
  }
  sender.join();
  if (bob_error) std::rethrow_exception(bob_error);
  if (alice_error) std::rethrow_exception(alice_error);
  return std::move(*result);
}

}  // namespace pqgate::remote
