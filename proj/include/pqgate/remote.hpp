#ifndef PQGATE_REMOTE_HPP
#define PQGATE_REMOTE_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqgate/pqg.hpp"
#include "pqgate/qstate.hpp"
#include "pqgate/rng.hpp"
#include "pqgate/transport.hpp"

// Unidirectional remote control: Alice, who knows alpha, remote-prepares the
// program qubits of the repeat-until-success gate in Bob's lab over shared
// Bell pairs, one classical bit per qubit. Bob runs the gate on his data
// without ever learning alpha.
namespace pqgate::remote {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Phi+ = (|00> + |11>)/sqrt(2); qubit 0 is the sender's half, qubit 1 the
/// receiver's. A pair is consumed by the sender's measurement.
class EntangledPair {
 public:
  EntangledPair();

  const StateVectord& joint() const { return joint_; }
  bool consumed() const { return outcome_.has_value(); }
  std::optional<int> outcome() const { return outcome_; }

  /// Sender side: measures her half in {|-alpha>, sigma_z|-alpha>} and
  /// returns the bit to announce.
  int sender_measure(double alpha, Rng& rng);

  /// Receiver side: his half after the sender's measurement, corrected by
  /// sigma_z when `bit` is 1.
  StateVectord receiver_half(int bit) const;

 private:
  StateVectord joint_;
  std::optional<int> outcome_;
};

struct RspResult {
  int classical_bit = 0;
  StateVectord receiver_state;
};

/// Remote preparation of the equatorial state |alpha> over one pair:
/// costs one ebit and one classical bit.
RspResult rsp_equatorial(double alpha, EntangledPair& pair, Rng& rng);

struct ResourceLedger {
  // Rounds Bob actually ran: the ebits, announced bits and program qubits he
  // consumed.
  std::uint64_t ebits_used = 0;
  std::uint64_t cbits_sent = 0;
  std::uint64_t program_qubits_delivered = 0;
  std::uint64_t rounds = 0;
  // Everything Alice prepared and announced, including speculative rounds
  // Bob never needed.
  std::uint64_t prepared_ebits = 0;
  std::uint64_t prepared_cbits = 0;

  ResourceLedger& operator+=(const ResourceLedger& other);
  friend bool operator==(const ResourceLedger&, const ResourceLedger&) = default;
};

/// Remote-prepares the stored program (x)_{l=1..N} |2^l alpha> over
/// pairs[0..N-1].
std::vector<StateVectord> teleport_program(const pqg::ProgramSpec& spec,
                                           std::span<EntangledPair> pairs, Rng& rng,
                                           ResourceLedger& ledger);

/// Pool of Bell pairs shared in advance, indexed by round. Stands in for the
/// physical entanglement both labs hold; thread-safe.
class EntanglementSource {
 public:
  explicit EntanglementSource(int capacity);

  int capacity() const { return static_cast<int>(pairs_.size()); }
  int sender_measure(int round, double alpha, Rng& rng);
  StateVectord receiver_half(int round, int bit) const;

 private:
  EntangledPair& at(int round);
  const EntangledPair& at(int round) const;

  mutable std::mutex mutex_;
  std::vector<EntangledPair> pairs_;
};

enum class Mode {
  unidirectional,  // Alice streams every round; Bob never talks back
  feedback,        // Bob reports each round; Alice stops after success
};

struct SessionKeys {
  std::uint64_t seed = 0;
  std::uint64_t session = 0;
};

class SessionError : public std::runtime_error {
 public:
  SessionError(const std::string& what, ResourceLedger ledger)
      : std::runtime_error(what), ledger_(ledger) {}
  const ResourceLedger& ledger() const { return ledger_; }

 private:
  ResourceLedger ledger_;
};

/// Sender state machine. Knows alpha; never sees Bob's data.
class Alice {
 public:
  Alice(double alpha, int max_rounds, Mode mode, SessionKeys keys, Endpoint& link,
        EntanglementSource& source);
  void run();

 private:
  void announce(int round);

  double alpha_;
  int max_rounds_;
  Mode mode_;
  SessionKeys keys_;
  Endpoint& link_;
  EntanglementSource& source_;
};

struct BobResult {
  StateVectord final_state;
  ResourceLedger ledger;
  // Rounds until success; max_rounds + 1 when every round failed.
  int rounds_used = 0;
  bool succeeded = false;
};

/// Receiver state machine. Holds the data qubit; never sees alpha.
class Bob {
 public:
  Bob(StateVectord data, int max_rounds, Mode mode, SessionKeys keys, Endpoint& link,
      const EntanglementSource& source);
  BobResult run();

 private:
  StateVectord data_;
  int max_rounds_;
  Mode mode_;
  SessionKeys keys_;
  Endpoint& link_;
  const EntanglementSource& source_;
};

struct Transport {
  enum class Kind { in_process, tcp } kind = Kind::in_process;
  std::string listen = "127.0.0.1:0";  // tcp only
  std::string connect;                 // tcp only; empty = the bound listen address
  // tcp only: accept on this listener instead of binding one per session.
  // Batches should share one; a fresh port per session leaves a TIME_WAIT
  // socket behind each time and drains the ephemeral range.
  TcpListener* listener = nullptr;
};

struct SessionConfig {
  double alpha = 0.0;
  int max_rounds = pqg::kDefaultMaxRounds;
  Mode mode = Mode::unidirectional;
  SessionKeys keys;
};

/// Runs one session end to end. In-process unidirectional sessions run the
/// two parties back to back on the calling thread (Alice needs nothing from
/// Bob); other combinations run them on two threads.
BobResult remote_control_session(const StateVectord& data, const SessionConfig& config,
                                 const Transport& transport, TransportLog* log = nullptr);

}  // namespace pqgate::remote

#endif  // PQGATE_REMOTE_HPP
