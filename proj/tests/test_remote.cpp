#include <doctest.h>

#include <cmath>
#include <numbers>
#include <thread>

#include "oracles.hpp"
#include "pqgate/parallel.hpp"
#include "pqgate/remote.hpp"
#include "pqgate/stats.hpp"

using namespace pqgate;
using namespace pqgate::remote;
using oracle::cd;

namespace {

constexpr double kPi = std::numbers::pi;

void check_parse_error(const std::string& frame, std::size_t offset) {
  try {
    deserialize(frame);
    FAIL("accepted malformed frame: " << frame);
  } catch (const ParseError& e) {
    CHECK_MESSAGE(e.offset() == offset, frame);
  }
}

// Receiver's half of Phi+ after the sender projects onto `basis_vector`,
// from the explicit 4-amplitude state.
Eigen::Vector2cd steered(const Eigen::Vector2cd& basis_vector) {
  const Eigen::Vector4cd phi(1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0));
  Eigen::Vector2cd out;
  out[0] = std::conj(basis_vector[0]) * phi[0] + std::conj(basis_vector[1]) * phi[2];
  out[1] = std::conj(basis_vector[0]) * phi[1] + std::conj(basis_vector[1]) * phi[3];
  return out.normalized();
}

}  // namespace

TEST_CASE("wire frames round-trip bit-exactly") {
  const WireMessage rsp{MessageKind::rsp_bit, 2, 1};
  CHECK(serialize(rsp) == "RSP_BIT 2 1\n");
  CHECK(deserialize(serialize(rsp)) == rsp);
  const WireMessage hello{MessageKind::hello, 0, kProtocolVersion};
  CHECK(serialize(hello) == "HELLO 0 1\n");
  CHECK(deserialize(serialize(hello)) == hello);
  CHECK(serialize({MessageKind::round_result, 7, 0}) == "ROUND_RESULT 7 0\n");
  CHECK(serialize({MessageKind::done, 4294967295u, 1}) == "DONE 4294967295 1\n");
  CHECK(deserialize("DONE 4294967295 1\n").round == 4294967295u);

  Rng rng(1);
  const MessageKind kinds[] = {MessageKind::hello, MessageKind::rsp_bit, MessageKind::round_result, MessageKind::done};
  for (int k = 0; k < 5000; ++k) {
    WireMessage m{kinds[rng() % 4], static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng() % 2)};
    if (m.kind == MessageKind::hello) m.payload = static_cast<std::uint32_t>(rng());
    CHECK(deserialize(serialize(m)) == m);
  }
}

TEST_CASE("malformed frames name the failing byte") {
  check_parse_error("RSP_BIT 2 1", 11);        // truncated: no LF
  check_parse_error("", 0);
  check_parse_error("RSP_BIT 2", 9);
  check_parse_error("BOGUS 1 1\n", 0);
  check_parse_error("RSP_BIT 02 1\n", 8);      // leading zero
  check_parse_error("RSP_BIT 2 x\n", 10);
  check_parse_error("RSP_BIT 2 2\n", 10);      // bit out of range
  check_parse_error("RSP_BIT -2 1\n", 8);
  check_parse_error("RSP_BIT 4294967296 1\n", 8);
  check_parse_error("RSP_BIT  2 1\n", 8);
  check_parse_error("RSP_BIT 2 1\nX", 12);     // trailing bytes
  check_parse_error("rsp_bit 2 1\n", 0);
  check_parse_error("RSP_BIT 2 1 \n", 11);
  CHECK_NOTHROW(deserialize("HELLO 0 42\n"));
}

TEST_CASE("random byte strings either parse or throw ParseError") {
  Rng rng(99);
  const std::string alphabet = "HELORSP_BITUNDA 0123456789\n\r-x";
  for (int k = 0; k < 20000; ++k) {
    std::string s;
    const auto len = rng() % 24;
    for (std::uint64_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    try {
      const auto m = deserialize(s);
      CHECK(serialize(m) == s);
    } catch (const ParseError&) {
    }
  }
}

TEST_CASE("frame reader") {
  FrameReader reader;
  reader.feed("HELLO 0 1\nRSP_B");
  CHECK(reader.next() == WireMessage{MessageKind::hello, 0, 1});
  CHECK_FALSE(reader.next().has_value());
  CHECK(reader.pending() == 5);
  reader.feed("IT 1 0\nDONE 1 0\n");
  CHECK(reader.next() == WireMessage{MessageKind::rsp_bit, 1, 0});
  CHECK(reader.next() == WireMessage{MessageKind::done, 1, 0});
  CHECK(reader.pending() == 0);

  FrameReader bad;
  bad.feed("HELLO 0 1\nRSP_BIT 1 7\n");
  CHECK(bad.next().has_value());
  try {
    bad.next();
    FAIL("accepted bad bit");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 20);
  }
}

TEST_CASE("in-process link") {
  TransportLog log;
  InProcessLink link(&log);
  link.alice().send({MessageKind::hello, 0, 1});
  link.alice().send({MessageKind::rsp_bit, 1, 1});
  link.bob().send({MessageKind::round_result, 1, 0});
  CHECK(link.bob().receive() == WireMessage{MessageKind::hello, 0, 1});
  CHECK(link.bob().receive() == WireMessage{MessageKind::rsp_bit, 1, 1});
  CHECK(link.alice().receive() == WireMessage{MessageKind::round_result, 1, 0});
  link.alice().close();
  CHECK_THROWS_AS(link.bob().receive(), TransportError);
  CHECK(log.count_from(Party::alice) == 2);
  CHECK(log.count_from(Party::bob) == 1);
  CHECK(log.entries().size() == 3);
  log.clear();
  CHECK(log.entries().empty());

  // A blocked receive wakes up when the peer sends from another thread.
  InProcessLink threaded;
  std::thread sender([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    threaded.alice().send({MessageKind::done, 3, 0});
  });
  CHECK(threaded.bob().receive() == WireMessage{MessageKind::done, 3, 0});
  sender.join();
}

TEST_CASE("TCP endpoints") {
  CHECK(split_address("127.0.0.1:80") == std::pair<std::string, std::uint16_t>{"127.0.0.1", 80});
  CHECK_THROWS_AS(split_address("127.0.0.1"), TransportError);
  CHECK_THROWS_AS(split_address("127.0.0.1:99999"), TransportError);
  CHECK_THROWS_AS(split_address(":80"), TransportError);
  CHECK_THROWS_AS(TcpListener("example.com:0"), TransportError);

  TransportLog log;
  TcpListener listener("127.0.0.1:0");
  const auto address = listener.address();
  CHECK(address.rfind("127.0.0.1:", 0) == 0);
  CHECK(split_address(address).second != 0);

  std::unique_ptr<TcpEndpoint> server;
  std::thread acceptor([&] { server = listener.accept(Party::alice, &log); });
  auto client = TcpEndpoint::connect(address, Party::bob, &log);
  acceptor.join();
  REQUIRE(server);
  for (std::uint32_t r = 1; r <= 200; ++r) server->send({MessageKind::rsp_bit, r, r % 2});
  client->send({MessageKind::round_result, 1, 1});
  for (std::uint32_t r = 1; r <= 200; ++r) CHECK(client->receive() == WireMessage{MessageKind::rsp_bit, r, r % 2});
  CHECK(server->receive() == WireMessage{MessageKind::round_result, 1, 1});
  server->close();
  CHECK_THROWS_AS(client->receive(), TransportError);
  CHECK(log.count_from(Party::alice) == 200);
  CHECK(log.count_from(Party::bob) == 1);

  TcpListener idle("127.0.0.1:0");
  std::thread waiter([&] { CHECK_THROWS_AS(idle.accept(Party::alice, nullptr), TransportError); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  idle.interrupt();
  waiter.join();
}

TEST_CASE("remote state preparation of equatorial states") {
  SUBCASE("alpha = 0 yields |+> on both outcomes") {
    bool seen[2] = {false, false};
    Rng rng(1);
    while (!(seen[0] && seen[1])) {
      EntangledPair pair;
      const auto r = rsp_equatorial(0.0, pair, rng);
      seen[r.classical_bit] = true;
      CHECK(oracle::fidelity(r.receiver_state.amplitudes(), Eigen::Vector2cd(1, 1) / std::sqrt(2.0)) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("the steering basis oracle: bit b leaves sigma_z^b |alpha>") {
    for (double a : {0.0, 0.4, kPi / 3, 2.5}) {
      const Eigen::Vector2cd minus_alpha = oracle::equatorial(-a);
      const Eigen::Vector2cd flipped = oracle::diag2(1, -1) * minus_alpha;
      const Eigen::Vector2cd target = oracle::equatorial(a);
      CHECK(oracle::fidelity(steered(minus_alpha), target) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(oracle::fidelity(oracle::diag2(1, -1) * steered(flipped), target) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("alpha = pi/3: fidelity 1 on every trial; unbiased bits") {
    Rng rng(2);
    const int trials = 100000;
    std::size_t ones = 0;
    const auto target = pqg::program_qubit(kPi / 3);
    double worst = 0;
    for (int k = 0; k < trials; ++k) {
      EntangledPair pair;
      const auto r = rsp_equatorial(kPi / 3, pair, rng);
      ones += static_cast<std::size_t>(r.classical_bit);
      worst = std::max(worst, std::abs(1 - state_fidelity(r.receiver_state, target)));
      CHECK(pair.consumed());
    }
    CHECK(worst < kExactTol);
    CHECK(stats::proportion_check(ones, trials, 0.5).passed);
  }
  SUBCASE("pairs are single-use") {
    Rng rng(3);
    EntangledPair pair;
    CHECK_THROWS_AS(pair.receiver_half(0), ProtocolError);
    rsp_equatorial(0.2, pair, rng);
    CHECK_THROWS_AS(rsp_equatorial(0.2, pair, rng), ProtocolError);
  }
}

TEST_CASE("teleporting a stored program") {
  Rng rng(4);
  const pqg::ProgramSpec spec(0.77, 3);
  std::vector<EntangledPair> pairs(4);
  ResourceLedger ledger;
  const auto delivered = teleport_program(spec, pairs, rng, ledger);
  CHECK(ledger.ebits_used == 3);
  CHECK(ledger.cbits_sent == 3);
  CHECK(ledger.program_qubits_delivered == 3);
  CHECK_FALSE(pairs[3].consumed());
  REQUIRE(delivered.size() == 3);
  auto joint = delivered[0];
  for (std::size_t l = 1; l < delivered.size(); ++l) joint = tensor(joint, delivered[l]);
  CHECK(state_fidelity(joint, pqg::program_state(spec)) == doctest::Approx(1.0).epsilon(1e-10));
  for (std::size_t l = 0; l < 3; ++l)
    CHECK(state_fidelity(delivered[l], pqg::program_qubit(std::ldexp(0.77, static_cast<int>(l) + 1))) ==
          doctest::Approx(1.0).epsilon(1e-12));

  std::vector<EntangledPair> short_supply(2);
  CHECK_THROWS_AS(teleport_program(spec, short_supply, rng, ledger), ProtocolError);
  CHECK_THROWS_AS(teleport_program(spec, pairs, rng, ledger), ProtocolError);
  CHECK_THROWS_AS(pqg::ProgramSpec(0.77, 0), std::domain_error);
  CHECK(ledger.ebits_used == 3);
}

TEST_CASE("entanglement source bounds") {
  CHECK_THROWS_AS(EntanglementSource(0), std::domain_error);
  EntanglementSource source(2);
  Rng rng(1);
  CHECK_THROWS_AS(source.sender_measure(0, 0.1, rng), ProtocolError);
  CHECK_THROWS_AS(source.sender_measure(3, 0.1, rng), ProtocolError);
  const int bit = source.sender_measure(1, 0.1, rng);
  CHECK(state_fidelity(source.receiver_half(1, bit), pqg::program_qubit(0.1)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(source.sender_measure(1, 0.1, rng), ProtocolError);
}

TEST_CASE("single sessions") {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const double a = 2 * kPi * rng.uniform();
    const auto d = haar_random_qubit(rng);
    const Eigen::VectorXcd target = oracle::rot_z(a) * d.amplitudes();
    for (Mode mode : {Mode::unidirectional, Mode::feedback}) {
      TransportLog log;
      const SessionConfig cfg{a, 16, mode, {11, static_cast<std::uint64_t>(k)}};
      const auto out = remote_control_session(d, cfg, Transport{}, &log);
      CHECK(out.ledger.ebits_used == out.ledger.cbits_sent);
      CHECK(out.ledger.rounds == out.ledger.program_qubits_delivered);
      if (out.succeeded) {
        CHECK(out.rounds_used == static_cast<int>(out.ledger.rounds));
        CHECK(oracle::fidelity(out.final_state.amplitudes(), target) > 1 - kComposedTol);
      }
      if (mode == Mode::unidirectional) {
        CHECK(log.count_from(Party::bob) == 0);
        CHECK(out.ledger.prepared_cbits == 16);
        CHECK(log.count_from(Party::alice) == 18);  // HELLO, 16 RSP_BIT, DONE
      } else {
        CHECK(log.count_from(Party::bob) == out.ledger.rounds);
        CHECK(out.ledger.prepared_cbits == out.ledger.cbits_sent);
      }
    }
  }
}

TEST_CASE("feedback and one-way sessions see the same rounds under the same keys") {
  Rng rng(6);
  for (std::uint64_t k = 0; k < 200; ++k) {
    const auto d = haar_random_qubit(rng);
    const double a = rng.uniform() * 3;
    const auto one_way = remote_control_session(d, {a, 64, Mode::unidirectional, {3, k}}, Transport{});
    const auto fed_back = remote_control_session(d, {a, 64, Mode::feedback, {3, k}}, Transport{});
    CHECK(one_way.rounds_used == fed_back.rounds_used);
    CHECK(one_way.ledger.ebits_used == fed_back.ledger.ebits_used);
    CHECK((one_way.final_state.amplitudes() - fed_back.final_state.amplitudes()).norm() == 0.0);
  }
}

TEST_CASE("socket sessions reproduce in-process sessions") {
  Rng rng(7);
  Transport tcp;
  tcp.kind = Transport::Kind::tcp;
  ResourceLedger local_total, socket_total;
  for (std::uint64_t k = 0; k < 300; ++k) {
    const auto d = haar_random_qubit(rng);
    const double a = rng.uniform() * 3;
    const Mode mode = k % 3 == 0 ? Mode::feedback : Mode::unidirectional;
    TransportLog socket_log;
    const auto local = remote_control_session(d, {a, 32, mode, {19, k}}, Transport{});
    const auto remote = remote_control_session(d, {a, 32, mode, {19, k}}, tcp, &socket_log);
    CHECK(local.ledger == remote.ledger);
    CHECK(local.rounds_used == remote.rounds_used);
    CHECK((local.final_state.amplitudes() - remote.final_state.amplitudes()).norm() == 0.0);
    if (mode == Mode::unidirectional) CHECK(socket_log.count_from(Party::bob) == 0);
    local_total += local.ledger;
    socket_total += remote.ledger;
  }
  CHECK(local_total == socket_total);
}

TEST_CASE("a batch of sessions can share one listener") {
  TcpListener listener("127.0.0.1:0");
  Transport tcp;
  tcp.kind = Transport::Kind::tcp;
  tcp.listener = &listener;
  Rng rng(10);
  for (std::uint64_t k = 0; k < 500; ++k) {
    const auto d = haar_random_qubit(rng);
    const auto local = remote_control_session(d, {1.1, 64, Mode::unidirectional, {23, k}}, Transport{});
    const auto remote = remote_control_session(d, {1.1, 64, Mode::unidirectional, {23, k}}, tcp);
    CHECK(local.ledger == remote.ledger);
  }
}

TEST_CASE("exhausted sessions are flagged") {
  Rng rng(8);
  int exhausted = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto out = remote_control_session(haar_random_qubit(rng), {0.3, 1, Mode::unidirectional, {1, k}}, Transport{});
    CHECK(out.ledger.ebits_used == 1);
    if (!out.succeeded) {
      ++exhausted;
      CHECK(out.rounds_used == 2);
    }
  }
  CHECK(exhausted > 0);
}

TEST_CASE("protocol violations surface as session errors with a ledger snapshot") {
  EntanglementSource source(4);
  const auto d = basis_state<double>(1, 0);

  SUBCASE("wrong protocol version") {
    InProcessLink link;
    link.alice().send({MessageKind::hello, 0, 9});
    Bob bob(d, 4, Mode::unidirectional, {1, 1}, link.bob(), source);
    CHECK_THROWS_AS(bob.run(), SessionError);
  }
  SUBCASE("skipped round") {
    InProcessLink link;
    Rng rng(1);
    const int bit = source.sender_measure(1, 0.2, rng);
    link.alice().send({MessageKind::hello, 0, kProtocolVersion});
    link.alice().send({MessageKind::rsp_bit, 1, static_cast<std::uint32_t>(bit)});
    link.alice().send({MessageKind::rsp_bit, 3, 0});
    Bob bob(d, 4, Mode::unidirectional, {1, 1}, link.bob(), source);
    try {
      bob.run();
      FAIL("accepted a skipped round");
    } catch (const SessionError& e) {
      CHECK(e.ledger().prepared_cbits == 1);
      CHECK(e.ledger().ebits_used == e.ledger().cbits_sent);
    }
  }
  SUBCASE("peer disappears mid-stream") {
    InProcessLink link;
    link.alice().send({MessageKind::hello, 0, kProtocolVersion});
    link.alice().close();
    Bob bob(d, 4, Mode::unidirectional, {1, 1}, link.bob(), source);
    CHECK_THROWS_AS(bob.run(), SessionError);
  }
  SUBCASE("Alice rejects unexpected feedback") {
    InProcessLink link;
    link.bob().send({MessageKind::round_result, 5, 0});
    Alice alice(0.2, 4, Mode::feedback, {1, 1}, link.alice(), source);
    CHECK_THROWS_AS(alice.run(), ProtocolError);
  }
  SUBCASE("max_rounds must fit the entanglement supply") {
    InProcessLink link;
    CHECK_THROWS_AS(Alice(0.2, 5, Mode::unidirectional, {1, 1}, link.alice(), source), std::domain_error);
  }
  SUBCASE("connecting to a closed port fails cleanly") {
    Transport tcp;
    tcp.kind = Transport::Kind::tcp;
    tcp.connect = "127.0.0.1:1";
    CHECK_THROWS(remote_control_session(d, {0.2, 4, Mode::unidirectional, {1, 1}}, tcp));
  }
}

TEST_CASE("remote delivery is indistinguishable from local programs (KS over 10^5 sessions)") {
  const std::size_t sessions = 100000;
  struct Row {
    int local_rounds = 0;
    int remote_rounds = 0;
    double local_fid = 0;
    double remote_fid = 0;
  };
  const auto rows = parallel_map<Row>(sessions, [](std::size_t k) {
    Rng rng(31, {k});
    const double a = 2 * kPi * rng.uniform();
    const auto d = haar_random_qubit(rng);
    Rng local_rng(32, {k});
    const auto local = pqg::run_repeat_until_success(d, a, local_rng);
    const auto remote = remote_control_session(d, {a, 64, Mode::unidirectional, {33, k}}, Transport{});
    const Eigen::VectorXcd target = oracle::rot_z(a) * d.amplitudes();
    return Row{local.rounds_used, remote.rounds_used, oracle::fidelity(local.state.amplitudes(), target),
               oracle::fidelity(remote.final_state.amplitudes(), target)};
  });
  std::vector<int> local, remote;
  double worst = 0, ebits = 0;
  for (const auto& r : rows) {
    local.push_back(r.local_rounds);
    remote.push_back(r.remote_rounds);
    worst = std::max({worst, 1 - r.local_fid, 1 - r.remote_fid});
    ebits += r.remote_rounds;
  }
  const auto ks = stats::ks_two_sample(local, remote);
  CHECK_FALSE(ks.separated);
  CHECK(worst < kComposedTol);
  CHECK(std::abs(ebits / sessions - 2.0) <= 3 * std::sqrt(2.0 / sessions));
  MESSAGE("KS statistic " << ks.statistic << " (critical " << ks.critical << ")");
}
