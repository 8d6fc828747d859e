#include "doctest.h"

#include <cstring>
#include <random>

#include "hector/inference.hpp"
#include "mock_backend.hpp"
#include "oracles.hpp"

using namespace hector;

TEST_CASE("stub weights are deterministic and bounded") {
  const auto a = StubModelSpec::from_seed(42);
  const auto b = StubModelSpec::from_seed(42);
  const auto c = StubModelSpec::from_seed(43);
  CHECK(a.weights == b.weights);
  CHECK(a.weights != c.weights);
  CHECK(a.weights.size() == 4 * 32 * 32 * 3);
  const double bound = std::sqrt(3.0 / a.input_dim());
  for (double w : a.weights) CHECK(std::abs(w) < bound);
  CHECK(a.weights == oracle::stub_weights(42, a.input_dim()));
}

TEST_CASE("black frame gives zero logits for any seed") {
  const auto f = oracle::solid_frame(64, 48, 0, 0, 0);
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 999ull})
    CHECK(stub_infer(f, StubModelSpec::from_seed(seed)) == LogitVector({0, 0, 0, 0}));
}

TEST_CASE("stub logits are bit-identical to the longhand oracle") {
  std::mt19937_64 rng(64);
  const auto f = oracle::random_frame(rng, 64, 64);
  const auto got = stub_infer(f, StubModelSpec::from_seed(42));
  const auto want = oracle::stub_logits(f, 42, 32);
  CHECK(std::memcmp(got.values().data(), want.data(), sizeof want) == 0);
}

TEST_CASE("frames equal after downsampling give equal logits") {
  // Swapping two pixels inside one 2x2 block leaves every block mean unchanged.
  std::mt19937_64 rng(65);
  const auto f = oracle::random_frame(rng, 64, 64);
  std::vector<std::uint8_t> px(f.pixels().begin(), f.pixels().end());
  for (int c = 0; c < 3; ++c) std::swap(px[c], px[3 + c]);
  const Frame g(0, 0, 64, 64, px);
  const auto spec = StubModelSpec::from_seed(7);
  CHECK(stub_infer(f, spec) == stub_infer(g, spec));
}

TEST_CASE("downsample handles sides that do not divide evenly") {
  std::mt19937_64 rng(66);
  const auto f = oracle::random_frame(rng, 10, 7);
  const auto x = downsample_normalized(f, 4);
  CHECK(x.size() == 48);
  for (double v : x) CHECK((v >= 0 && v <= 1));
  const auto tiny = downsample_normalized(oracle::solid_frame(1, 1, 255, 0, 51), 3);
  for (std::size_t i = 0; i < tiny.size(); i += 3) {
    CHECK(tiny[i] == 1.0);
    CHECK(tiny[i + 2] == doctest::Approx(0.2));
  }
}

TEST_CASE("wire request round-trips") {
  std::mt19937_64 rng(67);
  const auto f = oracle::random_frame(rng, 5, 3, 1234);
  const auto msg = wire::encode_request(f);
  CHECK(msg.size() == 4 + 16 + 45);
  CHECK(msg[0] == 61);
  const auto req = wire::decode_request(std::span(msg).subspan(4));
  CHECK(req.frame_index == 1234);
  CHECK(req.width == 5);
  CHECK(req.height == 3);
  CHECK(std::equal(req.rgb.begin(), req.rgb.end(), f.pixels().begin()));
}

TEST_CASE("wire response must be exactly four floats") {
  const auto msg = wire::encode_response({9, {1.5f, -2, 3, 4}});
  CHECK(msg.size() == 4 + wire::kResponseBodySize);
  const auto r = wire::decode_response(std::span(msg).subspan(4));
  CHECK(r.frame_index == 9);
  CHECK(r.logits[1] == -2.0f);

  auto short_body = std::vector<std::uint8_t>(msg.begin() + 4, msg.end() - 4);
  CHECK_THROWS_AS(wire::decode_response(short_body), ProtocolError);
  auto bad_magic = std::vector<std::uint8_t>(msg.begin() + 4, msg.end());
  bad_magic[3] = '2';
  CHECK_THROWS_AS(wire::decode_response(bad_magic), ProtocolError);
}

TEST_CASE("remote provider echoes server logits") {
  mock::Backend server(mock::Behaviour::Echo, {1, 2, 3, 4});
  RemoteProvider p(server.endpoint());
  const auto f = oracle::solid_frame(8, 8, 10, 20, 30, 77);
  CHECK(p.infer(f) == LogitVector({1, 2, 3, 4}));
  CHECK(p.infer(f) == LogitVector({1, 2, 3, 4}));
  CHECK(server.requests() == 2);
}

TEST_CASE("remote provider rejects a three-value reply") {
  mock::Backend server(mock::Behaviour::ThreeValues, {1, 2, 3, 4});
  RemoteProvider p(server.endpoint());
  CHECK_THROWS_AS(p.infer(oracle::solid_frame(4, 4, 1, 2, 3)), ProtocolError);
}

TEST_CASE("remote provider rejects a mismatched frame index") {
  mock::Backend server(mock::Behaviour::WrongIndex, {1, 2, 3, 4});
  RemoteProvider p(server.endpoint());
  CHECK_THROWS_AS(p.infer(oracle::solid_frame(4, 4, 1, 2, 3)), ProtocolError);
}

TEST_CASE("slow server times out and the provider recovers") {
  using namespace std::chrono_literals;
  mock::Backend server(mock::Behaviour::Slow, {1, 2, 3, 4}, 250ms);
  RemoteProvider p(server.endpoint(), 100ms);
  const auto t0 = net::Clock::now();
  CHECK_THROWS_AS(p.infer(oracle::solid_frame(4, 4, 1, 2, 3, 0)), TransportError);
  CHECK(net::Clock::now() - t0 < 200ms);
  CHECK_THROWS_AS(p.infer(oracle::solid_frame(4, 4, 1, 2, 3, 1)), TransportError);
}

TEST_CASE("unreachable server is a transport error") {
  std::uint16_t port = 0;
  {
    net::Listener l(net::Endpoint{"127.0.0.1", 0});
    port = l.port();
  }
  RemoteProvider p(net::Endpoint{"127.0.0.1", port});
  CHECK_THROWS_AS(p.infer(oracle::solid_frame(4, 4, 1, 2, 3)), TransportError);
}

TEST_CASE("provider descriptors") {
  CHECK(make_provider("stub:5")->name() == "stub:5");
  CHECK(make_provider("remote:127.0.0.1:9000")->name() == "remote:127.0.0.1:9000");
  CHECK_THROWS_AS(make_provider("stub:x"), DomainError);
  CHECK_THROWS_AS(make_provider("stub:"), DomainError);
  CHECK_THROWS_AS(make_provider("onnx:model.bin"), DomainError);
}

TEST_CASE("replay provider serves recorded logits") {
  ReplayProvider p({{3, LogitVector({1, 0, 0, 0})}});
  CHECK(p.infer(oracle::solid_frame(2, 2, 0, 0, 0, 3)) == LogitVector({1, 0, 0, 0}));
  CHECK_THROWS_AS(p.infer(oracle::solid_frame(2, 2, 0, 0, 0, 4)), TransportError);
}

TEST_CASE("endpoint parsing") {
  const auto a = net::parse_endpoint("9000");
  CHECK(a.host == "127.0.0.1");
  CHECK(a.port == 9000);
  const auto b = net::parse_endpoint("localhost:81");
  CHECK(b.host == "localhost");
  CHECK(b.port == 81);
}
