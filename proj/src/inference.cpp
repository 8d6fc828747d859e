#include "hector/inference.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>

namespace hector {

StubModelSpec StubModelSpec::from_seed(std::uint64_t seed, int input_side) {
  if (input_side < 1) throw DomainError("stub input side must be >= 1");
  StubModelSpec spec{seed, input_side, {}};
  const std::size_t dim = spec.input_dim();
  // Uniform(-a, a) with a = sqrt(3 / dim) gives unit-variance logits for
  // unit-variance inputs. Raw engine output is used because the standard
  // distributions are not portable across library implementations.
  const double amplitude = std::sqrt(3.0 / static_cast<double>(dim));
  std::mt19937_64 engine(seed);
  spec.weights.resize(kNumClasses * dim);
  for (double& w : spec.weights) {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    w = (2.0 * u - 1.0) * amplitude;
  }
  return spec;
}

std::vector<double> downsample_normalized(const Frame& frame, int side) {
  const int w = frame.width();
  const int h = frame.height();
  auto bounds = [side](int extent, int i) {
    int lo = static_cast<int>(static_cast<std::int64_t>(i) * extent / side);
    int hi = static_cast<int>(static_cast<std::int64_t>(i + 1) * extent / side);
    return std::pair{lo, std::max(hi, lo + 1)};
  };

  std::vector<double> out(static_cast<std::size_t>(side) * side * 3, 0.0);
  for (int by = 0; by < side; ++by) {
    const auto [y0, y1] = bounds(h, by);
    for (int bx = 0; bx < side; ++bx) {
      const auto [x0, x1] = bounds(w, bx);
      std::uint64_t sum[3] = {0, 0, 0};
      for (int y = y0; y < y1; ++y) {
        const std::uint8_t* p = frame.pixel(x0, y);
        for (int x = x0; x < x1; ++x, p += 3) {
          sum[0] += p[0];
          sum[1] += p[1];
          sum[2] += p[2];
        }
      }
      const double count = static_cast<double>(y1 - y0) * (x1 - x0) * 255.0;
      double* o = &out[(static_cast<std::size_t>(by) * side + bx) * 3];
      for (int c = 0; c < 3; ++c) o[c] = static_cast<double>(sum[c]) / count;
    }
  }
  return out;
}

LogitVector stub_logits(const std::vector<double>& input, const StubModelSpec& spec) {
  if (input.size() != spec.input_dim()) throw DomainError("stub input has wrong dimension");
  std::array<double, kNumClasses> logits{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double* row = &spec.weights[c * spec.input_dim()];
    double acc = 0.0;
    for (std::size_t d = 0; d < input.size(); ++d) acc += row[d] * input[d];
    logits[c] = acc;
  }
  return LogitVector(logits);
}

LogitVector stub_infer(const Frame& frame, const StubModelSpec& spec) {
  return stub_logits(downsample_normalized(frame, spec.input_side), spec);
}

std::string StubProvider::name() const { return "stub:" + std::to_string(spec_.seed); }

namespace wire {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
  return static_cast<T>(v);
}

void check_magic(std::span<const std::uint8_t> body) {
  if (body.size() < 4 || std::memcmp(body.data(), kMagic, 4) != 0) {
    throw ProtocolError("bad magic, expected HCT1");
  }
}

void prefix_length(std::vector<std::uint8_t>& msg) {
  const auto len = static_cast<std::uint32_t>(msg.size() - 4);
  for (int i = 0; i < 4; ++i) msg[i] = static_cast<std::uint8_t>(len >> (8 * i));
}

}  // namespace

std::vector<std::uint8_t> encode_request(const Frame& frame) {
  if (frame.width() > 0xffff || frame.height() > 0xffff) {
    throw ProtocolError("frame too large for the wire format");
  }
  std::vector<std::uint8_t> msg(4, 0);
  msg.reserve(4 + 16 + frame.pixels().size());
  msg.insert(msg.end(), kMagic, kMagic + 4);
  put_le<std::uint64_t>(msg, frame.index());
  put_le<std::uint16_t>(msg, static_cast<std::uint16_t>(frame.width()));
  put_le<std::uint16_t>(msg, static_cast<std::uint16_t>(frame.height()));
  msg.insert(msg.end(), frame.pixels().begin(), frame.pixels().end());
  prefix_length(msg);
  return msg;
}

std::vector<std::uint8_t> encode_response(const Response& r) {
  std::vector<std::uint8_t> msg(4, 0);
  msg.insert(msg.end(), kMagic, kMagic + 4);
  put_le<std::uint64_t>(msg, r.frame_index);
  for (float f : r.logits) put_le<std::uint32_t>(msg, std::bit_cast<std::uint32_t>(f));
  prefix_length(msg);
  return msg;
}

Request decode_request(std::span<const std::uint8_t> body) {
  check_magic(body);
  if (body.size() < 16) throw ProtocolError("request header truncated");
  Request r{get_le<std::uint64_t>(body, 4), get_le<std::uint16_t>(body, 12),
            get_le<std::uint16_t>(body, 14), {}};
  const std::size_t expected = static_cast<std::size_t>(r.width) * r.height * 3;
  if (body.size() - 16 != expected) throw ProtocolError("request payload size mismatch");
  r.rgb.assign(body.begin() + 16, body.end());
  return r;
}

Response decode_response(std::span<const std::uint8_t> body) {
  check_magic(body);
  if (body.size() != kResponseBodySize) {
    throw ProtocolError("response must carry exactly 4 float32 logits, got " +
                        std::to_string(body.size()) + " body bytes");
  }
  Response r{get_le<std::uint64_t>(body, 4), {}};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    r.logits[c] = std::bit_cast<float>(get_le<std::uint32_t>(body, 12 + 4 * c));
  }
  return r;
}

std::vector<std::uint8_t> read_message(net::Socket& sock, std::size_t max_body,
                                       std::optional<net::Clock::time_point> deadline) {
  std::uint8_t len_bytes[4];
  sock.recv_exact(len_bytes, deadline);
  const std::uint32_t len = get_le<std::uint32_t>(len_bytes, 0);
  if (len > max_body) throw ProtocolError("message length " + std::to_string(len) + " too large");
  std::vector<std::uint8_t> body(len);
  sock.recv_exact(body, deadline);
  return body;
}

}  // namespace wire

RemoteProvider::RemoteProvider(net::Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

std::string RemoteProvider::name() const {
  return "remote:" + endpoint_.host + ":" + std::to_string(endpoint_.port);
}

LogitVector RemoteProvider::infer(const Frame& frame) {
  const auto deadline = net::Clock::now() + timeout_;
  wire::Response response{};
  try {
    if (!sock_.valid()) sock_ = net::connect_tcp(endpoint_, timeout_);
    sock_.send_all(wire::encode_request(frame), deadline);
    auto body = wire::read_message(sock_, 1024, deadline);
    response = wire::decode_response(body);
  } catch (const ProtocolError&) {
    sock_.close();
    throw;
  } catch (const net::NetError& e) {
    // A late reply would desynchronise the stream, so start over.
    sock_.close();
    throw TransportError(std::string("remote inference failed: ") + e.what());
  }
  if (response.frame_index != frame.index()) {
    sock_.close();
    throw ProtocolError("response frame index does not match request");
  }
  std::array<double, kNumClasses> logits{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!std::isfinite(response.logits[c])) throw ProtocolError("non-finite logit in response");
    logits[c] = response.logits[c];
  }
  return LogitVector(logits);
}

LogitVector ReplayProvider::infer(const Frame& frame) {
  auto it = recorded_.find(frame.index());
  if (it == recorded_.end()) {
    throw TransportError("no recorded logits for frame " + std::to_string(frame.index()));
  }
  return it->second;
}

std::unique_ptr<LogitProvider> make_provider(const std::string& descriptor) {
  if (descriptor.rfind("stub:", 0) == 0) {
    const std::string seed = descriptor.substr(5);
    try {
      std::size_t used = 0;
      auto value = std::stoull(seed, &used);
      if (used != seed.size()) throw std::invalid_argument(seed);
      return std::make_unique<StubProvider>(StubModelSpec::from_seed(value));
    } catch (const std::logic_error&) {
      throw DomainError("bad stub seed in model descriptor '" + descriptor + "'");
    }
  }
  if (descriptor.rfind("remote:", 0) == 0) {
    return std::make_unique<RemoteProvider>(net::parse_endpoint(descriptor.substr(7)));
  }
  throw DomainError("model must be stub:SEED or remote:HOST:PORT, got '" + descriptor + "'");
}

}  // namespace hector
