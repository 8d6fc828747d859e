#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hector/domain.hpp"
#include "hector/net.hpp"

namespace hector {

class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TransportError : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

class ProtocolError : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

struct InputSize {
  int width;
  int height;
};

/// Produces one LogitVector per frame. Never called concurrently for the
/// same session.
class LogitProvider {
 public:
  virtual ~LogitProvider() = default;
  virtual std::string name() const = 0;
  /// {0, 0} means native frame size.
  virtual InputSize expected_input() const = 0;
  /// Throws InferenceError when no logits can be produced.
  virtual LogitVector infer(const Frame& frame) = 0;
};

/// Deterministic linear test model over a box-downsampled frame.
struct StubModelSpec {
  std::uint64_t seed;
  int input_side;
  /// Row-major, 4 rows of input_side * input_side * 3 columns.
  std::vector<double> weights;

  static StubModelSpec from_seed(std::uint64_t seed, int input_side = 32);
  std::size_t input_dim() const {
    return static_cast<std::size_t>(input_side) * input_side * 3;
  }
  double weight(std::size_t cls, std::size_t d) const { return weights[cls * input_dim() + d]; }
};

/// Box-averaged side x side x 3 vector in [0,1], (row, col, channel) order.
std::vector<double> downsample_normalized(const Frame& frame, int side);

/// Logits of an already downsampled input vector.
LogitVector stub_logits(const std::vector<double>& input, const StubModelSpec& spec);

LogitVector stub_infer(const Frame& frame, const StubModelSpec& spec);

class StubProvider : public LogitProvider {
 public:
  explicit StubProvider(StubModelSpec spec) : spec_(std::move(spec)) {}
  std::string name() const override;
  InputSize expected_input() const override { return {spec_.input_side, spec_.input_side}; }
  LogitVector infer(const Frame& frame) override { return stub_infer(frame, spec_); }
  const StubModelSpec& spec() const { return spec_; }

 private:
  StubModelSpec spec_;
};

/// Wire format shared by the remote backend and model servers. Every
/// message is preceded by its byte length as u32 LE.
namespace wire {

inline constexpr char kMagic[4] = {'H', 'C', 'T', '1'};
inline constexpr std::size_t kResponseBodySize = 4 + 8 + 4 * 4;

struct Request {
  std::uint64_t frame_index;
  std::uint16_t width;
  std::uint16_t height;
  std::vector<std::uint8_t> rgb;
};

struct Response {
  std::uint64_t frame_index;
  std::array<float, kNumClasses> logits;
};

/// Length-prefixed request bytes.
std::vector<std::uint8_t> encode_request(const Frame& frame);
/// Length-prefixed response bytes.
std::vector<std::uint8_t> encode_response(const Response& response);
/// Body without the length prefix. Throws ProtocolError.
Request decode_request(std::span<const std::uint8_t> body);
Response decode_response(std::span<const std::uint8_t> body);

/// Reads one length-prefixed message body. `max_body` guards allocation.
std::vector<std::uint8_t> read_message(net::Socket& sock, std::size_t max_body,
                                       std::optional<net::Clock::time_point> deadline);

}  // namespace wire

/// Talks to an external model server; one connection reused across frames
/// and re-established after any failure.
class RemoteProvider : public LogitProvider {
 public:
  explicit RemoteProvider(net::Endpoint endpoint,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(100));
  std::string name() const override;
  InputSize expected_input() const override { return {0, 0}; }
  LogitVector infer(const Frame& frame) override;

 private:
  net::Endpoint endpoint_;
  std::chrono::milliseconds timeout_;
  net::Socket sock_;
};

/// Serves logits recorded in a previous session, keyed by frame index.
class ReplayProvider : public LogitProvider {
 public:
  explicit ReplayProvider(std::map<std::uint64_t, LogitVector> recorded)
      : recorded_(std::move(recorded)) {}
  std::string name() const override { return "replay"; }
  InputSize expected_input() const override { return {0, 0}; }
  LogitVector infer(const Frame& frame) override;

 private:
  std::map<std::uint64_t, LogitVector> recorded_;
};

/// Parses "stub:SEED" or "remote:HOST:PORT".
std::unique_ptr<LogitProvider> make_provider(const std::string& descriptor);

}  // namespace hector
