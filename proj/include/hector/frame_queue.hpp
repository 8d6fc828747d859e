#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>

#include "hector/domain.hpp"

namespace hector {

struct QueuedFrame {
  std::uint64_t index;
  std::int64_t timestamp_ms;
  std::chrono::steady_clock::time_point ingested_at;
  /// Null once the frame was evicted by a newer one.
  std::shared_ptr<const Frame> frame;
};

enum class OverflowPolicy { DropOldest, Block };

/// Holds at most `capacity` frames with pixels. Under DropOldest an evicted
/// frame stays in line as a pixel-less marker, so consumers still see every
/// index exactly once and in order.
class FrameQueue {
 public:
  FrameQueue(std::size_t capacity, OverflowPolicy policy);

  /// Returns false once the queue is closed.
  bool push(QueuedFrame item);
  /// Blocks until an item is available; nullopt after close and drain.
  std::optional<QueuedFrame> pop();
  void close();

  std::uint64_t dropped() const;

 private:
  const std::size_t capacity_;
  const OverflowPolicy policy_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<QueuedFrame> items_;
  std::size_t with_pixels_ = 0;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

}  // namespace hector
