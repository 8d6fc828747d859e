#include "hector/frame_queue.hpp"

namespace hector {

FrameQueue::FrameQueue(std::size_t capacity, OverflowPolicy policy)
    : capacity_(capacity), policy_(policy) {
  if (capacity == 0) throw DomainError("frame queue capacity must be >= 1");
}

bool FrameQueue::push(QueuedFrame item) {
  std::unique_lock lock(mu_);
  if (policy_ == OverflowPolicy::Block) {
    not_full_.wait(lock, [&] { return closed_ || with_pixels_ < capacity_; });
  }
  if (closed_) return false;
  if (with_pixels_ >= capacity_) {
    for (auto& queued : items_) {
      if (queued.frame) {
        queued.frame.reset();
        --with_pixels_;
        ++dropped_;
        break;
      }
    }
  }
  if (item.frame) ++with_pixels_;
  items_.push_back(std::move(item));
  not_empty_.notify_one();
  return true;
}

std::optional<QueuedFrame> FrameQueue::pop() {
  std::unique_lock lock(mu_);
  not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
  if (items_.empty()) return std::nullopt;
  QueuedFrame item = std::move(items_.front());
  items_.pop_front();
  if (item.frame) --with_pixels_;
  not_full_.notify_one();
  return item;
}

void FrameQueue::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  not_empty_.notify_all();
  not_full_.notify_all();
}

std::uint64_t FrameQueue::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

}  // namespace hector
