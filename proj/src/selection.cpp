#include "hector/selection.hpp"

#include <algorithm>

namespace hector {

SelectionEntry::SelectionEntry(std::uint64_t frame_index, MesScore mes, ProbVector probs,
                               std::shared_ptr<const Frame> image)
    : frame_index(frame_index),
      mes(mes),
      certainty(probs.max()),
      probs(probs),
      image(std::move(image)) {}

RankKey rank(const SelectionEntry& e) {
  return RankKey{e.mes.value(), e.certainty, -static_cast<std::int64_t>(e.frame_index)};
}

bool outranks(const SelectionEntry& a, const SelectionEntry& b) { return rank(a) > rank(b); }

bool within_gap(std::uint64_t a, std::uint64_t b, int min_gap) {
  const std::uint64_t d = a > b ? a - b : b - a;
  return d < static_cast<std::uint64_t>(min_gap);
}

SelectionState::SelectionState(int k, int min_gap) : k_(k), min_gap_(min_gap) {
  if (k < 1) throw DomainError("selection capacity k must be >= 1");
  if (min_gap < 0) throw DomainError("min_gap must be >= 0");
}

bool SelectionState::offer(SelectionEntry candidate) {
  const auto conflicts = [&](const SelectionEntry& e) {
    return within_gap(e.frame_index, candidate.frame_index, min_gap_);
  };
  for (const auto& e : entries_) {
    if (conflicts(e) && outranks(e, candidate)) return false;
  }
  std::erase_if(entries_, conflicts);

  const auto pos = std::upper_bound(
      entries_.begin(), entries_.end(), candidate,
      [](const SelectionEntry& a, const SelectionEntry& b) { return outranks(a, b); });
  const auto at = entries_.insert(pos, std::move(candidate));
  const bool retained = at - entries_.begin() < k_;
  if (entries_.size() > static_cast<std::size_t>(k_)) entries_.pop_back();
  return retained;
}

std::vector<SelectionEntry> final_selection(const SelectionState& state) {
  std::vector<SelectionEntry> out = state.entries();
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
  return out;
}

}  // namespace hector
