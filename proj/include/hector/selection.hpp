#pragma once

#include <memory>
#include <tuple>
#include <vector>

#include "hector/domain.hpp"

namespace hector {

struct SelectionEntry {
  std::uint64_t frame_index;
  MesScore mes;
  double certainty;
  ProbVector probs;
  /// Retained copy of the frame image; shared so that snapshots stay cheap.
  std::shared_ptr<const Frame> image;

  SelectionEntry(std::uint64_t frame_index, MesScore mes, ProbVector probs,
                 std::shared_ptr<const Frame> image = nullptr);
};

/// Lexicographic relevance key: MES descending, certainty descending,
/// earlier frame first. Larger keys rank higher.
struct RankKey {
  int mes;
  double certainty;
  std::int64_t neg_index;
  auto operator<=>(const RankKey&) const = default;
};

RankKey rank(const SelectionEntry& entry);
bool outranks(const SelectionEntry& a, const SelectionEntry& b);

/// Online top-k of scored frames with a minimum index distance between
/// any two retained entries.
class SelectionState {
 public:
  SelectionState(int k, int min_gap);

  /// Greedy update: a candidate is rejected if any entry within min_gap
  /// outranks it; otherwise it evicts all such conflicts, and the
  /// lowest-ranked entry falls off when capacity is exceeded.
  /// Returns whether the candidate is retained afterwards.
  bool offer(SelectionEntry candidate);

  /// Entries sorted by rank, best first.
  const std::vector<SelectionEntry>& entries() const { return entries_; }
  int k() const { return k_; }
  int min_gap() const { return min_gap_; }

 private:
  int k_;
  int min_gap_;
  std::vector<SelectionEntry> entries_;
};

/// Surviving entries in chronological order.
std::vector<SelectionEntry> final_selection(const SelectionState& state);

bool within_gap(std::uint64_t a, std::uint64_t b, int min_gap);

}  // namespace hector
