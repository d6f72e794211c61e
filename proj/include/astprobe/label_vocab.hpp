#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace astprobe {

using LabelId = std::int32_t;

/// Bidirectional label <-> id map. Id 0 is always kNullLabel. Once frozen,
/// interning an unknown label throws UnknownLabel.
class LabelVocab {
 public:
  static constexpr LabelId kNullId = 0;

  LabelVocab();
  /// Rebuilds a vocabulary from labels listed in id order; labels[0] must be
  /// kNullLabel. The result is frozen.
  static LabelVocab from_labels(std::span<const std::string> labels);

  /// Returns the id of `label`, adding it first unless frozen.
  LabelId intern(std::string_view label);
  /// Lookup only; throws UnknownLabel when absent.
  LabelId id(std::string_view label) const;
  bool contains(std::string_view label) const;
  const std::string& label(LabelId id) const;

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  /// FNV-1a 64 over the labels in id order, separated by '\n'.
  std::uint64_t hash() const;

  bool operator==(const LabelVocab& other) const {
    return labels_ == other.labels_ && frozen_ == other.frozen_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelId> ids_;
  bool frozen_ = false;
};

}  // namespace astprobe
