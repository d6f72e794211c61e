#include "astprobe/label_vocab.hpp"

#include "astprobe/ast.hpp"
#include "astprobe/errors.hpp"

namespace astprobe {

LabelVocab::LabelVocab() { intern(kNullLabel); }

LabelVocab LabelVocab::from_labels(std::span<const std::string> labels) {
  if (labels.empty() || labels.front() != kNullLabel) {
    throw FormatError("label list must start with the null label");
  }
  LabelVocab vocab;
  for (const auto& label : labels.subspan(1)) {
    if (vocab.contains(label)) throw FormatError("duplicate label '" + label + "'");
    vocab.intern(label);
  }
  vocab.freeze();
  return vocab;
}

LabelId LabelVocab::intern(std::string_view label) {
  if (auto it = ids_.find(std::string(label)); it != ids_.end()) return it->second;
  if (frozen_) throw UnknownLabel("label '" + std::string(label) + "' not in frozen vocabulary");
  auto id = static_cast<LabelId>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

LabelId LabelVocab::id(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  if (it == ids_.end()) throw UnknownLabel("label '" + std::string(label) + "' not in vocabulary");
  return it->second;
}

bool LabelVocab::contains(std::string_view label) const {
  return ids_.find(std::string(label)) != ids_.end();
}

const std::string& LabelVocab::label(LabelId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) {
    throw UnknownLabel("label id " + std::to_string(id) + " out of range");
  }
  return labels_[static_cast<std::size_t>(id)];
}

std::uint64_t LabelVocab::hash() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& label : labels_) {
    h = fnv1a64(label, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

}  // namespace astprobe
