#include "citeimpact/corpus/corpus.hpp"

#include <unordered_set>

#include "citeimpact/common/error.hpp"

namespace citeimpact {

bool has_visible_text(std::string_view text) {
  for (unsigned char c : text) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f' && c != '\v') return true;
  }
  return false;
}

Corpus::Corpus(std::string name, LabelScheme scheme, std::vector<CitationInstance> instances)
    : name_(std::move(name)), scheme_(std::move(scheme)), instances_(std::move(instances)) {
  std::unordered_set<std::string_view> ids;
  ids.reserve(instances_.size());
  for (const auto& inst : instances_) {
    if (inst.label >= scheme_.size()) {
      throw PreconditionError("instance '" + inst.id + "' has label index " +
                              std::to_string(inst.label) + " outside the scheme");
    }
    if (!has_visible_text(inst.text)) {
      throw PreconditionError("instance '" + inst.id + "' has empty text");
    }
    if (!ids.insert(inst.id).second) {
      throw PreconditionError("duplicate instance id '" + inst.id + "' in corpus '" + name_ + "'");
    }
  }
}

std::vector<std::size_t> Corpus::class_counts() const {
  std::vector<std::size_t> counts(scheme_.size(), 0);
  for (const auto& inst : instances_) ++counts[inst.label];
  return counts;
}

std::vector<std::size_t> Corpus::labels() const {
  std::vector<std::size_t> out;
  out.reserve(instances_.size());
  for (const auto& inst : instances_) out.push_back(inst.label);
  return out;
}

Corpus Corpus::subset(std::span<const std::size_t> indices, std::string name) const {
  std::vector<CitationInstance> picked;
  picked.reserve(indices.size());
  for (auto i : indices) {
    if (i >= instances_.size()) throw PreconditionError("subset index out of range");
    picked.push_back(instances_[i]);
  }
  return Corpus(std::move(name), scheme_, std::move(picked));
}

Corpus Corpus::renamed(std::string name) const {
  Corpus copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

}  // namespace citeimpact
