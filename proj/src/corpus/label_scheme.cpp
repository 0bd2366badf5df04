#include <set>

#include "citeimpact/common/error.hpp"
#include "citeimpact/corpus/corpus.hpp"

namespace citeimpact {

std::string_view to_string(Task task) {
  return task == Task::intent ? "intent" : "sentiment";
}

Task task_from_string(std::string_view name) {
  if (name == "intent") return Task::intent;
  if (name == "sentiment") return Task::sentiment;
  throw FormatError("unknown task '" + std::string(name) + "' (expected intent or sentiment)");
}

LabelScheme::LabelScheme(Task task, std::vector<std::string> labels)
    : task_(task), labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw PreconditionError("a label scheme needs at least two labels");
  }
  std::set<std::string_view> seen;
  for (const auto& label : labels_) {
    if (label.empty()) throw PreconditionError("label names must be non-empty");
    if (!seen.insert(label).second) {
      throw PreconditionError("duplicate label name '" + label + "'");
    }
  }
}

LabelScheme LabelScheme::intent() {
  return LabelScheme(Task::intent, {"result", "method", "background"});
}

LabelScheme LabelScheme::sentiment() {
  return LabelScheme(Task::sentiment, {"positive", "negative", "neutral"});
}

LabelScheme LabelScheme::for_task(Task task) {
  return task == Task::intent ? intent() : sentiment();
}

const std::string& LabelScheme::name(std::size_t label) const {
  if (label >= labels_.size()) {
    throw PreconditionError("label index " + std::to_string(label) + " outside scheme of size " +
                            std::to_string(labels_.size()));
  }
  return labels_[label];
}

std::optional<std::size_t> LabelScheme::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == name) return i;
  }
  return std::nullopt;
}

}  // namespace citeimpact
