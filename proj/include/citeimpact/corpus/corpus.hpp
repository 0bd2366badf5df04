#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace citeimpact {

enum class Task { intent, sentiment };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

/// Ordered set of class names for one task. Report columns follow this order.
class LabelScheme {
 public:
  LabelScheme(Task task, std::vector<std::string> labels);

  /// result, method, background
  static LabelScheme intent();
  /// positive, negative, neutral
  static LabelScheme sentiment();
  static LabelScheme for_task(Task task);

  Task task() const { return task_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& name(std::size_t label) const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool operator==(const LabelScheme&) const = default;

 private:
  Task task_;
  std::vector<std::string> labels_;
};

struct CitationInstance {
  std::string id;
  std::string text;
  std::size_t label = 0;
  std::map<std::string, std::string> meta;

  bool operator==(const CitationInstance&) const = default;
};

/// Immutable, ordered collection of instances under one label scheme.
///
/// Construction validates that ids are unique, labels are inside the scheme and
/// texts are non-blank. Iteration order is ingestion order.
class Corpus {
 public:
  Corpus(std::string name, LabelScheme scheme, std::vector<CitationInstance> instances);

  static Corpus empty(std::string name, LabelScheme scheme) {
    return Corpus(std::move(name), std::move(scheme), {});
  }

  const std::string& name() const { return name_; }
  const LabelScheme& scheme() const { return scheme_; }
  const std::vector<CitationInstance>& instances() const { return instances_; }

  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  const CitationInstance& operator[](std::size_t i) const { return instances_[i]; }
  auto begin() const { return instances_.begin(); }
  auto end() const { return instances_.end(); }

  /// Count of instances per label, in scheme order.
  std::vector<std::size_t> class_counts() const;

  /// Label of every instance, in corpus order.
  std::vector<std::size_t> labels() const;

  /// New corpus holding the instances at `indices`, in the order given.
  Corpus subset(std::span<const std::size_t> indices, std::string name) const;

  Corpus renamed(std::string name) const;

  bool operator==(const Corpus&) const = default;

 private:
  std::string name_;
  LabelScheme scheme_;
  std::vector<CitationInstance> instances_;
};

/// True if the text holds at least one non-whitespace character.
bool has_visible_text(std::string_view text);

}  // namespace citeimpact
