#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"

namespace citeimpact {

/// Duplicate-detection key: NFC composition, whitespace runs collapsed to one
/// space, ends trimmed. Case and punctuation are preserved.
std::string normalize_text(std::string_view text);

struct DuplicateGroup {
  std::string key;
  /// Corpus indices of the members, ascending.
  std::vector<std::size_t> members;
};

/// Groups of two or more instances sharing a normalized text, ordered by the
/// index of their first member.
std::vector<DuplicateGroup> find_duplicate_groups(const Corpus& corpus);

struct StepResult {
  Corpus retained;
  std::vector<CitationInstance> removed;
};

/// Drops every member of each duplicate group whose members disagree on the label.
StepResult remove_conflicting(const Corpus& corpus);

/// Keeps the first occurrence of each same-label duplicate group. Throws
/// PreconditionError if a group with conflicting labels is present.
StepResult dedupe_consistent(const Corpus& corpus);

struct CleanseLedgerRow {
  std::size_t input = 0;
  std::size_t removed_conflicting = 0;
  std::size_t removed_duplicate = 0;
  std::size_t retained = 0;

  std::size_t removed() const { return removed_conflicting + removed_duplicate; }
};

struct CleanseResult {
  Corpus retained;
  std::vector<CitationInstance> removed_conflicting;
  std::vector<CitationInstance> removed_duplicate;
  /// One row per class, scheme order. Removed instances count against their own label.
  std::vector<CleanseLedgerRow> ledger;
};

/// remove_conflicting followed by dedupe_consistent.
CleanseResult cleanse(const Corpus& corpus);

/// class,input,removed_conflicting,removed_duplicate,removed_total,retained
std::string ledger_csv(const CleanseResult& result);

/// Human-readable summary of both steps.
std::string cleanse_report(const CleanseResult& result);

}  // namespace citeimpact
