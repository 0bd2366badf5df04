#include "citeimpact/cleanse/cleanse.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "citeimpact/common/error.hpp"

namespace citeimpact {
namespace {

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  bool pending_space = false;
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 cp = 0;
    U8_NEXT(bytes, i, length, cp);
    if (cp >= 0 && u_isUWhiteSpace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(text.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
  }
  return out;
}

std::vector<std::size_t> labels_of(const Corpus& corpus, const DuplicateGroup& group) {
  std::vector<std::size_t> labels;
  for (auto i : group.members) labels.push_back(corpus[i].label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

StepResult split_by_mask(const Corpus& corpus, const std::vector<bool>& drop) {
  std::vector<std::size_t> keep;
  std::vector<CitationInstance> removed;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (drop[i]) {
      removed.push_back(corpus[i]);
    } else {
      keep.push_back(i);
    }
  }
  return StepResult{corpus.subset(keep, corpus.name()), std::move(removed)};
}

}  // namespace

std::string normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("unicode", "NFC normalizer unavailable");
  const auto source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const auto composed = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw Error("unicode", "NFC normalization failed");
  std::string utf8;
  composed.toUTF8String(utf8);
  return collapse_whitespace(utf8);
}

std::vector<DuplicateGroup> find_duplicate_groups(const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<DuplicateGroup> all;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto key = normalize_text(corpus[i].text);
    auto [it, inserted] = slot.try_emplace(key, all.size());
    if (inserted) all.push_back(DuplicateGroup{std::move(key), {}});
    all[it->second].members.push_back(i);
  }
  std::vector<DuplicateGroup> groups;
  for (auto& group : all) {
    if (group.members.size() >= 2) groups.push_back(std::move(group));
  }
  return groups;
}

StepResult remove_conflicting(const Corpus& corpus) {
  std::vector<bool> drop(corpus.size(), false);
  for (const auto& group : find_duplicate_groups(corpus)) {
    if (labels_of(corpus, group).size() < 2) continue;
    for (auto i : group.members) drop[i] = true;
  }
  return split_by_mask(corpus, drop);
}

StepResult dedupe_consistent(const Corpus& corpus) {
  std::vector<bool> drop(corpus.size(), false);
  for (const auto& group : find_duplicate_groups(corpus)) {
    if (labels_of(corpus, group).size() >= 2) {
      throw PreconditionError("dedupe_consistent requires a conflict-free corpus; text '" +
                              group.key.substr(0, 60) + "' carries several labels");
    }
    // members are ascending, so the first one is the earliest occurrence
    for (std::size_t m = 1; m < group.members.size(); ++m) drop[group.members[m]] = true;
  }
  return split_by_mask(corpus, drop);
}

CleanseResult cleanse(const Corpus& corpus) {
  auto first = remove_conflicting(corpus);
  auto second = dedupe_consistent(first.retained);

  std::vector<CleanseLedgerRow> ledger(corpus.scheme().size());
  const auto input_counts = corpus.class_counts();
  for (std::size_t c = 0; c < ledger.size(); ++c) ledger[c].input = input_counts[c];
  for (const auto& inst : first.removed) ++ledger[inst.label].removed_conflicting;
  for (const auto& inst : second.removed) ++ledger[inst.label].removed_duplicate;
  const auto retained_counts = second.retained.class_counts();
  for (std::size_t c = 0; c < ledger.size(); ++c) ledger[c].retained = retained_counts[c];

  return CleanseResult{second.retained.renamed(corpus.name() + "-clean"),
                       std::move(first.removed), std::move(second.removed), std::move(ledger)};
}

std::string ledger_csv(const CleanseResult& result) {
  std::ostringstream out;
  out << "class,input,removed_conflicting,removed_duplicate,removed_total,retained\n";
  const auto& labels = result.retained.scheme().labels();
  CleanseLedgerRow total;
  for (std::size_t c = 0; c < result.ledger.size(); ++c) {
    const auto& row = result.ledger[c];
    out << labels[c] << ',' << row.input << ',' << row.removed_conflicting << ','
        << row.removed_duplicate << ',' << row.removed() << ',' << row.retained << '\n';
    total.input += row.input;
    total.removed_conflicting += row.removed_conflicting;
    total.removed_duplicate += row.removed_duplicate;
    total.retained += row.retained;
  }
  out << "total," << total.input << ',' << total.removed_conflicting << ','
      << total.removed_duplicate << ',' << total.removed() << ',' << total.retained << '\n';
  return out.str();
}

std::string cleanse_report(const CleanseResult& result) {
  std::ostringstream out;
  const auto& labels = result.retained.scheme().labels();
  std::size_t input = 0;
  for (const auto& row : result.ledger) input += row.input;
  out << "Cleansing of " << input << " instances\n";
  out << "  step 1, duplicates with conflicting labels removed (all appearances): "
      << result.removed_conflicting.size() << '\n';
  out << "  step 2, same-label duplicates removed (first occurrence kept): "
      << result.removed_duplicate.size() << '\n';
  out << "  retained: " << result.retained.size() << '\n';
  out << "Per class (input -> retained; conflicting + duplicate removed):\n";
  for (std::size_t c = 0; c < result.ledger.size(); ++c) {
    const auto& row = result.ledger[c];
    out << "  " << labels[c] << ": " << row.input << " -> " << row.retained << "; "
        << row.removed_conflicting << " + " << row.removed_duplicate << " = " << row.removed()
        << '\n';
  }
  return out.str();
}

}  // namespace citeimpact
