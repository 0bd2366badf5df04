#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"
#include "citeimpact/corpus/tokenizer.hpp"

namespace citeimpact {

struct DistributionStats {
  std::vector<std::string> labels;
  std::vector<std::size_t> counts;
  /// Full-precision count / total; rounding happens only when presenting.
  std::vector<double> fractions;
  std::size_t total = 0;
};

/// Per-class counts and proportions in scheme order. Empty corpus is an error.
DistributionStats class_distribution(const Corpus& corpus);

struct ClassLengthStats {
  std::size_t count = 0;
  /// Absent when the class has no instances.
  std::optional<double> mean_tokens;
  std::optional<double> mean_chars;
  std::size_t min_tokens = 0;
  std::size_t max_tokens = 0;
  std::size_t min_chars = 0;
  std::size_t max_chars = 0;
  /// token_histogram[b] counts instances with b*bucket_width <= tokens < (b+1)*bucket_width.
  std::vector<std::size_t> token_histogram;
};

struct LengthStats {
  std::vector<std::string> labels;
  std::size_t bucket_width = 0;
  std::vector<ClassLengthStats> per_class;
};

/// Token and character (code point) length statistics per class.
LengthStats length_stats(const Corpus& corpus, const Tokenizer& tokenizer = {},
                         std::size_t bucket_width = 10);

/// `label,count,percent` with the percentage at two decimals.
std::string distribution_csv(const DistributionStats& stats);

/// `label,count,mean_tokens,mean_chars,min_tokens,max_tokens,min_chars,max_chars`
std::string length_csv(const LengthStats& stats);

/// Plot-ready histogram: {"unit":"tokens","bucket_width":w,"classes":{label:[{lo,hi,count}]}}
std::string length_histogram_json(const LengthStats& stats);

/// Fixed two-decimal rendering used by every presentation path.
std::string format_percent(double fraction);

}  // namespace citeimpact
