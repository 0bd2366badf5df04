#include "citeimpact/corpus/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "citeimpact/common/error.hpp"

namespace citeimpact {

DistributionStats class_distribution(const Corpus& corpus) {
  if (corpus.empty()) {
    throw PreconditionError("class distribution of empty corpus '" + corpus.name() +
                            "' is undefined");
  }
  DistributionStats stats;
  stats.labels = corpus.scheme().labels();
  stats.counts = corpus.class_counts();
  stats.total = corpus.size();
  for (auto c : stats.counts) {
    stats.fractions.push_back(static_cast<double>(c) / static_cast<double>(stats.total));
  }
  return stats;
}

LengthStats length_stats(const Corpus& corpus, const Tokenizer& tokenizer,
                         std::size_t bucket_width) {
  if (bucket_width == 0) throw PreconditionError("histogram bucket width must be positive");
  LengthStats stats;
  stats.labels = corpus.scheme().labels();
  stats.bucket_width = bucket_width;
  stats.per_class.resize(corpus.scheme().size());

  std::vector<double> token_sum(stats.per_class.size(), 0.0);
  std::vector<double> char_sum(stats.per_class.size(), 0.0);
  for (const auto& inst : corpus) {
    auto& cls = stats.per_class[inst.label];
    const auto tokens = tokenizer.count(inst.text);
    const auto chars = code_point_count(inst.text);
    if (cls.count == 0) {
      cls.min_tokens = cls.max_tokens = tokens;
      cls.min_chars = cls.max_chars = chars;
    } else {
      cls.min_tokens = std::min(cls.min_tokens, tokens);
      cls.max_tokens = std::max(cls.max_tokens, tokens);
      cls.min_chars = std::min(cls.min_chars, chars);
      cls.max_chars = std::max(cls.max_chars, chars);
    }
    ++cls.count;
    token_sum[inst.label] += static_cast<double>(tokens);
    char_sum[inst.label] += static_cast<double>(chars);
    const auto bucket = tokens / bucket_width;
    if (cls.token_histogram.size() <= bucket) cls.token_histogram.resize(bucket + 1, 0);
    ++cls.token_histogram[bucket];
  }
  for (std::size_t c = 0; c < stats.per_class.size(); ++c) {
    auto& cls = stats.per_class[c];
    if (cls.count == 0) continue;
    cls.mean_tokens = token_sum[c] / static_cast<double>(cls.count);
    cls.mean_chars = char_sum[c] / static_cast<double>(cls.count);
  }
  return stats;
}

std::string format_percent(double fraction) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", fraction * 100.0);
  return buffer;
}

namespace {

std::string format_mean(const std::optional<double>& value) {
  if (!value) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", *value);
  return buffer;
}

}  // namespace

std::string distribution_csv(const DistributionStats& stats) {
  std::ostringstream out;
  out << "label,count,percent\n";
  for (std::size_t i = 0; i < stats.labels.size(); ++i) {
    out << stats.labels[i] << ',' << stats.counts[i] << ',' << format_percent(stats.fractions[i])
        << '\n';
  }
  out << "total," << stats.total << ",100.00\n";
  return out.str();
}

std::string length_csv(const LengthStats& stats) {
  std::ostringstream out;
  out << "label,count,mean_tokens,mean_chars,min_tokens,max_tokens,min_chars,max_chars\n";
  for (std::size_t i = 0; i < stats.labels.size(); ++i) {
    const auto& cls = stats.per_class[i];
    out << stats.labels[i] << ',' << cls.count << ',' << format_mean(cls.mean_tokens) << ','
        << format_mean(cls.mean_chars) << ',';
    if (cls.count > 0) {
      out << cls.min_tokens << ',' << cls.max_tokens << ',' << cls.min_chars << ','
          << cls.max_chars;
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string length_histogram_json(const LengthStats& stats) {
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t i = 0; i < stats.labels.size(); ++i) {
    auto buckets = nlohmann::json::array();
    const auto& hist = stats.per_class[i].token_histogram;
    for (std::size_t b = 0; b < hist.size(); ++b) {
      buckets.push_back({{"lo", b * stats.bucket_width},
                         {"hi", (b + 1) * stats.bucket_width},
                         {"count", hist[b]}});
    }
    classes[stats.labels[i]] = std::move(buckets);
  }
  nlohmann::json doc = {{"unit", "tokens"},
                        {"bucket_width", stats.bucket_width},
                        {"labels", stats.labels},
                        {"classes", std::move(classes)}};
  return doc.dump(2) + "\n";
}

}  // namespace citeimpact
