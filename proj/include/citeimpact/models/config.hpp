#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citeimpact {

enum class Topology { cnn, lstm, rnn, pretrained };

std::string_view to_string(Topology topology);
Topology topology_from_string(std::string_view name);

/// Network shape. For cnn, "L 3 F 100 C 3,4,5" means three parallel
/// convolution branches of widths 3, 4 and 5 with 100 filters each. For
/// lstm/rnn, L stacked layers of F units read left to right.
struct ModelConfig {
  Topology topology = Topology::cnn;
  std::size_t layers = 3;
  std::size_t units = 100;
  std::vector<std::size_t> conv_widths = {3, 4, 5};
  std::size_t embedding_dim = 64;
  std::size_t max_seq_len = 256;
  double dropout = 0.5;
  std::uint64_t seed = 1;
  /// "<backend>:<location>", pretrained only.
  std::string pretrained_checkpoint;

  void validate() const;

  /// Parses a topology name plus an architecture string such as
  /// "L 3 F 100 C 3,4,5" or "L 2 F 512". Other fields keep their defaults.
  static ModelConfig parse(std::string_view topology, std::string_view architecture);

  /// Inverse of parse for the architecture part.
  std::string architecture() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// The CNN grid and recurrent configurations evaluated on the intent task.
std::vector<std::pair<std::string, std::string>> intent_baseline_grid();

enum class SamplingStrategy { none, focal, smote, upsample, class_weights, downsample_balanced };

std::string_view to_string(SamplingStrategy strategy);
SamplingStrategy sampling_from_string(std::string_view name);

struct TrainOptions {
  std::size_t epochs = 50;
  /// Epochs without improvement before stopping; 0 disables early stopping.
  std::size_t patience = 5;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t min_frequency = 1;
  /// Global gradient-norm clip; 0 disables clipping.
  double grad_clip = 5.0;
  std::size_t smote_k = 5;
  /// Stop as soon as accuracy on the (sampled) training set reaches this value.
  std::optional<double> stop_at_train_accuracy;

  nlohmann::json to_json() const;
  static TrainOptions from_json(const nlohmann::json& j);
};

}  // namespace citeimpact
