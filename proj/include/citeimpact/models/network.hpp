#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "citeimpact/common/random.hpp"
#include "citeimpact/models/config.hpp"

namespace citeimpact {

struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
};

/// One network input: token ids (no padding) and, for SMOTE-synthesised
/// examples, a partner sequence. The embedded input is
/// (1 - mix) * E[tokens] + mix * E[partner], position by position.
struct SequenceInput {
  std::span<const std::size_t> tokens;
  std::span<const std::size_t> partner = {};
  double mix = 0.0;
};

/// Whatever an encoder needs to keep between forward and backward.
struct EncoderTrace {
  virtual ~EncoderTrace() = default;
};

/// Maps an embedded sequence (rows = positions) to a fixed-size feature vector.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual std::unique_ptr<Encoder> clone() const = 0;
  virtual std::size_t output_dim() const = 0;
  /// Shortest sequence the encoder accepts; shorter inputs are zero-padded.
  virtual std::size_t min_length() const { return 1; }
  virtual Eigen::VectorXd forward(const Eigen::MatrixXd& x, const std::vector<Parameter>& params,
                                  std::unique_ptr<EncoderTrace>* trace) const = 0;
  /// Accumulates parameter gradients and returns d loss / d x.
  virtual Eigen::MatrixXd backward(const EncoderTrace& trace, const Eigen::VectorXd& d_out,
                                   std::vector<Parameter>& params) const = 0;
};

/// Embedding -> encoder -> dropout -> affine -> logits.
///
/// Copyable value type; copies share nothing.
class Network {
 public:
  struct Trace {
    Eigen::MatrixXd embedded;
    std::unique_ptr<EncoderTrace> encoder;
    Eigen::VectorXd features;
    Eigen::VectorXd dropout_mask;
  };

  /// Builds and randomly initialises a network for `config` over a vocabulary
  /// of `vocab_size` ids and `num_classes` outputs.
  Network(const ModelConfig& config, std::size_t vocab_size, std::size_t num_classes);

  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  std::size_t num_classes() const { return num_classes_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const ModelConfig& config() const { return config_; }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  Eigen::MatrixXd& embedding() { return params_[0].value; }
  const Eigen::MatrixXd& embedding() const { return params_[0].value; }

  /// Logits. `dropout_rng` enables training-mode dropout; `trace` is filled
  /// when a backward pass will follow.
  Eigen::VectorXd forward(const SequenceInput& input, Rng* dropout_rng = nullptr,
                          Trace* trace = nullptr) const;

  /// Accumulates d loss / d parameters given d loss / d logits.
  void backward(const SequenceInput& input, const Trace& trace, const Eigen::VectorXd& d_logits);

  void zero_grad();

  /// Mean of the embedding rows of the input, the default SMOTE feature.
  Eigen::VectorXd mean_embedding(std::span<const std::size_t> tokens) const;

 private:
  Eigen::MatrixXd embed(const SequenceInput& input) const;

  ModelConfig config_;
  std::size_t vocab_size_;
  std::size_t num_classes_;
  std::vector<Parameter> params_;
  std::unique_ptr<Encoder> encoder_;
  std::size_t output_weight_ = 0;
  std::size_t output_bias_ = 0;
};

/// Number of convolution weights + biases in a multi-width cnn: sum over
/// widths w of F * (w * D + 1).
std::size_t conv_parameter_count(const ModelConfig& config);

}  // namespace citeimpact
