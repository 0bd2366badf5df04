#include "citeimpact/models/network.hpp"

#include <cmath>

#include "citeimpact/common/error.hpp"

namespace citeimpact {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::size_t add_param(std::vector<Parameter>& params, std::string name, Index rows, Index cols) {
  params.push_back(Parameter{std::move(name), MatrixXd::Zero(rows, cols), MatrixXd::Zero(rows, cols)});
  return params.size() - 1;
}

void fill_uniform(MatrixXd& m, double bound, Rng& rng) {
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
  }
}

VectorXd sigmoid(const VectorXd& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

// Parallel convolution branches, one per width, each followed by ReLU and
// max-over-time pooling; branch outputs are concatenated.
class ConvEncoder final : public Encoder {
 public:
  ConvEncoder(const ModelConfig& config, std::vector<Parameter>& params, Rng& rng)
      : widths_(config.conv_widths), filters_(config.units), dim_(config.embedding_dim) {
    for (std::size_t b = 0; b < widths_.size(); ++b) {
      const auto fan_in = widths_[b] * dim_;
      const auto w = add_param(params, "conv" + std::to_string(b) + ".weight", idx(filters_),
                               idx(fan_in));
      const auto bias = add_param(params, "conv" + std::to_string(b) + ".bias", idx(filters_), 1);
      fill_uniform(params[w].value, std::sqrt(6.0 / static_cast<double>(fan_in + filters_)), rng);
      weights_.push_back(w);
      biases_.push_back(bias);
    }
  }

  std::unique_ptr<Encoder> clone() const override { return std::make_unique<ConvEncoder>(*this); }
  std::size_t output_dim() const override { return widths_.size() * filters_; }
  std::size_t min_length() const override {
    std::size_t m = 1;
    for (auto w : widths_) m = std::max(m, w);
    return m;
  }

  struct Trace final : EncoderTrace {
    Index length = 0;
    std::vector<MatrixXd> patches;
    std::vector<std::vector<Index>> argmax;
    std::vector<VectorXd> peak;
  };

  VectorXd forward(const MatrixXd& x, const std::vector<Parameter>& params,
                   std::unique_ptr<EncoderTrace>* trace) const override {
    const Index length = x.rows();
    const Index d = idx(dim_);
    const Index f_count = idx(filters_);
    VectorXd out(idx(output_dim()));
    auto t = std::make_unique<Trace>();
    t->length = length;
    for (std::size_t b = 0; b < widths_.size(); ++b) {
      const Index w = idx(widths_[b]);
      const Index positions = length - w + 1;
      MatrixXd patch(positions, w * d);
      for (Index j = 0; j < w; ++j) patch.middleCols(j * d, d) = x.middleRows(j, positions);
      MatrixXd act = patch * params[weights_[b]].value.transpose();
      act.rowwise() += params[biases_[b]].value.col(0).transpose();

      std::vector<Index> arg(idx(filters_));
      VectorXd peak(f_count);
      for (Index f = 0; f < f_count; ++f) {
        Index best = 0;
        for (Index p = 1; p < positions; ++p) {
          if (act(p, f) > act(best, f)) best = p;
        }
        arg[static_cast<std::size_t>(f)] = best;
        peak(f) = act(best, f);
        out(idx(b) * f_count + f) = std::max(0.0, peak(f));
      }
      if (trace) {
        t->patches.push_back(std::move(patch));
        t->argmax.push_back(std::move(arg));
        t->peak.push_back(std::move(peak));
      }
    }
    if (trace) *trace = std::move(t);
    return out;
  }

  MatrixXd backward(const EncoderTrace& base, const VectorXd& d_out,
                    std::vector<Parameter>& params) const override {
    const auto& t = static_cast<const Trace&>(base);
    const Index d = idx(dim_);
    const Index f_count = idx(filters_);
    MatrixXd dx = MatrixXd::Zero(t.length, d);
    for (std::size_t b = 0; b < widths_.size(); ++b) {
      const Index w = idx(widths_[b]);
      const Index positions = t.length - w + 1;
      const auto& patch = t.patches[b];
      auto& weight = params[weights_[b]];
      auto& bias = params[biases_[b]];
      MatrixXd d_patch = MatrixXd::Zero(positions, w * d);
      for (Index f = 0; f < f_count; ++f) {
        const double g = d_out(idx(b) * f_count + f);
        if (g == 0.0 || t.peak[b](f) <= 0.0) continue;
        const Index p = t.argmax[b][static_cast<std::size_t>(f)];
        weight.grad.row(f) += g * patch.row(p);
        bias.grad(f, 0) += g;
        d_patch.row(p) += g * weight.value.row(f);
      }
      for (Index j = 0; j < w; ++j) dx.middleRows(j, positions) += d_patch.middleCols(j * d, d);
    }
    return dx;
  }

 private:
  std::vector<std::size_t> widths_;
  std::size_t filters_;
  std::size_t dim_;
  std::vector<std::size_t> weights_;
  std::vector<std::size_t> biases_;
};

// Stacked unidirectional LSTM (gated = true) or Elman RNN; the feature vector
// is the top layer's state after the last position.
class RecurrentEncoder final : public Encoder {
 public:
  RecurrentEncoder(const ModelConfig& config, bool gated, std::vector<Parameter>& params, Rng& rng)
      : gated_(gated), layers_(config.layers), units_(config.units), dim_(config.embedding_dim) {
    const Index gates = gated_ ? 4 : 1;
    const double bound = 1.0 / std::sqrt(static_cast<double>(units_));
    for (std::size_t l = 0; l < layers_; ++l) {
      const auto in = l == 0 ? dim_ : units_;
      const std::string prefix = (gated_ ? "lstm" : "rnn") + std::to_string(l);
      Layer layer;
      layer.w = add_param(params, prefix + ".w", gates * idx(units_), idx(in));
      layer.u = add_param(params, prefix + ".u", gates * idx(units_), idx(units_));
      layer.b = add_param(params, prefix + ".b", gates * idx(units_), 1);
      fill_uniform(params[layer.w].value, bound, rng);
      fill_uniform(params[layer.u].value, bound, rng);
      fill_uniform(params[layer.b].value, bound, rng);
      if (gated_) params[layer.b].value.middleRows(idx(units_), idx(units_)).setConstant(1.0);
      layers.push_back(layer);
    }
  }

  std::unique_ptr<Encoder> clone() const override {
    return std::make_unique<RecurrentEncoder>(*this);
  }
  std::size_t output_dim() const override { return units_; }

  struct LayerTrace {
    MatrixXd input;  // T x in
    MatrixXd h;      // T x F
    MatrixXd c, tanh_c, i, f, g, o;
  };
  struct Trace final : EncoderTrace {
    std::vector<LayerTrace> layers;
  };

  VectorXd forward(const MatrixXd& x, const std::vector<Parameter>& params,
                   std::unique_ptr<EncoderTrace>* trace) const override {
    const Index length = x.rows();
    const Index n = idx(units_);
    auto t = std::make_unique<Trace>();
    MatrixXd input = x;
    for (const auto& layer : layers) {
      const auto& w = params[layer.w].value;
      const auto& u = params[layer.u].value;
      const auto& b = params[layer.b].value;
      LayerTrace lt;
      lt.h.resize(length, n);
      if (gated_) {
        for (auto* m : {&lt.c, &lt.tanh_c, &lt.i, &lt.f, &lt.g, &lt.o}) m->resize(length, n);
      }
      MatrixXd zx = input * w.transpose();
      zx.rowwise() += b.col(0).transpose();
      VectorXd h = VectorXd::Zero(n);
      VectorXd c = VectorXd::Zero(n);
      for (Index s = 0; s < length; ++s) {
        VectorXd z = zx.row(s).transpose() + u * h;
        if (gated_) {
          const VectorXd ig = sigmoid(z.segment(0, n));
          const VectorXd fg = sigmoid(z.segment(n, n));
          const VectorXd gg = z.segment(2 * n, n).array().tanh().matrix();
          const VectorXd og = sigmoid(z.segment(3 * n, n));
          c = fg.cwiseProduct(c) + ig.cwiseProduct(gg);
          const VectorXd tc = c.array().tanh().matrix();
          h = og.cwiseProduct(tc);
          lt.i.row(s) = ig.transpose();
          lt.f.row(s) = fg.transpose();
          lt.g.row(s) = gg.transpose();
          lt.o.row(s) = og.transpose();
          lt.c.row(s) = c.transpose();
          lt.tanh_c.row(s) = tc.transpose();
        } else {
          h = z.array().tanh().matrix();
        }
        lt.h.row(s) = h.transpose();
      }
      MatrixXd next = lt.h;
      lt.input = std::move(input);
      input = std::move(next);
      if (trace) t->layers.push_back(std::move(lt));
    }
    VectorXd out = input.row(length - 1).transpose();
    if (trace) *trace = std::move(t);
    return out;
  }

  MatrixXd backward(const EncoderTrace& base, const VectorXd& d_out,
                    std::vector<Parameter>& params) const override {
    const auto& t = static_cast<const Trace&>(base);
    const Index n = idx(units_);
    const Index gates = gated_ ? 4 : 1;
    const Index length = t.layers.front().h.rows();

    // Gradient flowing into each position's output of the current layer.
    MatrixXd d_h_seq = MatrixXd::Zero(length, n);
    d_h_seq.row(length - 1) = d_out.transpose();

    for (std::size_t l = layers.size(); l-- > 0;) {
      const auto& lt = t.layers[l];
      auto& w = params[layers[l].w];
      auto& u = params[layers[l].u];
      auto& b = params[layers[l].b];
      MatrixXd dz_all(length, gates * n);
      VectorXd dh_next = VectorXd::Zero(n);
      VectorXd dc_next = VectorXd::Zero(n);
      for (Index s = length; s-- > 0;) {
        const VectorXd dh = d_h_seq.row(s).transpose() + dh_next;
        VectorXd dz(gates * n);
        if (gated_) {
          const VectorXd ig = lt.i.row(s).transpose();
          const VectorXd fg = lt.f.row(s).transpose();
          const VectorXd gg = lt.g.row(s).transpose();
          const VectorXd og = lt.o.row(s).transpose();
          const VectorXd tc = lt.tanh_c.row(s).transpose();
          const VectorXd c_prev = s > 0 ? VectorXd(lt.c.row(s - 1).transpose()) : VectorXd::Zero(n);
          const VectorXd d_o = dh.cwiseProduct(tc);
          const VectorXd dc =
              dc_next + dh.cwiseProduct(og).cwiseProduct((1.0 - tc.array().square()).matrix());
          const VectorXd d_i = dc.cwiseProduct(gg);
          const VectorXd d_g = dc.cwiseProduct(ig);
          const VectorXd d_f = dc.cwiseProduct(c_prev);
          dc_next = dc.cwiseProduct(fg);
          dz.segment(0, n) = d_i.array() * ig.array() * (1.0 - ig.array());
          dz.segment(n, n) = d_f.array() * fg.array() * (1.0 - fg.array());
          dz.segment(2 * n, n) = d_g.array() * (1.0 - gg.array().square());
          dz.segment(3 * n, n) = d_o.array() * og.array() * (1.0 - og.array());
        } else {
          dz = dh.array() * (1.0 - lt.h.row(s).transpose().array().square());
        }
        dz_all.row(s) = dz.transpose();
        dh_next = u.value.transpose() * dz;
      }
      MatrixXd h_prev = MatrixXd::Zero(length, n);
      if (length > 1) h_prev.bottomRows(length - 1) = lt.h.topRows(length - 1);
      w.grad += dz_all.transpose() * lt.input;
      u.grad += dz_all.transpose() * h_prev;
      b.grad += dz_all.colwise().sum().transpose();
      d_h_seq = dz_all * w.value;
    }
    return d_h_seq;
  }

 private:
  struct Layer {
    std::size_t w = 0, u = 0, b = 0;
  };
  bool gated_;
  std::size_t layers_;
  std::size_t units_;
  std::size_t dim_;
  std::vector<Layer> layers;
};

// Average of the embedded positions. Used over pretrained word vectors.
class MeanPoolEncoder final : public Encoder {
 public:
  explicit MeanPoolEncoder(std::size_t dim) : dim_(dim) {}

  std::unique_ptr<Encoder> clone() const override {
    return std::make_unique<MeanPoolEncoder>(*this);
  }
  std::size_t output_dim() const override { return dim_; }

  struct Trace final : EncoderTrace {
    Index length = 0;
  };

  VectorXd forward(const MatrixXd& x, const std::vector<Parameter>&,
                   std::unique_ptr<EncoderTrace>* trace) const override {
    if (trace) {
      auto t = std::make_unique<Trace>();
      t->length = x.rows();
      *trace = std::move(t);
    }
    return x.colwise().mean().transpose();
  }

  MatrixXd backward(const EncoderTrace& base, const VectorXd& d_out,
                    std::vector<Parameter>&) const override {
    const auto& t = static_cast<const Trace&>(base);
    MatrixXd dx(t.length, idx(dim_));
    dx.rowwise() = d_out.transpose() / static_cast<double>(t.length);
    return dx;
  }

 private:
  std::size_t dim_;
};

}  // namespace

Network::Network(const ModelConfig& config, std::size_t vocab_size, std::size_t num_classes)
    : config_(config), vocab_size_(vocab_size), num_classes_(num_classes) {
  config_.validate();
  if (vocab_size < 2) throw PreconditionError("vocabulary must hold the two reserved ids");
  if (num_classes < 2) throw PreconditionError("classifier needs at least two classes");
  Rng rng(config_.seed);

  add_param(params_, "embedding", idx(vocab_size), idx(config_.embedding_dim));
  fill_uniform(params_[0].value, 0.1, rng);
  params_[0].value.row(0).setZero();

  switch (config_.topology) {
    case Topology::cnn: encoder_ = std::make_unique<ConvEncoder>(config_, params_, rng); break;
    case Topology::lstm:
      encoder_ = std::make_unique<RecurrentEncoder>(config_, true, params_, rng);
      break;
    case Topology::rnn:
      encoder_ = std::make_unique<RecurrentEncoder>(config_, false, params_, rng);
      break;
    case Topology::pretrained:
      encoder_ = std::make_unique<MeanPoolEncoder>(config_.embedding_dim);
      break;
  }
  const auto features = encoder_->output_dim();
  output_weight_ = add_param(params_, "output.weight", idx(num_classes), idx(features));
  output_bias_ = add_param(params_, "output.bias", idx(num_classes), 1);
  fill_uniform(params_[output_weight_].value,
               std::sqrt(6.0 / static_cast<double>(features + num_classes)), rng);
}

Network::Network(const Network& other)
    : config_(other.config_),
      vocab_size_(other.vocab_size_),
      num_classes_(other.num_classes_),
      params_(other.params_),
      encoder_(other.encoder_->clone()),
      output_weight_(other.output_weight_),
      output_bias_(other.output_bias_) {}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void Network::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

MatrixXd Network::embed(const SequenceInput& input) const {
  const auto& table = params_[0].value;
  const bool mixed = input.mix != 0.0;
  std::size_t length = std::max(input.tokens.size(), mixed ? input.partner.size() : 0);
  length = std::max(length, encoder_->min_length());
  MatrixXd x = MatrixXd::Zero(idx(length), table.cols());
  const double own = mixed ? 1.0 - input.mix : 1.0;
  for (std::size_t t = 0; t < input.tokens.size(); ++t) {
    if (input.tokens[t] >= vocab_size_) throw PreconditionError("token id outside vocabulary");
    x.row(idx(t)) += own * table.row(idx(input.tokens[t]));
  }
  if (mixed) {
    for (std::size_t t = 0; t < input.partner.size(); ++t) {
      if (input.partner[t] >= vocab_size_) throw PreconditionError("token id outside vocabulary");
      x.row(idx(t)) += input.mix * table.row(idx(input.partner[t]));
    }
  }
  return x;
}

VectorXd Network::forward(const SequenceInput& input, Rng* dropout_rng, Trace* trace) const {
  MatrixXd x = embed(input);
  std::unique_ptr<EncoderTrace> enc_trace;
  VectorXd features = encoder_->forward(x, params_, trace ? &enc_trace : nullptr);

  VectorXd mask;
  if (dropout_rng && config_.dropout > 0.0) {
    mask.resize(features.size());
    const double keep = 1.0 - config_.dropout;
    for (Index i = 0; i < mask.size(); ++i) {
      mask(i) = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
    }
    features = features.cwiseProduct(mask);
  }
  VectorXd logits = params_[output_weight_].value * features + params_[output_bias_].value.col(0);
  if (trace) {
    trace->embedded = std::move(x);
    trace->encoder = std::move(enc_trace);
    trace->features = std::move(features);
    trace->dropout_mask = std::move(mask);
  }
  return logits;
}

void Network::backward(const SequenceInput& input, const Trace& trace, const VectorXd& d_logits) {
  auto& w_out = params_[output_weight_];
  w_out.grad += d_logits * trace.features.transpose();
  params_[output_bias_].grad.col(0) += d_logits;
  VectorXd d_features = w_out.value.transpose() * d_logits;
  if (trace.dropout_mask.size() > 0) d_features = d_features.cwiseProduct(trace.dropout_mask);

  const MatrixXd dx = encoder_->backward(*trace.encoder, d_features, params_);
  auto& table_grad = params_[0].grad;
  const bool mixed = input.mix != 0.0;
  const double own = mixed ? 1.0 - input.mix : 1.0;
  for (std::size_t t = 0; t < input.tokens.size(); ++t) {
    if (input.tokens[t] != 0) table_grad.row(idx(input.tokens[t])) += own * dx.row(idx(t));
  }
  if (mixed) {
    for (std::size_t t = 0; t < input.partner.size(); ++t) {
      if (input.partner[t] != 0) table_grad.row(idx(input.partner[t])) += input.mix * dx.row(idx(t));
    }
  }
}

VectorXd Network::mean_embedding(std::span<const std::size_t> tokens) const {
  VectorXd sum = VectorXd::Zero(params_[0].value.cols());
  if (tokens.empty()) return sum;
  for (auto id : tokens) sum += params_[0].value.row(idx(id)).transpose();
  return sum / static_cast<double>(tokens.size());
}

std::size_t conv_parameter_count(const ModelConfig& config) {
  std::size_t n = 0;
  for (auto w : config.conv_widths) n += config.units * (w * config.embedding_dim + 1);
  return n;
}

}  // namespace citeimpact
