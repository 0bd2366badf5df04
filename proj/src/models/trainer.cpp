#include "citeimpact/models/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "citeimpact/balance/resampling.hpp"
#include "citeimpact/common/error.hpp"
#include "citeimpact/common/random.hpp"
#include "citeimpact/metrics/metrics.hpp"
#include "citeimpact/models/pretrained.hpp"
#include "citeimpact/splits/splits.hpp"

namespace citeimpact {
namespace {

// Salts for the independent random streams drawn from one training seed.
constexpr std::uint64_t kUpsampleStream = 1;
constexpr std::uint64_t kDownsampleStream = 2;
constexpr std::uint64_t kSmoteStream = 4;
constexpr std::uint64_t kOrderStream = 5;
constexpr std::uint64_t kDropoutStream = 6;

struct Example {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> partner;
  double mix = 0.0;
  std::size_t label = 0;
  bool synthetic = false;

  SequenceInput input() const { return SequenceInput{tokens, partner, mix}; }
};

std::vector<Example> encode_all(const Corpus& corpus, const Vocabulary& vocab,
                                std::size_t max_seq_len) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const auto& inst : corpus) {
    Example e;
    e.tokens = vocab.encode_unpadded(inst.text, max_seq_len);
    e.label = inst.label;
    out.push_back(std::move(e));
  }
  return out;
}

// Accuracy and macro-F1 of the network on the non-synthetic examples.
std::pair<double, double> score(const Network& net, const std::vector<Example>& examples,
                                const LabelScheme& scheme) {
  std::vector<std::size_t> gold, pred;
  for (const auto& e : examples) {
    if (e.synthetic) continue;
    const Eigen::VectorXd p = softmax(net.forward(e.input()));
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.size(); ++c) {
      if (p(c) > p(best)) best = c;
    }
    gold.push_back(e.label);
    pred.push_back(static_cast<std::size_t>(best));
  }
  if (gold.empty()) return {0.0, 0.0};
  const auto m = confusion(gold, pred, scheme.labels());
  return {static_cast<double>(m.trace()) / static_cast<double>(m.total()), macro_f1(m)};
}

class Adam {
 public:
  Adam(const std::vector<Parameter>& params, double lr) : lr_(lr) {
    for (const auto& p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    }
  }

  void step(std::vector<Parameter>& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& g = params[i].grad;
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g.cwiseProduct(g);
      params[i].value.array() -=
          lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  std::size_t t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

double clip_gradients(std::vector<Parameter>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) sq += p.grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    for (auto& p : params) p.grad *= max_norm / norm;
  }
  return norm;
}

}  // namespace

nlohmann::json TrainReport::to_json() const {
  nlohmann::json j = {{"epochs_run", epochs_run()},
                      {"train_loss", train_loss},
                      {"train_accuracy", train_accuracy},
                      {"selection_macro_f1", selection_macro_f1},
                      {"selection_on_validation", selection_on_validation},
                      {"best_epoch", nullptr},
                      {"stop_reason", stop_reason},
                      {"seconds", seconds},
                      {"seed", seed},
                      {"config", config},
                      {"sampled_counts", sampled_counts},
                      {"loss",
                       {{"kind", to_string(loss.kind)},
                        {"gamma", loss.gamma},
                        {"class_weights", loss.class_weights}}}};
  if (best_epoch) j["best_epoch"] = *best_epoch;
  return j;
}

LossConfig resolve_loss(const LossConfig& loss, SamplingStrategy sampling, const Corpus& train) {
  LossConfig out = loss;
  if (sampling == SamplingStrategy::focal) out.kind = LossKind::focal;
  if (sampling == SamplingStrategy::class_weights) out.kind = LossKind::weighted_cross_entropy;
  if (out.kind != LossKind::cross_entropy && out.class_weights.empty()) {
    out.class_weights = class_weights_from(train);
  }
  out.validate(train.scheme().size());
  return out;
}

TrainResult train(const ModelConfig& config, const Corpus& train, const std::optional<Corpus>& val,
                  const LossConfig& loss, SamplingStrategy sampling, const TrainOptions& options,
                  std::uint64_t seed) {
  ModelConfig c = config;
  c.seed = seed;
  c.validate();
  if (train.empty()) throw PreconditionError("training corpus is empty");
  if (val && !(val->scheme() == train.scheme())) {
    throw PreconditionError("training and validation corpora use different label schemes");
  }
  if (c.topology == Topology::pretrained) {
    return pretrained::fine_tune(c.pretrained_checkpoint, train, val, options, seed, c, loss,
                                 sampling);
  }
  Vocabulary vocab = Vocabulary::build(train, options.min_frequency);
  Network net(c, vocab.size(), train.scheme().size());
  return train_network(std::move(net), std::move(vocab), train, val, loss, sampling, options, seed);
}

TrainResult train_network(Network initial, Vocabulary vocab, const Corpus& train,
                          const std::optional<Corpus>& val, const LossConfig& loss,
                          SamplingStrategy sampling, const TrainOptions& options,
                          std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  if (train.empty()) throw PreconditionError("training corpus is empty");
  if (options.batch_size == 0) throw PreconditionError("batch_size must be positive");
  const auto& scheme = train.scheme();
  const auto num_classes = scheme.size();
  const auto max_len = initial.config().max_seq_len;

  TrainReport report;
  report.seed = seed;
  report.config = initial.config().to_json();
  report.loss = resolve_loss(loss, sampling, train);

  std::optional<Corpus> resampled;
  if (sampling == SamplingStrategy::upsample) {
    resampled = random_upsample(train, derive_seed(seed, kUpsampleStream));
  } else if (sampling == SamplingStrategy::downsample_balanced) {
    resampled = balance_downsample(train, derive_seed(seed, kDownsampleStream));
  }
  std::vector<Example> examples = encode_all(resampled ? *resampled : train, vocab, max_len);

  if (sampling == SamplingStrategy::smote) {
    Eigen::MatrixXd features(static_cast<Eigen::Index>(examples.size()),
                             initial.embedding().cols());
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      features.row(static_cast<Eigen::Index>(i)) =
          initial.mean_embedding(examples[i].tokens).transpose();
      labels.push_back(examples[i].label);
    }
    const auto counts = train.class_counts();
    const std::vector<std::size_t> targets(num_classes,
                                           *std::max_element(counts.begin(), counts.end()));
    const auto synth = smote(FeatureMatrix(std::move(features)), labels, options.smote_k, targets,
                             derive_seed(seed, kSmoteStream));
    for (std::size_t s = 0; s < synth.origins.size(); ++s) {
      const auto& o = synth.origins[s];
      Example e;
      e.tokens = examples[o.base].tokens;
      e.partner = examples[o.neighbor].tokens;
      e.mix = o.lambda;
      e.label = synth.labels[s];
      e.synthetic = true;
      examples.push_back(std::move(e));
    }
  }

  report.sampled_counts.assign(num_classes, 0);
  for (const auto& e : examples) ++report.sampled_counts[e.label];

  std::vector<Example> val_examples;
  if (val) {
    val_examples = encode_all(*val, vocab, max_len);
    report.selection_on_validation = !val_examples.empty();
  }
  std::vector<double> weights(num_classes, 1.0);
  if (!report.loss.class_weights.empty()) weights = report.loss.class_weights;
  const double gamma = report.loss.effective_gamma();

  Network net = std::move(initial);
  Network best = net;
  Adam adam(net.parameters(), options.learning_rate);
  Rng order_rng(derive_seed(seed, kOrderStream));
  Rng dropout_rng(derive_seed(seed, kDropoutStream));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  double best_metric = -1.0;
  std::size_t stale = 0;
  report.stop_reason = options.epochs == 0 ? "no_epochs" : "max_epochs";

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t begin = 0, batch = 0; begin < order.size();
         begin += options.batch_size, ++batch) {
      const auto end = std::min(order.size(), begin + options.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      net.zero_grad();
      for (auto i = begin; i < end; ++i) {
        const auto& e = examples[order[i]];
        const auto input = e.input();
        Network::Trace trace;
        const Eigen::VectorXd logits = net.forward(input, &dropout_rng, &trace);
        const auto lg = loss_from_logits(logits, e.label, gamma, weights[e.label]);
        if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch) + "; lower the learning rate");
        }
        loss_sum += lg.loss;
        net.backward(input, trace, lg.grad * scale);
      }
      const double norm = clip_gradients(net.parameters(), options.grad_clip);
      if (!std::isfinite(norm)) {
        throw TrainingError("non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch));
      }
      adam.step(net.parameters());
    }
    report.train_loss.push_back(loss_sum / static_cast<double>(examples.size()));

    const auto [train_acc, train_f1] = score(net, examples, scheme);
    report.train_accuracy.push_back(train_acc);
    const double metric =
        report.selection_on_validation ? score(net, val_examples, scheme).second : train_f1;
    report.selection_macro_f1.push_back(metric);

    if (metric > best_metric) {
      best_metric = metric;
      report.best_epoch = epoch;
      best = net;
      stale = 0;
    } else {
      ++stale;
    }
    if (options.stop_at_train_accuracy && train_acc >= *options.stop_at_train_accuracy) {
      report.stop_reason = "train_accuracy_reached";
      break;
    }
    if (options.patience > 0 && stale >= options.patience) {
      report.stop_reason = "early_stopping";
      break;
    }
  }

  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto model = std::make_shared<const NetworkModel>(std::move(best), std::move(vocab));
  return TrainResult{Classifier(scheme, std::move(model)), std::move(report)};
}

}  // namespace citeimpact
