#include "citeimpact/models/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "citeimpact/common/error.hpp"

namespace citeimpact {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         std::string_view where) {
  if (!j.is_object()) throw FormatError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw FormatError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

std::size_t parse_count(const std::string& token, std::string_view what) {
  try {
    std::size_t used = 0;
    const auto value = std::stoul(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw FormatError("invalid " + std::string(what) + " '" + token + "' in architecture string");
  }
}

}  // namespace

std::string_view to_string(Topology topology) {
  switch (topology) {
    case Topology::cnn: return "cnn";
    case Topology::lstm: return "lstm";
    case Topology::rnn: return "rnn";
    case Topology::pretrained: return "pretrained";
  }
  return "?";
}

Topology topology_from_string(std::string_view name) {
  const auto n = lower(name);
  if (n == "cnn") return Topology::cnn;
  if (n == "lstm") return Topology::lstm;
  if (n == "rnn") return Topology::rnn;
  if (n == "pretrained") return Topology::pretrained;
  throw FormatError("unknown topology '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (layers < 1) throw PreconditionError("model needs at least one layer");
  if (units < 1) throw PreconditionError("model needs at least one filter/unit");
  if (max_seq_len < 1) throw PreconditionError("max_seq_len must be at least 1");
  if (embedding_dim < 1) throw PreconditionError("embedding_dim must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw PreconditionError("dropout must lie in [0, 1)");
  if (topology == Topology::cnn) {
    if (conv_widths.size() != layers) {
      throw PreconditionError("cnn needs exactly one convolution width per layer (L=" +
                              std::to_string(layers) + ", got " +
                              std::to_string(conv_widths.size()) + " widths)");
    }
    for (auto w : conv_widths) {
      if (w < 1) throw PreconditionError("convolution widths must be positive");
    }
  }
  if (topology == Topology::pretrained && pretrained_checkpoint.empty()) {
    throw PreconditionError("pretrained topology needs a checkpoint id");
  }
}

ModelConfig ModelConfig::parse(std::string_view topology, std::string_view architecture) {
  ModelConfig config;
  config.topology = topology_from_string(topology);
  std::istringstream in{std::string(architecture)};
  std::string key;
  bool saw_widths = false;
  while (in >> key) {
    std::string value;
    if (!(in >> value)) throw FormatError("architecture key '" + key + "' lacks a value");
    if (key == "L") {
      config.layers = parse_count(value, "layer count");
    } else if (key == "F") {
      config.units = parse_count(value, "filter count");
    } else if (key == "C") {
      config.conv_widths.clear();
      std::istringstream widths(value);
      std::string w;
      while (std::getline(widths, w, ',')) config.conv_widths.push_back(parse_count(w, "width"));
      saw_widths = true;
    } else {
      throw FormatError("unknown architecture key '" + key + "' (expected L, F or C)");
    }
  }
  if (config.topology != Topology::cnn) {
    if (saw_widths) throw FormatError("convolution widths only apply to cnn");
    config.conv_widths.clear();
  }
  config.validate();
  return config;
}

std::string ModelConfig::architecture() const {
  std::ostringstream out;
  out << "L " << layers << " F " << units;
  if (topology == Topology::cnn) {
    out << " C ";
    for (std::size_t i = 0; i < conv_widths.size(); ++i) out << (i ? "," : "") << conv_widths[i];
  }
  return out.str();
}

nlohmann::json ModelConfig::to_json() const {
  return {{"topology", to_string(topology)},
          {"layers", layers},
          {"units", units},
          {"conv_widths", conv_widths},
          {"embedding_dim", embedding_dim},
          {"max_seq_len", max_seq_len},
          {"dropout", dropout},
          {"seed", seed},
          {"pretrained_checkpoint", pretrained_checkpoint}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"topology", "architecture", "layers", "units", "conv_widths",
                       "embedding_dim", "max_seq_len", "dropout", "seed",
                       "pretrained_checkpoint"},
                      "model config");
  ModelConfig c;
  try {
    if (j.contains("architecture")) {
      c = parse(j.value("topology", std::string("cnn")), j.at("architecture").get<std::string>());
    } else {
      c.topology = topology_from_string(j.value("topology", std::string("cnn")));
      if (c.topology != Topology::cnn) c.conv_widths.clear();
    }
    c.layers = j.value("layers", c.layers);
    c.units = j.value("units", c.units);
    c.conv_widths = j.value("conv_widths", c.conv_widths);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
    c.dropout = j.value("dropout", c.dropout);
    c.seed = j.value("seed", c.seed);
    c.pretrained_checkpoint = j.value("pretrained_checkpoint", c.pretrained_checkpoint);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<std::pair<std::string, std::string>> intent_baseline_grid() {
  return {{"CNN", "L 3 F 100 C 3,4,5"}, {"CNN", "L 3 F 100 C 2,4,6"},
          {"CNN", "L 3 F 100 C 3,3,3"}, {"CNN", "L 3 F 100 C 3,5,7"},
          {"CNN", "L 3 F 100 C 3,7,9"}, {"LSTM", "L 2 F 512"},
          {"LSTM", "L 4 F 512"},        {"LSTM", "L 4 F 1024"},
          {"RNN", "L 2 F 512"}};
}

std::string_view to_string(SamplingStrategy strategy) {
  switch (strategy) {
    case SamplingStrategy::none: return "none";
    case SamplingStrategy::focal: return "focal";
    case SamplingStrategy::smote: return "smote";
    case SamplingStrategy::upsample: return "upsample";
    case SamplingStrategy::class_weights: return "class_weights";
    case SamplingStrategy::downsample_balanced: return "downsample_balanced";
  }
  return "?";
}

SamplingStrategy sampling_from_string(std::string_view name) {
  for (auto s : {SamplingStrategy::none, SamplingStrategy::focal, SamplingStrategy::smote,
                 SamplingStrategy::upsample, SamplingStrategy::class_weights,
                 SamplingStrategy::downsample_balanced}) {
    if (to_string(s) == name) return s;
  }
  throw FormatError("unknown sampling strategy '" + std::string(name) + "'");
}

nlohmann::json TrainOptions::to_json() const {
  nlohmann::json j = {{"epochs", epochs},
                      {"patience", patience},
                      {"batch_size", batch_size},
                      {"learning_rate", learning_rate},
                      {"min_frequency", min_frequency},
                      {"grad_clip", grad_clip},
                      {"smote_k", smote_k},
                      {"stop_at_train_accuracy", nullptr}};
  if (stop_at_train_accuracy) j["stop_at_train_accuracy"] = *stop_at_train_accuracy;
  return j;
}

TrainOptions TrainOptions::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"epochs", "patience", "batch_size", "learning_rate", "min_frequency",
                       "grad_clip", "smote_k", "stop_at_train_accuracy"},
                      "training options");
  TrainOptions o;
  try {
    o.epochs = j.value("epochs", o.epochs);
    o.patience = j.value("patience", o.patience);
    o.batch_size = j.value("batch_size", o.batch_size);
    o.learning_rate = j.value("learning_rate", o.learning_rate);
    o.min_frequency = j.value("min_frequency", o.min_frequency);
    o.grad_clip = j.value("grad_clip", o.grad_clip);
    o.smote_k = j.value("smote_k", o.smote_k);
    if (auto it = j.find("stop_at_train_accuracy"); it != j.end() && !it->is_null()) {
      o.stop_at_train_accuracy = it->get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("training options: ") + e.what());
  }
  if (o.batch_size == 0) throw PreconditionError("batch_size must be positive");
  if (!(o.learning_rate > 0.0)) throw PreconditionError("learning_rate must be positive");
  return o;
}

}  // namespace citeimpact
