#include "citeimpact/models/pretrained.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <unistd.h>

#include "citeimpact/common/error.hpp"
#include "citeimpact/common/hash.hpp"

namespace citeimpact::pretrained {
namespace {

constexpr std::string_view kStaticBackend = "static-embedding";

class StaticEmbeddingBackend final : public Backend {
 public:
  std::string name() const override { return std::string(kStaticBackend); }

  TrainResult fine_tune(const std::string& location, const ModelConfig& config,
                        const Corpus& train, const std::optional<Corpus>& val,
                        const LossConfig& loss, SamplingStrategy sampling,
                        const TrainOptions& options, std::uint64_t seed) const override {
    const auto vectors = read_word_vectors(location);
    ModelConfig c = config;
    c.embedding_dim = static_cast<std::size_t>(vectors.vectors.cols());
    c.seed = seed;
    auto vocab = Vocabulary::build(train, options.min_frequency);
    Network net(c, vocab.size(), train.scheme().size());
    std::unordered_map<std::string_view, Eigen::Index> row_of;
    for (std::size_t i = 0; i < vectors.tokens.size(); ++i) {
      row_of.emplace(vectors.tokens[i], static_cast<Eigen::Index>(i));
    }
    for (std::size_t id = 2; id < vocab.size(); ++id) {
      if (auto it = row_of.find(vocab.token(id)); it != row_of.end()) {
        net.embedding().row(static_cast<Eigen::Index>(id)) = vectors.vectors.row(it->second);
      }
    }
    return train_network(std::move(net), std::move(vocab), train, val, loss, sampling, options,
                         seed);
  }

  std::shared_ptr<const ClassifierModel> load(const nlohmann::json&) const override {
    throw PreconditionError("static-embedding models are stored as plain networks");
  }
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::filesystem::path scratch_file(std::string_view stem) {
  static std::atomic<std::uint64_t> counter{0};
  return std::filesystem::temp_directory_path() /
         ("citeimpact-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
          std::string(stem));
}

void write_jsonl(const std::filesystem::path& path, const Corpus& corpus, bool with_labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& inst : corpus) {
    nlohmann::json row = {{"id", inst.id}, {"text", inst.text}};
    if (with_labels) row["label"] = inst.label;
    out << row.dump() << '\n';
  }
}

void run(const std::string& backend, const std::string& command) {
  const int status = std::system(command.c_str());
  if (status != 0) {
    throw TrainingError("backend '" + backend + "' exited with status " + std::to_string(status) +
                        " running: " + command);
  }
}

class ExternalModel final : public ClassifierModel {
 public:
  ExternalModel(std::string backend, std::string command, std::string model_dir,
                std::size_t num_classes)
      : backend_(std::move(backend)),
        command_(std::move(command)),
        model_dir_(std::move(model_dir)),
        num_classes_(num_classes) {}

  std::string family() const override { return "external"; }

  nlohmann::json describe() const override {
    return {{"family", family()},
            {"backend", backend_},
            {"model_dir", model_dir_},
            {"num_classes", num_classes_}};
  }

  Eigen::MatrixXd probabilities(std::span<const std::string> texts) const override {
    const auto input = scratch_file("predict-in.jsonl");
    const auto output = scratch_file("predict-out.jsonl");
    {
      std::ofstream out(input);
      if (!out) throw IoError("cannot write " + input.string());
      for (const auto& t : texts) out << nlohmann::json{{"text", t}}.dump() << '\n';
    }
    run(backend_, command_ + " predict --model " + shell_quote(model_dir_) + " --input " +
                      shell_quote(input.string()) + " --output " + shell_quote(output.string()));
    Eigen::MatrixXd probs(static_cast<Eigen::Index>(texts.size()),
                          static_cast<Eigen::Index>(num_classes_));
    std::ifstream in(output);
    std::string line;
    Eigen::Index r = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (r == probs.rows()) throw FormatError("backend returned too many prediction rows");
      const auto row = nlohmann::json::parse(line).at("probabilities").get<std::vector<double>>();
      if (row.size() != num_classes_) throw FormatError("backend returned a row of wrong width");
      for (std::size_t c = 0; c < row.size(); ++c) probs(r, static_cast<Eigen::Index>(c)) = row[c];
      ++r;
    }
    std::filesystem::remove(input);
    std::filesystem::remove(output);
    if (r != probs.rows()) throw FormatError("backend returned too few prediction rows");
    return probs;
  }

 private:
  std::string backend_;
  std::string command_;
  std::string model_dir_;
  std::size_t num_classes_;
};

class ExternalBackend final : public Backend {
 public:
  ExternalBackend(std::string name, std::string command)
      : name_(std::move(name)), command_(std::move(command)) {}

  std::string name() const override { return name_; }

  TrainResult fine_tune(const std::string& location, const ModelConfig& config,
                        const Corpus& train, const std::optional<Corpus>& val,
                        const LossConfig& loss, SamplingStrategy sampling,
                        const TrainOptions& options, std::uint64_t seed) const override {
    if (sampling != SamplingStrategy::none && sampling != SamplingStrategy::class_weights &&
        sampling != SamplingStrategy::focal) {
      throw CapabilityError("backend '" + name_ + "' does not support sampling strategy '" +
                            std::string(to_string(sampling)) + "'");
    }
    const auto resolved = resolve_loss(loss, sampling, train);
    std::string ids;
    for (const auto& inst : train) ids += inst.id + "\n";
    const auto key = sha256_hex(name_ + "|" + location + "|" + std::to_string(seed) + "|" +
                                options.to_json().dump() + "|" + ids);
    const auto model_dir = std::filesystem::temp_directory_path() /
                           ("citeimpact-" + name_ + "-" + key.substr(0, 16));
    std::filesystem::create_directories(model_dir);
    const auto train_file = model_dir / "train.jsonl";
    write_jsonl(train_file, train, true);
    std::string cmd = command_ + " fine-tune --backend " + shell_quote(name_) + " --checkpoint " +
                      shell_quote(location) + " --train " + shell_quote(train_file.string()) +
                      " --out " + shell_quote(model_dir.string()) + " --num-labels " +
                      std::to_string(train.scheme().size()) + " --epochs " +
                      std::to_string(options.epochs) + " --lr " +
                      std::to_string(options.learning_rate) + " --batch-size " +
                      std::to_string(options.batch_size) + " --max-seq-len " +
                      std::to_string(config.max_seq_len) + " --seed " + std::to_string(seed);
    if (!resolved.class_weights.empty()) {
      std::ostringstream w;
      for (std::size_t i = 0; i < resolved.class_weights.size(); ++i) {
        w << (i ? "," : "") << resolved.class_weights[i];
      }
      cmd += " --class-weights " + w.str() + " --gamma " +
             std::to_string(resolved.effective_gamma());
    }
    if (val && !val->empty()) {
      const auto val_file = model_dir / "val.jsonl";
      write_jsonl(val_file, *val, true);
      cmd += " --val " + shell_quote(val_file.string());
    }
    const auto start = std::chrono::steady_clock::now();
    run(name_, cmd);

    TrainResult result;
    result.report.seed = seed;
    result.report.config = config.to_json();
    result.report.loss = resolved;
    result.report.sampled_counts = train.class_counts();
    result.report.selection_on_validation = val && !val->empty();
    result.report.stop_reason = "backend";
    if (std::ifstream in(model_dir / "train_report.json"); in) {
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (!j.is_discarded()) {
        result.report.train_loss = j.value("train_loss", std::vector<double>{});
        result.report.train_accuracy = j.value("train_accuracy", std::vector<double>{});
        result.report.selection_macro_f1 = j.value("selection_macro_f1", std::vector<double>{});
        if (j.contains("best_epoch") && j["best_epoch"].is_number_unsigned()) {
          result.report.best_epoch = j["best_epoch"].get<std::size_t>();
        }
      }
    }
    result.report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.classifier =
        Classifier(train.scheme(), std::make_shared<const ExternalModel>(
                                       name_, command_, model_dir.string(), train.scheme().size()));
    return result;
  }

  std::shared_ptr<const ClassifierModel> load(const nlohmann::json& d) const override {
    return std::make_shared<const ExternalModel>(name_, command_,
                                                 d.at("model_dir").get<std::string>(),
                                                 d.at("num_classes").get<std::size_t>());
  }

 private:
  std::string name_;
  std::string command_;
};

}  // namespace

CheckpointId CheckpointId::parse(std::string_view id) {
  const auto colon = id.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == id.size()) {
    throw FormatError("checkpoint id '" + std::string(id) + "' is not of the form backend:location");
  }
  return CheckpointId{std::string(id.substr(0, colon)), std::string(id.substr(colon + 1))};
}

BackendRegistry& BackendRegistry::global() {
  static BackendRegistry* registry = [] {
    auto* r = new BackendRegistry;
    r->add(static_embedding_backend());
    if (const char* cmd = std::getenv(kExternalCommandEnv); cmd && *cmd) {
      for (const char* name : {"bert", "albert", "xlnet"}) r->add(external_backend(name, cmd));
    }
    return r;
  }();
  return *registry;
}

void BackendRegistry::add(std::shared_ptr<const Backend> backend) {
  std::lock_guard lock(mutex_);
  backends_[backend->name()] = std::move(backend);
}

bool BackendRegistry::contains(std::string_view name) const {
  std::lock_guard lock(mutex_);
  return backends_.find(name) != backends_.end();
}

const Backend& BackendRegistry::get(std::string_view name) const {
  std::lock_guard lock(mutex_);
  const auto it = backends_.find(name);
  if (it == backends_.end()) {
    std::string known;
    for (const auto& [n, b] : backends_) known += (known.empty() ? "" : ", ") + n;
    throw CapabilityError("pretrained backend '" + std::string(name) +
                          "' is not installed (available: " + known + "; transformer backends " +
                          "need " + kExternalCommandEnv + ")");
  }
  return *it->second;
}

std::vector<std::string> BackendRegistry::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [n, b] : backends_) out.push_back(n);
  return out;
}

std::shared_ptr<const Backend> static_embedding_backend() {
  return std::make_shared<const StaticEmbeddingBackend>();
}

std::shared_ptr<const Backend> external_backend(std::string name, std::string command) {
  return std::make_shared<const ExternalBackend>(std::move(name), std::move(command));
}

WordVectors read_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("checkpoint not found: " + path.string());
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> row;
    double v;
    while (fields >> v) row.push_back(v);
    if (line_no == 1 && row.size() == 1) continue;  // "count dim" header
    if (!fields.eof() || row.empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed vector line");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(rows.front().size()) + " values");
    }
    tokens.push_back(std::move(token));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + " holds no word vectors");
  WordVectors out;
  out.tokens = std::move(tokens);
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return out;
}

TrainResult fine_tune(const std::string& checkpoint, const Corpus& train,
                      const std::optional<Corpus>& val, const TrainOptions& options,
                      std::uint64_t seed, ModelConfig config, const LossConfig& loss,
                      SamplingStrategy sampling) {
  const auto id = CheckpointId::parse(checkpoint);
  const auto& backend = BackendRegistry::global().get(id.backend);
  if (train.empty()) throw PreconditionError("training corpus is empty");
  config.topology = Topology::pretrained;
  config.pretrained_checkpoint = checkpoint;
  config.seed = seed;
  return backend.fine_tune(id.location, config, train, val, loss, sampling, options, seed);
}

}  // namespace citeimpact::pretrained
