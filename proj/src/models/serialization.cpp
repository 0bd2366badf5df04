#include "citeimpact/models/serialization.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "citeimpact/common/error.hpp"
#include "citeimpact/common/hash.hpp"
#include "citeimpact/models/pretrained.hpp"

namespace citeimpact {
namespace {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

constexpr std::array<char, 8> kMagic = {'C', 'I', 'T', 'E', 'M', 'D', 'L', '\0'};
constexpr std::size_t kPreamble = 8 + 4 + 8 + 8;

template <typename T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IntegrityError("model file is truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

std::uint64_t checksum(const std::string& bytes, std::size_t from) {
  return fnv1a64(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(bytes.data()) + from, bytes.size() - from));
}

std::shared_ptr<const ClassifierModel> rebuild_network(const nlohmann::json& model,
                                                       const nlohmann::json& shapes,
                                                       const std::string& payload,
                                                       std::size_t pos) {
  const auto config = ModelConfig::from_json(model.at("config"));
  auto vocab = Vocabulary::from_tokens(
      std::vector<std::string>(model.at("vocabulary").begin() + 2, model.at("vocabulary").end()),
      model.at("min_frequency").get<std::size_t>());
  Network net(config, vocab.size(), model.at("num_classes").get<std::size_t>());
  auto& params = net.parameters();
  if (shapes.size() != params.size()) throw IntegrityError("model file has the wrong parameter count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = params[i].value;
    if (shapes[i].at(0).get<Eigen::Index>() != value.rows() ||
        shapes[i].at(1).get<Eigen::Index>() != value.cols()) {
      throw IntegrityError("parameter '" + params[i].name + "' has the wrong shape");
    }
    const auto bytes = static_cast<std::size_t>(value.size()) * sizeof(double);
    if (pos + bytes > payload.size()) throw IntegrityError("model file is truncated");
    std::memcpy(value.data(), payload.data() + pos, bytes);
    pos += bytes;
  }
  if (pos != payload.size()) throw IntegrityError("model file has trailing bytes");
  return std::make_shared<const NetworkModel>(std::move(net), std::move(vocab));
}

}  // namespace

void save_model(const Classifier& classifier, const std::filesystem::path& path) {
  const auto& model = classifier.model();
  nlohmann::json header = {{"scheme",
                            {{"task", to_string(classifier.scheme().task())},
                             {"labels", classifier.scheme().labels()}}},
                           {"model", model.describe()},
                           {"shapes", nlohmann::json::array()}};
  std::string weights;
  if (const auto* net = dynamic_cast<const NetworkModel*>(&model)) {
    for (const auto& p : net->network().parameters()) {
      header["shapes"].push_back({p.value.rows(), p.value.cols()});
      weights.append(reinterpret_cast<const char*>(p.value.data()),
                     static_cast<std::size_t>(p.value.size()) * sizeof(double));
    }
  }
  const auto header_text = header.dump();
  std::string payload;
  put<std::uint32_t>(payload, static_cast<std::uint32_t>(header_text.size()));
  payload += header_text;
  payload += weights;

  std::string file(kMagic.begin(), kMagic.end());
  put<std::uint32_t>(file, kModelSchemaVersion);
  put<std::uint64_t>(file, payload.size());
  put<std::uint64_t>(file, checksum(payload, 0));
  file += payload;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file " + path.string());
  out.write(file.data(), static_cast<std::streamsize>(file.size()));
  if (!out) throw IoError("failed writing model file " + path.string());
}

Classifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (file.size() < kPreamble || !std::equal(kMagic.begin(), kMagic.end(), file.begin())) {
    throw IntegrityError(path.string() + " is not a model file");
  }
  std::size_t pos = kMagic.size();
  const auto version = get<std::uint32_t>(file, pos);
  if (version != kModelSchemaVersion) {
    throw VersionError(path.string() + " uses model schema version " + std::to_string(version) +
                       "; this build reads version " + std::to_string(kModelSchemaVersion));
  }
  const auto size = get<std::uint64_t>(file, pos);
  const auto sum = get<std::uint64_t>(file, pos);
  if (file.size() - pos != size) throw IntegrityError(path.string() + " is truncated or padded");
  const std::string payload = file.substr(pos);
  if (checksum(payload, 0) != sum) throw IntegrityError(path.string() + " fails its checksum");

  std::size_t p = 0;
  const auto header_len = get<std::uint32_t>(payload, p);
  if (p + header_len > payload.size()) throw IntegrityError("model header is truncated");
  try {
    const auto header = nlohmann::json::parse(payload.substr(p, header_len));
    p += header_len;
    LabelScheme scheme(task_from_string(header.at("scheme").at("task").get<std::string>()),
                       header.at("scheme").at("labels").get<std::vector<std::string>>());
    const auto& model = header.at("model");
    const auto family = model.at("family").get<std::string>();
    if (family == "network") {
      return Classifier(std::move(scheme), rebuild_network(model, header.at("shapes"), payload, p));
    }
    const auto backend = model.at("backend").get<std::string>();
    return Classifier(std::move(scheme),
                      pretrained::BackendRegistry::global().get(backend).load(model));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("model header is malformed: ") + e.what());
  }
}

}  // namespace citeimpact
