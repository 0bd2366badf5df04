#include "citeimpact/corpus/loaders.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "citeimpact/common/error.hpp"
#include "citeimpact/corpus/tokenizer.hpp"

namespace citeimpact {
namespace {

using json = nlohmann::json;

constexpr std::string_view kCorpusFormat = "citeimpact.corpus";
constexpr int kCorpusFormatVersion = 1;

std::ifstream open_input(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("missing file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string unique_id(std::string id, std::size_t line, std::unordered_set<std::string>& seen,
                      LoadDiagnostics& diag) {
  if (seen.insert(id).second) return id;
  std::string renamed = id + "#L" + std::to_string(line);
  diag.warnings.push_back("line " + std::to_string(line) + ": duplicate id '" + id +
                          "' renamed to '" + renamed + "'");
  seen.insert(renamed);
  return renamed;
}

std::string describe_skips(const LoadDiagnostics& diag) {
  std::ostringstream out;
  std::size_t shown = 0;
  for (const auto& s : diag.skipped) {
    if (shown++ == 5) {
      out << "; ...";
      break;
    }
    out << (shown > 1 ? "; " : "") << "line " << s.line << ": " << s.reason;
  }
  return out.str();
}

}  // namespace

Corpus load_scicite_split(const std::filesystem::path& path, const std::string& split_name,
                          const SciCiteFormat& format, LoadDiagnostics* diagnostics) {
  auto in = open_input(path);
  LoadDiagnostics diag;
  diag.path = path;
  const auto scheme = LabelScheme::intent();
  std::vector<CitationInstance> instances;
  std::unordered_set<std::string> seen_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++diag.lines_read;
    strip_cr(line);
    if (!has_visible_text(line)) continue;
    if (!sanitize_utf8(line)) {
      diag.warnings.push_back("line " + std::to_string(line_no) +
                              ": ill-formed UTF-8 replaced with U+FFFD");
    }

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      diag.skipped.push_back({line_no, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (!record.is_object()) {
      diag.skipped.push_back({line_no, "record is not a JSON object"});
      continue;
    }
    auto text_it = record.find(format.text_field);
    if (text_it == record.end() || !text_it->is_string()) {
      diag.skipped.push_back({line_no, "missing string field '" + format.text_field + "'"});
      continue;
    }
    auto label_it = record.find(format.label_field);
    if (label_it == record.end() || !label_it->is_string()) {
      diag.skipped.push_back({line_no, "missing string field '" + format.label_field + "'"});
      continue;
    }
    auto text = text_it->get<std::string>();
    if (!has_visible_text(text)) {
      diag.skipped.push_back({line_no, "empty text"});
      continue;
    }
    const auto label_name = label_it->get<std::string>();
    const auto label = scheme.index_of(label_name);
    if (!label) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": unknown intent label '" +
                        label_name + "' (expected result, method or background)");
    }

    std::string id = split_name + "-" + std::to_string(line_no);
    if (auto it = record.find(format.id_field); it != record.end()) {
      if (it->is_string()) {
        id = it->get<std::string>();
      } else if (it->is_number_integer()) {
        id = std::to_string(it->get<long long>());
      }
    }

    CitationInstance inst;
    inst.id = unique_id(std::move(id), line_no, seen_ids, diag);
    inst.text = std::move(text);
    inst.label = *label;
    inst.meta["split"] = split_name;
    for (const auto& [field, key] : {std::pair{format.citing_field, "citing_paper"},
                                     std::pair{format.cited_field, "cited_paper"},
                                     std::pair{format.section_field, "section"}}) {
      if (auto it = record.find(field); it != record.end() && it->is_string()) {
        inst.meta[key] = it->get<std::string>();
      }
    }
    instances.push_back(std::move(inst));
  }

  diag.records = instances.size();
  if (instances.empty()) {
    throw FormatError("no parseable records in " + path.string() +
                      (diag.skipped.empty() ? "" : " (" + describe_skips(diag) + ")"));
  }
  if (diagnostics) *diagnostics = diag;
  return Corpus("scicite-" + split_name, scheme, std::move(instances));
}

SciCiteSplits load_scicite(const std::filesystem::path& train_path,
                           const std::filesystem::path& val_path,
                           const std::filesystem::path& test_path, const SciCiteFormat& format) {
  std::vector<LoadDiagnostics> diags(3);
  auto train = load_scicite_split(train_path, "train", format, &diags[0]);
  auto val = load_scicite_split(val_path, "val", format, &diags[1]);
  auto test = load_scicite_split(test_path, "test", format, &diags[2]);
  return SciCiteSplits{std::move(train), std::move(val), std::move(test), std::move(diags)};
}

Corpus load_csc(const std::filesystem::path& path, LoadDiagnostics* diagnostics) {
  auto in = open_input(path);
  LoadDiagnostics diag;
  diag.path = path;
  const auto scheme = LabelScheme::sentiment();
  std::vector<CitationInstance> instances;
  std::unordered_set<std::string> seen_ids;

  std::string line;
  std::size_t line_no = 0;
  std::size_t record_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++diag.lines_read;
    strip_cr(line);
    if (!has_visible_text(line) || line.front() == '#') continue;
    if (!sanitize_utf8(line)) {
      diag.warnings.push_back("line " + std::to_string(line_no) +
                              ": ill-formed UTF-8 replaced with U+FFFD");
    }

    std::vector<std::string> fields;
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      const auto tab = line.find('\t', start);
      if (tab == std::string::npos) break;
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() < 3) {
      diag.skipped.push_back({line_no, "expected 4 tab-separated fields"});
      continue;
    }
    // Remaining tabs belong to the citation text.
    std::string text = line.substr(start);
    const std::string& code = fields[2];
    if (code == "Sentiment") continue;  // column header

    std::optional<std::size_t> label;
    if (code == "p") label = 0;
    else if (code == "n") label = 1;
    else if (code == "o") label = 2;
    if (!label) {
      diag.skipped.push_back({line_no, "unknown sentiment code '" + code + "'"});
      continue;
    }
    if (!has_visible_text(text)) {
      diag.skipped.push_back({line_no, "empty citation text"});
      continue;
    }

    ++record_no;
    CitationInstance inst;
    inst.id = unique_id("csc-" + std::to_string(record_no), line_no, seen_ids, diag);
    inst.text = std::move(text);
    inst.label = *label;
    inst.meta["citing_paper"] = fields[0];
    inst.meta["cited_paper"] = fields[1];
    inst.meta["line"] = std::to_string(line_no);
    instances.push_back(std::move(inst));
  }
  diag.records = instances.size();
  if (diagnostics) *diagnostics = diag;
  return Corpus("csc", scheme, std::move(instances));
}

void export_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());

  json header = {{"format", kCorpusFormat},
                 {"version", kCorpusFormatVersion},
                 {"name", corpus.name()},
                 {"task", to_string(corpus.scheme().task())},
                 {"labels", corpus.scheme().labels()},
                 {"count", corpus.size()}};
  out << header.dump() << '\n';
  for (const auto& inst : corpus) {
    json record = {{"id", inst.id},
                   {"text", inst.text},
                   {"label", corpus.scheme().name(inst.label)},
                   {"meta", inst.meta}};
    out << record.dump() << '\n';
  }
  if (!out) throw IoError("failed while writing " + path.string());
}

Corpus import_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing corpus header");
  strip_cr(line);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ":1: invalid corpus header: " + e.what());
  }
  if (!header.is_object() || header.value("format", "") != kCorpusFormat) {
    throw FormatError(path.string() + ": not a citeimpact corpus export");
  }
  if (header.value("version", 0) != kCorpusFormatVersion) {
    throw VersionError(path.string() + ": unsupported corpus export version " +
                       std::to_string(header.value("version", 0)));
  }
  LabelScheme scheme(task_from_string(header.at("task").get<std::string>()),
                     header.at("labels").get<std::vector<std::string>>());

  std::vector<CitationInstance> instances;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    try {
      const auto record = json::parse(line);
      CitationInstance inst;
      inst.id = record.at("id").get<std::string>();
      inst.text = record.at("text").get<std::string>();
      const auto label_name = record.at("label").get<std::string>();
      const auto label = scheme.index_of(label_name);
      if (!label) throw FormatError("unknown label '" + label_name + "'");
      inst.label = *label;
      if (auto it = record.find("meta"); it != record.end()) {
        inst.meta = it->get<std::map<std::string, std::string>>();
      }
      instances.push_back(std::move(inst));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  const auto expected = header.value("count", instances.size());
  if (expected != instances.size()) {
    throw IntegrityError(path.string() + ": header announces " + std::to_string(expected) +
                         " records but file holds " + std::to_string(instances.size()));
  }
  return Corpus(header.value("name", path.stem().string()), std::move(scheme),
                std::move(instances));
}

Corpus concatenate(std::span<const Corpus> parts, std::string name) {
  if (parts.empty()) throw PreconditionError("nothing to concatenate");
  std::vector<CitationInstance> all;
  for (const auto& part : parts) {
    if (!(part.scheme() == parts.front().scheme())) {
      throw PreconditionError("cannot concatenate corpora with different label schemes");
    }
    all.insert(all.end(), part.begin(), part.end());
  }
  return Corpus(std::move(name), parts.front().scheme(), std::move(all));
}

}  // namespace citeimpact
