#include "citeimpact/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "citeimpact/common/error.hpp"

namespace citeimpact {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string cell(const std::optional<double>& v) { return v ? percent2(*v) : "-"; }

}  // namespace

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "md" || name == "markdown") return ReportFormat::markdown;
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw FormatError("unknown report format '" + std::string(name) + "' (expected csv, md or json)");
}

std::string_view extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::markdown: return "md";
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
  }
  return "txt";
}

std::string percent2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
  return buf;
}

std::string render_report(std::vector<ReportRow> rows, ReportFormat format) {
  if (rows.empty()) throw PreconditionError("no reports to render");
  const auto labels = rows.front().report.matrix.labels();
  for (const auto& r : rows) {
    if (r.report.matrix.labels() != labels) {
      throw PreconditionError("reports use different label lists");
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.topology, a.modification) < std::tie(b.topology, b.modification);
  });

  std::ostringstream out;
  if (format == ReportFormat::json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
      j.push_back({{"topology", r.topology},
                   {"modification", r.modification},
                   {"evaluation", to_json(r.report)}});
    }
    out << j.dump(2) << '\n';
    return out.str();
  }
  if (format == ReportFormat::csv) {
    out << "topology,modification";
    for (const auto& l : labels) out << ",accuracy_" << csv_field(l);
    out << ",micro_f1,macro_f1\n";
    for (const auto& r : rows) {
      out << csv_field(r.topology) << ',' << csv_field(r.modification);
      for (const auto& a : r.report.class_accuracy) out << ',' << cell(a);
      out << ',' << percent2(r.report.micro_f1) << ',' << percent2(r.report.macro_f1) << '\n';
    }
    return out.str();
  }
  out << "| Topology | Modification |";
  for (const auto& l : labels) out << ' ' << l << " |";
  out << " micro-F1 | macro-F1 |\n|---|---|";
  for (std::size_t i = 0; i < labels.size(); ++i) out << "---:|";
  out << "---:|---:|\n";
  for (const auto& r : rows) {
    out << "| " << r.topology << " | " << r.modification << " |";
    for (const auto& a : r.report.class_accuracy) out << ' ' << cell(a) << " |";
    out << ' ' << percent2(r.report.micro_f1) << " | " << percent2(r.report.macro_f1) << " |\n";
  }
  return out.str();
}

void emit_report(std::vector<ReportRow> rows, ReportFormat format,
                 const std::filesystem::path& path) {
  const auto text = render_report(std::move(rows), format);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json matrix = nlohmann::json::array();
  for (std::size_t g = 0; g < r.matrix.num_classes(); ++g) {
    std::vector<std::size_t> row;
    for (std::size_t p = 0; p < r.matrix.num_classes(); ++p) row.push_back(r.matrix.at(g, p));
    matrix.push_back(row);
  }
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < r.class_scores.size(); ++c) {
    nlohmann::json acc = nullptr;
    if (r.class_accuracy[c]) acc = *r.class_accuracy[c];
    classes.push_back({{"label", r.matrix.labels()[c]},
                       {"accuracy", acc},
                       {"precision", r.class_scores[c].precision},
                       {"recall", r.class_scores[c].recall},
                       {"f1", r.class_scores[c].f1},
                       {"support", r.class_scores[c].support}});
  }
  return {{"labels", r.matrix.labels()},
          {"confusion", matrix},
          {"classes", classes},
          {"micro_f1", r.micro_f1},
          {"macro_f1", r.macro_f1},
          {"instances", r.instances},
          {"warnings", r.warnings}};
}

EvaluationReport evaluation_from_json(const nlohmann::json& j) {
  try {
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    ConfusionMatrix m(labels, j.at("confusion").get<std::vector<std::vector<std::size_t>>>());
    EvaluationReport r = evaluate(m);
    // Stored scalars win: an averaged CV view is not recomputable from its matrix.
    r.micro_f1 = j.at("micro_f1").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    const auto& classes = j.at("classes");
    for (std::size_t c = 0; c < classes.size() && c < r.class_accuracy.size(); ++c) {
      const auto& acc = classes[c].at("accuracy");
      r.class_accuracy[c] = acc.is_null() ? std::nullopt : std::optional<double>(acc.get<double>());
      r.class_scores[c].precision = classes[c].at("precision").get<double>();
      r.class_scores[c].recall = classes[c].at("recall").get<double>();
      r.class_scores[c].f1 = classes[c].at("f1").get<double>();
    }
    r.warnings = j.value("warnings", r.warnings);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("evaluation report: ") + e.what());
  }
}

nlohmann::json to_json(const CvReport& r) {
  return {{"folds", r.folds}, {"averaged", to_json(r.averaged)}, {"pooled", to_json(r.pooled)}};
}

}  // namespace citeimpact
