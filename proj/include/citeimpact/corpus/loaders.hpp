#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"

namespace citeimpact {

/// A line the loader could not turn into an instance.
struct SkippedLine {
  std::size_t line = 0;
  std::string reason;
};

struct LoadDiagnostics {
  std::filesystem::path path;
  std::size_t lines_read = 0;
  std::size_t records = 0;
  std::vector<SkippedLine> skipped;
  std::vector<std::string> warnings;
};

/// Field mapping for SciCite record-per-line JSON files.
struct SciCiteFormat {
  std::string text_field = "string";
  std::string label_field = "label";
  /// Falls back to "<split>-<line>" when the field is absent.
  std::string id_field = "unique_id";
  std::string citing_field = "citingPaperId";
  std::string cited_field = "citedPaperId";
  std::string section_field = "sectionName";
};

struct SciCiteSplits {
  Corpus train;
  Corpus val;
  Corpus test;
  std::vector<LoadDiagnostics> diagnostics;
};

/// Loads one SciCite split. meta["split"] is set to `split_name`.
/// Malformed lines are skipped and reported; an unknown label, a missing file
/// or a file without any usable record is a FormatError/IoError.
Corpus load_scicite_split(const std::filesystem::path& path, const std::string& split_name,
                          const SciCiteFormat& format = {}, LoadDiagnostics* diagnostics = nullptr);

SciCiteSplits load_scicite(const std::filesystem::path& train_path,
                           const std::filesystem::path& val_path,
                           const std::filesystem::path& test_path,
                           const SciCiteFormat& format = {});

/// Loads the raw citation sentiment corpus: tab-delimited
/// `citing_id <TAB> cited_id <TAB> code <TAB> text` with '#' comment lines and
/// an optional column header. Codes p/n/o map to positive/negative/neutral.
/// Unknown codes and empty texts are skipped and reported.
Corpus load_csc(const std::filesystem::path& path, LoadDiagnostics* diagnostics = nullptr);

/// Canonical record-per-line export: a JSON header line followed by one JSON
/// object per instance (id, text, label name, meta).
void export_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Reads a file written by export_corpus.
Corpus import_corpus(const std::filesystem::path& path);

/// Concatenates corpora sharing a scheme.
Corpus concatenate(std::span<const Corpus> parts, std::string name);

}  // namespace citeimpact
