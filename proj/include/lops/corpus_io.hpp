#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lops/corpus.hpp"

namespace lops {

struct LoadedCorpus {
  std::optional<LabelSpace> space;
  std::vector<Document> docs;
};

// JSONL, one {"id", "text", "gold_label"?} object per line. A leading
// {"labels": [...]} line declares the label space explicitly; otherwise it is
// the sorted set of observed gold labels.
LoadedCorpus load_corpus(std::istream& in);
LoadedCorpus load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const std::vector<Document>& docs,
                  const LabelSpace* space = nullptr);

// {"<label>": ["seed", "seed phrase", ...], ...}
SeedLexicon load_lexicon(std::istream& in);
SeedLexicon load_lexicon(const std::filesystem::path& path);

// {"id", "label", "source"} per line.
void write_pseudo_labels(std::ostream& out, const PseudoLabelSet& pseudo);

// Labels not present in `space` are appended to it.
PseudoLabelSet load_pseudo_labels(std::istream& in, LabelSpace space);
PseudoLabelSet load_pseudo_labels(const std::filesystem::path& path, LabelSpace space);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace lops
