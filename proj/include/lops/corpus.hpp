#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lops {

// Zero-based index into a LabelSpace.
using LabelId = std::size_t;

class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  const std::string& name(LabelId id) const;
  std::optional<LabelId> find(std::string_view name) const;
  LabelId id(std::string_view name) const;  // throws ValidationError if unknown
  const std::vector<std::string>& names() const noexcept { return names_; }

  // Labels of `this` in order, then those of `other` not yet present.
  LabelSpace merged(const LabelSpace& other) const;

  bool operator==(const LabelSpace& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId> index_;
};

struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
  std::optional<LabelId> gold;
};

// Gold labels keyed by document id.
using GoldLabels = std::unordered_map<std::string, LabelId>;

GoldLabels gold_labels(const std::vector<Document>& docs);

struct SeedLexicon {
  // seeds[j] holds the lowercase seed terms of label j; a phrase is a
  // space-separated term.
  LabelSpace space;
  std::vector<std::vector<std::string>> seeds;

  std::size_t seed_count() const;
};

// Checks the one-label-per-seed invariant and label/space consistency.
SeedLexicon make_lexicon(const std::map<std::string, std::vector<std::string>>& by_label);

struct PseudoLabel {
  std::string doc_id;
  LabelId label;
};

class PseudoLabelSet {
 public:
  PseudoLabelSet() = default;
  PseudoLabelSet(LabelSpace space, std::string source);

  void add(std::string doc_id, LabelId label);

  const LabelSpace& space() const noexcept { return space_; }
  const std::string& source() const noexcept { return source_; }
  void set_source(std::string source) { source_ = std::move(source); }
  const std::vector<PseudoLabel>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  bool contains(std::string_view doc_id) const;
  std::optional<LabelId> label_of(std::string_view doc_id) const;

  // D[j]: entries carrying label j, in set order.
  std::vector<PseudoLabel> of_class(LabelId label) const;
  std::vector<std::size_t> class_counts() const;

  // Entries whose doc_id is in `ids`, preserving set order.
  PseudoLabelSet subset(const std::vector<std::string>& ids, std::string source) const;

 private:
  LabelSpace space_;
  std::string source_;
  std::vector<PseudoLabel> entries_;
  std::unordered_map<std::string, std::size_t> position_;
};

// Lowercase, split on runs of non-alphanumeric ASCII, drop empties.
std::vector<std::string> tokenize(std::string_view text);

// Assigns the label whose seeds have the largest aggregated term frequency.
// Ties and zero scores abstain.
PseudoLabelSet string_match_pseudolabel(const std::vector<Document>& docs,
                                        const SeedLexicon& lexicon);

// Non-overlapping occurrences of `phrase` (a token sequence) in `tokens`.
std::size_t count_phrase(const std::vector<std::string>& tokens,
                         const std::vector<std::string>& phrase);

enum class Weighting { kRawCount, kTfIdf };

std::string_view to_string(Weighting weighting);
Weighting parse_weighting(std::string_view name);

struct VectorizerOptions {
  Weighting weighting = Weighting::kTfIdf;
  std::size_t min_df = 1;
  // idf = ln((1 + N) / (1 + df)) + idf_offset
  double idf_offset = 1.0;
};

struct Vocabulary {
  std::vector<std::string> terms;  // column order, ascending
  std::vector<double> idf;         // empty for raw counts
  Weighting weighting = Weighting::kRawCount;
  std::unordered_map<std::string, std::size_t> column;

  std::size_t size() const noexcept { return terms.size(); }
  bool same_terms(const Vocabulary& other) const;
};

struct SparseEntry {
  std::size_t column;
  double value;
};

using SparseRow = std::vector<SparseEntry>;

class FeatureMatrix {
 public:
  FeatureMatrix(std::shared_ptr<const Vocabulary> vocabulary, std::vector<std::string> doc_ids,
                std::vector<SparseRow> rows);

  const Vocabulary& vocabulary() const noexcept { return *vocabulary_; }
  const std::shared_ptr<const Vocabulary>& vocabulary_ptr() const noexcept { return vocabulary_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t columns() const noexcept { return vocabulary_->size(); }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  const SparseRow& row(std::size_t index) const { return rows_.at(index); }

  std::optional<std::size_t> find_row(std::string_view doc_id) const;
  std::size_t row_of(std::string_view doc_id) const;  // throws ValidationError

 private:
  std::shared_ptr<const Vocabulary> vocabulary_;
  std::vector<std::string> doc_ids_;
  std::vector<SparseRow> rows_;
  std::unordered_map<std::string, std::size_t> row_index_;
};

FeatureMatrix vectorize(const std::vector<Document>& docs, const VectorizerOptions& options = {});

// Rows for `docs` under an existing vocabulary; unknown terms are ignored.
FeatureMatrix transform(std::shared_ptr<const Vocabulary> vocabulary,
                        const std::vector<Document>& docs);

// Fraction of entries whose pseudo-label differs from the gold label.
double noise_ratio(const PseudoLabelSet& pseudo, const GoldLabels& gold);
double noise_ratio(const PseudoLabelSet& pseudo, const std::vector<Document>& docs);

struct SynthSpec {
  std::size_t classes = 2;
  std::size_t n_per_class = 1000;
  std::size_t vocab_per_class = 50;
  std::size_t shared_vocab = 2000;
  std::size_t doc_len = 20;
  // Probability that a token is drawn from the class-private vocabulary.
  double class_token_prob = 0.6;
  double flip_rate = 0.0;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  LabelSpace space;
  std::vector<Document> docs;
  PseudoLabelSet pseudo;
};

SynthCorpus synth_corpus(const SynthSpec& spec);

}  // namespace lops
