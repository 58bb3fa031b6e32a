#include "lops/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "lops/error.hpp"
#include "lops/rng.hpp"

namespace lops {

LabelSpace::LabelSpace(std::vector<std::string> names) : names_(std::move(names)) {
  for (LabelId i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw ValidationError("label names must be non-empty");
    if (!index_.emplace(names_[i], i).second) {
      throw ValidationError("duplicate label name '" + names_[i] + "'");
    }
  }
}

const std::string& LabelSpace::name(LabelId id) const {
  if (id >= names_.size()) {
    throw ValidationError("label index " + std::to_string(id) + " outside label space of size " +
                          std::to_string(names_.size()));
  }
  return names_[id];
}

std::optional<LabelId> LabelSpace::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LabelId LabelSpace::id(std::string_view name) const {
  if (auto found = find(name)) return *found;
  throw ValidationError("unknown label '" + std::string(name) + "'");
}

LabelSpace LabelSpace::merged(const LabelSpace& other) const {
  std::vector<std::string> names = names_;
  for (const auto& n : other.names_) {
    if (!find(n)) names.push_back(n);
  }
  return LabelSpace(std::move(names));
}

GoldLabels gold_labels(const std::vector<Document>& docs) {
  GoldLabels gold;
  for (const auto& doc : docs) {
    if (doc.gold) gold.emplace(doc.id, *doc.gold);
  }
  return gold;
}

std::size_t SeedLexicon::seed_count() const {
  std::size_t n = 0;
  for (const auto& s : seeds) n += s.size();
  return n;
}

SeedLexicon make_lexicon(const std::map<std::string, std::vector<std::string>>& by_label) {
  std::vector<std::string> names;
  SeedLexicon lexicon;
  std::unordered_map<std::string, std::string> owner;
  for (const auto& [label, seeds] : by_label) {
    names.push_back(label);
    std::vector<std::string> normalized;
    for (const auto& seed : seeds) {
      // Seeds go through the document tokenizer so phrases match token runs.
      auto tokens = tokenize(seed);
      if (tokens.empty()) continue;
      std::string joined;
      for (const auto& t : tokens) joined += (joined.empty() ? "" : " ") + t;
      auto [it, inserted] = owner.emplace(joined, label);
      if (!inserted) {
        if (it->second == label) continue;
        throw ValidationError("seed '" + joined + "' listed under both '" + it->second + "' and '" +
                              label + "'");
      }
      normalized.push_back(std::move(joined));
    }
    lexicon.seeds.push_back(std::move(normalized));
  }
  lexicon.space = LabelSpace(std::move(names));
  return lexicon;
}

PseudoLabelSet::PseudoLabelSet(LabelSpace space, std::string source)
    : space_(std::move(space)), source_(std::move(source)) {}

void PseudoLabelSet::add(std::string doc_id, LabelId label) {
  if (label >= space_.size()) {
    throw ValidationError("pseudo-label " + std::to_string(label) + " for '" + doc_id +
                          "' is outside the label space");
  }
  if (position_.contains(doc_id)) {
    throw ValidationError("document '" + doc_id + "' already carries a pseudo-label");
  }
  position_.emplace(doc_id, entries_.size());
  entries_.push_back({std::move(doc_id), label});
}

bool PseudoLabelSet::contains(std::string_view doc_id) const {
  return position_.contains(std::string(doc_id));
}

std::optional<LabelId> PseudoLabelSet::label_of(std::string_view doc_id) const {
  auto it = position_.find(std::string(doc_id));
  if (it == position_.end()) return std::nullopt;
  return entries_[it->second].label;
}

std::vector<PseudoLabel> PseudoLabelSet::of_class(LabelId label) const {
  std::vector<PseudoLabel> out;
  for (const auto& e : entries_) {
    if (e.label == label) out.push_back(e);
  }
  return out;
}

std::vector<std::size_t> PseudoLabelSet::class_counts() const {
  std::vector<std::size_t> counts(space_.size(), 0);
  for (const auto& e : entries_) ++counts[e.label];
  return counts;
}

PseudoLabelSet PseudoLabelSet::subset(const std::vector<std::string>& ids,
                                      std::string source) const {
  std::unordered_map<std::string, bool> wanted;
  for (const auto& id : ids) {
    if (!contains(id)) throw ValidationError("document '" + id + "' is not in the pseudo-label set");
    wanted.emplace(id, true);
  }
  PseudoLabelSet out(space_, std::move(source));
  for (const auto& e : entries_) {
    if (wanted.contains(e.doc_id)) out.add(e.doc_id, e.label);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) && uc < 0x80) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t count_phrase(const std::vector<std::string>& tokens,
                         const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return 0;
  std::size_t count = 0;
  std::size_t i = 0;
  while (i + phrase.size() <= tokens.size()) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      ++count;
      i += phrase.size();
    } else {
      ++i;
    }
  }
  return count;
}

PseudoLabelSet string_match_pseudolabel(const std::vector<Document>& docs,
                                        const SeedLexicon& lexicon) {
  if (lexicon.seed_count() == 0) throw ValidationError("seed lexicon is empty");
  if (lexicon.seeds.size() != lexicon.space.size()) {
    throw ValidationError("seed lexicon does not cover its label space");
  }

  std::vector<std::vector<std::vector<std::string>>> phrases(lexicon.seeds.size());
  for (std::size_t j = 0; j < lexicon.seeds.size(); ++j) {
    for (const auto& seed : lexicon.seeds[j]) phrases[j].push_back(tokenize(seed));
  }

  PseudoLabelSet out(lexicon.space, "string-match");
  std::vector<std::size_t> scores(phrases.size());
  for (const auto& doc : docs) {
    for (std::size_t j = 0; j < phrases.size(); ++j) {
      scores[j] = 0;
      for (const auto& phrase : phrases[j]) scores[j] += count_phrase(doc.tokens, phrase);
    }
    const auto best = std::max_element(scores.begin(), scores.end());
    if (*best == 0 || std::count(scores.begin(), scores.end(), *best) > 1) continue;
    out.add(doc.id, static_cast<LabelId>(best - scores.begin()));
  }
  return out;
}

std::string_view to_string(Weighting weighting) {
  return weighting == Weighting::kTfIdf ? "tf-idf" : "raw-count";
}

Weighting parse_weighting(std::string_view name) {
  if (name == "tf-idf" || name == "tfidf") return Weighting::kTfIdf;
  if (name == "raw-count" || name == "raw") return Weighting::kRawCount;
  throw ValidationError("unknown feature weighting '" + std::string(name) + "'");
}

bool Vocabulary::same_terms(const Vocabulary& other) const {
  return this == &other || terms == other.terms;
}

FeatureMatrix::FeatureMatrix(std::shared_ptr<const Vocabulary> vocabulary,
                             std::vector<std::string> doc_ids, std::vector<SparseRow> rows)
    : vocabulary_(std::move(vocabulary)), doc_ids_(std::move(doc_ids)), rows_(std::move(rows)) {
  if (doc_ids_.size() != rows_.size()) throw ValidationError("row count does not match doc ids");
  for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
    if (!row_index_.emplace(doc_ids_[i], i).second) {
      throw ValidationError("duplicate document id '" + doc_ids_[i] + "' in feature matrix");
    }
  }
}

std::optional<std::size_t> FeatureMatrix::find_row(std::string_view doc_id) const {
  auto it = row_index_.find(std::string(doc_id));
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureMatrix::row_of(std::string_view doc_id) const {
  if (auto r = find_row(doc_id)) return *r;
  throw ValidationError("no feature row for document '" + std::string(doc_id) + "'");
}

namespace {

SparseRow weigh_row(const Vocabulary& vocab, const std::vector<std::string>& tokens) {
  std::map<std::size_t, double> counts;
  for (const auto& t : tokens) {
    auto it = vocab.column.find(t);
    if (it != vocab.column.end()) counts[it->second] += 1.0;
  }
  SparseRow row;
  row.reserve(counts.size());
  for (const auto& [column, count] : counts) row.push_back({column, count});
  if (vocab.weighting == Weighting::kTfIdf) {
    double norm = 0.0;
    for (auto& e : row) {
      e.value *= vocab.idf[e.column];
      norm += e.value * e.value;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (auto& e : row) e.value /= norm;
    }
  }
  return row;
}

}  // namespace

FeatureMatrix vectorize(const std::vector<Document>& docs, const VectorizerOptions& options) {
  if (docs.empty()) throw ValidationError("cannot vectorize an empty document list");
  if (options.min_df == 0) throw ValidationError("min_df must be at least 1");

  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::set<std::string_view> seen(doc.tokens.begin(), doc.tokens.end());
    for (auto t : seen) ++df[std::string(t)];
  }

  auto vocab = std::make_shared<Vocabulary>();
  vocab->weighting = options.weighting;
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, count] : df) {
    if (count < options.min_df) continue;
    vocab->column.emplace(term, vocab->terms.size());
    vocab->terms.push_back(term);
    if (options.weighting == Weighting::kTfIdf) {
      vocab->idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) +
                           options.idf_offset);
    }
  }
  if (vocab->terms.empty()) throw ValidationError("vocabulary is empty after min_df filtering");

  return transform(std::move(vocab), docs);
}

FeatureMatrix transform(std::shared_ptr<const Vocabulary> vocabulary,
                        const std::vector<Document>& docs) {
  std::vector<std::string> ids;
  std::vector<SparseRow> rows;
  ids.reserve(docs.size());
  rows.reserve(docs.size());
  for (const auto& doc : docs) {
    ids.push_back(doc.id);
    rows.push_back(weigh_row(*vocabulary, doc.tokens));
  }
  return FeatureMatrix(std::move(vocabulary), std::move(ids), std::move(rows));
}

double noise_ratio(const PseudoLabelSet& pseudo, const GoldLabels& gold) {
  if (pseudo.empty()) throw ValidationError("noise ratio of an empty pseudo-label set");
  std::size_t wrong = 0;
  for (const auto& e : pseudo.entries()) {
    auto it = gold.find(e.doc_id);
    if (it == gold.end()) throw ValidationError("document '" + e.doc_id + "' has no gold label");
    if (it->second != e.label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(pseudo.size());
}

double noise_ratio(const PseudoLabelSet& pseudo, const std::vector<Document>& docs) {
  return noise_ratio(pseudo, gold_labels(docs));
}

SynthCorpus synth_corpus(const SynthSpec& spec) {
  if (spec.classes < 2) throw ValidationError("synthetic corpus needs at least 2 classes");
  if (spec.n_per_class == 0 || spec.vocab_per_class == 0 || spec.shared_vocab == 0 ||
      spec.doc_len == 0) {
    throw ValidationError("synthetic corpus counts must be at least 1");
  }
  if (!(spec.flip_rate >= 0.0 && spec.flip_rate < 1.0)) {
    throw ValidationError("flip rate must lie in [0, 1)");
  }
  if (!(spec.class_token_prob >= 0.0 && spec.class_token_prob <= 1.0)) {
    throw ValidationError("class token probability must lie in [0, 1]");
  }

  std::vector<std::string> names;
  for (std::size_t j = 0; j < spec.classes; ++j) names.push_back("class" + std::to_string(j));
  SynthCorpus out{LabelSpace(std::move(names)), {}, {}};

  Rng rng(derive_seed(spec.seed, "synth"));
  const std::size_t total = spec.classes * spec.n_per_class;

  std::vector<LabelId> gold(total);
  for (std::size_t i = 0; i < total; ++i) gold[i] = i / spec.n_per_class;
  rng.shuffle(std::span<LabelId>(gold));

  const auto width = std::to_string(total).size();
  out.docs.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::string id = std::to_string(i);
    id = "doc" + std::string(width - id.size(), '0') + id;
    std::ostringstream text;
    for (std::size_t k = 0; k < spec.doc_len; ++k) {
      if (k > 0) text << ' ';
      if (rng.uniform() < spec.class_token_prob) {
        text << 'c' << gold[i] << 'w' << rng.below(spec.vocab_per_class);
      } else {
        text << 's' << rng.below(spec.shared_vocab);
      }
    }
    Document doc{std::move(id), text.str(), {}, gold[i]};
    doc.tokens = tokenize(doc.text);
    out.docs.push_back(std::move(doc));
  }

  // Exactly round(rho * N) flips, chosen by a partial Fisher-Yates pass.
  const auto flips = static_cast<std::size_t>(std::llround(spec.flip_rate * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabelId> assigned = gold;
  for (std::size_t k = 0; k < flips; ++k) {
    std::swap(order[k], order[k + rng.below(total - k)]);
    const std::size_t doc = order[k];
    const LabelId offset = 1 + rng.below(spec.classes - 1);
    assigned[doc] = (gold[doc] + offset) % spec.classes;
  }

  out.pseudo = PseudoLabelSet(out.space, "synthetic");
  for (std::size_t i = 0; i < total; ++i) out.pseudo.add(out.docs[i].id, assigned[i]);
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  // FNV-1a over the stream tag.
  std::uint64_t tag = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    tag ^= static_cast<unsigned char>(c);
    tag *= 0x100000001b3ULL;
  }
  return mix(mix(mix(seed) ^ tag) ^ index);
}

}  // namespace lops
