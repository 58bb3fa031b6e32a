#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lops/corpus.hpp"

namespace lops::testing {

inline std::string doc_name(std::size_t i) {
  std::string digits = std::to_string(i);
  return "d" + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
}

inline LabelSpace labels(std::size_t m) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < m; ++j) names.push_back("c" + std::to_string(j));
  return LabelSpace(names);
}

inline PseudoLabelSet pseudo_set(std::size_t m, const std::vector<LabelId>& labels_in_order) {
  PseudoLabelSet set(labels(m), "test");
  for (std::size_t i = 0; i < labels_in_order.size(); ++i) set.add(doc_name(i), labels_in_order[i]);
  return set;
}

inline GoldLabels gold_map(const std::vector<LabelId>& gold) {
  GoldLabels out;
  for (std::size_t i = 0; i < gold.size(); ++i) out[doc_name(i)] = gold[i];
  return out;
}

inline Document make_doc(std::string id, std::string text, std::optional<LabelId> gold = {}) {
  Document d{std::move(id), std::move(text), {}, gold};
  d.tokens = tokenize(d.text);
  return d;
}

}  // namespace lops::testing
