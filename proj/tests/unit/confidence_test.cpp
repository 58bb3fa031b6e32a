#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "lops/confidence.hpp"
#include "lops/error.hpp"
#include "lops/rng.hpp"
#include "support.hpp"

namespace lops {
namespace {

using testing::pseudo_set;

// One tracked doc per column of `bitmaps`.
LearningTrace trace_from(const PseudoLabelSet& pseudo, const std::vector<std::vector<bool>>& rows,
                         std::size_t total) {
  LearningTrace trace(pseudo.entries(), total);
  const std::size_t steps = rows.empty() ? 0 : rows[0].size();
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<bool> column(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i][t];
    trace.record(column);
  }
  return trace;
}

TrainedModel planted_model(std::size_t classes, std::size_t features) {
  TrainedModel model;
  model.params = LinearParams(classes, features);
  model.space = testing::labels(classes);
  auto vocab = std::make_shared<Vocabulary>();
  for (std::size_t c = 0; c < features; ++c) {
    vocab->terms.push_back("f" + std::to_string(c));
    vocab->column[vocab->terms.back()] = c;
  }
  model.vocabulary = vocab;
  return model;
}

FeatureMatrix indicator_rows(const TrainedModel& model, std::size_t n) {
  std::vector<std::string> ids;
  std::vector<SparseRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(testing::doc_name(i));
    rows.push_back({{i % model.params.features, 1.0}});
  }
  return FeatureMatrix(model.vocabulary, ids, rows);
}

TEST(LearningOrder, ExactForEveryEpochAndBudget) {
  for (std::size_t total = 1; total <= 16; ++total) {
    for (std::size_t t = 1; t <= total; ++t) {
      const auto pseudo = pseudo_set(2, {0, 1});
      std::vector<std::vector<bool>> rows(2, std::vector<bool>(total, false));
      for (std::size_t k = t - 1; k < total; ++k) rows[0][k] = true;
      const auto scores = learning_order(trace_from(pseudo, rows, total), pseudo);
      EXPECT_EQ(scores.entries[0].score, 1.0 - static_cast<double>(t) / static_cast<double>(total));
      EXPECT_EQ(scores.entries[1].score, 0.0);
    }
  }
}

TEST(LearningOrder, HandValues) {
  const auto pseudo = pseudo_set(2, {0, 1, 0, 1});
  const auto trace = trace_from(pseudo,
                                {{true, true, true, true},
                                 {false, false, false, false},
                                 {false, false, false, true},
                                 {false, true, false, true}},
                                4);
  const auto scores = learning_order(trace, pseudo);
  EXPECT_EQ(scores.entries[0].score, 0.75);
  EXPECT_EQ(scores.entries[1].score, 0.0);
  EXPECT_EQ(scores.entries[2].score, 0.0);
  EXPECT_EQ(scores.entries[3].score, 0.5);
  EXPECT_EQ(trace.first_learnt(3), 2u);
  EXPECT_FALSE(trace.first_learnt(1));
}

TEST(LearningOrder, GranularityAndMonotonicity) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t total = 1 + rng.below(8);
    const std::size_t n = 1 + rng.below(30);
    std::vector<LabelId> labels(n);
    for (auto& l : labels) l = rng.below(3);
    const auto pseudo = pseudo_set(3, labels);
    std::vector<std::vector<bool>> rows(n, std::vector<bool>(total));
    for (auto& row : rows) {
      for (std::size_t t = 0; t < total; ++t) row[t] = rng.uniform() < 0.4;
    }
    const auto trace = trace_from(pseudo, rows, total);
    const auto scores = learning_order(trace, pseudo);
    std::set<double> distinct;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = scores.entries[i].score;
      distinct.insert(s);
      EXPECT_GE(s, 0.0);
      EXPECT_LT(s, 1.0);
      for (std::size_t k = 0; k < n; ++k) {
        const auto a = trace.first_learnt(i), b = trace.first_learnt(k);
        if (a && b && *a < *b) EXPECT_GT(s, scores.entries[k].score);
      }
    }
    EXPECT_LE(distinct.size(), total + 1);
  }
}

TEST(Stability, CountsCorrectCheckpoints) {
  const auto pseudo = pseudo_set(2, {0, 1, 0});
  const auto trace = trace_from(
      pseudo, {{true, true, true, true}, {false, false, false, false}, {false, true, false, true}}, 4);
  const auto scores = stability_confidence(trace, pseudo);
  EXPECT_EQ(scores.entries[0].score, 1.0);
  EXPECT_EQ(scores.entries[1].score, 0.0);
  EXPECT_EQ(scores.entries[2].score, 0.5);
}

TEST(Stability, AtLeastOneOverTForMonotoneLearners) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t total = 1 + rng.below(10);
    const std::size_t n = 1 + rng.below(20);
    const auto pseudo = pseudo_set(2, std::vector<LabelId>(n, 0));
    std::vector<std::vector<bool>> rows(n, std::vector<bool>(total, false));
    for (auto& row : rows) {
      const std::size_t start = rng.below(total + 1);
      for (std::size_t t = start; t < total; ++t) row[t] = true;
    }
    const auto trace = trace_from(pseudo, rows, total);
    const auto scores = stability_confidence(trace, pseudo);
    for (std::size_t i = 0; i < n; ++i) {
      if (trace.first_learnt(i)) EXPECT_GE(scores.entries[i].score, 1.0 / static_cast<double>(total));
    }
  }
}

TEST(Trace, RejectsOverflowAndMismatch) {
  const auto pseudo = pseudo_set(2, {0, 1});
  LearningTrace trace(pseudo.entries(), 1);
  trace.record({true, false});
  EXPECT_THROW(trace.record({true, false}), ValidationError);
  EXPECT_THROW(learning_order(trace, pseudo_set(2, {0})), ValidationError);
  LearningTrace fresh(pseudo.entries(), 2);
  EXPECT_THROW(stability_confidence(fresh, pseudo), ValidationError);
}

TEST(Entropy, ClosedForms) {
  EXPECT_NEAR(normalized_entropy_confidence(std::vector<double>{0.5, 0.5}), 0.0, 1e-15);
  EXPECT_NEAR(normalized_entropy_confidence(std::vector<double>(5, 0.2)), 0.0, 1e-12);
  EXPECT_EQ(normalized_entropy_confidence(std::vector<double>{0.0, 1.0, 0.0}), 1.0);
  EXPECT_NEAR(normalized_entropy_confidence(std::vector<double>{0.9, 0.1}), 0.5310044064107189, 1e-12);
}

TEST(Entropy, AgreesWithProbabilityOnBinaryRanking) {
  Rng rng(8);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 500; ++i) {
    const double p = 0.5 + 0.5 * rng.uniform();
    pairs.emplace_back(p, normalized_entropy_confidence(std::vector<double>{p, 1.0 - p}));
  }
  for (const auto& [pa, ea] : pairs) {
    for (const auto& [pb, eb] : pairs) {
      if (pa < pb) EXPECT_LE(ea, eb);
    }
  }
}

TEST(ProbabilityScore, UniformAndPlantedModels) {
  auto model = planted_model(5, 3);
  const auto features = indicator_rows(model, 6);
  const auto pseudo = pseudo_set(5, {0, 1, 2, 3, 4, 0});
  for (const auto& e : probability_score(model, features, pseudo).entries) {
    EXPECT_NEAR(e.score, 0.2, 1e-15);
  }
  for (const auto& e : entropy_confidence(model, features, pseudo).entries) {
    EXPECT_NEAR(e.score, 0.0, 1e-12);
  }
  // Column 0 pushes hard toward class 0.
  model.params.weight(0, 0) = 8.0;
  const auto scores = probability_score(model, features, pseudo);
  EXPECT_GT(scores.entries[0].score, 0.9);
  EXPECT_NEAR(scores.entries[0].score, std::exp(8.0) / (std::exp(8.0) + 4.0), 1e-12);
  for (const auto& e : scores.entries) {
    EXPECT_GE(e.score, 0.0);
    EXPECT_LE(e.score, 1.0);
  }
}

TEST(RandomConfidence, DeterministicAndUniform) {
  const auto pseudo = pseudo_set(2, std::vector<LabelId>(10000, 0));
  const auto a = random_confidence(pseudo, 3);
  const auto b = random_confidence(pseudo, 3);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].score, b.entries[i].score);
    EXPECT_GE(a.entries[i].score, 0.0);
    EXPECT_LT(a.entries[i].score, 1.0);
    sum += a.entries[i].score;
  }
  EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
  EXPECT_NE(random_confidence(pseudo, 4).entries[0].score, a.entries[0].score);
}

TEST(ConfidenceCsv, RoundTripsExactly) {
  const auto pseudo = pseudo_set(3, {2, 0, 1});
  const auto scores = random_confidence(pseudo, 1);
  std::ostringstream out;
  write_confidence_csv(out, scores);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "doc_id,pseudo_label,function,score");
  std::istringstream in(out.str());
  const auto back = read_confidence_csv(in, testing::labels(3));
  EXPECT_EQ(back.function, "random");
  ASSERT_EQ(back.entries.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.entries[i].doc_id, scores.entries[i].doc_id);
    EXPECT_EQ(back.entries[i].label, scores.entries[i].label);
    EXPECT_EQ(back.entries[i].score, scores.entries[i].score);
  }
  std::istringstream bad("doc_id,pseudo_label,function,score\nd0,c0,random,abc\n");
  EXPECT_THROW(read_confidence_csv(bad, testing::labels(3)), ParseError);
}

}  // namespace
}  // namespace lops
