#include <gtest/gtest.h>

#include <algorithm>

#include "lops/error.hpp"
#include "lops/eval.hpp"
#include "lops/rng.hpp"
#include "lops/selftrain.hpp"
#include "support.hpp"

namespace lops {
namespace {

SynthCorpus corpus(std::uint64_t seed, double flip_rate, std::size_t n_per_class = 150) {
  SynthSpec spec;
  spec.n_per_class = n_per_class;
  spec.flip_rate = flip_rate;
  spec.seed = seed;
  return synth_corpus(spec);
}

// First `keep` pseudo-labels only, so augmentation has room to grow the set.
PseudoLabelSet partial(const PseudoLabelSet& pseudo, std::size_t keep) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < keep; ++i) ids.push_back(pseudo.entries()[i].doc_id);
  return pseudo.subset(ids, "partial");
}

TEST(Selector, ParsesNamesAndAliases) {
  EXPECT_EQ(parse_selector("lops"), Selector::kLops);
  EXPECT_EQ(parse_selector("standard"), Selector::kNone);
  EXPECT_EQ(to_string(Selector::kEntropy), "entropy");
  EXPECT_THROW(parse_selector("mc-dropout"), ValidationError);
}

TEST(SelfTrain, ConfigValidation) {
  SelfTrainConfig config;
  config.iterations = 0;
  EXPECT_THROW(config.validate(), ValidationError);
  config = {};
  config.delta = 1.0;
  EXPECT_THROW(config.validate(), ValidationError);
}

TEST(SelfTrain, GrowsMonotonicallyWithoutRelabeling) {
  const auto c = corpus(1, 0.2);
  const auto features = vectorize(c.docs);
  const auto initial = partial(c.pseudo, 120);
  SelfTrainConfig config;
  config.iterations = 3;
  config.seed = 2;
  std::vector<std::size_t> sizes;
  const auto result = self_train(c.docs, features, initial, config,
                                 [&](const IterationRecord& r) { sizes.push_back(r.pseudo_after); });
  ASSERT_EQ(result.iterations.size(), 3u);
  EXPECT_EQ(sizes.size(), 3u);
  std::size_t previous = initial.size();
  for (const auto& record : result.iterations) {
    EXPECT_EQ(record.pseudo_before, previous);
    EXPECT_GE(record.pseudo_after, record.pseudo_before);
    EXPECT_TRUE(record.metrics);
    EXPECT_TRUE(record.model);
    previous = record.pseudo_after;
  }
  EXPECT_GT(result.final_pseudo.size(), initial.size());
  for (const auto& e : initial.entries()) EXPECT_EQ(result.final_pseudo.label_of(e.doc_id), e.label);
  EXPECT_EQ(result.predictions.size(), c.docs.size());
}

TEST(SelfTrain, NoAugmentationAboveEveryProbability) {
  const auto c = corpus(2, 0.2, 60);
  const auto features = vectorize(c.docs);
  const auto initial = partial(c.pseudo, 60);
  SelfTrainConfig config;
  config.iterations = 1;
  config.selector = Selector::kNone;
  config.delta = 1.0 - 1e-12;
  const auto result = self_train(c.docs, features, initial, config);
  EXPECT_EQ(result.final_pseudo.size(), initial.size());

  ClassifierConfig final_config = config.classifier;
  final_config.seed = derive_seed(config.seed, "final", 1);
  const auto trained = train(features, initial, final_config);
  const auto probs = predict_proba(trained.model, features);
  for (std::size_t i = 0; i < c.docs.size(); ++i) {
    EXPECT_EQ(result.predictions[i].label, argmax(probs.row(features.row_of(c.docs[i].id))));
  }
}

TEST(SelfTrain, CleanCorpusReachesPerfectF1) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto c = corpus(seed, 0.0, 250);
    const auto features = vectorize(c.docs);
    for (auto selector : {Selector::kLops, Selector::kNone, Selector::kProbability}) {
      SelfTrainConfig config;
      config.iterations = 2;
      config.selector = selector;
      config.seed = seed;
      const auto result = self_train(c.docs, features, c.pseudo, config);
      EXPECT_NEAR(result.iterations.back().metrics->macro_f1, 1.0, 0.02)
          << "seed " << seed << " selector " << to_string(selector);
    }
  }
}

TEST(SelfTrain, LopsSelectionIsCleanerThanItsInput) {
  for (double rho : {0.2, 0.3, 0.4}) {
    std::vector<double> gaps;
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      const auto c = corpus(seed, rho, 500);
      const auto features = vectorize(c.docs);
      SelfTrainConfig config;
      config.seed = seed;
      const auto gold = gold_labels(c.docs);
      auto outcome = run_selector(features, c.pseudo, config, gold, 1);
      attach_gold_metrics(outcome.report, gold);
      gaps.push_back(noise_ratio(c.pseudo, gold) - *outcome.report.noise);
    }
    std::sort(gaps.begin(), gaps.end());
    EXPECT_GE(gaps[1], 0.0) << "rho " << rho;
  }
}

TEST(SelfTrain, BaselinesMatchLopsCountsPerClass) {
  const auto c = corpus(3, 0.3);
  const auto features = vectorize(c.docs);
  const auto gold = gold_labels(c.docs);
  SelfTrainConfig config;
  const auto lops = run_selector(features, c.pseudo, config, gold, 1);
  for (auto selector : {Selector::kProbability, Selector::kEntropy, Selector::kStability,
                        Selector::kRandom}) {
    config.selector = selector;
    const auto outcome = run_selector(features, c.pseudo, config, gold, 1);
    EXPECT_EQ(outcome.report.class_counts, lops.report.class_counts) << to_string(selector);
    EXPECT_TRUE(outcome.scores);
  }
  config.selector = Selector::kOptimal;
  const auto optimal = run_selector(features, c.pseudo, config, gold, 1);
  EXPECT_EQ(optimal.report.selected.size(), 210u);
}

TEST(SelfTrain, IsDeterministic) {
  const auto c = corpus(4, 0.3, 80);
  const auto features = vectorize(c.docs);
  SelfTrainConfig config;
  config.iterations = 2;
  config.seed = 11;
  const auto a = self_train(c.docs, features, c.pseudo, config);
  const auto b = self_train(c.docs, features, c.pseudo, config);
  EXPECT_EQ(predictions_to_jsonl(a.predictions, c.space), predictions_to_jsonl(b.predictions, c.space));
}

TEST(SelfTrain, RejectsDegenerateInput) {
  const auto c = corpus(5, 0.0, 20);
  const auto features = vectorize(c.docs);
  EXPECT_THROW(self_train(c.docs, features, PseudoLabelSet(c.space, "empty"), {}), ValidationError);
  const auto one_class = c.pseudo.subset({c.pseudo.of_class(1)[0].doc_id}, "one");
  EXPECT_THROW(self_train(c.docs, features, one_class, {}), ValidationError);
}

}  // namespace
}  // namespace lops
