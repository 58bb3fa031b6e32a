#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lops/classifier.hpp"
#include "lops/error.hpp"
#include "lops/rng.hpp"
#include "support.hpp"

namespace lops {
namespace {

SynthCorpus small_corpus(std::uint64_t seed, double flip_rate = 0.0) {
  SynthSpec spec;
  spec.n_per_class = 60;
  spec.shared_vocab = 200;
  spec.flip_rate = flip_rate;
  spec.seed = seed;
  return synth_corpus(spec);
}

TEST(Softmax, ClosedFormBinary) {
  std::vector<double> v = {2.0, 1.0};
  softmax(v);
  EXPECT_NEAR(v[0], 0.7310585786300049, 1e-15);
  EXPECT_NEAR(v[1], 0.2689414213699951, 1e-15);
}

TEST(Softmax, ZerosGiveUniformAndShiftIsInvariant) {
  std::vector<double> zeros(5, 0.0);
  softmax(zeros);
  for (double p : zeros) EXPECT_DOUBLE_EQ(p, 0.2);

  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(4);
    for (auto& x : a) x = rng.uniform() * 20.0 - 10.0;
    auto b = a;
    const double shift = rng.uniform() * 200.0 - 100.0;
    for (auto& x : b) x += shift;
    softmax(a);
    softmax(b);
    EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-9);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
    EXPECT_EQ(argmax(a), argmax(b));
  }
}

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax(std::vector<double>{0.3, 0.5, 0.5}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 0u);
}

TEST(Config, ValidationRejectsBadValues) {
  ClassifierConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.l2_penalty = -1.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Gradient, MatchesCentralDifferences) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + rng.below(3);
    const std::size_t f = 2 + rng.below(5);
    const std::size_t n = 1 + rng.below(6);
    LinearParams params(m, f);
    for (auto& w : params.weights) w = rng.uniform() * 2.0 - 1.0;
    for (auto& b : params.bias) b = rng.uniform() * 2.0 - 1.0;
    std::vector<SparseRow> rows(n);
    std::vector<LabeledRow> examples;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < f; ++c) {
        if (rng.uniform() < 0.6) rows[i].push_back({c, rng.uniform() * 2.0 - 1.0});
      }
    }
    for (std::size_t i = 0; i < n; ++i) examples.push_back({&rows[i], rng.below(m)});
    const double l2 = trial % 2 == 0 ? 0.0 : 0.3;

    const auto grad = objective_gradient(params, examples, l2);
    const double h = 1e-6;
    auto check = [&](double& slot, double analytic) {
      const double saved = slot;
      slot = saved + h;
      const double up = objective(params, examples, l2);
      slot = saved - h;
      const double down = objective(params, examples, l2);
      slot = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-3});
      EXPECT_LE(std::abs(numeric - analytic) / scale, 1e-5);
    };
    for (std::size_t k = 0; k < params.weights.size(); ++k) check(params.weights[k], grad.weights[k]);
    for (std::size_t k = 0; k < params.bias.size(); ++k) check(params.bias[k], grad.bias[k]);
  }
}

TEST(Train, IsDeterministicPerSeed) {
  const auto corpus = small_corpus(0, 0.2);
  const auto features = vectorize(corpus.docs);
  ClassifierConfig config;
  config.seed = 5;
  const auto a = train(features, corpus.pseudo, config);
  const auto b = train(features, corpus.pseudo, config);
  EXPECT_EQ(a.model.params.weights, b.model.params.weights);
  EXPECT_EQ(a.model.params.bias, b.model.params.bias);
  ASSERT_EQ(a.snapshots.size(), 4u);
  for (std::size_t t = 0; t < a.snapshots.size(); ++t) {
    EXPECT_EQ(a.snapshots[t].epoch, t + 1);
    EXPECT_EQ(a.snapshots[t].predicted, b.snapshots[t].predicted);
    EXPECT_EQ(a.snapshots[t].pseudo_label_prob, b.snapshots[t].pseudo_label_prob);
  }
  config.seed = 6;
  const auto c = train(features, corpus.pseudo, config);
  EXPECT_NE(a.model.params.weights, c.model.params.weights);
}

TEST(Train, AccuracyDoesNotDropOnSeparableData) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto corpus = small_corpus(seed);
    const auto features = vectorize(corpus.docs);
    ClassifierConfig config;
    config.seed = seed;
    const auto result = train(features, corpus.pseudo, config);
    auto accuracy = [&](const EpochSnapshot& s) {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < s.predicted.size(); ++i) {
        hits += s.predicted[i] == corpus.pseudo.entries()[i].label;
      }
      return static_cast<double>(hits) / static_cast<double>(s.predicted.size());
    };
    EXPECT_GE(accuracy(result.snapshots.back()), accuracy(result.snapshots.front())) << seed;
  }
}

TEST(Train, LossIsNonIncreasingAtSmallLearningRate) {
  // One-hot features: every document owns a single indicator column.
  std::vector<SparseRow> rows;
  std::vector<std::string> ids;
  auto vocab = std::make_shared<Vocabulary>();
  PseudoLabelSet labels(testing::labels(3), "test");
  for (std::size_t i = 0; i < 12; ++i) {
    ids.push_back(testing::doc_name(i));
    vocab->terms.push_back("t" + std::to_string(100 + i));
    vocab->column[vocab->terms.back()] = i;
    rows.push_back({{i, 1.0}});
    labels.add(ids.back(), i % 3);
  }
  const FeatureMatrix features(vocab, ids, rows);
  ClassifierConfig config;
  config.learning_rate = 0.01;
  config.epochs = 10;
  const auto result = train(features, labels, config);
  for (std::size_t t = 1; t < result.snapshots.size(); ++t) {
    EXPECT_LE(result.snapshots[t].loss, result.snapshots[t - 1].loss);
  }
}

TEST(Train, ObserverStopsEarlyAndBatchSnapshotsCount) {
  const auto corpus = small_corpus(1);
  const auto features = vectorize(corpus.docs);
  ClassifierConfig config;
  const auto stopped = train(features, corpus.pseudo, config,
                             [](const EpochSnapshot& s) { return s.epoch == 2; });
  EXPECT_TRUE(stopped.stopped_early);
  EXPECT_EQ(stopped.snapshots.size(), 2u);
  EXPECT_EQ(stopped.planned_steps, 4u);

  config.batch_size = 10;
  config.snapshot_every_batches = 4;
  EXPECT_EQ(steps_per_epoch(config, 120), 3u);
  const auto fine = train(features, corpus.pseudo, config);
  EXPECT_EQ(fine.planned_steps, 12u);
  EXPECT_EQ(fine.snapshots.size(), 12u);
  EXPECT_EQ(fine.snapshots.back().step, 12u);
}

TEST(Train, RejectsSingleClassAndReportsNonFiniteLoss) {
  const auto corpus = small_corpus(2);
  const auto features = vectorize(corpus.docs);
  const auto one_class = corpus.pseudo.subset({corpus.pseudo.of_class(0)[0].doc_id}, "one");
  EXPECT_THROW(train(features, one_class, {}), ValidationError);

  ClassifierConfig config;
  config.learning_rate = 1e306;
  try {
    train(features, corpus.pseudo, config);
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Predict, RowsSumToOneAndVocabularyMustMatch) {
  const auto corpus = small_corpus(3, 0.1);
  const auto features = vectorize(corpus.docs);
  const auto result = train(features, corpus.pseudo, {});
  const auto probs = predict_proba(result.model, features);
  ASSERT_EQ(probs.rows(), features.rows());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    const auto row = probs.row(r);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
  }
  const auto other = vectorize({testing::make_doc("x", "unrelated words only")});
  EXPECT_THROW(predict_proba(result.model, other), ValidationError);
}

TEST(ModelJson, RoundTripPreservesPredictions) {
  const auto corpus = small_corpus(4, 0.1);
  const auto features = vectorize(corpus.docs);
  const auto result = train(features, corpus.pseudo, {});
  const auto restored = model_from_json(model_to_json(result.model));
  EXPECT_EQ(restored.space, result.model.space);
  EXPECT_EQ(restored.params.weights, result.model.params.weights);
  EXPECT_EQ(restored.params.bias, result.model.params.bias);
  const auto a = predict_proba(result.model, features);
  const auto b = predict_proba(restored, transform(restored.vocabulary, corpus.docs));
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t k = 0; k < a.classes(); ++k) EXPECT_EQ(a.row(r)[k], b.row(r)[k]);
  }
}

}  // namespace
}  // namespace lops
