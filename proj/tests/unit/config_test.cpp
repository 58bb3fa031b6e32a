#include <gtest/gtest.h>

#include <sstream>

#include "lops/cli.hpp"
#include "lops/error.hpp"

namespace lops::cli {
namespace {

TEST(RunConfig, DefaultsMatchTheDocumentedValues) {
  RunConfig config;
  EXPECT_EQ(config.tau, 50.0);
  EXPECT_EQ(config.delta, 0.6);
  EXPECT_EQ(config.epochs, 4u);
  EXPECT_EQ(config.n_its, 5u);
  EXPECT_EQ(config.selector, "lops");
  const auto st = config.self_train();
  EXPECT_EQ(st.selection.tau, 50.0);
  EXPECT_EQ(st.classifier.epochs, 4u);
}

TEST(RunConfig, FileParsingWithCommentsAndDashes) {
  std::istringstream in(
      "# experiment\n"
      "tau = 30\n"
      "n-its = 3   # shorter run\n"
      "\n"
      "selector = probability\n"
      "gamma = 0.25\n"
      "shuffle = false\n"
      "rng_seed = 18446744073709551615\n");
  RunConfig config;
  apply_config_file(config, in);
  EXPECT_EQ(config.tau, 30.0);
  EXPECT_EQ(config.n_its, 3u);
  EXPECT_EQ(config.selector, "probability");
  ASSERT_TRUE(config.gamma);
  EXPECT_EQ(*config.gamma, 0.25);
  EXPECT_FALSE(config.shuffle);
  EXPECT_EQ(config.rng_seed, 18446744073709551615ull);
}

TEST(RunConfig, ErrorsNameTheLine) {
  RunConfig config;
  std::istringstream unknown("tau = 50\nbogus = 1\n");
  try {
    apply_config_file(config, unknown);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream bad_number("epochs = four\n");
  EXPECT_THROW(apply_config_file(config, bad_number), ValidationError);
  std::istringstream no_equals("epochs\n");
  EXPECT_THROW(apply_config_file(config, no_equals), ValidationError);
}

TEST(RunConfig, ConversionsValidate) {
  RunConfig config;
  config.learning_rate = 0.0;
  EXPECT_THROW(config.classifier(), ValidationError);
  config = {};
  config.selector = "nonsense";
  EXPECT_THROW(config.self_train(), ValidationError);
  config = {};
  config.weighting = "bm25";
  EXPECT_THROW(config.vectorizer(), ValidationError);
}

TEST(RunConfig, SynthSeedIsDerivedFromRunSeed) {
  RunConfig a, b;
  a.rng_seed = 1;
  b.rng_seed = 2;
  EXPECT_NE(a.synth().seed, b.synth().seed);
  EXPECT_EQ(a.synth().seed, RunConfig(a).synth().seed);
}

}  // namespace
}  // namespace lops::cli
