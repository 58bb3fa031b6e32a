#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lops/corpus.hpp"
#include "lops/selftrain.hpp"

namespace lops::cli {

// Every knob of a run. Keys in the config file and command-line flags use the
// field names below.
struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path lexicon;
  std::filesystem::path pseudo_labels;
  std::filesystem::path predictions;
  std::filesystem::path confidences;
  std::filesystem::path output_dir = "lops-out";

  double tau = 50.0;       // percent of each class LOPS keeps
  double delta = 0.6;      // bootstrap probability threshold
  std::size_t epochs = 4;  // probing and final classifier epochs
  std::size_t n_its = 5;   // self-training iterations
  std::string selector = "lops";
  std::optional<double> gamma;  // threshold selection instead of count matching

  double learning_rate = 0.1;
  std::size_t batch_size = 1;
  double l2_penalty = 0.0;
  double init_scale = 0.01;
  bool shuffle = true;
  // 0 = epoch granularity; k > 0 also snapshots every k batches.
  std::size_t granularity = 0;

  std::string weighting = "tf-idf";
  std::size_t min_df = 1;

  // Single source of randomness; see sub-seed streams in README.
  std::uint64_t rng_seed = 0;

  // synth
  std::size_t classes = 2;
  std::size_t n_per_class = 1000;
  std::size_t vocab_per_class = 50;
  std::size_t shared_vocab = 2000;
  std::size_t doc_len = 20;
  double class_token_prob = 0.6;
  double flip_rate = 0.3;

  void set(std::string_view key, std::string_view value);
  static const std::vector<std::string>& keys();

  ClassifierConfig classifier() const;
  SelfTrainConfig self_train() const;
  SynthSpec synth() const;
  VectorizerOptions vectorizer() const;
};

// Flat "key = value" lines; '#' starts a comment.
void apply_config_file(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

void cmd_pseudo_label(const RunConfig& config, std::ostream& log);
void cmd_select(const RunConfig& config, std::ostream& log);
void cmd_self_train(const RunConfig& config, std::ostream& log);
void cmd_nc_curve(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_synth(const RunConfig& config, std::ostream& log);

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kValidation = 2,
  kData = 3,
  kNumeric = 4,
};

// Parses arguments, dispatches the subcommand and maps errors onto exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lops::cli
