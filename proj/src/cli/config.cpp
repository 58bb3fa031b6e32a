#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "lops/cli.hpp"
#include "lops/error.hpp"
#include "lops/rng.hpp"

namespace lops::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::size_t to_count(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                          std::string(value) + "'");
  }
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError("'" + std::string(key) + "' expects an unsigned integer, got '" +
                          std::string(value) + "'");
  }
  return out;
}

double to_real(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const double out = std::stod(text, &used);
    if (used == text.size()) return out;
  } catch (const std::exception&) {
  }
  throw ValidationError("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("'" + std::string(key) + "' expects true or false, got '" + std::string(value) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto path = [](std::filesystem::path RunConfig::*field) {
      return [field](RunConfig& c, std::string_view, std::string_view v) { c.*field = std::string(v); };
    };
    auto count = [](std::size_t RunConfig::*field) {
      return [field](RunConfig& c, std::string_view k, std::string_view v) { c.*field = to_count(k, v); };
    };
    auto real = [](double RunConfig::*field) {
      return [field](RunConfig& c, std::string_view k, std::string_view v) { c.*field = to_real(k, v); };
    };
    auto text = [](std::string RunConfig::*field) {
      return [field](RunConfig& c, std::string_view, std::string_view v) { c.*field = std::string(v); };
    };
    t["corpus"] = path(&RunConfig::corpus);
    t["lexicon"] = path(&RunConfig::lexicon);
    t["pseudo_labels"] = path(&RunConfig::pseudo_labels);
    t["predictions"] = path(&RunConfig::predictions);
    t["confidences"] = path(&RunConfig::confidences);
    t["output_dir"] = path(&RunConfig::output_dir);
    t["tau"] = real(&RunConfig::tau);
    t["delta"] = real(&RunConfig::delta);
    t["epochs"] = count(&RunConfig::epochs);
    t["n_its"] = count(&RunConfig::n_its);
    t["selector"] = text(&RunConfig::selector);
    t["gamma"] = [](RunConfig& c, std::string_view k, std::string_view v) {
      if (v.empty() || v == "none") {
        c.gamma.reset();
      } else {
        c.gamma = to_real(k, v);
      }
    };
    t["learning_rate"] = real(&RunConfig::learning_rate);
    t["batch_size"] = count(&RunConfig::batch_size);
    t["l2_penalty"] = real(&RunConfig::l2_penalty);
    t["init_scale"] = real(&RunConfig::init_scale);
    t["shuffle"] = [](RunConfig& c, std::string_view k, std::string_view v) { c.shuffle = to_bool(k, v); };
    t["granularity"] = count(&RunConfig::granularity);
    t["weighting"] = text(&RunConfig::weighting);
    t["min_df"] = count(&RunConfig::min_df);
    t["rng_seed"] = [](RunConfig& c, std::string_view k, std::string_view v) { c.rng_seed = to_u64(k, v); };
    t["classes"] = count(&RunConfig::classes);
    t["n_per_class"] = count(&RunConfig::n_per_class);
    t["vocab_per_class"] = count(&RunConfig::vocab_per_class);
    t["shared_vocab"] = count(&RunConfig::shared_vocab);
    t["doc_len"] = count(&RunConfig::doc_len);
    t["class_token_prob"] = real(&RunConfig::class_token_prob);
    t["flip_rate"] = real(&RunConfig::flip_rate);
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  std::string normalized(key);
  std::replace(normalized.begin(), normalized.end(), '-', '_');
  auto it = setters().find(normalized);
  if (it == setters().end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  it->second(*this, normalized, trim(value));
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return names;
}

ClassifierConfig RunConfig::classifier() const {
  ClassifierConfig c;
  c.epochs = epochs;
  c.batch_size = batch_size;
  c.learning_rate = learning_rate;
  c.l2_penalty = l2_penalty;
  c.seed = rng_seed;
  c.shuffle_per_epoch = shuffle;
  c.init_scale = init_scale;
  c.snapshot_every_batches = granularity;
  c.validate();
  return c;
}

SelfTrainConfig RunConfig::self_train() const {
  SelfTrainConfig c;
  c.iterations = n_its;
  c.delta = delta;
  c.selection.tau = tau;
  c.classifier = classifier();
  c.selector = parse_selector(selector);
  c.seed = rng_seed;
  c.validate();
  return c;
}

SynthSpec RunConfig::synth() const {
  SynthSpec s;
  s.classes = classes;
  s.n_per_class = n_per_class;
  s.vocab_per_class = vocab_per_class;
  s.shared_vocab = shared_vocab;
  s.doc_len = doc_len;
  s.class_token_prob = class_token_prob;
  s.flip_rate = flip_rate;
  s.seed = derive_seed(rng_seed, "corpus");
  return s;
}

VectorizerOptions RunConfig::vectorizer() const {
  VectorizerOptions v;
  v.weighting = parse_weighting(weighting);
  v.min_df = min_df;
  return v;
}

void apply_config_file(RunConfig& config, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      config.set(trim(std::string_view(content).substr(0, eq)),
                 trim(std::string_view(content).substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  apply_config_file(config, in);
}

}  // namespace lops::cli
