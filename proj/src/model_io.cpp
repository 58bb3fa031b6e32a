#include <json.hpp>

#include "lops/classifier.hpp"
#include "lops/error.hpp"

namespace lops {

using nlohmann::json;

namespace {

json config_json(const ClassifierConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"l2_penalty", c.l2_penalty},
          {"seed", c.seed},
          {"shuffle_per_epoch", c.shuffle_per_epoch},
          {"init_scale", c.init_scale},
          {"snapshot_every_batches", c.snapshot_every_batches}};
}

ClassifierConfig config_from(const json& j) {
  ClassifierConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.l2_penalty = j.at("l2_penalty").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.shuffle_per_epoch = j.at("shuffle_per_epoch").get<bool>();
  c.init_scale = j.value("init_scale", c.init_scale);
  c.snapshot_every_batches = j.value("snapshot_every_batches", c.snapshot_every_batches);
  return c;
}

}  // namespace

// Layout: {"labels", "vocabulary", "weighting", "idf", "weights" (one list
// per class), "bias", "config"}.
std::string model_to_json(const TrainedModel& model) {
  if (!model.vocabulary) throw ValidationError("model has no vocabulary");
  json weights = json::array();
  for (std::size_t j = 0; j < model.params.classes; ++j) {
    auto first = model.params.weights.begin() + static_cast<std::ptrdiff_t>(j * model.params.features);
    weights.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(model.params.features)));
  }
  json out = {{"labels", model.space.names()},
              {"vocabulary", model.vocabulary->terms},
              {"weighting", std::string(to_string(model.vocabulary->weighting))},
              {"idf", model.vocabulary->idf},
              {"weights", std::move(weights)},
              {"bias", model.params.bias},
              {"config", config_json(model.config)}};
  return out.dump(1);
}

TrainedModel model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TrainedModel model;
    model.space = LabelSpace(j.at("labels").get<std::vector<std::string>>());
    auto vocab = std::make_shared<Vocabulary>();
    vocab->terms = j.at("vocabulary").get<std::vector<std::string>>();
    vocab->weighting = parse_weighting(j.at("weighting").get<std::string>());
    vocab->idf = j.at("idf").get<std::vector<double>>();
    for (std::size_t i = 0; i < vocab->terms.size(); ++i) vocab->column.emplace(vocab->terms[i], i);
    if (vocab->weighting == Weighting::kTfIdf && vocab->idf.size() != vocab->terms.size()) {
      throw DataError("model idf length does not match its vocabulary");
    }

    model.params = LinearParams(model.space.size(), vocab->size());
    const auto& weights = j.at("weights");
    if (weights.size() != model.params.classes) throw DataError("model weight rows do not match labels");
    for (std::size_t c = 0; c < model.params.classes; ++c) {
      const auto row = weights[c].get<std::vector<double>>();
      if (row.size() != model.params.features) throw DataError("model weight row has wrong width");
      std::copy(row.begin(), row.end(),
                model.params.weights.begin() + static_cast<std::ptrdiff_t>(c * model.params.features));
    }
    model.params.bias = j.at("bias").get<std::vector<double>>();
    if (model.params.bias.size() != model.params.classes) throw DataError("model bias has wrong length");
    model.config = config_from(j.at("config"));
    model.vocabulary = std::move(vocab);
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace lops
