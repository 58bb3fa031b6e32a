#include "lops/corpus_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "lops/error.hpp"

namespace lops {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
  }
}

std::string required_string(const json& record, const char* key, std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end()) throw ParseError(line_no, std::string("missing \"") + key + "\" field");
  if (!it->is_string()) throw ParseError(line_no, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

LoadedCorpus load_corpus(std::istream& in) {
  struct Raw {
    Document doc;
    std::optional<std::string> gold;
  };
  std::vector<Raw> raw;
  std::optional<std::vector<std::string>> declared;
  std::unordered_set<std::string> ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json record = parse_line(line, line_no);
    if (!record.is_object()) throw ParseError(line_no, "record must be a JSON object");
    if (raw.empty() && !declared && record.contains("labels") && !record.contains("id")) {
      try {
        declared = record.at("labels").get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw ParseError(line_no, "\"labels\" must be a list of strings");
      }
      continue;
    }
    Raw r;
    r.doc.id = required_string(record, "id", line_no);
    r.doc.text = required_string(record, "text", line_no);
    if (auto it = record.find("gold_label"); it != record.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(line_no, "\"gold_label\" must be a string");
      r.gold = it->get<std::string>();
    }
    if (!ids.insert(r.doc.id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate document id '" +
                            r.doc.id + "'");
    }
    r.doc.tokens = tokenize(r.doc.text);
    raw.push_back(std::move(r));
  }

  LoadedCorpus out;
  if (declared) {
    out.space = LabelSpace(*declared);
  } else {
    std::set<std::string> observed;
    for (const auto& r : raw) {
      if (r.gold) observed.insert(*r.gold);
    }
    if (!observed.empty()) out.space = LabelSpace({observed.begin(), observed.end()});
  }
  out.docs.reserve(raw.size());
  for (auto& r : raw) {
    if (r.gold) {
      auto id = out.space->find(*r.gold);
      if (!id) throw ValidationError("gold label '" + *r.gold + "' of '" + r.doc.id +
                                     "' is not in the declared label list");
      r.doc.gold = *id;
    }
    out.docs.push_back(std::move(r.doc));
  }
  return out;
}

LoadedCorpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs, const LabelSpace* space) {
  if (space != nullptr) out << json{{"labels", space->names()}}.dump() << '\n';
  for (const auto& doc : docs) {
    json record = {{"id", doc.id}, {"text", doc.text}};
    if (doc.gold) {
      if (space == nullptr) throw ValidationError("writing gold labels requires a label space");
      record["gold_label"] = space->name(*doc.gold);
    }
    out << record.dump() << '\n';
  }
}

SeedLexicon load_lexicon(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed seed lexicon: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("seed lexicon must be a JSON object");
  std::map<std::string, std::vector<std::string>> by_label;
  for (const auto& [label, seeds] : doc.items()) {
    if (!seeds.is_array()) throw DataError("seeds of '" + label + "' must be a list");
    auto& list = by_label[label];
    for (const auto& s : seeds) {
      if (!s.is_string()) throw DataError("seeds of '" + label + "' must be strings");
      list.push_back(s.get<std::string>());
    }
  }
  return make_lexicon(by_label);
}

SeedLexicon load_lexicon(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_lexicon(in);
}

void write_pseudo_labels(std::ostream& out, const PseudoLabelSet& pseudo) {
  for (const auto& e : pseudo.entries()) {
    out << json{{"id", e.doc_id}, {"label", pseudo.space().name(e.label)}, {"source", pseudo.source()}}
               .dump()
        << '\n';
  }
}

PseudoLabelSet load_pseudo_labels(std::istream& in, LabelSpace space) {
  struct Raw {
    std::string id;
    std::string label;
  };
  std::vector<Raw> raw;
  std::string source;
  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json record = parse_line(line, line_no);
    if (!record.is_object()) throw ParseError(line_no, "record must be a JSON object");
    Raw r{required_string(record, "id", line_no), required_string(record, "label", line_no)};
    if (record.contains("source") && record["source"].is_string() && source.empty()) {
      source = record["source"].get<std::string>();
    }
    if (!space.find(r.label) &&
        std::find(extra.begin(), extra.end(), r.label) == extra.end()) {
      extra.push_back(r.label);
    }
    raw.push_back(std::move(r));
  }
  space = space.merged(LabelSpace(extra));
  PseudoLabelSet out(space, source.empty() ? "file" : source);
  for (auto& r : raw) out.add(std::move(r.id), space.id(r.label));
  return out;
}

PseudoLabelSet load_pseudo_labels(const std::filesystem::path& path, LabelSpace space) {
  auto in = open_input(path);
  return load_pseudo_labels(in, std::move(space));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace lops
