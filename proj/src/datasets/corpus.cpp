#include <fstream>
#include <json.hpp>
#include <sstream>

#include "regstyle/datasets.hpp"
#include "regstyle/error.hpp"

namespace regstyle::datasets {

using nlohmann::json;

namespace {

[[noreturn]] void violation(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line) + ": " + what);
}

std::string required(const json& doc, const char* key, std::size_t line) {
  const auto it = doc.find(key);
  if (it == doc.end()) violation(line, std::string("missing required field '") + key + "'");
  if (!it->is_string()) violation(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::string optional_string(const json& doc, const char* key, std::size_t line) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  violation(line, std::string("field '") + key + "' must be a string");
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::size_t Corpus::size() const { return mud.size() + gyafc.size() + cochrane.size(); }

Corpus parse_corpus(std::string_view jsonl, Task schema) {
  Corpus corpus;
  corpus.schema = schema;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      violation(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) violation(line_no, "record must be a JSON object");

    switch (schema) {
      case Task::Mud: {
        MudPost p;
        p.author_id = required(doc, "author_id", line_no);
        p.text = required(doc, "text", line_no);
        p.subreddit = required(doc, "subreddit", line_no);
        p.split = optional_string(doc, "split", line_no);
        corpus.mud.push_back(std::move(p));
        break;
      }
      case Task::Gyafc: {
        GyafcRecord r;
        r.text = required(doc, "text", line_no);
        r.domain = lower(required(doc, "domain", line_no));
        r.formality = lower(required(doc, "formality", line_no));
        r.split = lower(required(doc, "split", line_no));
        r.id = optional_string(doc, "id", line_no);
        if (r.formality != "formal" && r.formality != "informal") {
          violation(line_no, "formality must be 'formal' or 'informal', got '" + r.formality + "'");
        }
        if (auto it = doc.find("references"); it != doc.end() && !it->is_null()) {
          if (!it->is_array()) violation(line_no, "'references' must be an array of strings");
          for (const auto& ref : *it) {
            if (!ref.is_string()) violation(line_no, "'references' must be an array of strings");
            r.references.push_back(ref.get<std::string>());
          }
        }
        corpus.gyafc.push_back(std::move(r));
        break;
      }
      case Task::Cochrane: {
        CochraneRecord r;
        r.abstract_text = required(doc, "abstract", line_no);
        r.pls = required(doc, "pls", line_no);
        r.split = lower(required(doc, "split", line_no));
        r.id = optional_string(doc, "id", line_no);
        corpus.cochrane.push_back(std::move(r));
        break;
      }
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, Task schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read corpus " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoFailure, "error reading corpus " + path.string());
  return parse_corpus(buf.str(), schema);
}

}  // namespace regstyle::datasets
