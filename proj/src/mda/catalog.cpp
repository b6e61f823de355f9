#include <fstream>
#include <json.hpp>
#include <sstream>

#include "regstyle/embedded_data.hpp"
#include "regstyle/error.hpp"
#include "regstyle/mda.hpp"

namespace regstyle::mda {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidCatalog, what); }

std::vector<std::string> string_list(const json& node, const std::string& rule, const char* key) {
  if (!node.contains(key) || !node.at(key).is_array()) {
    invalid("rule '" + rule + "' needs an array field '" + key + "'");
  }
  std::vector<std::string> out;
  for (const auto& item : node.at(key)) {
    if (!item.is_string()) invalid("rule '" + rule + "': '" + key + "' entries must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

void require_lowercase(const std::string& rule, const std::string& word) {
  if (word.empty() || text::casefold(word) != word) {
    invalid("rule '" + rule + "': entry '" + word + "' must be non-empty lowercase");
  }
}

WordPattern parse_pattern(const json& node, const std::string& rule) {
  WordPattern p;
  if (node.value("any", false)) {
    p.any = true;
    return p;
  }
  if (node.contains("words")) {
    for (auto& w : string_list(node, rule, "words")) {
      require_lowercase(rule, w);
      p.words.insert(std::move(w));
    }
  }
  if (node.contains("suffixes")) {
    p.suffixes = string_list(node, rule, "suffixes");
    for (const auto& s : p.suffixes) require_lowercase(rule, s);
  }
  p.min_stem = node.value("min_stem", std::size_t{0});
  if (p.words.empty() && p.suffixes.empty()) invalid("rule '" + rule + "': empty word pattern");
  return p;
}

Normalization parse_normalization(const std::string& s, const std::string& rule) {
  if (s == "per_1000_words") return Normalization::PerThousandWords;
  if (s == "per_1000_tokens") return Normalization::PerThousandTokens;
  if (s == "raw") return Normalization::Raw;
  invalid("rule '" + rule + "': unknown normalization '" + s + "'");
}

FeatureRule parse_rule(const json& node) {
  if (!node.is_object()) invalid("feature entries must be objects");
  FeatureRule rule;
  rule.name = node.value("name", "");
  if (rule.name.empty()) invalid("feature without a name");
  const std::string kind = node.value("matcher", "");
  rule.normalization = parse_normalization(node.value("normalization", "per_1000_words"), rule.name);

  if (kind == "lexicon") {
    if (!node.contains("words")) invalid("lexicon rule '" + rule.name + "' needs 'words'");
    rule.matcher = LexiconRule{parse_pattern(node, rule.name)};
  } else if (kind == "suffix") {
    if (!node.contains("suffixes")) invalid("suffix rule '" + rule.name + "' needs 'suffixes'");
    rule.matcher = SuffixRule{parse_pattern(node, rule.name)};
  } else if (kind == "bigram") {
    if (!node.contains("first") || !node.contains("second")) {
      invalid("bigram rule '" + rule.name + "' needs 'first' and 'second'");
    }
    rule.matcher = BigramRule{parse_pattern(node.at("first"), rule.name),
                              parse_pattern(node.at("second"), rule.name)};
  } else if (kind == "punctuation") {
    PunctuationRule p;
    for (auto& c : string_list(node, rule.name, "chars")) p.chars.insert(std::move(c));
    rule.matcher = std::move(p);
  } else if (kind == "token_class") {
    TokenClassRule t;
    const std::string cls = node.value("class", "");
    if (cls == "number") {
      t.token_class = TokenClassRule::Class::Number;
    } else if (cls == "capitalized") {
      t.token_class = TokenClassRule::Class::Capitalized;
    } else if (cls == "long_word") {
      t.token_class = TokenClassRule::Class::LongWord;
      t.min_length = node.value("min_length", std::size_t{8});
    } else {
      invalid("rule '" + rule.name + "': unknown token class '" + cls + "'");
    }
    rule.matcher = t;
  } else if (kind == "statistic") {
    StatisticRule s;
    const std::string stat = node.value("statistic", "");
    if (stat == "type_token_ratio") {
      s.kind = StatisticRule::Kind::TypeTokenRatio;
      s.window = node.value("window", std::size_t{400});
      if (s.window == 0) invalid("rule '" + rule.name + "': window must be positive");
    } else if (stat == "mean_word_length") {
      s.kind = StatisticRule::Kind::MeanWordLength;
    } else {
      invalid("rule '" + rule.name + "': unknown statistic '" + stat + "'");
    }
    rule.matcher = s;
  } else {
    invalid("rule '" + rule.name + "': unknown matcher '" + kind + "'");
  }
  return rule;
}

}  // namespace

FeatureCatalog::FeatureCatalog(std::string version, std::vector<FeatureRule> features)
    : version_(std::move(version)), features_(std::move(features)) {
  if (version_.empty()) invalid("catalog version must not be empty");
  std::set<std::string> seen;
  for (const auto& f : features_) {
    if (!seen.insert(f.name).second) invalid("duplicate feature name '" + f.name + "'");
  }
}

FeatureCatalog FeatureCatalog::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("catalog is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || !doc.at("version").is_string() ||
      !doc.contains("features") || !doc.at("features").is_array()) {
    invalid("catalog needs a string 'version' and an array 'features'");
  }
  std::vector<FeatureRule> rules;
  for (const auto& node : doc.at("features")) rules.push_back(parse_rule(node));
  return FeatureCatalog(doc.at("version").get<std::string>(), std::move(rules));
}

FeatureCatalog FeatureCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read catalog " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const FeatureCatalog& FeatureCatalog::builtin() {
  static const FeatureCatalog catalog = parse(embedded::biber_catalog());
  return catalog;
}

std::vector<std::string> FeatureCatalog::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

}  // namespace regstyle::mda
