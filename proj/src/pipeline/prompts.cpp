#include <algorithm>

#include "regstyle/error.hpp"
#include "regstyle/pipeline.hpp"
#include "regstyle/textproc.hpp"

namespace regstyle::pipeline {

namespace {

constexpr std::string_view kRewriteOnly = "Strictly output only the rewritten text without any other content.";
constexpr std::string_view kDescriptorsOnly = "Strictly output only the style descriptors without any other content.";

std::vector<PromptTemplate> make_templates() {
  const std::string rewrite(kRewriteOnly), descriptors(kDescriptorsOnly);
  const std::string register_rewrite =
      "Here is a text: {source_text} Rewrite the text to be more {style_descriptors}. " + rewrite;
  return {
      {System::Simple, 1,
       "Here is the target text {target_text} Rewrite {input_text} into the authorship style of the target text. " +
           rewrite},
      {System::Styll, 1, "Source text: Passage: {source_text} Paraphrase the passage in a simple neutral style."},
      {System::Styll, 2,
       "Passage: {target_text} List some adjectives, comma-separated, that describe the writing style of the author "
       "of this passage. " +
           descriptors},
      {System::Styll, 3,
       "Here is a text: {neutral_paraphrase} Here is a rewrite of the text that is more {style_descriptors}. " +
           rewrite},
      {System::RgContrastive, 1,
       "Source text: {source_text} Target text: {target_text} How does the target text differ from the source text "
       "in authorship style in terms of dimensions of register variation according to Douglas Biber?"},
      {System::RgContrastive, 2,
       "Style comparisons: {style_comparisons} List some adjectives, comma-separated, that describe the writing style "
       "of the author of the target text. " +
           descriptors},
      {System::RgContrastive, 3, register_rewrite},
      {System::Rg, 1,
       "Passage: {target_text} Analyze the authorship style of this passage in terms of dimensions of register "
       "variation according to Douglas Biber."},
      {System::Rg, 2,
       "Style analysis: {style_analysis} List some adjectives, comma-separated, that describe the writing style of the "
       "author of the target text. " +
           descriptors},
      {System::Rg, 3, register_rewrite},
  };
}

const std::vector<PromptTemplate>& templates() {
  static const std::vector<PromptTemplate> t = make_templates();
  return t;
}

bool name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Template body split into literal text and placeholders: pieces[0] name[0]
// pieces[1] name[1] ... pieces[n].
struct Parsed {
  std::vector<std::string> pieces;
  std::vector<std::string> names;
};

Parsed parse(const std::string& body) {
  Parsed p;
  std::string cur;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && name_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}' && j > i + 1) {
        p.pieces.push_back(cur);
        cur.clear();
        p.names.push_back(body.substr(i + 1, j - i - 1));
        i = j + 1;
        continue;
      }
    }
    cur += body[i++];
  }
  p.pieces.push_back(cur);
  return p;
}

bool match(const Parsed& p, std::string_view text, std::size_t k, std::size_t pos, Bindings& out) {
  if (k == p.names.size()) return pos == text.size();
  const std::string& next = p.pieces[k + 1];
  const bool last = k + 1 == p.names.size();
  // Values may contain the following literal, so try every split point.
  for (std::size_t end = pos;; ++end) {
    end = last ? (text.size() >= next.size() ? text.size() - next.size() : std::string_view::npos)
               : text.find(next, end);
    if (end == std::string_view::npos || end < pos) return false;
    if (text.substr(end, next.size()) == next) {
      std::string value(text.substr(pos, end - pos));
      const auto it = out.find(p.names[k]);
      if (it == out.end() || it->second == value) {
        Bindings trial = out;
        trial[p.names[k]] = value;
        if (match(p, text, k + 1, end + next.size(), trial)) {
          out = std::move(trial);
          return true;
        }
      }
    }
    if (last) return false;
  }
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view strip(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

constexpr std::pair<std::string_view, std::string_view> kQuotePairs[] = {
    {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE2\x80\x98", "\xE2\x80\x99"}, {"`", "`"}};

bool starts(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends(std::string_view s, std::string_view p) { return s.size() >= p.size() && s.substr(s.size() - p.size()) == p; }

// Leading list markers: "-", "*", "•", "1.", "2)", "(3)".
std::string_view strip_bullet(std::string_view s) {
  for (std::string_view b : {"-", "*", "\xE2\x80\xA2", "\xE2\x80\x93"}) {
    if (starts(s, b)) return s.substr(b.size());
  }
  std::size_t i = s.size() > 0 && s[0] == '(' ? 1 : 0;
  const std::size_t digits = i;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i > digits && i < s.size() && (s[i] == '.' || s[i] == ')')) return s.substr(i + 1);
  return s;
}

std::string_view strip_quotes_once(std::string_view s) {
  for (auto [open, close] : kQuotePairs) {
    if (s.size() >= open.size() + close.size() && starts(s, open) && ends(s, close)) {
      return s.substr(open.size(), s.size() - open.size() - close.size());
    }
  }
  return s;
}

}  // namespace

std::string_view to_string(System s) {
  switch (s) {
    case System::Copy:
      return "copy";
    case System::Target:
      return "target";
    case System::Gold:
      return "gold";
    case System::Simple:
      return "simple";
    case System::Styll:
      return "styll";
    case System::Rg:
      return "rg";
    case System::RgContrastive:
      return "rg_contrastive";
  }
  return "?";
}

System system_from_string(std::string_view name) {
  for (auto s : all_systems()) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::Usage, "unknown system '" + std::string(name) +
                                    "' (expected copy, target, gold, simple, styll, rg or rg_contrastive)");
}

const std::vector<System>& all_systems() {
  static const std::vector<System> s = {System::Copy, System::Target, System::Gold,         System::Simple,
                                        System::Styll, System::Rg,    System::RgContrastive};
  return s;
}

bool is_naive(System s) { return s == System::Copy || s == System::Target || s == System::Gold; }

bool produces_descriptors(System s) { return s == System::Styll || s == System::Rg || s == System::RgContrastive; }

std::size_t step_count(System s) {
  if (is_naive(s)) return 0;
  return s == System::Simple ? 1 : 3;
}

std::vector<std::string> PromptTemplate::placeholders() const { return parse(body).names; }

const PromptTemplate& prompt_template(System s, int step) {
  for (const auto& t : templates()) {
    if (t.system == s && t.step == step) return t;
  }
  throw Error(ErrorCode::Usage, "no prompt for " + std::string(to_string(s)) + " step " + std::to_string(step));
}

std::vector<PromptTemplate> all_templates() { return templates(); }

std::string render_prompt(const PromptTemplate& t, const Bindings& bindings) {
  const Parsed p = parse(t.body);
  std::string out = p.pieces[0];
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    const auto it = bindings.find(p.names[i]);
    if (it == bindings.end()) {
      throw Error(ErrorCode::MissingBinding, "placeholder {" + p.names[i] + "} of " + std::string(to_string(t.system)) +
                                                 " step " + std::to_string(t.step) + " is unbound");
    }
    out += it->second;
    out += p.pieces[i + 1];
  }
  return out;
}

std::optional<Bindings> extract_bindings(const PromptTemplate& t, std::string_view rendered) {
  const Parsed p = parse(t.body);
  if (!starts(rendered, p.pieces[0])) return std::nullopt;
  Bindings out;
  if (!match(p, rendered, 0, p.pieces[0].size(), out)) return std::nullopt;
  return out;
}

std::vector<std::string> parse_descriptors(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const auto end = std::min(raw.find_first_of(",\n", pos), raw.size());
    std::string_view item = raw.substr(pos, end - pos);
    pos = end + 1;
    // Peel whitespace, bullets, quotes and a trailing full stop until stable.
    for (std::string_view prev; prev != item;) {
      prev = item;
      item = strip(item);
      item = strip_bullet(item);
      item = strip(item);
      item = strip_quotes_once(item);
      if (!item.empty() && item.back() == '.') item.remove_suffix(1);
    }
    if (item.empty()) continue;
    std::string d = text::casefold(item);
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(std::move(d));
  }
  return out;
}

std::string trim_response(std::string_view raw) {
  std::string_view s = strip(raw);
  constexpr std::string_view label = "rewritten text:";
  if (s.size() >= label.size() && text::casefold(s.substr(0, label.size())) == label) {
    s = strip(s.substr(label.size()));
  }
  return std::string(strip(strip_quotes_once(s)));
}

}  // namespace regstyle::pipeline
