#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "regstyle/datasets.hpp"
#include "regstyle/error.hpp"
#include "regstyle/providers.hpp"

namespace regstyle::datasets {

using nlohmann::json;

namespace {

std::string case_id(std::string_view prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return std::string(prefix) + "-" + buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Exemplar segments are newline separated, so a segment may not contain one.
std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::vector<Author> group_authors(const std::vector<MudPost>& posts, std::string_view split) {
  std::vector<Author> authors;
  std::map<std::string, std::size_t> index;
  for (const auto& p : posts) {
    if (!split.empty() && p.split != split) continue;
    auto [it, inserted] = index.emplace(p.author_id, authors.size());
    if (inserted) authors.push_back({p.author_id, {}});
    authors[it->second].posts.push_back(p);
  }
  return authors;
}

std::size_t distinct_subreddits(const Author& a) {
  std::set<std::string> s;
  for (const auto& p : a.posts) s.insert(p.subreddit);
  return s.size();
}

// Most frequent subreddit over the posts of full (16-post) authors; ties go
// to the lexicographically smallest name.
std::string most_common_subreddit(const std::vector<const std::vector<Author>*>& pools) {
  std::map<std::string, std::size_t> counts;
  for (const auto* pool : pools) {
    for (const auto& a : *pool) {
      if (a.posts.size() != kMudPostsPerAuthor) continue;
      for (const auto& p : a.posts) ++counts[p.subreddit];
    }
  }
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [name, c] : counts) {
    if (c > best_count) {  // map order makes the first maximum the smallest name
      best = name;
      best_count = c;
    }
  }
  return best;
}

std::vector<Author> eligible(const std::vector<Author>& pool, MudVariant variant, const std::string& common) {
  std::vector<Author> out;
  for (const auto& a : pool) {
    if (a.posts.size() != kMudPostsPerAuthor) continue;
    bool ok = true;
    switch (variant) {
      case MudVariant::Random:
        break;
      case MudVariant::Single:
        ok = std::all_of(a.posts.begin(), a.posts.end(), [&](const MudPost& p) { return p.subreddit == common; });
        break;
      case MudVariant::Diverse:
        ok = distinct_subreddits(a) >= kDiverseMinSubreddits;
        break;
    }
    if (ok) out.push_back(a);
  }
  return out;
}

[[noreturn]] void insufficient(MudVariant variant, std::string_view side, std::size_t found, std::size_t needed) {
  throw Error(ErrorCode::InsufficientAuthors, std::string(to_string(variant)) + " variant: found " +
                                                  std::to_string(found) + " eligible " + std::string(side) +
                                                  " authors, needed " + std::to_string(needed));
}

std::vector<Author> pick(const std::vector<Author>& pool, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());  // keep corpus order among the chosen
  std::vector<Author> out;
  for (auto i : idx) out.push_back(pool[i]);
  return out;
}

json case_to_json(const TransferCase& c) {
  return json{{"id", c.id},
              {"task", to_string(c.task)},
              {"input_text", c.input_text},
              {"style_exemplar", c.style_exemplar},
              {"gold_refs", c.gold_refs},
              {"meta", c.meta}};
}

TransferCase case_from_json(const json& j) {
  TransferCase c;
  c.id = j.at("id").get<std::string>();
  c.task = task_from_string(j.at("task").get<std::string>());
  c.input_text = j.at("input_text").get<std::string>();
  c.style_exemplar = j.at("style_exemplar").get<std::string>();
  c.gold_refs = j.at("gold_refs").get<std::vector<std::string>>();
  c.meta = j.at("meta").get<std::map<std::string, std::string>>();
  return c;
}

json plan_body(const PairingPlan& p) {
  json cases = json::array();
  for (const auto& c : p.cases) cases.push_back(case_to_json(c));
  return json{{"format", "regstyle-plan/1"},
              {"task", to_string(p.task)},
              {"variant", p.variant},
              {"seed", p.seed},
              {"k", p.k},
              {"separator", p.separator},
              {"source_authors", p.source_authors},
              {"target_authors", p.target_authors},
              {"cases", std::move(cases)}};
}

}  // namespace

AuthorSelection select_mud_authors(const Corpus& corpus, MudVariant variant, std::uint64_t seed,
                                   std::size_t per_side) {
  if (corpus.schema != Task::Mud) throw Error(ErrorCode::Usage, "author selection needs a mud corpus");
  const bool has_splits =
      std::any_of(corpus.mud.begin(), corpus.mud.end(), [](const MudPost& p) { return !p.split.empty(); });
  SplitMix64 rng(derive_seed(seed, std::string("mud-authors-") + std::string(to_string(variant))));

  AuthorSelection sel;
  if (has_splits) {
    const auto queries = group_authors(corpus.mud, "test_queries");
    const auto targets = group_authors(corpus.mud, "test_targets");
    const std::string common = most_common_subreddit({&queries, &targets});
    const auto src = eligible(queries, variant, common);
    const auto tgt = eligible(targets, variant, common);
    if (src.size() < per_side) insufficient(variant, "source", src.size(), per_side);
    if (tgt.size() < per_side) insufficient(variant, "target", tgt.size(), per_side);
    sel.sources = pick(src, rng.sample(src.size(), per_side));
    sel.targets = pick(tgt, rng.sample(tgt.size(), per_side));
  } else {
    const auto all = group_authors(corpus.mud, "");
    const std::string common = most_common_subreddit({&all});
    const auto pool = eligible(all, variant, common);
    if (pool.size() < 2 * per_side) insufficient(variant, "source+target", pool.size(), 2 * per_side);
    auto idx = rng.sample(pool.size(), 2 * per_side);
    sel.sources = pick(pool, {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(per_side)});
    sel.targets = pick(pool, {idx.begin() + static_cast<std::ptrdiff_t>(per_side), idx.end()});
  }
  return sel;
}

PairingPlan build_mud_cases(const AuthorSelection& selection, MudVariant variant, std::uint64_t seed) {
  PairingPlan plan;
  plan.task = Task::Mud;
  plan.variant = std::string(to_string(variant));
  plan.seed = seed;
  for (const auto& a : selection.sources) plan.source_authors.push_back(a.id);
  for (const auto& a : selection.targets) plan.target_authors.push_back(a.id);

  std::vector<std::string> exemplars;
  for (const auto& t : selection.targets) {
    std::vector<std::string> posts;
    for (const auto& p : t.posts) posts.push_back(one_line(p.text));
    exemplars.push_back(join(posts, plan.separator));
  }
  for (const auto& s : selection.sources) {
    for (std::size_t i = 0; i < s.posts.size(); ++i) {
      for (std::size_t t = 0; t < selection.targets.size(); ++t) {
        TransferCase c;
        c.id = case_id("mud", plan.cases.size());
        c.task = Task::Mud;
        c.input_text = s.posts[i].text;
        c.style_exemplar = exemplars[t];
        c.meta = {{"variant", plan.variant},
                  {"source_author", s.id},
                  {"source_post", std::to_string(i)},
                  {"source_subreddit", s.posts[i].subreddit},
                  {"target_author", selection.targets[t].id}};
        plan.cases.push_back(std::move(c));
      }
    }
  }
  return plan;
}

PairingPlan build_gyafc_cases(const Corpus& corpus, std::string_view direction, std::size_t k, std::uint64_t seed) {
  if (corpus.schema != Task::Gyafc) throw Error(ErrorCode::Usage, "gyafc plan needs a gyafc corpus");
  const auto us = direction.find('_');
  const std::string domain(direction.substr(0, us));
  const std::string dir(us == std::string_view::npos ? "" : direction.substr(us + 1));
  if ((domain != "em" && domain != "fr") || (dir != "i2f" && dir != "f2i")) {
    throw Error(ErrorCode::Usage, "unknown gyafc direction '" + std::string(direction) +
                                      "' (expected em_i2f, em_f2i, fr_i2f or fr_f2i)");
  }
  if (k == 0) throw Error(ErrorCode::Usage, "k must be positive");
  const std::string input_formality = dir == "i2f" ? "informal" : "formal";
  const std::string pool_formality = dir == "i2f" ? "formal" : "informal";

  std::vector<std::string> pool;
  for (const auto& r : corpus.gyafc) {
    if (r.split == "train" && r.domain == domain && r.formality == pool_formality) pool.push_back(one_line(r.text));
  }

  PairingPlan plan;
  plan.task = Task::Gyafc;
  plan.variant = std::string(direction);
  plan.seed = seed;
  plan.k = k;
  for (const auto& r : corpus.gyafc) {
    if (r.split != "test" || r.domain != domain || r.formality != input_formality) continue;
    const std::size_t i = plan.cases.size();
    // Pool texts identical to a gold rewrite would leak the answer.
    std::vector<std::size_t> allowed;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (std::find(r.references.begin(), r.references.end(), pool[j]) == r.references.end()) allowed.push_back(j);
    }
    if (allowed.size() < k) {
      throw Error(ErrorCode::InsufficientPool, plan.variant + ": pool of " + std::to_string(allowed.size()) + " " +
                                                   pool_formality + " train texts, need k = " + std::to_string(k));
    }
    SplitMix64 rng(derive_seed(seed, "gyafc-" + plan.variant + "-" + std::to_string(i)));
    std::vector<std::string> segments;
    for (auto j : rng.sample(allowed.size(), k)) segments.push_back(pool[allowed[j]]);

    TransferCase c;
    c.id = case_id("gyafc", i);
    c.task = Task::Gyafc;
    c.input_text = r.text;
    c.style_exemplar = join(segments, plan.separator);
    c.gold_refs = r.references;
    c.meta = {{"direction", plan.variant},
              {"domain", domain},
              {"input_formality", input_formality},
              {"desired_formality", pool_formality}};
    if (!r.id.empty()) c.meta["record_id"] = r.id;
    plan.cases.push_back(std::move(c));
  }
  return plan;
}

PairingPlan build_cochrane_cases(const Corpus& corpus, std::uint64_t seed) {
  if (corpus.schema != Task::Cochrane) throw Error(ErrorCode::Usage, "cochrane plan needs a cochrane corpus");
  std::vector<std::string> train;
  for (const auto& r : corpus.cochrane) {
    if (r.split == "train") train.push_back(r.pls);
  }
  if (train.empty()) throw Error(ErrorCode::InsufficientPool, "cochrane train split is empty");

  PairingPlan plan;
  plan.task = Task::Cochrane;
  plan.variant = "cochrane";
  plan.seed = seed;
  for (const auto& r : corpus.cochrane) {
    if (r.split != "test") continue;
    const std::size_t i = plan.cases.size();
    std::vector<std::size_t> allowed;
    for (std::size_t j = 0; j < train.size(); ++j) {
      if (train[j] != r.pls) allowed.push_back(j);
    }
    if (allowed.empty()) {
      throw Error(ErrorCode::InsufficientPool, "no train summary differs from the gold summary of test record " +
                                                   std::to_string(i));
    }
    SplitMix64 rng(derive_seed(seed, "cochrane-" + std::to_string(i)));
    TransferCase c;
    c.id = case_id("cochrane", i);
    c.task = Task::Cochrane;
    c.input_text = r.abstract_text;
    c.style_exemplar = train[allowed[rng.below(allowed.size())]];
    c.gold_refs = {r.pls};
    if (!r.id.empty()) c.meta["record_id"] = r.id;
    plan.cases.push_back(std::move(c));
  }
  return plan;
}

std::string PairingPlan::digest() const { return providers::sha256_hex(plan_body(*this).dump()); }

std::string PairingPlan::to_json() const {
  json doc = plan_body(*this);
  doc["digest"] = digest();
  return doc.dump(2) + "\n";
}

PairingPlan PairingPlan::from_json(std::string_view text) {
  PairingPlan p;
  std::string stored;
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != "regstyle-plan/1") throw Error(ErrorCode::SchemaViolation, "not a plan file");
    p.task = task_from_string(doc.at("task").get<std::string>());
    p.variant = doc.at("variant").get<std::string>();
    p.seed = doc.at("seed").get<std::uint64_t>();
    p.k = doc.at("k").get<std::size_t>();
    p.separator = doc.at("separator").get<std::string>();
    p.source_authors = doc.at("source_authors").get<std::vector<std::string>>();
    p.target_authors = doc.at("target_authors").get<std::vector<std::string>>();
    for (const auto& c : doc.at("cases")) p.cases.push_back(case_from_json(c));
    stored = doc.value("digest", "");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("malformed plan: ") + e.what());
  }
  if (!stored.empty() && stored != p.digest()) {
    throw Error(ErrorCode::SchemaViolation, "plan digest mismatch (file edited after planning?)");
  }
  return p;
}

void save_plan(const PairingPlan& plan, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp);
    out << plan.to_json();
    if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot move plan into place: " + ec.message());
}

PairingPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read plan " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return PairingPlan::from_json(buf.str());
}

}  // namespace regstyle::datasets
