#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "regstyle/cli.hpp"
#include "regstyle/textproc.hpp"

namespace regstyle::cli {

using nlohmann::json;
using providers::ScorerKind;

namespace {

// Texts the meaning metrics compare against: the gold references where the
// task has them, the input otherwise.
std::vector<std::string> meaning_refs(const datasets::TransferCase& c) {
  if (c.task != datasets::Task::Mud && !c.gold_refs.empty()) return c.gold_refs;
  return {c.input_text};
}

std::vector<text::Document> docs(const std::vector<std::string>& texts) {
  std::vector<text::Document> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.emplace_back(t);
  return out;
}

}  // namespace

CaseScorer::CaseScorer(const mda::MdaModel& model, providers::ScorerClient* sidecar, std::set<ScorerKind> kinds)
    : model_(model), sidecar_(sidecar), kinds_(sidecar ? std::move(kinds) : std::set<ScorerKind>{}) {}

std::vector<double> CaseScorer::biber(const std::string& text) {
  {
    std::lock_guard lock(mu_);
    if (const auto it = biber_cache_.find(text); it != biber_cache_.end()) return it->second;
  }
  const auto fv = mda::extract_features(text::Document(text), mda::FeatureCatalog::builtin());
  auto scores = mda::project(model_, fv).scores;
  std::lock_guard lock(mu_);
  return biber_cache_.emplace(text, std::move(scores)).first->second;
}

std::vector<double> CaseScorer::embed(ScorerKind kind, const std::string& text) {
  {
    std::lock_guard lock(mu_);
    if (const auto it = embed_cache_.find({kind, text}); it != embed_cache_.end()) return it->second;
  }
  auto rows = sidecar_->embed({kind, {text}, {}});
  if (rows.size() != 1) throw Error(ErrorCode::ScorerUnavailable, "sidecar returned the wrong number of vectors");
  std::lock_guard lock(mu_);
  return embed_cache_.emplace(std::pair{kind, text}, std::move(rows.front())).first->second;
}

metrics::ScoreVector CaseScorer::score(const datasets::TransferCase& c, const std::string& output) {
  metrics::ScoreVector sv;
  const auto at = mda::away_towards(biber(output), biber(c.input_text), biber(c.style_exemplar));
  sv.away_biber = at.away;
  sv.towards_biber = at.towards;

  const text::Document out(output), in(c.input_text), target(c.style_exemplar);
  const auto overlap = metrics::overlap_rouge(out, target);
  sv.overlap_rouge1 = overlap.rouge1;
  sv.overlap_rouge2 = overlap.rouge2;
  sv.overlap_rougeL = overlap.rougeL;

  auto embedding_pair = [&](ScorerKind kind, std::optional<double>& away, std::optional<double>& towards) {
    if (!has(kind)) return;
    const auto e = metrics::embedding_away_towards(embed(kind, output), embed(kind, c.input_text),
                                                   embed(kind, c.style_exemplar));
    away = e.away;
    towards = e.towards;
  };
  embedding_pair(ScorerKind::EmbedStylecav, sv.away_stylecav, sv.towards_stylecav);
  if (c.task == datasets::Task::Mud) embedding_pair(ScorerKind::EmbedLuar, sv.away_luar, sv.towards_luar);

  const auto refs = meaning_refs(c);
  const auto ref_docs = docs(refs);
  if (c.task == datasets::Task::Cochrane) {
    sv.fkgl = metrics::fkgl(out);
    sv.ari = metrics::ari(out);
    if (!c.gold_refs.empty()) {
      double r1 = 0, r2 = 0, rl = 0;
      for (const auto& r : ref_docs) {
        r1 = std::max(r1, metrics::rouge_n(out, r, 1));
        r2 = std::max(r2, metrics::rouge_n(out, r, 2));
        rl = std::max(rl, metrics::rouge_l(out, r));
      }
      sv.rouge1 = r1;
      sv.rouge2 = r2;
      sv.rougeL = rl;
      sv.bleu = metrics::bleu(out, ref_docs);
      sv.sari = metrics::sari(in, out, ref_docs);
    }
  } else {
    sv.meteor = metrics::meteor(out, ref_docs);
    if (has(ScorerKind::ScoreMis)) {
      providers::ScorerRequest req{ScorerKind::ScoreMis, {}, {}};
      for (const auto& r : refs) req.pairs.emplace_back(output, r);
      const auto s = sidecar_->score(req);
      if (s.empty()) throw Error(ErrorCode::ScorerUnavailable, "sidecar returned no MIS scores");
      sv.mis = *std::max_element(s.begin(), s.end());
    }
    if (has(ScorerKind::EmbedSbert)) {
      const auto eo = embed(ScorerKind::EmbedSbert, output);
      double best = -1.0;
      for (const auto& r : refs) best = std::max(best, mda::cosine(eo, embed(ScorerKind::EmbedSbert, r)));
      sv.sbert_sim = best;
    }
  }

  if (c.task == datasets::Task::Gyafc && has(ScorerKind::ClassifyFormality)) {
    const auto s = sidecar_->score({ScorerKind::ClassifyFormality, {output}, {}});
    if (s.size() != 1) throw Error(ErrorCode::ScorerUnavailable, "sidecar returned the wrong number of scores");
    sv.formality_prob = s.front();
    if (const auto it = c.meta.find("desired_formality"); it != c.meta.end()) {
      const auto desired = it->second == "formal" ? metrics::Formality::Formal : metrics::Formality::Informal;
      sv.formality_correct = metrics::formality_accuracy(s.front(), desired);
    }
  }
  if (has(ScorerKind::ScoreCola)) {
    const auto s = sidecar_->score({ScorerKind::ScoreCola, {output}, {}});
    if (s.size() != 1) throw Error(ErrorCode::ScorerUnavailable, "sidecar returned the wrong number of scores");
    sv.cola = s.front();
  }
  return sv;
}

// ---------------------------------------------------------------------------

std::string ScoreRecord::to_json() const {
  json j{{"case_id", case_id},
         {"system", std::string(pipeline::to_string(system))},
         {"output_sha", output_sha},
         {"kinds", kinds},
         {"scores", scores ? json::parse(scores->to_json()) : json(nullptr)},
         {"error", error}};
  return j.dump();
}

ScoreRecord ScoreRecord::from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    ScoreRecord r;
    r.case_id = j.at("case_id").get<std::string>();
    r.system = pipeline::system_from_string(j.at("system").get<std::string>());
    r.output_sha = j.at("output_sha").get<std::string>();
    r.kinds = j.at("kinds").get<std::vector<std::string>>();
    if (!j.at("scores").is_null()) r.scores = metrics::ScoreVector::from_json(j.at("scores").dump());
    r.error = j.value("error", "");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("bad score record: ") + e.what());
  }
}

std::map<std::pair<std::string, pipeline::System>, ScoreRecord> load_scores(const std::filesystem::path& run_dir) {
  std::map<std::pair<std::string, pipeline::System>, ScoreRecord> out;
  std::ifstream in(run_dir / "scores.jsonl");
  for (std::string line; std::getline(in, line);) {
    try {
      auto r = ScoreRecord::from_json(line);
      auto key = std::pair{r.case_id, r.system};
      out[key] = std::move(r);
    } catch (const Error&) {
      // a partial trailing line from an interrupted run; the pair is rescored
    }
  }
  return out;
}

}  // namespace regstyle::cli
