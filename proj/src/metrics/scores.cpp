#include <json.hpp>

#include "regstyle/error.hpp"
#include "regstyle/metrics.hpp"

namespace regstyle::metrics {

using nlohmann::json;

namespace {

template <typename T>
void put(json& doc, const char* key, const std::optional<T>& v) {
  if (v) doc[key] = *v;
}

template <typename T>
void get(const json& doc, const char* key, std::optional<T>& v) {
  if (auto it = doc.find(key); it != doc.end() && !it->is_null()) v = it->get<T>();
}

}  // namespace

std::string ScoreVector::to_json() const {
  json doc;
  doc["away_biber"] = away_biber;
  doc["towards_biber"] = towards_biber;
  put(doc, "away_stylecav", away_stylecav);
  put(doc, "towards_stylecav", towards_stylecav);
  put(doc, "away_luar", away_luar);
  put(doc, "towards_luar", towards_luar);
  put(doc, "mis", mis);
  put(doc, "sbert_sim", sbert_sim);
  put(doc, "meteor", meteor);
  put(doc, "cola", cola);
  put(doc, "formality_prob", formality_prob);
  put(doc, "fkgl", fkgl);
  put(doc, "ari", ari);
  put(doc, "rouge1", rouge1);
  put(doc, "rouge2", rouge2);
  put(doc, "rougeL", rougeL);
  put(doc, "bleu", bleu);
  put(doc, "sari", sari);
  doc["overlap_rouge1"] = overlap_rouge1;
  doc["overlap_rouge2"] = overlap_rouge2;
  doc["overlap_rougeL"] = overlap_rougeL;
  put(doc, "formality_correct", formality_correct);
  return doc.dump();
}

ScoreVector ScoreVector::from_json(std::string_view text) {
  ScoreVector s;
  try {
    const json doc = json::parse(text);
    s.away_biber = doc.at("away_biber").get<double>();
    s.towards_biber = doc.at("towards_biber").get<double>();
    get(doc, "away_stylecav", s.away_stylecav);
    get(doc, "towards_stylecav", s.towards_stylecav);
    get(doc, "away_luar", s.away_luar);
    get(doc, "towards_luar", s.towards_luar);
    get(doc, "mis", s.mis);
    get(doc, "sbert_sim", s.sbert_sim);
    get(doc, "meteor", s.meteor);
    get(doc, "cola", s.cola);
    get(doc, "formality_prob", s.formality_prob);
    get(doc, "fkgl", s.fkgl);
    get(doc, "ari", s.ari);
    get(doc, "rouge1", s.rouge1);
    get(doc, "rouge2", s.rouge2);
    get(doc, "rougeL", s.rougeL);
    get(doc, "bleu", s.bleu);
    get(doc, "sari", s.sari);
    s.overlap_rouge1 = doc.at("overlap_rouge1").get<double>();
    s.overlap_rouge2 = doc.at("overlap_rouge2").get<double>();
    s.overlap_rougeL = doc.at("overlap_rougeL").get<double>();
    get(doc, "formality_correct", s.formality_correct);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("malformed score vector: ") + e.what());
  }
  return s;
}

}  // namespace regstyle::metrics
