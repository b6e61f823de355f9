#include <algorithm>
#include <cmath>
#include <set>

#include "regstyle/error.hpp"
#include "regstyle/metrics.hpp"

namespace regstyle::metrics {

namespace {

using text::NGramCounts;

std::size_t total(const NGramCounts& c) {
  std::size_t t = 0;
  for (const auto& [g, k] : c) t += k;
  return t;
}

double f1(double p, double r) { return (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0; }

std::vector<Tokens> overlap_tokens_of(std::span<const text::Document> docs) {
  std::vector<Tokens> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(text::overlap_tokens(d));
  return out;
}

}  // namespace

Prf rouge_n_prf(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t n) {
  const NGramCounts c = text::ngrams(candidate, n);
  const NGramCounts r = text::ngrams(reference, n);
  const std::size_t tc = total(c);
  const std::size_t tr = total(r);
  if (tc == 0 || tr == 0) return {};
  std::size_t hits = 0;
  for (const auto& [g, k] : c) {
    if (auto it = r.find(g); it != r.end()) hits += std::min(k, it->second);
  }
  Prf out;
  out.precision = static_cast<double>(hits) / static_cast<double>(tc);
  out.recall = static_cast<double>(hits) / static_cast<double>(tr);
  out.f1 = f1(out.precision, out.recall);
  return out;
}

double rouge_n(const text::Document& candidate, const text::Document& reference, std::size_t n) {
  return rouge_n_prf(text::overlap_tokens(candidate), text::overlap_tokens(reference), n).f1;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Prf rouge_l_prf(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return {};
  const double l = static_cast<double>(lcs_length(candidate, reference));
  Prf out;
  out.precision = l / static_cast<double>(candidate.size());
  out.recall = l / static_cast<double>(reference.size());
  out.f1 = f1(out.precision, out.recall);
  return out;
}

double rouge_l(const text::Document& candidate, const text::Document& reference) {
  return rouge_l_prf(text::overlap_tokens(candidate), text::overlap_tokens(reference)).f1;
}

double bleu(std::span<const std::string> candidate, std::span<const Tokens> references) {
  if (references.empty()) throw Error(ErrorCode::NoReferences, "BLEU needs at least one reference");
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const NGramCounts c = text::ngrams(candidate, n);
    const std::size_t tc = total(c);
    // Clip each candidate n-gram by its largest count in any one reference.
    NGramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [g, k] : text::ngrams(ref, n)) {
        auto& slot = max_ref[g];
        slot = std::max(slot, k);
      }
    }
    std::size_t hits = 0;
    for (const auto& [g, k] : c) {
      if (auto it = max_ref.find(g); it != max_ref.end()) hits += std::min(k, it->second);
    }
    double p;
    if (hits > 0) {
      p = static_cast<double>(hits) / static_cast<double>(tc);
    } else if (n == 1) {
      return 0.0;
    } else {
      p = 1.0 / (static_cast<double>(tc) + 1.0);
    }
    log_sum += std::log(p);
  }

  const std::size_t c_len = candidate.size();
  std::size_t r_len = references.front().size();
  for (const auto& ref : references) {
    const auto d_new = std::llabs(static_cast<long long>(ref.size()) - static_cast<long long>(c_len));
    const auto d_old = std::llabs(static_cast<long long>(r_len) - static_cast<long long>(c_len));
    if (d_new < d_old || (d_new == d_old && ref.size() < r_len)) r_len = ref.size();
  }
  const double bp =
      c_len < r_len ? std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(c_len)) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

double bleu(const text::Document& candidate, std::span<const text::Document> references) {
  const auto refs = overlap_tokens_of(references);
  return bleu(text::overlap_tokens(candidate), refs);
}

// SARI as in the widely used reference implementation: reference counts are
// summed over references and source/candidate counts are scaled by the
// reference count, keep uses the count-weighted recall, delete is scored by
// precision only, and add works on n-gram sets. Empty ratios count as 1.
namespace {

struct SariNgram {
  double keep_f = 0.0;
  double del_p = 0.0;
  double add_f = 0.0;
};

NGramCounts scaled(const NGramCounts& c, std::size_t k) {
  NGramCounts out;
  for (const auto& [g, v] : c) out[g] = v * k;
  return out;
}

std::size_t count_in(const NGramCounts& c, const text::NGram& g) {
  auto it = c.find(g);
  return it == c.end() ? 0 : it->second;
}

SariNgram sari_ngram(std::span<const std::string> input, std::span<const std::string> candidate,
                     std::span<const Tokens> references, std::size_t n) {
  const std::size_t numref = references.size();
  const NGramCounts s = text::ngrams(input, n);
  const NGramCounts c = text::ngrams(candidate, n);
  NGramCounts r_all;
  for (const auto& ref : references) {
    for (const auto& [g, k] : text::ngrams(ref, n)) r_all[g] += k;
  }
  const NGramCounts s_rep = scaled(s, numref);
  const NGramCounts c_rep = scaled(c, numref);

  SariNgram out;

  // keep
  double keep_p_sum = 0.0;
  double keep_good_sum = 0.0;
  std::size_t keep_size = 0;
  double keep_all_sum = 0.0;
  for (const auto& [g, sk] : s_rep) {
    const std::size_t ck = count_in(c_rep, g);
    const std::size_t rk = count_in(r_all, g);
    const std::size_t keep = std::min(sk, ck);
    if (keep > 0) {
      ++keep_size;
      const std::size_t good = std::min(keep, rk);
      keep_p_sum += static_cast<double>(good) / static_cast<double>(keep);
      keep_good_sum += static_cast<double>(good);
    }
    keep_all_sum += static_cast<double>(std::min(sk, rk));
  }
  const double keep_p = keep_size > 0 ? keep_p_sum / static_cast<double>(keep_size) : 1.0;
  const double keep_r = keep_all_sum > 0.0 ? keep_good_sum / keep_all_sum : 1.0;
  out.keep_f = f1(keep_p, keep_r);

  // delete
  double del_p_sum = 0.0;
  std::size_t del_size = 0;
  for (const auto& [g, sk] : s_rep) {
    const std::size_t ck = count_in(c_rep, g);
    if (sk <= ck) continue;
    const std::size_t del = sk - ck;
    const std::size_t rk = count_in(r_all, g);
    const std::size_t good = del > rk ? del - rk : 0;
    ++del_size;
    del_p_sum += static_cast<double>(good) / static_cast<double>(del);
  }
  out.del_p = del_size > 0 ? del_p_sum / static_cast<double>(del_size) : 1.0;

  // add
  std::size_t add = 0, add_good = 0, add_all = 0;
  for (const auto& [g, k] : c) {
    if (s.count(g)) continue;
    ++add;
    if (r_all.count(g)) ++add_good;
  }
  for (const auto& [g, k] : r_all) {
    if (!s.count(g)) ++add_all;
  }
  const double add_p = add > 0 ? static_cast<double>(add_good) / static_cast<double>(add) : 1.0;
  const double add_r = add_all > 0 ? static_cast<double>(add_good) / static_cast<double>(add_all) : 1.0;
  out.add_f = f1(add_p, add_r);
  return out;
}

}  // namespace

SariComponents sari_components(std::span<const std::string> input, std::span<const std::string> candidate,
                               std::span<const Tokens> references) {
  if (references.empty()) throw Error(ErrorCode::NoReferences, "SARI needs at least one reference");
  SariComponents out;
  for (std::size_t n = 1; n <= 4; ++n) {
    const SariNgram s = sari_ngram(input, candidate, references, n);
    out.keep += s.keep_f / 4.0;
    out.deletion += s.del_p / 4.0;
    out.addition += s.add_f / 4.0;
  }
  out.score = (out.keep + out.deletion + out.addition) / 3.0;
  return out;
}

double sari(const text::Document& input, const text::Document& candidate,
            std::span<const text::Document> references) {
  const auto refs = overlap_tokens_of(references);
  return sari_components(text::overlap_tokens(input), text::overlap_tokens(candidate), refs).score;
}

OverlapRouge overlap_rouge(const text::Document& output, const text::Document& target) {
  const Tokens o = text::overlap_tokens(output);
  const Tokens t = text::overlap_tokens(target);
  return {rouge_n_prf(o, t, 1).f1, rouge_n_prf(o, t, 2).f1, rouge_l_prf(o, t).f1};
}

bool formality_accuracy(double prob, Formality desired) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw Error(ErrorCode::InvalidProbability, "formality probability outside [0, 1]");
  }
  return (prob >= 0.5) == (desired == Formality::Formal);
}

}  // namespace regstyle::metrics
