#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "regstyle/metrics.hpp"

namespace regstyle::metrics {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Dense ids for strings so counters are plain vectors.
class Interner {
 public:
  std::size_t id(const std::string& s) {
    auto [it, inserted] = ids_.try_emplace(s, ids_.size());
    return it->second;
  }
  std::size_t size() const { return ids_.size(); }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
};

// Alignment search. A valid alignment pairs tokens with equal surfaces
// (exact) or equal stems but different surfaces (stem) with
// exact = max possible exact matches and stem = max possible stem matches on
// what remains. Among those, chunks are minimized by depth-first search over
// candidate positions with a greedy alignment as the initial bound.
class Aligner {
 public:
  Aligner(std::span<const std::string> cand, std::span<const std::string> ref, std::size_t budget)
      : budget_(budget) {
    Interner surfaces, stems;
    for (const auto& t : cand) {
      cw_.push_back(surfaces.id(t));
      cs_.push_back(stems.id(text::stem(t)));
    }
    for (const auto& t : ref) {
      rw_.push_back(surfaces.id(t));
      rs_.push_back(stems.id(text::stem(t)));
    }
    cand_w_.assign(surfaces.size(), 0);
    ref_w_.assign(surfaces.size(), 0);
    cand_s_.assign(stems.size(), 0);
    ref_s_.assign(stems.size(), 0);
    for (std::size_t i = 0; i < cw_.size(); ++i) {
      ++cand_w_[cw_[i]];
      ++cand_s_[cs_[i]];
    }
    for (std::size_t j = 0; j < rw_.size(); ++j) {
      ++ref_w_[rw_[j]];
      ++ref_s_[rs_[j]];
    }
    for (std::size_t w = 0; w < cand_w_.size(); ++w) ub_exact_ += std::min(cand_w_[w], ref_w_[w]);
    for (std::size_t s = 0; s < cand_s_.size(); ++s) ub_total_ += std::min(cand_s_[s], ref_s_[s]);
    max_exact_ = ub_exact_;
    max_stem_ = ub_total_ - ub_exact_;

    options_.resize(cw_.size());
    for (std::size_t i = 0; i < cw_.size(); ++i) {
      for (std::size_t j = 0; j < rw_.size(); ++j) {
        if (cw_[i] == rw_[j]) options_[i].push_back(j);
      }
      for (std::size_t j = 0; j < rw_.size(); ++j) {
        if (cw_[i] != rw_[j] && cs_[i] == rs_[j]) options_[i].push_back(j);
      }
    }
  }

  std::size_t max_exact() const { return max_exact_; }
  std::size_t max_stem() const { return max_stem_; }

  // Returns the minimum chunk count; sets exhaustive to false on budget exhaustion.
  std::size_t min_chunks(bool& exhaustive) {
    if (max_exact_ + max_stem_ == 0) return 0;
    best_ = greedy_chunks();
    used_.assign(rw_.size(), false);
    nodes_ = 0;
    aborted_ = false;
    search(0, 0, 0, 0, kNone);
    exhaustive = !aborted_;
    return best_;
  }

 private:
  // Exact stage then stem stage, each left to right taking the first free
  // compatible reference token. Both stages reach their maximum counts.
  std::size_t greedy_chunks() const {
    std::vector<std::size_t> link(cw_.size(), kNone);
    std::vector<bool> used(rw_.size(), false);
    for (std::size_t i = 0; i < cw_.size(); ++i) {
      for (std::size_t j = 0; j < rw_.size(); ++j) {
        if (!used[j] && cw_[i] == rw_[j]) {
          link[i] = j;
          used[j] = true;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < cw_.size(); ++i) {
      if (link[i] != kNone) continue;
      for (std::size_t j = 0; j < rw_.size(); ++j) {
        if (!used[j] && cw_[i] != rw_[j] && cs_[i] == rs_[j]) {
          link[i] = j;
          used[j] = true;
          break;
        }
      }
    }
    return count_chunks(link);
  }

  static std::size_t count_chunks(const std::vector<std::size_t>& link) {
    std::size_t chunks = 0;
    for (std::size_t i = 0; i < link.size(); ++i) {
      if (link[i] == kNone) continue;
      if (i == 0 || link[i - 1] == kNone || link[i - 1] + 1 != link[i]) ++chunks;
    }
    return chunks;
  }

  // Counter updates keep the two upper bounds current.
  void take_cand(std::size_t i, int delta) {
    adjust(cand_w_[cw_[i]], ref_w_[cw_[i]], delta, ub_exact_, true);
    adjust(cand_s_[cs_[i]], ref_s_[cs_[i]], delta, ub_total_, true);
  }
  void take_ref(std::size_t j, int delta) {
    adjust(cand_w_[rw_[j]], ref_w_[rw_[j]], delta, ub_exact_, false);
    adjust(cand_s_[rs_[j]], ref_s_[rs_[j]], delta, ub_total_, false);
  }
  static void adjust(std::size_t& c, std::size_t& r, int delta, std::size_t& ub, bool cand_side) {
    ub -= std::min(c, r);
    std::size_t& x = cand_side ? c : r;
    x = delta > 0 ? x + 1 : x - 1;
    ub += std::min(c, r);
  }

  void search(std::size_t i, std::size_t exact, std::size_t stem, std::size_t chunks, std::size_t prev) {
    if (aborted_) return;
    if (++nodes_ > budget_) {
      aborted_ = true;
      return;
    }
    if (chunks >= best_) return;
    if (exact + ub_exact_ < max_exact_) return;
    if (exact + stem + ub_total_ < max_exact_ + max_stem_) return;
    if (i == cw_.size()) {
      if (exact == max_exact_ && stem == max_stem_) best_ = chunks;
      return;
    }

    take_cand(i, -1);
    auto try_match = [&](std::size_t j) {
      if (used_[j]) return;
      const bool is_exact = cw_[i] == rw_[j];
      if (is_exact ? exact >= max_exact_ : stem >= max_stem_) return;
      used_[j] = true;
      take_ref(j, -1);
      const bool continues = prev != kNone && prev + 1 == j;
      search(i + 1, exact + (is_exact ? 1 : 0), stem + (is_exact ? 0 : 1), chunks + (continues ? 0 : 1), j);
      take_ref(j, +1);
      used_[j] = false;
    };
    // Extending the current chunk first finds good bounds early.
    const std::size_t next = prev == kNone ? kNone : prev + 1;
    if (next != kNone && std::find(options_[i].begin(), options_[i].end(), next) != options_[i].end()) {
      try_match(next);
    }
    for (std::size_t j : options_[i]) {
      if (j != next) try_match(j);
    }
    search(i + 1, exact, stem, chunks, kNone);
    take_cand(i, +1);
  }

  std::size_t budget_;
  std::vector<std::size_t> cw_, cs_, rw_, rs_;
  std::vector<std::size_t> cand_w_, ref_w_, cand_s_, ref_s_;
  std::size_t ub_exact_ = 0;
  std::size_t ub_total_ = 0;
  std::size_t max_exact_ = 0;
  std::size_t max_stem_ = 0;
  std::vector<std::vector<std::size_t>> options_;
  std::vector<bool> used_;
  std::size_t best_ = 0;
  std::size_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace

MeteorStats meteor_stats(std::span<const std::string> candidate, std::span<const std::string> reference,
                         const MeteorParams& params) {
  MeteorStats st;
  st.candidate_length = candidate.size();
  st.reference_length = reference.size();
  if (candidate.empty() || reference.empty()) return st;

  Aligner aligner(candidate, reference, params.search_budget);
  st.exact_matches = aligner.max_exact();
  st.stem_matches = aligner.max_stem();
  st.chunks = aligner.min_chunks(st.exhaustive);
  const std::size_t m = st.matches();
  if (m == 0) return st;

  const double md = static_cast<double>(m);
  const double p = md / static_cast<double>(candidate.size());
  const double r = md / static_cast<double>(reference.size());
  const double fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double penalty = params.gamma * std::pow(static_cast<double>(st.chunks) / md, params.beta);
  st.score = fmean * (1.0 - penalty);
  return st;
}

double meteor(const text::Document& candidate, const text::Document& reference) {
  return meteor_stats(text::overlap_tokens(candidate), text::overlap_tokens(reference)).score;
}

double meteor(const text::Document& candidate, std::span<const text::Document> references) {
  const Tokens c = text::overlap_tokens(candidate);
  double best = 0.0;
  for (const auto& ref : references) best = std::max(best, meteor_stats(c, text::overlap_tokens(ref)).score);
  return best;
}

}  // namespace regstyle::metrics
