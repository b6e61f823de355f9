#include <algorithm>
#include <cstdio>
#include <map>

#include "regstyle/analysis.hpp"
#include "regstyle/csv.hpp"

namespace regstyle::analysis {

using metrics::ScoreVector;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string reference_note(datasets::Task task) {
  switch (task) {
    case datasets::Task::Mud:
      return "meaning metrics compare the rewrite with its input; overlap_* compare it with the target exemplar";
    case datasets::Task::Gyafc:
      return "meaning metrics compare the rewrite with the gold rewrites (best reference); overlap_* compare it with "
             "the target exemplar";
    case datasets::Task::Cochrane:
      return "rouge/bleu/sari compare the rewrite with the gold plain-language summary; overlap_* compare it with the "
             "target exemplar";
  }
  return {};
}

}  // namespace

const std::vector<MetricColumn>& metric_columns() {
  using Get = std::function<std::optional<double>(const ScoreVector&)>;
  static const std::vector<MetricColumn> cols = {
      {"away_biber", Get([](const ScoreVector& s) -> std::optional<double> { return s.away_biber; })},
      {"towards_biber", Get([](const ScoreVector& s) -> std::optional<double> { return s.towards_biber; })},
      {"away_luar", Get([](const ScoreVector& s) { return s.away_luar; })},
      {"towards_luar", Get([](const ScoreVector& s) { return s.towards_luar; })},
      {"away_stylecav", Get([](const ScoreVector& s) { return s.away_stylecav; })},
      {"towards_stylecav", Get([](const ScoreVector& s) { return s.towards_stylecav; })},
      {"mis", Get([](const ScoreVector& s) { return s.mis; })},
      {"sbert_sim", Get([](const ScoreVector& s) { return s.sbert_sim; })},
      {"meteor", Get([](const ScoreVector& s) { return s.meteor; })},
      {"cola", Get([](const ScoreVector& s) { return s.cola; })},
      {"formality_prob", Get([](const ScoreVector& s) { return s.formality_prob; })},
      {"formality_acc",
       Get([](const ScoreVector& s) -> std::optional<double> {
         if (!s.formality_correct) return std::nullopt;
         return *s.formality_correct ? 1.0 : 0.0;
       })},
      {"fkgl", Get([](const ScoreVector& s) { return s.fkgl; })},
      {"ari", Get([](const ScoreVector& s) { return s.ari; })},
      {"rouge1", Get([](const ScoreVector& s) { return s.rouge1; })},
      {"rouge2", Get([](const ScoreVector& s) { return s.rouge2; })},
      {"rougeL", Get([](const ScoreVector& s) { return s.rougeL; })},
      {"bleu", Get([](const ScoreVector& s) { return s.bleu; })},
      {"sari", Get([](const ScoreVector& s) { return s.sari; })},
      {"overlap_rouge1", Get([](const ScoreVector& s) -> std::optional<double> { return s.overlap_rouge1; })},
      {"overlap_rouge2", Get([](const ScoreVector& s) -> std::optional<double> { return s.overlap_rouge2; })},
      {"overlap_rougeL", Get([](const ScoreVector& s) -> std::optional<double> { return s.overlap_rougeL; })},
  };
  return cols;
}

Report aggregate(const datasets::PairingPlan& plan, const std::vector<CaseScore>& scores,
                 const std::vector<pipeline::System>& systems) {
  const auto& cols = metric_columns();
  struct Acc {
    std::size_t n = 0, degraded = 0;
    std::vector<double> sum;
    std::vector<std::size_t> count;
  };
  std::map<std::string, Acc> acc;
  for (auto s : systems) {
    auto& a = acc[std::string(pipeline::to_string(s))];
    a.sum.assign(cols.size(), 0.0);
    a.count.assign(cols.size(), 0);
  }
  for (const auto& cs : scores) {
    const auto it = acc.find(std::string(pipeline::to_string(cs.system)));
    if (it == acc.end()) continue;
    auto& a = it->second;
    if (cs.degraded || !cs.scores) {
      ++a.degraded;
      continue;
    }
    ++a.n;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (const auto v = cols[c].get(*cs.scores)) {
        a.sum[c] += *v;
        ++a.count[c];
      }
    }
  }

  Report report;
  report.task = plan.task;
  report.variant = plan.variant;
  std::vector<std::size_t> used;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const bool any = std::any_of(acc.begin(), acc.end(), [&](const auto& kv) { return kv.second.count[c] > 0; });
    if (any) {
      used.push_back(c);
      report.columns.push_back(cols[c].name);
    }
  }
  for (auto s : systems) {
    const std::string name(pipeline::to_string(s));
    const auto& a = acc.at(name);
    SystemRow row{name, a.n, a.degraded, {}};
    for (auto c : used) {
      row.means.push_back(a.count[c] ? std::optional<double>(a.sum[c] / double(a.count[c])) : std::nullopt);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::optional<double> Report::mean(const std::string& system, const std::string& column) const {
  const auto col = std::find(columns.begin(), columns.end(), column);
  if (col == columns.end()) return std::nullopt;
  for (const auto& r : rows) {
    if (r.system == system) return r.means[std::size_t(col - columns.begin())];
  }
  return std::nullopt;
}

std::string Report::to_csv() const {
  std::vector<std::string> header = {"system", "n_cases", "degraded"};
  header.insert(header.end(), columns.begin(), columns.end());
  std::string out = csv_row(header);
  for (const auto& r : rows) {
    std::vector<std::string> row = {r.system, std::to_string(r.n_cases), std::to_string(r.degraded)};
    for (const auto& m : r.means) row.push_back(m ? fixed(*m, 6) : "");
    out += csv_row(row);
  }
  return out;
}

std::string Report::to_text() const {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {"system", "n", "degraded"};
  header.insert(header.end(), columns.begin(), columns.end());
  table.push_back(header);
  for (const auto& r : rows) {
    std::vector<std::string> row = {r.system, std::to_string(r.n_cases), std::to_string(r.degraded)};
    for (const auto& m : r.means) row.push_back(m ? fixed(*m, 3) : "-");
    table.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }

  std::string out = "task: " + std::string(datasets::to_string(task)) + " (" + variant + ")\n";
  out += "note: " + reference_note(task) + "\n";
  out += "note: overlap metrics use case-folded tokens; rouge is F1; meteor uses exact and stem matching only\n";
  out += "note: means exclude degraded cases\n\n";
  for (std::size_t r = 0; r < table.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < table[r].size(); ++i) {
      const auto& cell = table[r][i];
      const std::string pad(width[i] - cell.size(), ' ');
      line += i == 0 ? cell + pad : "  " + pad + cell;  // names left, numbers right
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  return out;
}

std::vector<SystemPoint> system_points(const Report& report) {
  const std::string y_col = report.task == datasets::Task::Cochrane ? "rouge1" : "mis";
  std::vector<SystemPoint> out;
  for (const auto& r : report.rows) {
    const auto x = report.mean(r.system, "towards_biber");
    const auto y = report.mean(r.system, y_col);
    if (x && y && r.n_cases > 0) out.push_back({r.system, *x, *y, r.n_cases});
  }
  return out;
}

std::string frequency_csv(const std::string& system, const FrequencyTable& table) {
  std::string out = csv_row({"system", "rank", "descriptor", "count"});
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    out += csv_row({system, std::to_string(i + 1), table.entries[i].first, std::to_string(table.entries[i].second)});
  }
  return out;
}

}  // namespace regstyle::analysis
