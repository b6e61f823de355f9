#include <algorithm>
#include <map>
#include <set>

#include "regstyle/analysis.hpp"

namespace regstyle::analysis {

bool dominates(const SystemPoint& p, const SystemPoint& q) {
  return p.x >= q.x && p.y >= q.y && (p.x > q.x || p.y > q.y);
}

std::vector<bool> frontier_flags(const std::vector<SystemPoint>& points) {
  // Sweep by x descending: a point survives iff its y beats every y seen at a
  // strictly larger x, and is not beaten by a larger y at the same x.
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].x != points[b].x) return points[a].x > points[b].x;
    return points[a].y > points[b].y;
  });
  std::vector<bool> flags(points.size(), false);
  bool any = false;
  double best_y = 0.0;  // max y over strictly larger x
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && points[order[j]].x == points[order[i]].x) ++j;
    const double group_max = points[order[i]].y;
    for (std::size_t g = i; g < j; ++g) {
      const double y = points[order[g]].y;
      flags[order[g]] = y == group_max && (!any || y > best_y);
    }
    if (!any || group_max > best_y) best_y = group_max;
    any = true;
    i = j;
  }
  return flags;
}

std::vector<SystemPoint> pareto_frontier(std::vector<SystemPoint> points) {
  const auto flags = frontier_flags(points);
  std::vector<SystemPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (flags[i]) out.push_back(std::move(points[i]));
  }
  std::stable_sort(out.begin(), out.end(), [](const SystemPoint& a, const SystemPoint& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.system < b.system;
  });
  return out;
}

FrequencyTable descriptor_frequency(const std::vector<pipeline::PipelineRun>& runs, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (const auto& run : runs) {
    if (!run.descriptors) continue;
    const std::set<std::string> distinct(run.descriptors->begin(), run.descriptors->end());
    for (const auto& d : distinct) ++counts[d];
  }
  FrequencyTable table;
  table.k = k;
  table.entries.assign(counts.begin(), counts.end());
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (table.entries.size() > k) table.entries.resize(k);
  return table;
}

}  // namespace regstyle::analysis
