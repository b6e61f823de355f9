#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regstyle/datasets.hpp"
#include "regstyle/metrics.hpp"
#include "regstyle/pipeline.hpp"

namespace regstyle::analysis {

struct SystemPoint {
  std::string system;
  double x = 0.0;  // style transfer strength
  double y = 0.0;  // meaning preservation
  std::size_t n_cases = 0;

  bool operator==(const SystemPoint&) const = default;
};

/// p dominates q: at least as good on both axes and better on one.
bool dominates(const SystemPoint& p, const SystemPoint& q);
/// flags[i] is true when no point dominates points[i].
std::vector<bool> frontier_flags(const std::vector<SystemPoint>& points);
/// Non-dominated points (duplicates kept), sorted by x, then y, then name.
std::vector<SystemPoint> pareto_frontier(std::vector<SystemPoint> points);

struct FrequencyTable {
  std::vector<std::pair<std::string, std::size_t>> entries;  // count desc, ties lexicographic
  std::size_t k = 15;
};

/// Counts each descriptor once per run that lists it.
FrequencyTable descriptor_frequency(const std::vector<pipeline::PipelineRun>& runs, std::size_t k = 15);

// ---------------------------------------------------------------------------
// Aggregation

/// Score columns in report order, with accessors into ScoreVector.
struct MetricColumn {
  std::string name;
  std::function<std::optional<double>(const metrics::ScoreVector&)> get;
};
const std::vector<MetricColumn>& metric_columns();

struct CaseScore {
  std::string case_id;
  pipeline::System system = pipeline::System::Copy;
  bool degraded = false;
  std::optional<metrics::ScoreVector> scores;  // absent when degraded
};

struct SystemRow {
  std::string system;
  std::size_t n_cases = 0;   // scored, non-degraded
  std::size_t degraded = 0;
  std::vector<std::optional<double>> means;  // aligned with Report::columns
};

struct Report {
  datasets::Task task = datasets::Task::Mud;
  std::string variant;
  std::vector<std::string> columns;  // metric names that have a value for some system
  std::vector<SystemRow> rows;

  std::optional<double> mean(const std::string& system, const std::string& column) const;
  std::string to_csv() const;
  std::string to_text() const;
};

/// Per-system means over non-degraded cases. `formality_acc` is the share of
/// GYAFC cases whose classifier verdict matched the desired formality.
Report aggregate(const datasets::PairingPlan& plan, const std::vector<CaseScore>& scores,
                 const std::vector<pipeline::System>& systems);

/// One point per system with both coordinates available: x = towards_biber,
/// y = mis (mud, gyafc) or rouge1 (cochrane).
std::vector<SystemPoint> system_points(const Report& report);

// ---------------------------------------------------------------------------
// Plot data

/// system,x,y,n_cases,on_frontier
std::string plot_csv(const std::vector<SystemPoint>& points);
/// Standalone SVG 1.1 scatter with the frontier drawn as a polyline.
std::string plot_svg(const std::vector<SystemPoint>& points, const std::string& title, const std::string& x_label,
                     const std::string& y_label);

std::string frequency_csv(const std::string& system, const FrequencyTable& table);

}  // namespace regstyle::analysis
