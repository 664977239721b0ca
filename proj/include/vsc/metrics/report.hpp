#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vsc/metrics/metrics.hpp"

namespace vsc::metrics {

// One evaluated sample. cd_top/cd_bottom carry the fallback directed distance
// when the matching pred partition was empty; the *_fallback flags record it.
struct MetricRow {
  std::string specimen;
  int level = 0;
  int frame = 0;
  int view = 0;
  double iou_input = 0;
  std::optional<double> seg_iou;       // only when labels were predicted
  std::optional<double> seg_accuracy;
  double cd = 0;
  double cd_top = 0;
  double cd_bottom = 0;
  bool cd_top_fallback = false;
  bool cd_bottom_fallback = false;
  double f1 = 0;
  double emd = 0;
  double snr_db = 0;  // may be +inf
};

struct Aggregate {
  std::size_t rows = 0;
  double iou_input = 0, cd = 0, cd_top = 0, cd_bottom = 0, f1 = 0, emd = 0;
  double snr_db = 0;           // mean over finite entries
  std::size_t snr_inf_count = 0;  // entries excluded from the mean
  std::optional<double> seg_iou, seg_accuracy;
};

struct MetricsReport {
  std::vector<MetricRow> rows;

  // Aggregates are plain arithmetic means of member rows.
  Aggregate aggregate_all() const;
  std::vector<std::pair<int, Aggregate>> aggregate_per_level() const;
  std::vector<std::pair<std::string, Aggregate>> aggregate_per_specimen() const;

  // Rows sorted by (specimen, level, frame, view) so emission is independent
  // of evaluation order.
  void sort_rows();

  void write_csv(std::ostream& os) const;
  static MetricsReport read_csv(std::istream& is);
  void write_json(std::ostream& os) const;
};

inline const std::vector<std::string>& correlation_variables() {
  static const std::vector<std::string> vars = {
      "specimen", "level", "iou_input", "seg_iou", "seg_accuracy",
      "cd",       "cd_top", "cd_bottom", "f1",     "emd",
      "snr_db"};
  return vars;
}

struct CorrelationMatrix {
  std::vector<std::string> variables;
  std::vector<double> values;  // row-major; NaN marks undefined cells

  double at(std::size_t i, std::size_t j) const {
    return values[i * variables.size() + j];
  }
  void write_csv(std::ostream& os) const;
};

// Pairwise Pearson coefficients over the selected report columns. Specimen ids
// are coded by their ordinal in the sorted unique list; rows with non-finite
// entries in the selected columns are dropped; zero-variance columns get NaN
// rows/columns.
CorrelationMatrix correlation_matrix(const MetricsReport& report,
                                     const std::vector<std::string>& variables);

}  // namespace vsc::metrics
