#include "vsc/metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vsc::metrics {

namespace {

// 17 significant digits round-trip doubles exactly; '.' decimal, no locale.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) fail(ErrorCategory::Format, "bad numeric field: " + s);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

const char* kCsvHeader =
    "specimen,level,frame,view,iou_input,seg_iou,seg_accuracy,cd,cd_top,"
    "cd_bottom,cd_top_fallback,cd_bottom_fallback,f1,emd,snr_db";

Aggregate aggregate_rows(const std::vector<const MetricRow*>& rows) {
  Aggregate a;
  a.rows = rows.size();
  if (rows.empty()) return a;
  double snr_sum = 0;
  std::size_t snr_n = 0, seg_n = 0;
  double seg_iou_sum = 0, seg_acc_sum = 0;
  for (const MetricRow* r : rows) {
    a.iou_input += r->iou_input;
    a.cd += r->cd;
    a.cd_top += r->cd_top;
    a.cd_bottom += r->cd_bottom;
    a.f1 += r->f1;
    a.emd += r->emd;
    if (std::isfinite(r->snr_db)) {
      snr_sum += r->snr_db;
      ++snr_n;
    } else {
      ++a.snr_inf_count;
    }
    if (r->seg_iou && r->seg_accuracy) {
      seg_iou_sum += *r->seg_iou;
      seg_acc_sum += *r->seg_accuracy;
      ++seg_n;
    }
  }
  const double n = double(rows.size());
  a.iou_input /= n;
  a.cd /= n;
  a.cd_top /= n;
  a.cd_bottom /= n;
  a.f1 /= n;
  a.emd /= n;
  a.snr_db = snr_n ? snr_sum / double(snr_n) : std::numeric_limits<double>::quiet_NaN();
  if (seg_n) {
    a.seg_iou = seg_iou_sum / double(seg_n);
    a.seg_accuracy = seg_acc_sum / double(seg_n);
  }
  return a;
}

nlohmann::json aggregate_json(const Aggregate& a) {
  nlohmann::json j;
  j["rows"] = a.rows;
  j["iou_input"] = a.iou_input;
  j["cd"] = a.cd;
  j["cd_top"] = a.cd_top;
  j["cd_bottom"] = a.cd_bottom;
  j["f1"] = a.f1;
  j["emd"] = a.emd;
  if (std::isnan(a.snr_db))
    j["snr_db"] = nullptr;
  else
    j["snr_db"] = a.snr_db;
  j["snr_inf_count"] = a.snr_inf_count;
  if (a.seg_iou) j["seg_iou"] = *a.seg_iou;
  if (a.seg_accuracy) j["seg_accuracy"] = *a.seg_accuracy;
  return j;
}

}  // namespace

Aggregate MetricsReport::aggregate_all() const {
  std::vector<const MetricRow*> ptrs;
  ptrs.reserve(rows.size());
  for (const auto& r : rows) ptrs.push_back(&r);
  return aggregate_rows(ptrs);
}

std::vector<std::pair<int, Aggregate>> MetricsReport::aggregate_per_level() const {
  std::map<int, std::vector<const MetricRow*>> groups;
  for (const auto& r : rows) groups[r.level].push_back(&r);
  std::vector<std::pair<int, Aggregate>> out;
  for (const auto& [level, ptrs] : groups) out.emplace_back(level, aggregate_rows(ptrs));
  return out;
}

std::vector<std::pair<std::string, Aggregate>> MetricsReport::aggregate_per_specimen()
    const {
  std::map<std::string, std::vector<const MetricRow*>> groups;
  for (const auto& r : rows) groups[r.specimen].push_back(&r);
  std::vector<std::pair<std::string, Aggregate>> out;
  for (const auto& [spec, ptrs] : groups) out.emplace_back(spec, aggregate_rows(ptrs));
  return out;
}

void MetricsReport::sort_rows() {
  std::sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
    return std::tie(a.specimen, a.level, a.frame, a.view) <
           std::tie(b.specimen, b.level, b.frame, b.view);
  });
}

void MetricsReport::write_csv(std::ostream& os) const {
  os << kCsvHeader << '\n';
  for (const MetricRow& r : rows) {
    os << r.specimen << ',' << r.level << ',' << r.frame << ',' << r.view << ','
       << fmt(r.iou_input) << ',' << (r.seg_iou ? fmt(*r.seg_iou) : "") << ','
       << (r.seg_accuracy ? fmt(*r.seg_accuracy) : "") << ',' << fmt(r.cd) << ','
       << fmt(r.cd_top) << ',' << fmt(r.cd_bottom) << ',' << int(r.cd_top_fallback)
       << ',' << int(r.cd_bottom_fallback) << ',' << fmt(r.f1) << ',' << fmt(r.emd)
       << ',' << fmt(r.snr_db) << '\n';
  }
}

MetricsReport MetricsReport::read_csv(std::istream& is) {
  MetricsReport report;
  std::string line;
  if (!std::getline(is, line)) fail(ErrorCategory::Format, "metrics csv: empty file");
  if (split_csv_line(line) != split_csv_line(kCsvHeader))
    fail(ErrorCategory::Format, "metrics csv: unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 15) fail(ErrorCategory::Format, "metrics csv: wrong field count");
    MetricRow r;
    r.specimen = f[0];
    r.level = std::stoi(f[1]);
    r.frame = std::stoi(f[2]);
    r.view = std::stoi(f[3]);
    r.iou_input = parse_double(f[4]);
    if (!f[5].empty()) r.seg_iou = parse_double(f[5]);
    if (!f[6].empty()) r.seg_accuracy = parse_double(f[6]);
    r.cd = parse_double(f[7]);
    r.cd_top = parse_double(f[8]);
    r.cd_bottom = parse_double(f[9]);
    r.cd_top_fallback = f[10] == "1";
    r.cd_bottom_fallback = f[11] == "1";
    r.f1 = parse_double(f[12]);
    r.emd = parse_double(f[13]);
    r.snr_db = parse_double(f[14]);
    report.rows.push_back(std::move(r));
  }
  return report;
}

void MetricsReport::write_json(std::ostream& os) const {
  nlohmann::json j;
  j["overall"] = aggregate_json(aggregate_all());
  nlohmann::json per_level = nlohmann::json::object();
  for (const auto& [level, agg] : aggregate_per_level())
    per_level[std::to_string(level)] = aggregate_json(agg);
  j["per_level"] = per_level;
  nlohmann::json per_spec = nlohmann::json::object();
  for (const auto& [spec, agg] : aggregate_per_specimen())
    per_spec[spec] = aggregate_json(agg);
  j["per_specimen"] = per_spec;
  os << j.dump(2) << '\n';
}

CorrelationMatrix correlation_matrix(const MetricsReport& report,
                                     const std::vector<std::string>& variables) {
  if (report.rows.size() < 2)
    fail(ErrorCategory::InvalidArgument, "correlation_matrix: need at least 2 rows");

  // Specimen coded by ordinal in the sorted unique id list.
  std::set<std::string> specimen_set;
  for (const auto& r : report.rows) specimen_set.insert(r.specimen);
  std::map<std::string, double> specimen_code;
  double code = 0;
  for (const auto& s : specimen_set) specimen_code[s] = code++;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto column_value = [&](const MetricRow& r, const std::string& var) -> double {
    if (var == "specimen") return specimen_code.at(r.specimen);
    if (var == "level") return double(r.level);
    if (var == "iou_input") return r.iou_input;
    if (var == "seg_iou") return r.seg_iou ? *r.seg_iou : nan;
    if (var == "seg_accuracy") return r.seg_accuracy ? *r.seg_accuracy : nan;
    if (var == "cd") return r.cd;
    if (var == "cd_top") return r.cd_top;
    if (var == "cd_bottom") return r.cd_bottom;
    if (var == "f1") return r.f1;
    if (var == "emd") return r.emd;
    if (var == "snr_db") return r.snr_db;
    fail(ErrorCategory::InvalidArgument, "correlation_matrix: unknown variable " + var);
  };

  const std::size_t nvar = variables.size();
  std::vector<std::vector<double>> cols(nvar);

  // A column missing in some rows (or non-finite, e.g. +inf SNR) drops those
  // rows for the whole matrix, unless it is missing everywhere, in which case
  // only that column is flagged undefined.
  std::vector<bool> col_defined(nvar, false);
  for (std::size_t c = 0; c < nvar; ++c)
    for (const auto& r : report.rows)
      if (std::isfinite(column_value(r, variables[c]))) {
        col_defined[c] = true;
        break;
      }

  for (const auto& r : report.rows) {
    bool keep = true;
    for (std::size_t c = 0; c < nvar; ++c)
      if (col_defined[c] && !std::isfinite(column_value(r, variables[c]))) keep = false;
    if (!keep) continue;
    for (std::size_t c = 0; c < nvar; ++c)
      cols[c].push_back(column_value(r, variables[c]));
  }

  CorrelationMatrix m;
  m.variables = variables;
  m.values.assign(nvar * nvar, nan);
  for (std::size_t i = 0; i < nvar; ++i) {
    for (std::size_t j = i; j < nvar; ++j) {
      if (!col_defined[i] || !col_defined[j] || cols[i].size() < 2) continue;
      double v;
      try {
        v = i == j ? pearson(cols[i], cols[i]) : pearson(cols[i], cols[j]);
      } catch (const Error&) {
        continue;  // zero variance: stays NaN
      }
      m.values[i * nvar + j] = v;
      m.values[j * nvar + i] = v;
    }
  }
  return m;
}

void CorrelationMatrix::write_csv(std::ostream& os) const {
  os << "variable";
  for (const auto& v : variables) os << ',' << v;
  os << '\n';
  for (std::size_t i = 0; i < variables.size(); ++i) {
    os << variables[i];
    for (std::size_t j = 0; j < variables.size(); ++j) os << ',' << fmt(at(i, j));
    os << '\n';
  }
}

}  // namespace vsc::metrics
