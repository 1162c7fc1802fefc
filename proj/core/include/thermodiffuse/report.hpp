#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tdiff {

// Numeric table destined for plotdata/<name>.csv.
struct PlotTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Self-describing experiment result: every metric is traceable to the echoed
// configuration, and the PRNG algorithm id makes runs reproducible.
struct ExperimentReport {
  std::string experiment;
  std::string timestamp;
  std::string prng_algorithm;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  std::vector<PlotTable> plot_tables;
};

enum class ReportFormat { kCsv, kJson };

std::string utc_timestamp();

std::string render_report_csv(const ExperimentReport& report);
std::string render_report_json(const ExperimentReport& report);
std::string render_plot_table_csv(const PlotTable& table);

// Writes <out_dir>/<experiment>/<timestamp>/report.{csv|json} plus
// plotdata/<table>.csv per table; returns the report directory.
std::string write_report(const ExperimentReport& report, const std::string& out_dir,
                         ReportFormat format);

}  // namespace tdiff
