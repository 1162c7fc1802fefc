#include "thermodiffuse/report.hpp"

#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "thermodiffuse/errors.hpp"

namespace fs = std::filesystem;

namespace tdiff {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_report: cannot open " + path);
  out << content;
  if (!out) throw IoError("write_report: write failed for " + path);
}

}  // namespace

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm_utc);
  return buf;
}

std::string render_report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "section,key,value\n";
  os << "meta,experiment," << csv_escape(report.experiment) << "\n";
  os << "meta,timestamp," << csv_escape(report.timestamp) << "\n";
  os << "meta,prng_algorithm," << csv_escape(report.prng_algorithm) << "\n";
  for (const auto& [key, value] : report.config) {
    os << "config," << csv_escape(key) << "," << csv_escape(value) << "\n";
  }
  for (const auto& [key, value] : report.metrics) {
    os << "metric," << csv_escape(key) << "," << format_double(value) << "\n";
  }
  for (std::size_t i = 0; i < report.notes.size(); ++i) {
    os << "note," << i + 1 << "," << csv_escape(report.notes[i]) << "\n";
  }
  return os.str();
}

std::string render_report_json(const ExperimentReport& report) {
  nlohmann::ordered_json doc;
  doc["experiment"] = report.experiment;
  doc["timestamp"] = report.timestamp;
  doc["prng_algorithm"] = report.prng_algorithm;
  doc["config"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.config) doc["config"][key] = value;
  doc["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.metrics) {
    if (std::isfinite(value)) {
      doc["metrics"][key] = value;
    } else {
      doc["metrics"][key] = nullptr;
    }
  }
  doc["notes"] = report.notes;
  doc["plot_tables"] = nlohmann::ordered_json::array();
  for (const auto& table : report.plot_tables) {
    doc["plot_tables"].push_back(
        {{"name", table.name}, {"file", "plotdata/" + table.name + ".csv"}});
  }
  return doc.dump(2) + "\n";
}

std::string render_plot_table_csv(const PlotTable& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << csv_escape(table.columns[i]);
  }
  os << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw ContractViolation("plot table " + table.name + ": row width differs from header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << format_double(row[i]);
    }
    os << "\n";
  }
  return os.str();
}

std::string write_report(const ExperimentReport& report, const std::string& out_dir,
                         ReportFormat format) {
  if (report.experiment.empty()) throw ContractViolation("write_report: empty experiment id");
  fs::path dir = fs::path(out_dir) / report.experiment / report.timestamp;
  for (int suffix = 2; fs::exists(dir); ++suffix) {
    dir = fs::path(out_dir) / report.experiment / (report.timestamp + "-" +
                                                   std::to_string(suffix));
  }
  fs::create_directories(dir / "plotdata");
  if (format == ReportFormat::kCsv) {
    write_file((dir / "report.csv").string(), render_report_csv(report));
  } else {
    write_file((dir / "report.json").string(), render_report_json(report));
  }
  for (const auto& table : report.plot_tables) {
    write_file((dir / "plotdata" / (table.name + ".csv")).string(),
               render_plot_table_csv(table));
  }
  return dir.string();
}

}  // namespace tdiff
