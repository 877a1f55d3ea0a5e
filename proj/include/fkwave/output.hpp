#pragma once

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

#include "fkwave/analysis.hpp"
#include "fkwave/environment.hpp"
#include "fkwave/localsolve.hpp"
#include "fkwave/oracles.hpp"
#include "fkwave/pdesim.hpp"
#include "fkwave/wavesolver.hpp"

namespace fkwave {

// %.17g, so every double round-trips
std::string format_double(double x);

// RFC-4180: CRLF rows, fields with comma, quote or line breaks are quoted
class CsvTable {
 public:
  using Cell = std::variant<double, int, std::string>;

  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<Cell>& row);
  size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(const std::string& field);

struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  bool log_y = false;  // nonpositive values are dropped
};

// standalone 800x600 SVG line plot
std::string svg_line_plot(const std::vector<Series>& series, const PlotSpec& spec);

void write_text(const std::string& path, const std::string& text);

CsvTable wave_table(const WaveSolution& w);
CsvTable local_table(const LocalSolution& s);
CsvTable residual_history_table(const std::vector<double>& history);
CsvTable trajectory_table(const TrajectorySummary& tr, const std::vector<double>& z);
CsvTable monitor_table(const TrajectorySummary& tr);
CsvTable fit_table(const FitResult& r);

nlohmann::json to_json(const RegimeReport& r);
nlohmann::json to_json(const WaveOutcome& o, const EnvironmentProfile& prof);
nlohmann::json to_json(const FitResult& r);
nlohmann::json to_json(const InventoryVerdict& v);
nlohmann::json to_json(const SignReport& s);

// non-finite numbers become the strings "inf", "-inf" or "nan"
nlohmann::json number(double x);

}  // namespace fkwave
