#include "fkwave/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fkwave {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void CsvTable::add_row(const std::vector<Cell>& row) {
  if (row.size() != header_.size()) throw std::invalid_argument("csv row width does not match the header");
  std::vector<std::string> r;
  for (const auto& c : row) {
    if (auto d = std::get_if<double>(&c))
      r.push_back(format_double(*d));
    else if (auto i = std::get_if<int>(&c))
      r.push_back(std::to_string(*i));
    else
      r.push_back(std::get<std::string>(c));
  }
  rows_.push_back(std::move(r));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(fields[i]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path);
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt(double x, int prec = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

// round step from the span, 1-2-5 ladder
std::vector<double> ticks(double lo, double hi) {
  double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  double raw = span / 6.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string svg_line_plot(const std::vector<Series>& series, const PlotSpec& spec) {
  const double W = 800, H = 600, ml = 80, mr = 20, mt = 40, mb = 60;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  for (size_t s = 0; s < series.size(); ++s) {
    const auto& S = series[s];
    for (size_t i = 0; i < std::min(S.x.size(), S.y.size()); ++i) {
      double y = S.y[i];
      if (!std::isfinite(S.x[i]) || !std::isfinite(y)) continue;
      if (spec.log_y) {
        if (!(y > 0.0)) continue;
        y = std::log10(y);
      }
      pts[s].push_back({S.x[i], y});
      xlo = std::min(xlo, S.x[i]);
      xhi = std::max(xhi, S.x[i]);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (xhi == xlo) xhi = xlo + 1;
  if (yhi == ylo) yhi = ylo + 1;
  double pad = 0.03 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  auto px = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ylo) / (yhi - ylo) * (H - mt - mb); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  o << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  o << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << xml_escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(xlo, xhi))
    o << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << H - mb << "\" x2=\"" << fmt(px(t)) << "\" y2=\"" << H - mb + 5
      << "\" stroke=\"black\"/><text x=\"" << fmt(px(t)) << "\" y=\"" << H - mb + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(t, 4) << "</text>\n";
  for (double t : ticks(ylo, yhi))
    o << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << ml << "\" y2=\"" << fmt(py(t))
      << "\" stroke=\"black\"/><text x=\"" << ml - 8 << "\" y=\"" << fmt(py(t) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
      << (spec.log_y ? "1e" + fmt(t, 3) : fmt(t, 4)) << "</text>\n";
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(spec.x_label)
    << "</text>\n";
  o << "<text x=\"20\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"14\" transform=\"rotate(-90 20 " << (mt + H - mb) / 2 << ")\">"
    << xml_escape(spec.y_label + (spec.log_y ? " (log10)" : "")) << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* col = kPalette[s % std::size(kPalette)];
    // thin long series to keep the file small
    size_t n = pts[s].size(), stride = std::max<size_t>(1, n / 2000);
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < n; i += stride) o << fmt(px(pts[s][i].first)) << ',' << fmt(py(pts[s][i].second)) << ' ';
    if (n && (n - 1) % stride) o << fmt(px(pts[s].back().first)) << ',' << fmt(py(pts[s].back().second));
    o << "\"/>\n";
    o << "<text x=\"" << W - mr - 10 << "\" y=\"" << mt + 20 + 18 * s << "\" text-anchor=\"end\" fill=\"" << col
      << "\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(series[s].name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

CsvTable wave_table(const WaveSolution& w) {
  CsvTable t({"z", "phi"});
  for (size_t i = 0; i < w.z.size(); ++i) t.add_row({w.z[i], w.phi[i]});
  return t;
}

CsvTable local_table(const LocalSolution& s) {
  CsvTable t({"z", "psi", "dpsi", "log_psi"});
  for (size_t i = 0; i < s.grid.size(); ++i) t.add_row({s.grid[i], s.psi[i], s.dpsi[i], s.log_psi[i]});
  return t;
}

CsvTable residual_history_table(const std::vector<double>& history) {
  CsvTable t({"iteration", "residual"});
  for (size_t i = 0; i < history.size(); ++i) t.add_row({static_cast<int>(i), history[i]});
  return t;
}

CsvTable trajectory_table(const TrajectorySummary& tr, const std::vector<double>& z) {
  CsvTable t({"t", "z", "u"});
  for (const auto& s : tr.snapshots)
    for (size_t i = 0; i < z.size(); ++i) t.add_row({s.t, z[i], s.u[i]});
  return t;
}

CsvTable monitor_table(const TrajectorySummary& tr) {
  CsvTable t({"t", "metric", "value"});
  for (size_t i = 0; i < tr.t.size(); ++i) {
    if (!std::isnan(tr.distance[i])) t.add_row({tr.t[i], std::string("distance"), tr.distance[i]});
    t.add_row({tr.t[i], std::string("residual"), tr.residual[i]});
    t.add_row({tr.t[i], std::string("front"), tr.front[i]});
  }
  return t;
}

CsvTable fit_table(const FitResult& r) {
  CsvTable t({"rank", "candidate", "z0", "z_a", "z_b", "amplitude", "rms_log_error", "local_rate_error", "valid",
              "note"});
  for (size_t i = 0; i < r.ranked.size(); ++i) {
    const auto& f = r.ranked[i];
    t.add_row({static_cast<int>(i + 1), decay_kind_name(f.candidate.kind), f.candidate.z0, f.z_a, f.z_b, f.amplitude,
               f.rms_log_error, f.local_rate_error, std::string(f.valid ? "true" : "false"), f.note});
  }
  return t;
}

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

nlohmann::json to_json(const RegimeReport& r) {
  nlohmann::json j;
  j["alpha"] = number(r.alpha);
  j["c"] = number(r.c);
  j["case_abcd"] = r.case_abcd;
  j["case_123"] = r.case_123;
  j["exceptional"] = r.exceptional;
  j["lambda1"] = number(r.lambda1);
  j["lambda1_prime"] = number(r.lambda1_prime);
  j["inventory"] = r.inventory ? nlohmann::json(*r.inventory) : nlohmann::json();
  j["minimal_decay"] = r.minimal_decay ? nlohmann::json(decay_kind_name(*r.minimal_decay)) : nlohmann::json();
  j["maximal_decay"] = r.maximal_decay ? nlohmann::json(decay_kind_name(*r.maximal_decay)) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const WaveOutcome& o, const EnvironmentProfile& prof) {
  const auto& w = o.solution;
  nlohmann::json j;
  j["status"] = wave_status_name(o.status);
  j["message"] = o.message;
  j["c"] = number(w.c);
  j["L"] = number(w.L);
  j["N"] = w.N;
  j["target"] = {{"kind", decay_kind_name(w.target.kind)}, {"z0", number(w.target.z0)}, {"K", number(w.target.K)}};
  j["right_bc"] = right_bc_name(w.bc);
  j["bc_value"] = number(w.bc_value);
  j["iterations"] = w.iterations;
  j["residual_norm"] = number(w.residual_norm);
  if (o.ok()) {
    j["discrete_residual"] = number(discrete_residual(prof, w));
    j["continuum_residual"] = number(continuum_residual(prof, w));
    j["front_position"] = number(front_position(w, prof.alpha()));
  }
  return j;
}

nlohmann::json to_json(const FitResult& r) {
  nlohmann::json j;
  j["winner_class"] = decay_class_name(r.winner_class);
  j["ambiguous"] = r.ambiguous;
  j["ranked"] = nlohmann::json::array();
  for (const auto& f : r.ranked)
    j["ranked"].push_back({{"candidate", decay_kind_name(f.candidate.kind)},
                           {"z0", number(f.candidate.z0)},
                           {"window", {number(f.z_a), number(f.z_b)}},
                           {"amplitude", number(f.amplitude)},
                           {"rms_log_error", number(f.rms_log_error)},
                           {"local_rate_error", number(f.local_rate_error)},
                           {"valid", f.valid},
                           {"note", f.note}});
  return j;
}

nlohmann::json to_json(const InventoryVerdict& v) {
  nlohmann::json j;
  j["predicted"] = to_json(v.predicted);
  j["pass"] = v.pass;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : v.checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}});
  return j;
}

nlohmann::json to_json(const SignReport& s) {
  return {{"min_residual", number(s.min_residual)},
          {"max_residual", number(s.max_residual)},
          {"worst_z", number(s.worst_z)},
          {"samples", s.samples},
          {"corners_ok", s.corners_ok},
          {"pass", s.pass}};
}

}  // namespace fkwave
