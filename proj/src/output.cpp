#include "bangride/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bangride/errors.hpp"

#ifndef BANGRIDE_VERSION
#define BANGRIDE_VERSION "0.0.0"
#endif

namespace bangride {

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> trajectory_columns(const PlantModel& model) {
  std::vector<std::string> c{"t", "u"};
  for (const auto& n : model.csv_output_names()) c.push_back(n);
  for (const char* n : {"e_active", "i_star", "theta_1", "theta_2", "alpha", "J", "J_star"}) c.push_back(n);
  return c;
}

std::string trajectory_csv(const PlantModel& model, const Trajectory& traj) {
  std::ostringstream os;
  const auto cols = trajectory_columns(model);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  std::vector<double> yc;
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    const auto& r = traj.records[k];
    model.csv_outputs(traj.states.at(k), r.u, r.y, yc);
    os << r.t << "," << format_number(r.u);
    for (double v : yc) os << "," << format_number(v);
    os << "," << format_number(r.e[r.i_star]) << "," << r.i_star + 1 << "," << format_number(r.theta[0]) << ","
       << format_number(r.theta[1]) << "," << format_number(r.alpha) << "," << format_number(r.J) << ","
       << (r.J_star ? format_number(*r.J_star) : std::string()) << "\n";
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_trajectory_csv(const PlantModel& model, const Trajectory& traj, const std::filesystem::path& path) {
  write_text(path, trajectory_csv(model, traj));
}

void write_channels_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "t";
  for (const auto& n : traj.aux_names) os << "," << n;
  os << "\n";
  for (const auto& r : traj.records) {
    os << r.t;
    for (double v : r.aux) os << "," << format_number(v);
    os << "\n";
  }
  write_text(path, os.str());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  };
  if (!std::getline(in, line)) throw IoError("csv: empty input");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::optional<double>> row;
    for (const auto& f : split(line)) {
      if (f.empty()) {
        row.emplace_back();
      } else {
        try {
          row.emplace_back(std::stod(f));
        } catch (const std::exception&) {
          throw IoError("csv: bad number '" + f + "'");
        }
      }
    }
    if (row.size() != t.header.size()) throw IoError("csv: row with " + std::to_string(row.size()) + " fields");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_csv(os.str());
}

const std::vector<std::string>& plot_quantities() {
  static const std::vector<std::string> q{"current", "voltage", "temperature", "soc"};
  return q;
}

namespace {

void check_quantity(const std::string& q) {
  const auto& v = plot_quantities();
  if (std::find(v.begin(), v.end(), q) == v.end()) {
    std::string names;
    for (const auto& n : v) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown plot quantity '" + q + "' (valid: " + names + ")");
  }
}

std::string axis_label(const std::string& q) {
  if (q == "current") return "current [A]";
  if (q == "voltage") return "voltage [V]";
  if (q == "temperature") return "temperature [°C]";
  return "state of charge [-]";
}

// Round step for roughly n ticks over span.
double nice_step(double span, int n) {
  const double raw = span / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

}  // namespace

std::vector<PlotSeries> series_for(const Trajectory& traj, const std::string& quantity, const std::string& label,
                                   const std::string& color, bool dashed) {
  check_quantity(quantity);
  std::vector<double> t;
  for (const auto& r : traj.records) t.push_back(static_cast<double>(r.t));
  std::vector<PlotSeries> out;
  auto add = [&](std::vector<double> v, const std::string& lab) {
    out.push_back({lab, t, std::move(v), color, 1.5, dashed});
  };
  if (quantity == "current") {
    add(traj.column_u(), label);
  } else if (quantity == "temperature" && !traj.aux_index("temperature")) {
    add(traj.column_aux("temperature_max"), label + " (max)");
    add(traj.column_aux("temperature_min"), label + " (min)");
  } else {
    if (!traj.aux_index(quantity)) throw ConfigError("model " + traj.model + " has no '" + quantity + "' channel");
    add(traj.column_aux(quantity), label);
  }
  return out;
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& quantity, const std::string& title) {
  check_quantity(quantity);
  if (series.empty()) throw ConfigError("svg: nothing to plot");
  const double W = 720, H = 440, ml = 80, mr = 20, mt = 36, mb = 56;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.t) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.v)
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto X = [&](double v) { return ml + (v - x0) / (x1 - x0) * (W - ml - mr); };
  auto Y = [&](double v) { return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double xs = nice_step(x1 - x0, 6), ys = nice_step(y1 - y0, 6);
  for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9 * xs; v += xs)
    os << "<line x1=\"" << fmt(X(v)) << "\" y1=\"" << H - mb << "\" x2=\"" << fmt(X(v)) << "\" y2=\"" << H - mb + 5
       << "\" stroke=\"black\"/><text x=\"" << fmt(X(v)) << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">"
       << tick(v) << "</text>\n";
  for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-9 * ys; v += ys)
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(Y(v)) << "\" x2=\"" << ml << "\" y2=\"" << fmt(Y(v))
       << "\" stroke=\"black\"/><text x=\"" << ml - 8 << "\" y=\"" << fmt(Y(v) + 4) << "\" text-anchor=\"end\">"
       << tick(v) << "</text>\n";
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 14 << "\" text-anchor=\"middle\">time [s]</text>\n";
  os << "<text transform=\"translate(18," << (mt + H - mb) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << axis_label(quantity) << "</text>\n";

  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width << "\"";
    if (s.dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    for (std::size_t k = 0; k < s.t.size() && k < s.v.size(); ++k) {
      if (!std::isfinite(s.v[k])) continue;
      os << (k ? " " : "") << fmt(X(s.t[k])) << "," << fmt(Y(s.v[k]));
    }
    os << "\"/>\n";
  }
  double ly = mt + 14;
  std::vector<std::string> seen;
  for (const auto& s : series) {
    if (s.label.empty() || std::find(seen.begin(), seen.end(), s.label) != seen.end()) continue;
    seen.push_back(s.label);
    os << "<line x1=\"" << W - mr - 190 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - mr - 165 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
       << "/><text x=\"" << W - mr - 158 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
  return os.str();
}

void emit_svg(const std::vector<PlotSeries>& series, const std::string& quantity, const std::filesystem::path& path,
              const std::string& title) {
  write_text(path, render_svg(series, quantity, title));
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

std::string software_version() { return BANGRIDE_VERSION; }

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "software_version = " << software_version() << "\n"
     << "command = " << m.command << "\n"
     << "config_hash = sha256:" << m.config_hash << "\n"
     << "seed = " << m.seed << "\n"
     << "clamp_current = " << (m.clamp_current ? "true" : "false") << "\n";
  for (const auto& [k, v] : m.notes) os << k << " = " << v << "\n";
  for (const auto& f : m.files) os << "file = " << f << "\n";
  write_text(path, os.str());
}

}  // namespace bangride
