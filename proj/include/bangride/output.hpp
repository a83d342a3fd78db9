/**
 * @file output.hpp
 * @brief Trajectory CSV, SVG line charts and run manifests.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bangride/plant.hpp"
#include "bangride/sim.hpp"

namespace bangride {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_number(double v);  // 12 significant digits, "" for NaN

// Header: t, u, <model csv outputs>, e_active, i_star, theta_1, theta_2, alpha, J, J_star
std::vector<std::string> trajectory_columns(const PlantModel& model);
std::string trajectory_csv(const PlantModel& model, const Trajectory& traj);
void write_trajectory_csv(const PlantModel& model, const Trajectory& traj, const std::filesystem::path& path);
// t plus the model's aux channels.
void write_channels_csv(const Trajectory& traj, const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);

struct PlotSeries {
  std::string label;  // empty: not in legend
  std::vector<double> t;
  std::vector<double> v;
  std::string color = "#1f77b4";
  double width = 1.5;
  bool dashed = false;
};

// Valid quantities: current, voltage, temperature, soc.
const std::vector<std::string>& plot_quantities();
// Series for `quantity` from a trajectory. Pack temperature yields max and min.
std::vector<PlotSeries> series_for(const Trajectory& traj, const std::string& quantity, const std::string& label,
                                   const std::string& color, bool dashed = false);
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& quantity,
                       const std::string& title = "");
void emit_svg(const std::vector<PlotSeries>& series, const std::string& quantity, const std::filesystem::path& path,
              const std::string& title = "");

std::string sha256_hex(const std::string& data);

struct Manifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  bool clamp_current = false;
  std::vector<std::string> files;
  std::vector<std::pair<std::string, std::string>> notes;
};
std::string software_version();
void write_manifest(const Manifest& m, const std::filesystem::path& path);

}  // namespace bangride
