#include "bangride/plant.hpp"

namespace bangride {

double PlantModel::output(const State& x, double u, std::size_t i) const {
  std::vector<double> y;
  outputs(x, u, y);
  return y.at(i);
}

std::vector<std::string> PlantModel::family_names() const {
  std::vector<std::string> n;
  for (std::size_t i = 0; i < family_count(); ++i) n.push_back("y" + std::to_string(i + 1));
  return n;
}

std::vector<std::string> PlantModel::csv_output_names() const {
  std::vector<std::string> n;
  for (std::size_t i = 0; i < output_count(); ++i) n.push_back("y" + std::to_string(i + 1));
  return n;
}

void PlantModel::csv_outputs(const State&, double, const std::vector<double>& y, std::vector<double>& out) const {
  out = y;
}

}  // namespace bangride
