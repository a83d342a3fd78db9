#include "bangride/toy.hpp"

#include <cmath>

#include "bangride/errors.hpp"

namespace bangride {

void ToyParams::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) throw ConfigError("toy: non-finite parameter");
  if (!(d > 0.0)) throw ConfigError("toy: d must be > 0 so h2 increases in u");
}

ToyLinearModel::ToyLinearModel(const ToyParams& p) : p_(p) { p_.validate(); }

}  // namespace bangride
