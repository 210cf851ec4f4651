#include "sccsim/budget.hpp"

#include <algorithm>

#include "sccsim/model.hpp"

namespace sccsim {

ErrorBudget ErrorBudget::readout_only() {
  ErrorBudget b;
  b.init_fidelity_0 = 1.0;
  b.init_fidelity_1 = 1.0;
  return b;
}

ErrorBudget ErrorBudget::perfect() { return ErrorBudget{1.0, 1.0, 1.0, 0.0}; }

void validate(const ErrorBudget& b) {
  for (double v : {b.init_fidelity_0, b.init_fidelity_1, b.charge_readout_fidelity, b.charge_flip_error}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("error budget entry outside [0,1]");
  }
}

ChargeReadProbabilities charge_read_probabilities(const ErrorBudget& b) {
  const double total = std::clamp(2.0 * (1.0 - b.charge_readout_fidelity), 0.0, 2.0);
  const double bright_err = std::min({b.charge_flip_error, total, 1.0});
  const double dark_err = std::min(total - bright_err, 1.0);
  return {1.0 - bright_err, 1.0 - dark_err};
}

}  // namespace sccsim
