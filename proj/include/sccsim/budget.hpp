#pragma once

namespace sccsim {

/// Error sources composed with the SCC conversion probability.
struct ErrorBudget {
  double init_fidelity_0 = 0.9982;
  double init_fidelity_1 = 0.9966;
  double charge_readout_fidelity = 0.9996;
  double charge_flip_error = 0.00125;

  /// Ideal spin preparation, default charge readout. Used for projections
  /// of readout performance.
  static ErrorBudget readout_only();
  /// Everything perfect.
  static ErrorBudget perfect();

  friend bool operator==(const ErrorBudget&, const ErrorBudget&) = default;
};

void validate(const ErrorBudget& budget);

/// Per-charge-state classification probabilities of the final charge readout.
struct ChargeReadProbabilities {
  double bright_as_bright = 1.0;  // P(read NV- | NV-)
  double dark_as_dark = 1.0;      // P(read NV0 | NV0)
};

/// The total charge readout error 2(1 - F_cr) is attributed to NV- first,
/// up to charge_flip_error (NV- converting during the window), and the
/// remainder to NV0 misreads.
ChargeReadProbabilities charge_read_probabilities(const ErrorBudget& budget);

}  // namespace sccsim
