#pragma once

namespace sccsim {

/// Selects the serial reference loop or the OpenMP kernel. Both produce
/// identical results; the serial path is kept as the test reference.
enum class Execution { Serial, Parallel };

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int parallel_threads();
/// Sets the OpenMP thread count for subsequent parallel kernels.
void set_parallel_threads(int n);

}  // namespace sccsim
