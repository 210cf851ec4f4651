#pragma once

#include <cstddef>
#include <cstdint>

#include "sccsim/model.hpp"
#include "sccsim/parallel.hpp"

namespace sccsim::detail {

/// Accumulates `count(i)` for i in [0, shots) into a histogram. Each shot
/// owns its RNG, and histogram merging is integer addition, so the parallel
/// kernel reproduces the serial reference exactly.
template <class CountFn>
PhotonHistogram histogram_over_shots(std::uint64_t shots, Execution exec, CountFn&& count) {
  PhotonHistogram total;
  const auto n = static_cast<std::int64_t>(shots);
  if (exec == Execution::Serial) {
    for (std::int64_t i = 0; i < n; ++i) total.add(count(static_cast<std::uint64_t>(i)));
    return total;
  }
#pragma omp parallel
  {
    PhotonHistogram local;
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) local.add(count(static_cast<std::uint64_t>(i)));
#pragma omp critical(sccsim_histogram_merge)
    total.merge(local);
  }
  return total;
}

}  // namespace sccsim::detail
