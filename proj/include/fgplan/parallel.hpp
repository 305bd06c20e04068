#pragma once

#include <cstddef>
#include <functional>

namespace fgplan {

/// Worker cap: hardware concurrency, lowered by FGPLAN_THREADS when set.
std::size_t max_threads();

/// Calls fn(i) for i in [0, n). Rows are split into contiguous chunks when
/// the total work is large enough to pay for threads; fn must only write to
/// row i, so results do not depend on the schedule.
void for_each_row(std::size_t n, std::size_t work_per_row,
                  const std::function<void(std::size_t)>& fn);

}  // namespace fgplan
