#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace jumplq {

/// Worker count: JUMPLQ_THREADS when set (1..256), otherwise hardware concurrency.
/// Results never depend on it.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads. The body must
/// write only to slot i of its output so results do not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

/// Pairwise summation with a fixed recursion shape.
double pairwise_sum(std::span<const double> values);

}  // namespace jumplq
