#include "jumplq/errors.hpp"

#include <fmt/format.h>

namespace jumplq {

NotUniformlyPositive::NotUniformlyPositive(double min_eig, std::string where)
    : Error(fmt::format("matrix not uniformly positive{}{}: min eigenvalue {:.6g}",
                        where.empty() ? "" : " at ", where, min_eig)),
      min_eig_(min_eig) {}

PsdViolation::PsdViolation(std::size_t node, double min_eig)
    : Error(fmt::format("PSD violation at node {}: min eigenvalue {:.6g}", node, min_eig)),
      node_(node),
      min_eig_(min_eig) {}

NoConvergence::NoConvergence(std::size_t max_iter, double last_deviation)
    : Error(fmt::format("no convergence after {} iterations (last deviation {:.6g})", max_iter,
                        last_deviation)),
      max_iter_(max_iter),
      last_deviation_(last_deviation) {}

MonotonicityViolation::MonotonicityViolation(std::size_t iteration, double min_eig)
    : Error(fmt::format("iterates not non-increasing at iteration {}: min eigenvalue {:.6g}",
                        iteration, min_eig)),
      iteration_(iteration),
      min_eig_(min_eig) {}

NonFinite::NonFinite(std::size_t step)
    : Error(fmt::format("non-finite value at step {}", step)), step_(step) {}

}  // namespace jumplq
