#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "blw/model.hpp"
#include "blw/tensor.hpp"

namespace blw {

struct GradCheckOptions {
    double step = 1e-6;
    /// Seed of the random projection the scalar objective is built from.
    std::uint64_t seed = 7;
    bool check_inputs = true;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    /// Name of the entry with the largest error, e.g. "conv1.weight[3]" or "input[5]".
    std::string worst_entry;
    std::size_t entries_checked = 0;
    double tolerance = 0.0;

    bool passed() const { return max_relative_error <= tolerance; }
};

/// Compares back-propagated gradients of J = sum(probe * fragment(input))
/// against central differences for every parameter scalar and (optionally)
/// every input sample. Relative error per entry is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Parameter values are restored before returning. Throws NumericError if
/// the objective becomes non-finite.
GradCheckResult grad_check(ModelGraph& fragment, const Tensor& input, double tolerance,
                           const GradCheckOptions& options = {});

}  // namespace blw
