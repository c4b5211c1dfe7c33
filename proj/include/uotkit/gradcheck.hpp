#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uotkit/rng.hpp"

namespace uotkit {

enum class Kernel { kCkd, kSkd, kFkd, kRkd, kGiou, kFocal, kL1 };

std::vector<Kernel> all_kernels();
std::string_view to_string(Kernel kernel);
Kernel parse_kernel(std::string_view text);

/// A scalar function of a flat input vector with its analytic gradient.
/// `margin` is the distance from the inputs to the nearest point where the
/// function is not smooth (clamps, min/max kinks, zero-norm rows).
struct GradCheckTarget {
    std::string kernel;
    std::vector<double> inputs;
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> gradient;
    std::function<double(std::span<const double>)> margin;
};

struct GradCheckOptions {
    double step = 1e-3;
    double tolerance = 1e-4;
    std::size_t full_limit = 256;  // check every coordinate up to this size
    std::size_t subset = 64;       // otherwise this many random coordinates
};

struct GradCheckReport {
    std::string kernel;
    std::size_t coordinates = 0;
    std::size_t checked = 0;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Central differences on each checked coordinate; relative error
/// |g_a - g_fd| / max(|g_a|, |g_fd|, 1e-8). Throws Error(kRejectedInput)
/// if the inputs sit within 2 * step of a non-smooth boundary.
GradCheckReport grad_check(const GradCheckTarget& target, const GradCheckOptions& options, CounterRng& rng);

/// Shape of the random inputs drawn for each kernel.
struct TargetShape {
    std::size_t rows = 8;          // token batch size K, map rows
    std::size_t cols = 16;         // map cols
    std::size_t token_dim = 320;
    std::size_t layers = 2;        // similarity layers
    bool unit_norm_tokens = false; // rescale token rows to length 1
    double tau = 0.5;
    double mu = 2.0;
    double frame_w = 640.0;
    double frame_h = 480.0;
};

/// Draws a valid input for `kernel`, re-sampling until it clears the
/// 2 * step margin. Tokens have i.i.d. standard normal entries; predicted
/// heatmaps are uniform in [0.1, 0.9] after scaling.
GradCheckTarget random_target(Kernel kernel, const TargetShape& shape, double step, CounterRng& rng);

}  // namespace uotkit
