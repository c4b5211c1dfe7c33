#include "uotkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "uotkit/distill.hpp"
#include "uotkit/error.hpp"
#include "uotkit/text.hpp"

namespace uotkit {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct KernelName {
    Kernel kernel;
    std::string_view name;
};

constexpr KernelName kKernelNames[] = {
    {Kernel::kCkd, "ckd"},     {Kernel::kSkd, "skd"},     {Kernel::kFkd, "fkd"}, {Kernel::kRkd, "rkd"},
    {Kernel::kGiou, "giou"},   {Kernel::kFocal, "focal"}, {Kernel::kL1, "l1"},
};

Matrix slice(std::span<const double> x, std::size_t offset, std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols, std::vector<double>(x.begin() + offset, x.begin() + offset + rows * cols));
}

void append(std::vector<double>& out, const Matrix& m) {
    out.insert(out.end(), m.values().begin(), m.values().end());
}

BoundingBox as_box(std::span<const double> x) { return {x[0], x[1], x[2], x[3]}; }

Matrix normal_matrix(std::size_t rows, std::size_t cols, CounterRng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) {
        v = rng.normal();
    }
    return m;
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi, CounterRng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) {
        v = rng.uniform(lo, hi);
    }
    return m;
}

// Distance in input units from each prediction value to the clamp edges.
double clamp_margin(std::span<const double> x, double scale) {
    double m = kInfinity;
    for (double v : x) {
        const double p = v / scale;
        m = std::min(m, scale * std::min(std::abs(p - kClampEpsilon), std::abs(1.0 - kClampEpsilon - p)));
    }
    return m;
}

BoundingBox random_box(CounterRng& rng) {
    return {rng.uniform(0.0, 200.0), rng.uniform(0.0, 200.0), rng.uniform(20.0, 100.0), rng.uniform(20.0, 100.0)};
}

GradCheckTarget ckd_target(const TargetShape& shape, CounterRng& rng) {
    const std::size_t k = shape.rows;
    const std::size_t d = shape.token_dim;
    const double tau = shape.tau;
    GradCheckTarget t;
    for (int b = 0; b < 3; ++b) {
        Matrix m = normal_matrix(k, d, rng);
        for (std::size_t i = 0; shape.unit_norm_tokens && i < k; ++i) {
            double sq = 0.0;
            for (double v : m.row(i)) {
                sq += v * v;
            }
            const double n = std::sqrt(sq);
            for (double& v : m.row(i)) {
                v /= n;
            }
        }
        append(t.inputs, m);
    }
    t.value = [k, d, tau](std::span<const double> x) {
        return ckd_loss(slice(x, 0, k, d), slice(x, k * d, k, d), slice(x, 2 * k * d, k, d), tau).loss;
    };
    t.gradient = [k, d, tau](std::span<const double> x) {
        const CkdResult r = ckd_loss(slice(x, 0, k, d), slice(x, k * d, k, d), slice(x, 2 * k * d, k, d), tau);
        std::vector<double> g;
        append(g, r.grad_student);
        append(g, r.grad_teacher);
        append(g, r.grad_enhanced);
        return g;
    };
    t.margin = [k, d](std::span<const double> x) {
        double m = kInfinity;
        for (std::size_t r = 0; r < 3 * k; ++r) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                sq += x[r * d + c] * x[r * d + c];
            }
            m = std::min(m, std::sqrt(sq));
        }
        return m;
    };
    return t;
}

GradCheckTarget skd_target(const TargetShape& shape, CounterRng& rng) {
    const std::size_t rows = shape.rows;
    const std::size_t cols = shape.cols;
    auto teacher = std::make_shared<std::vector<Matrix>>();
    GradCheckTarget t;
    for (std::size_t l = 0; l < shape.layers; ++l) {
        teacher->push_back(normal_matrix(rows, cols, rng));
        append(t.inputs, normal_matrix(rows, cols, rng));
    }
    auto unpack = [rows, cols, teacher](std::span<const double> x) {
        std::vector<Matrix> student;
        for (std::size_t l = 0; l < teacher->size(); ++l) {
            student.push_back(slice(x, l * rows * cols, rows, cols));
        }
        return student;
    };
    t.value = [teacher, unpack](std::span<const double> x) { return skd_loss(*teacher, unpack(x)).loss; };
    t.gradient = [teacher, unpack](std::span<const double> x) {
        const SkdResult r = skd_loss(*teacher, unpack(x));
        std::vector<double> g;
        for (const auto& m : r.grad_student) {
            append(g, m);
        }
        return g;
    };
    return t;
}

GradCheckTarget fkd_target(const TargetShape& shape, CounterRng& rng) {
    const std::size_t rows = shape.rows;
    const std::size_t cols = shape.cols;
    auto teacher = std::make_shared<Matrix>(normal_matrix(rows, cols, rng));
    GradCheckTarget t;
    append(t.inputs, normal_matrix(rows, cols, rng));
    t.value = [teacher, rows, cols](std::span<const double> x) {
        return fkd_loss(*teacher, slice(x, 0, rows, cols)).loss;
    };
    t.gradient = [teacher, rows, cols](std::span<const double> x) {
        const LossGradient r = fkd_loss(*teacher, slice(x, 0, rows, cols));
        return std::vector<double>(r.grad.values().begin(), r.grad.values().end());
    };
    return t;
}

// Gaussian blob peaking at exactly `peak` on a random cell.
Matrix gaussian_map(std::size_t rows, std::size_t cols, double peak, CounterRng& rng) {
    const double cr = static_cast<double>(rng.below(rows));
    const double cc = static_cast<double>(rng.below(cols));
    const double sigma = std::max(1.0, static_cast<double>(std::min(rows, cols)) / 6.0);
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double dr = static_cast<double>(r) - cr;
            const double dc = static_cast<double>(c) - cc;
            m(r, c) = peak * std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
        }
    }
    return m;
}

GradCheckTarget heatmap_target(const Matrix& teacher_map, double scale, CounterRng& rng,
                               LossGradient (*kernel)(const Matrix&, const Matrix&, double)) {
    const std::size_t rows = teacher_map.rows();
    const std::size_t cols = teacher_map.cols();
    auto teacher = std::make_shared<Matrix>(teacher_map);
    GradCheckTarget t;
    append(t.inputs, uniform_matrix(rows, cols, 0.1 * scale, 0.9 * scale, rng));
    t.value = [=](std::span<const double> x) { return kernel(*teacher, slice(x, 0, rows, cols), scale).loss; };
    t.gradient = [=](std::span<const double> x) {
        const LossGradient r = kernel(*teacher, slice(x, 0, rows, cols), scale);
        return std::vector<double>(r.grad.values().begin(), r.grad.values().end());
    };
    t.margin = [scale](std::span<const double> x) { return clamp_margin(x, scale); };
    return t;
}

GradCheckTarget giou_target(CounterRng& rng) {
    const BoundingBox gt = random_box(rng);
    BoundingBox pred;
    pred.w = gt.w * rng.uniform(0.5, 1.5);
    pred.h = gt.h * rng.uniform(0.5, 1.5);
    pred.x = gt.x + gt.w * rng.uniform(-0.8, 0.8);
    pred.y = gt.y + gt.h * rng.uniform(-0.8, 0.8);
    GradCheckTarget t;
    t.inputs = {pred.x, pred.y, pred.w, pred.h};
    t.value = [gt](std::span<const double> x) { return giou_loss(gt, as_box(x)); };
    t.gradient = [gt](std::span<const double> x) {
        BoxGradient g{};
        giou_loss(gt, as_box(x), &g);
        return std::vector<double>(g.begin(), g.end());
    };
    t.margin = [gt](std::span<const double> x) {
        const BoundingBox p = as_box(x);
        double m = std::min(p.w, p.h);
        for (double a : {p.x, p.right()}) {
            for (double b : {gt.x, gt.right()}) {
                m = std::min(m, std::abs(a - b));
            }
        }
        for (double a : {p.y, p.bottom()}) {
            for (double b : {gt.y, gt.bottom()}) {
                m = std::min(m, std::abs(a - b));
            }
        }
        return m;
    };
    return t;
}

GradCheckTarget l1_target(const TargetShape& shape, CounterRng& rng) {
    const BoundingBox gt = random_box(rng);
    const BoundingBox pred{gt.x + rng.uniform(-20.0, 20.0), gt.y + rng.uniform(-20.0, 20.0),
                           gt.w + rng.uniform(-10.0, 10.0), gt.h + rng.uniform(-10.0, 10.0)};
    const double fw = shape.frame_w;
    const double fh = shape.frame_h;
    GradCheckTarget t;
    t.inputs = {pred.x, pred.y, pred.w, pred.h};
    t.value = [=](std::span<const double> x) { return l1_box_loss(gt, as_box(x), fw, fh); };
    t.gradient = [=](std::span<const double> x) {
        BoxGradient g{};
        l1_box_loss(gt, as_box(x), fw, fh, &g);
        return std::vector<double>(g.begin(), g.end());
    };
    t.margin = [gt](std::span<const double> x) {
        const double ref[4] = {gt.x, gt.y, gt.w, gt.h};
        double m = kInfinity;
        for (std::size_t i = 0; i < 4; ++i) {
            m = std::min(m, std::abs(x[i] - ref[i]));
        }
        return m;
    };
    return t;
}

LossGradient focal_kernel(const Matrix& target, const Matrix& pred, double scale) {
    return focal_heatmap_loss(target, pred, scale);
}

LossGradient rkd_kernel(const Matrix& teacher, const Matrix& student, double mu) {
    return rkd_loss(teacher, student, mu);
}

GradCheckTarget draw(Kernel kernel, const TargetShape& shape, CounterRng& rng) {
    switch (kernel) {
        case Kernel::kCkd:
            return ckd_target(shape, rng);
        case Kernel::kSkd:
            return skd_target(shape, rng);
        case Kernel::kFkd:
            return fkd_target(shape, rng);
        case Kernel::kRkd:
            return heatmap_target(gaussian_map(shape.rows, shape.cols, shape.mu, rng), shape.mu, rng, rkd_kernel);
        case Kernel::kGiou:
            return giou_target(rng);
        case Kernel::kFocal: {
            Matrix target(shape.rows, shape.cols, 0.0);
            target(rng.below(shape.rows), rng.below(shape.cols)) = 1.0;
            return heatmap_target(target, 1.0, rng, focal_kernel);
        }
        case Kernel::kL1:
            return l1_target(shape, rng);
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown kernel");
}

}  // namespace

std::vector<Kernel> all_kernels() {
    std::vector<Kernel> out;
    for (const auto& k : kKernelNames) {
        out.push_back(k.kernel);
    }
    return out;
}

std::string_view to_string(Kernel kernel) {
    for (const auto& k : kKernelNames) {
        if (k.kernel == kernel) {
            return k.name;
        }
    }
    return "unknown";
}

Kernel parse_kernel(std::string_view text) {
    const std::string t = text::to_lower(text::trim(text));
    for (const auto& k : kKernelNames) {
        if (k.name == t) {
            return k.kernel;
        }
    }
    throw Error(ErrorCode::kInvalidArgument,
                "unknown kernel '" + std::string(text) + "' (expected ckd, skd, fkd, rkd, giou, focal or l1)");
}

GradCheckReport grad_check(const GradCheckTarget& target, const GradCheckOptions& options, CounterRng& rng) {
    if (!(options.step > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "finite-difference step must be positive");
    }
    if (target.margin) {
        const double m = target.margin(target.inputs);
        if (m < 2.0 * options.step) {
            throw Error(ErrorCode::kRejectedInput, target.kernel + " input lies " + text::format_double(m) +
                                                       " from a non-smooth boundary (need >= 2 * step)");
        }
    }
    GradCheckReport report;
    report.kernel = target.kernel;
    report.coordinates = target.inputs.size();
    report.tolerance = options.tolerance;

    std::vector<std::size_t> coords;
    if (target.inputs.size() <= options.full_limit) {
        for (std::size_t i = 0; i < target.inputs.size(); ++i) {
            coords.push_back(i);
        }
    } else {
        coords = rng.sample_without_replacement(target.inputs.size(),
                                                std::min(options.subset, target.inputs.size()));
    }
    const std::vector<double> analytic = target.gradient(target.inputs);
    if (analytic.size() != target.inputs.size()) {
        throw Error(ErrorCode::kShapeMismatch, target.kernel + " gradient has " + std::to_string(analytic.size()) +
                                                   " entries for " + std::to_string(target.inputs.size()) +
                                                   " inputs");
    }
    std::vector<double> x = target.inputs;
    for (std::size_t i : coords) {
        const double x0 = x[i];
        const double hi = x0 + options.step;
        const double lo = x0 - options.step;
        x[i] = hi;
        const double f_hi = target.value(x);
        x[i] = lo;
        const double f_lo = target.value(x);
        x[i] = x0;
        const double numeric = (f_hi - f_lo) / (hi - lo);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        const double rel = std::abs(analytic[i] - numeric) / denom;
        if (rel > report.max_rel_error || report.checked == 0) {
            report.max_rel_error = rel;
            report.worst_index = i;
            report.worst_analytic = analytic[i];
            report.worst_numeric = numeric;
        }
        ++report.checked;
    }
    report.passed = report.max_rel_error < options.tolerance;
    return report;
}

GradCheckTarget random_target(Kernel kernel, const TargetShape& shape, double step, CounterRng& rng) {
    if (shape.rows == 0 || shape.cols == 0 || shape.token_dim == 0 || shape.layers == 0) {
        throw Error(ErrorCode::kInvalidArgument, "gradient-check shapes must be positive");
    }
    for (int attempt = 0; attempt < 1000; ++attempt) {
        GradCheckTarget t = draw(kernel, shape, rng);
        t.kernel = std::string(to_string(kernel));
        if (!t.margin || t.margin(t.inputs) >= 2.0 * step) {
            return t;
        }
    }
    throw Error(ErrorCode::kRejectedInput,
                "could not draw a " + std::string(to_string(kernel)) + " input clear of non-smooth boundaries");
}

}  // namespace uotkit
