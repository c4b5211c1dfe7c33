#include "uotkit/distill.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uotkit/error.hpp"
#include "uotkit/text.hpp"

namespace uotkit {

namespace {

void require_finite(const Matrix& m, const std::string& what) {
    if (!m.all_finite()) {
        throw Error(ErrorCode::kInvalidArgument, what + " contains non-finite values");
    }
}

std::vector<double> row_norms(const Matrix& m, const std::string& what) {
    std::vector<double> norms(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sq = 0.0;
        for (double v : m.row(i)) {
            sq += v * v;
        }
        norms[i] = std::sqrt(sq);
        if (!(norms[i] > 0.0)) {
            throw Error(ErrorCode::kDegenerateBatch, what + " row " + std::to_string(i) + " has zero norm");
        }
    }
    return norms;
}

Matrix normalize_rows(const Matrix& m, const std::vector<double>& norms) {
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (double& v : out.row(i)) {
            v /= norms[i];
        }
    }
    return out;
}

// Gradient w.r.t. a row given the gradient w.r.t. its normalised version.
void project_to_raw(Matrix& grad, const Matrix& unit, const std::vector<double>& norms) {
    for (std::size_t i = 0; i < grad.rows(); ++i) {
        auto g = grad.row(i);
        const auto u = unit.row(i);
        double dot = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            dot += g[k] * u[k];
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
            g[k] = (g[k] - dot * u[k]) / norms[i];
        }
    }
}

double log_sum_exp(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) {
        s += std::exp(x - m);
    }
    return m + std::log(s);
}

LossGradient squared_difference(const Matrix& teacher, const Matrix& student, Reduction reduction) {
    const double scale = (reduction == Reduction::kMean && student.size() > 0)
                             ? 1.0 / static_cast<double>(student.size())
                             : 1.0;
    LossGradient out{0.0, Matrix(student.rows(), student.cols())};
    const auto t = teacher.values();
    const auto s = student.values();
    auto g = out.grad.values();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = s[i] - t[i];
        out.loss += d * d;
        g[i] = 2.0 * d * scale;
    }
    out.loss *= scale;
    return out;
}

double clamp_unit(double v) { return std::clamp(v, kClampEpsilon, 1.0 - kClampEpsilon); }

}  // namespace

Reduction parse_reduction(std::string_view text) {
    const std::string t = text::to_lower(text::trim(text));
    if (t == "mean") {
        return Reduction::kMean;
    }
    if (t == "sum") {
        return Reduction::kSum;
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown reduction '" + std::string(text) + "' (expected mean or sum)");
}

std::string_view to_string(Reduction reduction) { return reduction == Reduction::kMean ? "mean" : "sum"; }

InfoNcePair info_nce(const Matrix& a, const Matrix& b, double tau) {
    require_same_shape(a, b, "token batches");
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw Error(ErrorCode::kInvalidHyperparameter, "temperature must be positive, got " + text::format_double(tau));
    }
    const std::size_t k = a.rows();
    if (k < 2) {
        throw Error(ErrorCode::kDegenerateBatch, "contrastive loss needs at least 2 rows, got " + std::to_string(k));
    }
    require_finite(a, "token batch");
    require_finite(b, "token batch");
    const auto na = row_norms(a, "token batch");
    const auto nb = row_norms(b, "token batch");
    const Matrix ua = normalize_rows(a, na);
    const Matrix ub = normalize_rows(b, nb);

    Matrix logits(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double dot = 0.0;
            const auto ri = ua.row(i);
            const auto rj = ub.row(j);
            for (std::size_t c = 0; c < ri.size(); ++c) {
                dot += ri[c] * rj[c];
            }
            logits(i, j) = dot / tau;
        }
    }

    InfoNcePair out;
    // dL/dcos accumulates (softmax - identity) / (K tau) from both terms.
    Matrix g(k, k);
    const double norm = 1.0 / (static_cast<double>(k) * tau);
    std::vector<double> buf(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            buf[j] = logits(i, j);
        }
        const double lse = log_sum_exp(buf);
        out.forward += lse - logits(i, i);
        for (std::size_t j = 0; j < k; ++j) {
            g(i, j) += (std::exp(logits(i, j) - lse) - (i == j ? 1.0 : 0.0)) * norm;
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < k; ++i) {
            buf[i] = logits(i, j);
        }
        const double lse = log_sum_exp(buf);
        out.backward += lse - logits(j, j);
        for (std::size_t i = 0; i < k; ++i) {
            g(i, j) += (std::exp(logits(i, j) - lse) - (i == j ? 1.0 : 0.0)) * norm;
        }
    }
    out.forward /= static_cast<double>(k);
    out.backward /= static_cast<double>(k);

    const std::size_t d = a.cols();
    out.grad_a = Matrix(k, d);
    out.grad_b = Matrix(k, d);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double gij = g(i, j);
            for (std::size_t c = 0; c < d; ++c) {
                out.grad_a(i, c) += gij * ub(j, c);
                out.grad_b(j, c) += gij * ua(i, c);
            }
        }
    }
    project_to_raw(out.grad_a, ua, na);
    project_to_raw(out.grad_b, ub, nb);
    return out;
}

CkdResult ckd_loss(const Matrix& student, const Matrix& teacher, const Matrix& enhanced, double tau) {
    InfoNcePair enh = info_nce(student, enhanced, tau);
    InfoNcePair tea = info_nce(student, teacher, tau);
    CkdResult out;
    out.u2e = enh.forward;
    out.e2u = enh.backward;
    out.u2e_prime = tea.forward;
    out.e2u_prime = tea.backward;
    out.loss = out.u2e + out.e2u + out.u2e_prime + out.e2u_prime;
    out.grad_student = std::move(enh.grad_a);
    auto gs = out.grad_student.values();
    const auto gt = tea.grad_a.values();
    for (std::size_t i = 0; i < gs.size(); ++i) {
        gs[i] += gt[i];
    }
    out.grad_teacher = std::move(tea.grad_b);
    out.grad_enhanced = std::move(enh.grad_b);
    return out;
}

SkdResult skd_loss(const std::vector<Matrix>& teacher, const std::vector<Matrix>& student, Reduction reduction) {
    if (teacher.size() != student.size()) {
        throw Error(ErrorCode::kShapeMismatch, "teacher has " + std::to_string(teacher.size()) +
                                                   " similarity layers, student has " +
                                                   std::to_string(student.size()));
    }
    if (teacher.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "similarity distillation needs at least one layer");
    }
    SkdResult out;
    for (std::size_t l = 0; l < teacher.size(); ++l) {
        const std::string what = "similarity layer " + std::to_string(l);
        require_same_shape(teacher[l], student[l], what);
        require_finite(teacher[l], what);
        require_finite(student[l], what);
        LossGradient layer = squared_difference(teacher[l], student[l], reduction);
        out.loss += layer.loss;
        out.per_layer.push_back(layer.loss);
        out.grad_student.push_back(std::move(layer.grad));
    }
    return out;
}

LossGradient fkd_loss(const Matrix& teacher, const Matrix& student, Reduction reduction) {
    require_same_shape(teacher, student, "feature maps");
    require_finite(teacher, "teacher features");
    require_finite(student, "student features");
    return squared_difference(teacher, student, reduction);
}

LossGradient focal_heatmap_loss(const Matrix& target, const Matrix& prediction, double scale) {
    require_same_shape(target, prediction, "heatmaps");
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw Error(ErrorCode::kInvalidHyperparameter, "heatmap scale must be positive, got " + text::format_double(scale));
    }
    require_finite(target, "target heatmap");
    require_finite(prediction, "predicted heatmap");
    LossGradient out{0.0, Matrix(prediction.rows(), prediction.cols())};
    if (prediction.size() == 0) {
        return out;
    }
    const double count = static_cast<double>(prediction.size());
    const auto t = target.values();
    const auto s = prediction.values();
    auto g = out.grad.values();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double q = clamp_unit(t[i] / scale);
        const double raw = s[i] / scale;
        const double p = clamp_unit(raw);
        const bool active = raw > kClampEpsilon && raw < 1.0 - kClampEpsilon;
        double loss;
        double dp;
        if (q >= kPeakThreshold) {
            const double om = 1.0 - p;
            loss = -om * om * std::log(p);
            dp = 2.0 * om * std::log(p) - om * om / p;
        } else {
            const double w = std::pow(1.0 - q, kFocalBeta);
            loss = -w * p * p * std::log1p(-p);
            dp = -w * (2.0 * p * std::log1p(-p) - p * p / (1.0 - p));
        }
        out.loss += loss;
        g[i] = active ? dp / (scale * count) : 0.0;
    }
    out.loss /= count;
    return out;
}

LossGradient rkd_loss(const Matrix& teacher, const Matrix& student, double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw Error(ErrorCode::kInvalidHyperparameter, "response scale mu must be positive, got " + text::format_double(mu));
    }
    for (double v : teacher.values()) {
        if (v < 0.0) {
            throw Error(ErrorCode::kInvalidArgument, "teacher response map has negative values");
        }
    }
    for (double v : student.values()) {
        if (v < 0.0) {
            throw Error(ErrorCode::kInvalidArgument, "student response map has negative values");
        }
    }
    return focal_heatmap_loss(teacher, student, mu);
}

double giou_loss(const BoundingBox& gt, const BoundingBox& pred, BoxGradient* grad) {
    const double value = 1.0 - giou(gt, pred);
    if (grad == nullptr) {
        return value;
    }
    // Corner form: derivatives w.r.t. (x1, y1, x2, y2) of pred, then mapped
    // to (x, y, w, h) with x2 = x + w.
    struct Axis {
        double inter, hull;
        double d_inter_lo, d_inter_hi, d_hull_lo, d_hull_hi;
    };
    auto axis = [](double g1, double g2, double p1, double p2) {
        Axis a{};
        const double lo = std::max(g1, p1);
        const double hi = std::min(g2, p2);
        a.inter = std::max(0.0, hi - lo);
        if (a.inter > 0.0) {
            a.d_inter_lo = p1 > g1 ? -1.0 : 0.0;
            a.d_inter_hi = p2 < g2 ? 1.0 : 0.0;
        }
        a.hull = std::max(g2, p2) - std::min(g1, p1);
        a.d_hull_lo = p1 < g1 ? -1.0 : 0.0;
        a.d_hull_hi = p2 > g2 ? 1.0 : 0.0;
        return a;
    };
    const Axis ax = axis(gt.x, gt.right(), pred.x, pred.right());
    const Axis ay = axis(gt.y, gt.bottom(), pred.y, pred.bottom());
    const double pw = pred.right() - pred.x;
    const double ph = pred.bottom() - pred.y;
    const double inter = ax.inter * ay.inter;
    const double uni = (gt.right() - gt.x) * (gt.bottom() - gt.y) + pw * ph - inter;
    const double hull = ax.hull * ay.hull;
    if (!(uni > 0.0) || !(hull > 0.0)) {
        *grad = {0.0, 0.0, 0.0, 0.0};
        return value;
    }
    // d giou = dI / U - I dU / U^2 + dU / C - U dC / C^2, with dU = dA_pred - dI.
    auto dgiou = [&](double d_inter, double d_area, double d_hull) {
        const double d_uni = d_area - d_inter;
        return d_inter / uni - inter * d_uni / (uni * uni) + d_uni / hull - uni * d_hull / (hull * hull);
    };
    const double gx1 = dgiou(ax.d_inter_lo * ay.inter, -ph, ax.d_hull_lo * ay.hull);
    const double gx2 = dgiou(ax.d_inter_hi * ay.inter, ph, ax.d_hull_hi * ay.hull);
    const double gy1 = dgiou(ay.d_inter_lo * ax.inter, -pw, ay.d_hull_lo * ax.hull);
    const double gy2 = dgiou(ay.d_inter_hi * ax.inter, pw, ay.d_hull_hi * ax.hull);
    *grad = {-(gx1 + gx2), -(gy1 + gy2), -gx2, -gy2};
    return value;
}

double l1_box_loss(const BoundingBox& gt, const BoundingBox& pred, double frame_w, double frame_h,
                   BoxGradient* grad) {
    if (!(frame_w > 0.0) || !(frame_h > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "frame size must be positive for the L1 box loss");
    }
    validate_box(gt);
    validate_box(pred);
    const std::array<double, 4> diff = {pred.x - gt.x, pred.y - gt.y, pred.w - gt.w, pred.h - gt.h};
    const std::array<double, 4> scale = {frame_w, frame_h, frame_w, frame_h};
    double loss = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        loss += std::abs(diff[i]) / scale[i];
        if (grad != nullptr) {
            const double sign = diff[i] > 0.0 ? 1.0 : (diff[i] < 0.0 ? -1.0 : 0.0);
            (*grad)[i] = sign / (4.0 * scale[i]);
        }
    }
    return loss / 4.0;
}

TrackingLosses tracking_losses(const BoundingBox& gt, const BoundingBox& pred, const Matrix& gt_heatmap,
                               const Matrix& pred_heatmap, double frame_w, double frame_h) {
    TrackingLosses out;
    out.giou = giou_loss(gt, pred, &out.grad_giou);
    out.l1 = l1_box_loss(gt, pred, frame_w, frame_h, &out.grad_l1);
    LossGradient focal = focal_heatmap_loss(gt_heatmap, pred_heatmap, 1.0);
    out.focal = focal.loss;
    out.grad_focal = std::move(focal.grad);
    return out;
}

double total_loss(const LossComponents& c, const LossHyperparameters& p) {
    return c.okd() + p.lambda_giou * c.giou + p.lambda_focal * c.focal + p.lambda_l1 * c.l1;
}

LossComponents loss_components(const LossBatch& batch, const TrackingLosses& tracking) {
    const LossHyperparameters& p = batch.params;
    LossComponents c;
    c.ckd = ckd_loss(batch.student_tokens, batch.teacher_tokens, batch.enhanced_tokens, p.tau).loss;
    c.skd = skd_loss(batch.teacher_similarity, batch.student_similarity, p.reduction).loss;
    c.fkd = fkd_loss(batch.teacher_features, batch.student_features, p.reduction).loss;
    c.rkd = rkd_loss(batch.teacher_response, batch.student_response, p.mu).loss;
    c.giou = tracking.giou;
    c.focal = tracking.focal;
    c.l1 = tracking.l1;
    return c;
}

double total_loss(const LossBatch& batch, const TrackingLosses& tracking) {
    return total_loss(loss_components(batch, tracking), batch.params);
}

}  // namespace uotkit
