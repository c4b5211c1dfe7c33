#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "uotkit/geometry.hpp"
#include "uotkit/matrix.hpp"

namespace uotkit {

/// Reduction of the squared-difference losses (SKD, FKD). kMean divides by
/// the element count so the magnitude does not depend on tensor shape.
enum class Reduction { kMean, kSum };

Reduction parse_reduction(std::string_view text);
std::string_view to_string(Reduction reduction);

inline constexpr double kClampEpsilon = 1e-6;
inline constexpr double kPeakThreshold = 0.99;
inline constexpr double kFocalAlpha = 2.0;  // exponent on (1 - p) and p
inline constexpr double kFocalBeta = 4.0;   // exponent on (1 - q) for background pixels

/// Symmetric InfoNCE over one pair of token batches (rows are samples),
/// cosine similarity with temperature tau. `forward` is the row-wise term
/// (a_i against every b_j), `backward` the column-wise term.
struct InfoNcePair {
    double forward = 0.0;
    double backward = 0.0;
    Matrix grad_a;
    Matrix grad_b;
};

/// Throws Error(kDegenerateBatch) for K < 2 or a zero row,
/// Error(kInvalidHyperparameter) for tau <= 0, Error(kShapeMismatch).
InfoNcePair info_nce(const Matrix& a, const Matrix& b, double tau);

struct CkdResult {
    double loss = 0.0;
    double u2e = 0.0;        // student -> teacher enhanced
    double e2u = 0.0;        // teacher enhanced -> student
    double u2e_prime = 0.0;  // student -> teacher underwater
    double e2u_prime = 0.0;  // teacher underwater -> student
    Matrix grad_student;
    Matrix grad_teacher;
    Matrix grad_enhanced;
};

CkdResult ckd_loss(const Matrix& student, const Matrix& teacher, const Matrix& enhanced, double tau = 0.5);

struct SkdResult {
    double loss = 0.0;
    std::vector<double> per_layer;
    std::vector<Matrix> grad_student;
};

/// Sum over layers of the per-layer squared difference. Throws
/// Error(kShapeMismatch) naming the first mismatching layer.
SkdResult skd_loss(const std::vector<Matrix>& teacher, const std::vector<Matrix>& student,
                   Reduction reduction = Reduction::kMean);

struct LossGradient {
    double loss = 0.0;
    Matrix grad;
};

LossGradient fkd_loss(const Matrix& teacher, const Matrix& student, Reduction reduction = Reduction::kMean);

/// Penalty-reduced focal loss, mean over pixels. With p and q the clamped
/// prediction and target: -(1 - p)^2 log p where q >= 0.99, otherwise
/// -(1 - q)^4 p^2 log(1 - p). Both maps are divided by `scale` before
/// clamping to [eps, 1 - eps]; the gradient is w.r.t. the unscaled
/// prediction and is zero where the clamp is active.
LossGradient focal_heatmap_loss(const Matrix& target, const Matrix& prediction, double scale = 1.0);

/// Response distillation: focal_heatmap_loss(R_t, R_s, mu).
/// Throws Error(kInvalidHyperparameter) for mu <= 0.
LossGradient rkd_loss(const Matrix& teacher, const Matrix& student, double mu = 2.0);

using BoxGradient = std::array<double, 4>;  // d/dx, d/dy, d/dw, d/dh

struct TrackingLosses {
    double giou = 0.0;   // 1 - giou(gt, pred)
    double focal = 0.0;
    double l1 = 0.0;     // mean |pred - gt| with x, w over frame width and y, h over height
    BoxGradient grad_giou{};
    BoxGradient grad_l1{};
    Matrix grad_focal;
};

/// Value and gradient of 1 - giou w.r.t. the predicted box.
double giou_loss(const BoundingBox& gt, const BoundingBox& pred, BoxGradient* grad = nullptr);
double l1_box_loss(const BoundingBox& gt, const BoundingBox& pred, double frame_w, double frame_h,
                   BoxGradient* grad = nullptr);

/// All gradients are w.r.t. the prediction. Throws Error(kInvalidArgument)
/// for a non-positive frame size.
TrackingLosses tracking_losses(const BoundingBox& gt, const BoundingBox& pred, const Matrix& gt_heatmap,
                               const Matrix& pred_heatmap, double frame_w, double frame_h);

struct LossHyperparameters {
    double tau = 0.5;
    double mu = 2.0;
    double lambda_giou = 1.0;
    double lambda_focal = 1.0;
    double lambda_l1 = 14.0;
    Reduction reduction = Reduction::kMean;
};

struct LossBatch {
    Matrix student_tokens;
    Matrix teacher_tokens;
    Matrix enhanced_tokens;
    std::vector<Matrix> teacher_similarity;
    std::vector<Matrix> student_similarity;
    Matrix teacher_features;
    Matrix student_features;
    Matrix teacher_response;
    Matrix student_response;
    LossHyperparameters params;
};

struct LossComponents {
    double ckd = 0.0;
    double skd = 0.0;
    double fkd = 0.0;
    double rkd = 0.0;
    double giou = 0.0;
    double focal = 0.0;
    double l1 = 0.0;

    double okd() const { return ckd + skd + fkd + rkd; }
};

double total_loss(const LossComponents& components, const LossHyperparameters& params = {});

/// Evaluates the four distillation kernels on the batch and combines them
/// with the tracking losses.
LossComponents loss_components(const LossBatch& batch, const TrackingLosses& tracking);
double total_loss(const LossBatch& batch, const TrackingLosses& tracking);

}  // namespace uotkit
