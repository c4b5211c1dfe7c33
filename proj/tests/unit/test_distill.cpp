#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <string>

#include "infonce_oracle.hpp"
#include "uotkit/distill.hpp"
#include "uotkit/error.hpp"
#include "uotkit/rng.hpp"

using namespace uotkit;

namespace {

Matrix random_matrix(CounterRng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (double& v : m.values()) v = rng.uniform(lo, hi);
    return m;
}

oracle::Rows rows_of(const Matrix& m) {
    oracle::Rows out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
}

void expect_code(ErrorCode code, const auto& fn) {
    try {
        fn();
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

}  // namespace

TEST(Ckd, IdenticalRowsGiveFourLnK) {
    for (std::size_t k : {2u, 8u, 32u}) {
        const Matrix t(k, 16, 0.3);
        const auto r = ckd_loss(t, t, t, 0.5);
        EXPECT_NEAR(r.loss, 4.0 * std::log(static_cast<double>(k)), 1e-9);
        EXPECT_NEAR(r.u2e, std::log(static_cast<double>(k)), 1e-9);
    }
}

TEST(Ckd, OrthogonalPair) {
    const Matrix t(2, 4, std::vector<double>{1, 0, 0, 0, 0, 1, 0, 0});
    const auto r = ckd_loss(t, t, t, 0.5);
    const double term = std::log(1.0 + std::exp(-2.0));
    EXPECT_NEAR(term, 0.12693, 1e-5);
    EXPECT_NEAR(r.loss, 4.0 * term, 1e-9);
    EXPECT_NEAR(r.e2u_prime, term, 1e-12);
}

TEST(Ckd, MatchesSoftmaxOracle) {
    CounterRng rng(71);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng.below(10), d = 3 + rng.below(20);
        const Matrix s = random_matrix(rng, k, d), t = random_matrix(rng, k, d), e = random_matrix(rng, k, d);
        const double tau = rng.uniform(0.1, 2.0);
        const auto r = ckd_loss(s, t, e, tau);
        EXPECT_NEAR(r.loss, oracle::ckd(rows_of(s), rows_of(t), rows_of(e), tau), 1e-10);
        EXPECT_NEAR(r.u2e, oracle::infonce_direction(rows_of(s), rows_of(e), tau), 1e-10);
        EXPECT_NEAR(r.e2u, oracle::infonce_direction(rows_of(e), rows_of(s), tau), 1e-10);
        EXPECT_NEAR(r.loss, r.u2e + r.e2u + r.u2e_prime + r.e2u_prime, 1e-12);
        // Each direction is a mean cross-entropy over K classes of logits in [-1/tau, 1/tau].
        const double bound = std::log(static_cast<double>(k)) + 2.0 / tau;
        EXPECT_LE(r.u2e, bound);
        EXPECT_GE(r.u2e, 0.0);
    }
}

TEST(Ckd, RowRescaleInvariance) {
    CounterRng rng(72);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix s = random_matrix(rng, 6, 10), t = random_matrix(rng, 6, 10), e = random_matrix(rng, 6, 10);
        Matrix s2 = s;
        for (std::size_t r = 0; r < s2.rows(); ++r) {
            const double c = rng.uniform(0.01, 100.0);
            for (double& v : s2.row(r)) v *= c;
        }
        EXPECT_NEAR(ckd_loss(s, t, e).loss, ckd_loss(s2, t, e).loss, 1e-10);
    }
}

TEST(Ckd, JointPermutationInvariance) {
    CounterRng rng(73);
    const std::size_t k = 7;
    const Matrix s = random_matrix(rng, k, 5), t = random_matrix(rng, k, 5), e = random_matrix(rng, k, 5);
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = k; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    auto permute = [&](const Matrix& m) {
        Matrix out(m.rows(), m.cols());
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(perm[r], c);
        return out;
    };
    EXPECT_NEAR(ckd_loss(s, t, e).loss, ckd_loss(permute(s), permute(t), permute(e)).loss, 1e-12);
}

TEST(Ckd, Errors) {
    const Matrix one(1, 4, 1.0);
    expect_code(ErrorCode::kDegenerateBatch, [&] { ckd_loss(one, one, one); });
    Matrix zero_row(3, 4, 1.0);
    for (double& v : zero_row.row(1)) v = 0.0;
    const Matrix ok(3, 4, 1.0);
    expect_code(ErrorCode::kDegenerateBatch, [&] { ckd_loss(zero_row, ok, ok); });
    expect_code(ErrorCode::kInvalidHyperparameter, [&] { ckd_loss(ok, ok, ok, 0.0); });
    expect_code(ErrorCode::kInvalidHyperparameter, [&] { ckd_loss(ok, ok, ok, -1.0); });
    expect_code(ErrorCode::kShapeMismatch, [&] { ckd_loss(ok, Matrix(3, 5, 1.0), ok); });
    expect_code(ErrorCode::kShapeMismatch, [&] { ckd_loss(ok, ok, Matrix(2, 4, 1.0)); });
}

TEST(Skd, Examples) {
    const Matrix a(2, 2, std::vector<double>{1, 2, 3, 4});
    EXPECT_EQ(skd_loss({a}, {a}).loss, 0.0);
    const Matrix b(2, 2, std::vector<double>{4, 5, 6, 7});
    const auto r = skd_loss({a}, {b});
    EXPECT_DOUBLE_EQ(r.loss, 9.0);
    EXPECT_DOUBLE_EQ(r.grad_student[0](0, 0), 2.0 * 3.0 / 4.0);
    EXPECT_DOUBLE_EQ(skd_loss({a}, {b}, Reduction::kSum).loss, 36.0);
}

TEST(Skd, AdditiveOverLayers) {
    CounterRng rng(74);
    const Matrix t1 = random_matrix(rng, 3, 3), s1 = random_matrix(rng, 3, 3);
    const Matrix t2 = random_matrix(rng, 5, 5), s2 = random_matrix(rng, 5, 5);
    const double a = skd_loss({t1}, {s1}).loss, b = skd_loss({t2}, {s2}).loss;
    const auto both = skd_loss({t1, t2}, {s1, s2});
    EXPECT_NEAR(both.loss, a + b, 1e-14);
    ASSERT_EQ(both.per_layer.size(), 2u);
    EXPECT_EQ(both.per_layer[1], b);
}

TEST(Skd, ShapeErrorNamesLayer) {
    const Matrix a(2, 2);
    try {
        skd_loss({a, a}, {a, Matrix(3, 3)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos) << e.what();
    }
    expect_code(ErrorCode::kShapeMismatch, [&] { skd_loss({a}, {a, a}); });
}

TEST(Fkd, Examples) {
    const Matrix z(3, 7, 0.0), o(3, 7, 1.0);
    EXPECT_EQ(fkd_loss(o, o).loss, 0.0);
    EXPECT_DOUBLE_EQ(fkd_loss(z, o).loss, 1.0);
    EXPECT_DOUBLE_EQ(fkd_loss(z, o).grad(2, 6), 2.0 / 21.0);
    expect_code(ErrorCode::kShapeMismatch, [&] { fkd_loss(z, Matrix(7, 3)); });
}

TEST(Fkd, HomogeneousOfDegreeTwo) {
    CounterRng rng(75);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix t = random_matrix(rng, 4, 6), s = random_matrix(rng, 4, 6);
        const double c = rng.uniform(-5, 5);
        Matrix tc = t, sc = s;
        for (double& v : tc.values()) v *= c;
        for (double& v : sc.values()) v *= c;
        const double base = fkd_loss(t, s).loss;
        EXPECT_NEAR(fkd_loss(tc, sc).loss, c * c * base, 1e-12 * std::max(1.0, c * c * base));
        EXPECT_GE(base, 0.0);
    }
}

TEST(Rkd, BinaryTeacherSelfLossIsNearZero) {
    const double mu = 2.0;
    Matrix t(8, 8, 0.0);
    t(3, 4) = mu * (1.0 - kClampEpsilon);
    t(6, 1) = mu * (1.0 - kClampEpsilon);
    EXPECT_LT(rkd_loss(t, t, mu).loss, 1e-6);
    EXPECT_GE(rkd_loss(t, t, mu).loss, 0.0);
}

TEST(Rkd, SinglePeakPixel) {
    const Matrix t(1, 1, 2.0), s(1, 1, 1.0);
    const double want = 0.25 * -std::log(0.5);
    EXPECT_NEAR(rkd_loss(t, s, 2.0).loss, want, 1e-12);
    EXPECT_NEAR(want, 0.1733, 1e-4);
}

TEST(Rkd, NonNegativeAndErrors) {
    CounterRng rng(76);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix t = random_matrix(rng, 5, 5, 0.0, 2.0), s = random_matrix(rng, 5, 5, 0.0, 2.0);
        EXPECT_GE(rkd_loss(t, s).loss, 0.0);
    }
    const Matrix m(2, 2, 0.5);
    expect_code(ErrorCode::kInvalidHyperparameter, [&] { rkd_loss(m, m, 0.0); });
    expect_code(ErrorCode::kInvalidHyperparameter, [&] { rkd_loss(m, m, -2.0); });
    expect_code(ErrorCode::kShapeMismatch, [&] { rkd_loss(m, Matrix(1, 4, 0.5)); });
}

TEST(Rkd, GradientZeroWhereClamped) {
    const Matrix t(1, 2, std::vector<double>{0.0, 0.0});
    const Matrix s(1, 2, std::vector<double>{0.0, 0.6});
    const auto r = rkd_loss(t, s, 2.0);
    EXPECT_EQ(r.grad(0, 0), 0.0);
    EXPECT_NE(r.grad(0, 1), 0.0);
}

TEST(Focal, RefinedDifferenceAtSmallP) {
    // Near the clamp floor the curvature is large, so the checker's step is
    // too coarse; a much smaller step with Richardson extrapolation agrees.
    for (double p : {1e-3, 5e-3, 0.02, 0.97}) {
        for (double q : {0.0, 0.3, 1.0}) {
            const Matrix t(1, 1, q);
            auto f = [&](double x) { return focal_heatmap_loss(t, Matrix(1, 1, x)).loss; };
            const double h = p * 1e-3;
            const double d1 = (f(p + h) - f(p - h)) / (2 * h);
            const double d2 = (f(p + h / 2) - f(p - h / 2)) / h;
            const double fd = (4 * d2 - d1) / 3;
            const double g = focal_heatmap_loss(t, Matrix(1, 1, p)).grad(0, 0);
            EXPECT_NEAR(g, fd, 1e-7 * std::max(1.0, std::fabs(g))) << "p=" << p << " q=" << q;
        }
    }
}

TEST(Tracking, Examples) {
    const Matrix hm(2, 2, 0.5);
    const auto same = tracking_losses({0, 0, 10, 10}, {0, 0, 10, 10}, hm, hm, 100, 100);
    EXPECT_EQ(same.giou, 0.0);
    EXPECT_EQ(same.l1, 0.0);
    const auto shifted = tracking_losses({0, 0, 10, 10}, {5, 0, 10, 10}, hm, hm, 100, 100);
    EXPECT_NEAR(shifted.giou, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(shifted.l1, 0.0125, 1e-15);
    EXPECT_GT(giou_loss({0, 0, 10, 10}, {1e6, 1e6, 10, 10}), 1.999);
    EXPECT_LE(giou_loss({0, 0, 10, 10}, {1e6, 1e6, 10, 10}), 2.0);
    expect_code(ErrorCode::kInvalidArgument, [&] { tracking_losses({0, 0, 1, 1}, {0, 0, 1, 1}, hm, hm, 0, 10); });
}

TEST(Tracking, FocalUsesBinaryTarget) {
    Matrix gt(3, 3, 0.0);
    gt(1, 1) = 1.0;
    Matrix pred(3, 3, 0.1);
    pred(1, 1) = 0.5;
    const auto r = tracking_losses({0, 0, 5, 5}, {0, 0, 5, 5}, gt, pred, 50, 50);
    const double peak = 0.25 * -std::log(0.5);
    // q = 0 is clamped to eps, which weights the background term by (1 - eps)^4.
    const double bg = 8.0 * std::pow(1.0 - kClampEpsilon, 4) * (0.01 * -std::log(0.9));
    EXPECT_NEAR(r.focal, (peak + bg) / 9.0, 1e-12);
}

TEST(TotalLoss, Composition) {
    const LossComponents c{0.5, 0.1, 0.1, 0.3, 0.2, 0.1, 0.05};
    EXPECT_NEAR(c.okd(), 1.0, 1e-15);
    EXPECT_NEAR(total_loss(c), 2.0, 1e-15);
    EXPECT_EQ(total_loss(LossComponents{}), 0.0);
    LossHyperparameters p;
    EXPECT_EQ(p.lambda_giou, 1.0);
    EXPECT_EQ(p.lambda_focal, 1.0);
    EXPECT_EQ(p.lambda_l1, 14.0);
    EXPECT_EQ(p.tau, 0.5);
    EXPECT_EQ(p.mu, 2.0);
}

TEST(TotalLoss, BatchMatchesKernels) {
    CounterRng rng(77);
    LossBatch b;
    b.student_tokens = random_matrix(rng, 4, 8);
    b.teacher_tokens = random_matrix(rng, 4, 8);
    b.enhanced_tokens = random_matrix(rng, 4, 8);
    b.teacher_similarity = {random_matrix(rng, 3, 3), random_matrix(rng, 3, 3)};
    b.student_similarity = {random_matrix(rng, 3, 3), random_matrix(rng, 3, 3)};
    b.teacher_features = random_matrix(rng, 2, 5);
    b.student_features = random_matrix(rng, 2, 5);
    b.teacher_response = random_matrix(rng, 4, 4, 0.0, 2.0);
    b.student_response = random_matrix(rng, 4, 4, 0.0, 2.0);
    const Matrix hm(2, 2, 0.3);
    const auto tr = tracking_losses({0, 0, 10, 10}, {2, 1, 9, 12}, hm, hm, 64, 48);
    const auto c = loss_components(b, tr);
    EXPECT_EQ(c.ckd, ckd_loss(b.student_tokens, b.teacher_tokens, b.enhanced_tokens).loss);
    EXPECT_EQ(c.skd, skd_loss(b.teacher_similarity, b.student_similarity).loss);
    EXPECT_EQ(c.fkd, fkd_loss(b.teacher_features, b.student_features).loss);
    EXPECT_EQ(c.rkd, rkd_loss(b.teacher_response, b.student_response).loss);
    EXPECT_NEAR(total_loss(b, tr), c.okd() + tr.giou + tr.focal + 14.0 * tr.l1, 1e-12);
}

TEST(Reduction, ParseAndSum) {
    EXPECT_EQ(parse_reduction("sum"), Reduction::kSum);
    EXPECT_EQ(parse_reduction("mean"), Reduction::kMean);
    EXPECT_EQ(to_string(Reduction::kSum), "sum");
    EXPECT_THROW(parse_reduction("max"), Error);
    const Matrix z(2, 3, 0.0), o(2, 3, 1.0);
    EXPECT_DOUBLE_EQ(fkd_loss(z, o, Reduction::kSum).loss, 6.0);
    EXPECT_DOUBLE_EQ(fkd_loss(z, o, Reduction::kSum).grad(0, 0), 2.0);
}
