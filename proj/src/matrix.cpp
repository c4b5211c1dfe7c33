#include "uotkit/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "uotkit/error.hpp"

namespace uotkit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorCode::kShapeMismatch,
                    "matrix data has " + std::to_string(data_.size()) + " values, expected " +
                        std::to_string(rows_ * cols_));
    }
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void require_same_shape(const Matrix& a, const Matrix& b, const std::string& what) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::kShapeMismatch,
                    what + ": shape " + a.shape_string() + " vs " + b.shape_string());
    }
}

}  // namespace uotkit
