#ifndef AISEL_NN_LOSS_HPP
#define AISEL_NN_LOSS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "aisel/error.hpp"
#include "aisel/nn/matrix.hpp"

namespace aisel::nn {

struct LossResult {
    double value = 0.0;
    Matrix grad;
};

/// Mean over rows of the squared l2 distance between prediction and target.
inline LossResult loss_mse(const Matrix& pred, const Matrix& target) {
    require_same_shape(pred, target, "loss_mse");
    if (pred.rows() == 0) {
        throw ShapeError("loss_mse on an empty batch");
    }
    const double n = static_cast<double>(pred.rows());
    Matrix diff = pred - target;
    LossResult r;
    r.value = diff.squaredNorm() / n;
    r.grad = (2.0 / n) * diff;
    return r;
}

/// Mean negative log-likelihood of `labels` under row-stochastic `probs`.
/// The gradient is taken with respect to the softmax logits, (probs - onehot) / n.
inline LossResult loss_cross_entropy(const Matrix& probs, std::span<const int> labels) {
    if (static_cast<std::size_t>(probs.rows()) != labels.size()) {
        throw ShapeError("loss_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(probs.rows()) + " rows");
    }
    if (probs.rows() == 0) {
        throw ShapeError("loss_cross_entropy on an empty batch");
    }
    const double n = static_cast<double>(probs.rows());
    LossResult r;
    r.grad = probs / n;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= probs.cols()) {
            throw ArgumentError("label " + std::to_string(y) + " outside [0, " + std::to_string(probs.cols()) + ")");
        }
        // Floor keeps the loss finite when a probability underflows to zero.
        r.value -= std::log(std::max(probs(i, y), 1e-300));
        r.grad(i, y) -= 1.0 / n;
    }
    r.value /= n;
    return r;
}

} // namespace aisel::nn

#endif
