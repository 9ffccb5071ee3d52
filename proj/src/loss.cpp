#include "reactnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reactnet/layers.hpp"

namespace reactnet {

namespace {

void check_teacher(const FloatTensor& logits, const FloatTensor& probs) {
    if (logits.shape != probs.shape)
        throw std::invalid_argument("distributional_loss: batch/class dims mismatch");
    const int64_t n = probs.shape[0], k = probs.shape[1];
    for (int64_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < k; ++j) {
            const double p = probs.data[static_cast<size_t>(i * k + j)];
            if (!(p > 0.0))
                throw std::invalid_argument("distributional_loss: teacher probs must be positive");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw std::invalid_argument("distributional_loss: teacher row does not sum to 1");
    }
}

// log softmax row, stable
void log_softmax_row(const double* z, int64_t k, double* out) {
    double mx = z[0];
    for (int64_t j = 1; j < k; ++j) mx = std::max(mx, z[j]);
    double s = 0.0;
    for (int64_t j = 0; j < k; ++j) s += std::exp(z[j] - mx);
    const double lse = mx + std::log(s);
    for (int64_t j = 0; j < k; ++j) out[j] = z[j] - lse;
}

}  // namespace

double distributional_loss(const FloatTensor& student_logits, const FloatTensor& teacher_probs) {
    check_teacher(student_logits, teacher_probs);
    const int64_t n = student_logits.shape[0], k = student_logits.shape[1];
    std::vector<double> logp(static_cast<size_t>(k));
    double loss = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        log_softmax_row(student_logits.data.data() + i * k, k, logp.data());
        for (int64_t j = 0; j < k; ++j) {
            const double pr = teacher_probs.data[static_cast<size_t>(i * k + j)];
            loss -= pr * (logp[static_cast<size_t>(j)] - std::log(pr));
        }
    }
    return loss / static_cast<double>(n);
}

FloatTensor distributional_loss_backward(const FloatTensor& student_logits,
                                         const FloatTensor& teacher_probs) {
    check_teacher(student_logits, teacher_probs);
    const int64_t n = student_logits.shape[0], k = student_logits.shape[1];
    FloatTensor ps = softmax(student_logits);
    FloatTensor grad(student_logits.shape);
    for (int64_t i = 0; i < n * k; ++i)
        grad.data[static_cast<size_t>(i)] =
            (ps.data[static_cast<size_t>(i)] - teacher_probs.data[static_cast<size_t>(i)]) /
            static_cast<double>(n);
    return grad;
}

double cross_entropy(const FloatTensor& logits, const std::vector<int>& labels) {
    const int64_t n = logits.shape[0], k = logits.shape[1];
    if (labels.size() != static_cast<size_t>(n))
        throw std::invalid_argument("cross_entropy: label count mismatch");
    std::vector<double> logp(static_cast<size_t>(k));
    double loss = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        log_softmax_row(logits.data.data() + i * k, k, logp.data());
        const int y = labels[static_cast<size_t>(i)];
        if (y < 0 || y >= k) throw std::invalid_argument("cross_entropy: label out of range");
        loss -= logp[static_cast<size_t>(y)];
    }
    return loss / static_cast<double>(n);
}

FloatTensor cross_entropy_backward(const FloatTensor& logits, const std::vector<int>& labels) {
    const int64_t n = logits.shape[0], k = logits.shape[1];
    FloatTensor grad = softmax(logits);
    for (int64_t i = 0; i < n; ++i)
        grad.data[static_cast<size_t>(i * k + labels[static_cast<size_t>(i)])] -= 1.0;
    for (double& v : grad.data) v /= static_cast<double>(n);
    return grad;
}

}  // namespace reactnet
