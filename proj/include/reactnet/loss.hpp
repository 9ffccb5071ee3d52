#pragma once

#include <cstdint>
#include <vector>

#include "reactnet/tensor.hpp"

namespace reactnet {

// Mean-over-batch KL(teacher || student), computed in log space from the
// student logits. Teachers are probability rows: positive, summing to 1.
double distributional_loss(const FloatTensor& student_logits,
                           const FloatTensor& teacher_probs);

// d loss / d student_logits = (p_student - p_teacher) / n. The teacher side
// never receives a gradient.
FloatTensor distributional_loss_backward(const FloatTensor& student_logits,
                                         const FloatTensor& teacher_probs);

double cross_entropy(const FloatTensor& logits, const std::vector<int>& labels);
FloatTensor cross_entropy_backward(const FloatTensor& logits, const std::vector<int>& labels);

}  // namespace reactnet
