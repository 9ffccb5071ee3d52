#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace reactnet {

struct GradCheckResult {
    std::string name;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Central finite differences against the analytic backward pass. Covers the
// ReAct activation coefficients, batch norm, the classifier, both losses and
// a two-block composite network (run in smooth mode, where the quantizers are
// replaced by differentiable surrogates so the FD comparison is well-posed).
std::vector<GradCheckResult> run_grad_checks(uint64_t seed);

// Worst central-difference relative error over every entry of `theta`; the
// loss closure must read `theta` by reference.
double max_rel_err_fd(const std::function<double()>& loss, std::vector<double>& theta,
                      const std::vector<double>& analytic, double h);

bool all_passed(const std::vector<GradCheckResult>& results);

}  // namespace reactnet
