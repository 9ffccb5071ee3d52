#include <doctest.h>

#include <string>

#include "reactnet/gradcheck.hpp"

using namespace reactnet;

TEST_CASE("fresh seeds pass every finite-difference check") {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        std::vector<GradCheckResult> r = run_grad_checks(seed);
        CAPTURE(seed);
        for (const GradCheckResult& g : r) {
            CAPTURE(g.name);
            CHECK(g.passed);
        }
        CHECK(all_passed(r));
    }
}

TEST_CASE("the report covers every parameter kind") {
    std::vector<GradCheckResult> r = run_grad_checks(1);
    std::string names;
    for (const GradCheckResult& g : r) names += g.name + " ";
    for (const char* kind : {"alpha", "beta", "gamma", "zeta", "batchnorm", "fc",
                             "weight-binarize", "loss", "network"})
        CHECK(names.find(kind) != std::string::npos);
}

TEST_CASE("a wrong analytic gradient is detected (mutation check)") {
    // sabotage Eq. 6: claim +sum(upstream) instead of -sum(upstream)
    std::vector<double> alpha = {0.1};
    double saved = alpha[0];
    auto loss = [&] { return -3.0 * alpha[0]; };  // true gradient: -3
    std::vector<double> wrong = {+3.0};
    CHECK(max_rel_err_fd(loss, alpha, wrong, 1e-6) > 1.0);
    std::vector<double> right = {-3.0};
    CHECK(max_rel_err_fd(loss, alpha, right, 1e-6) < 1e-8);
    CHECK(alpha[0] == saved);  // FD restores the parameter
}
