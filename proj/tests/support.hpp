#pragma once

// Shared helpers for the test suites: finite-difference gradient checking and
// small numeric utilities. Test-only code, not part of the library.

#include "algan/tensor.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace testsup {

struct GradReport {
    double max_rel = 0.0;  // worst relative error across all checked elements
    double max_abs = 0.0;  // worst absolute error
    std::size_t checked = 0;
};

// Central-difference check of d(loss)/d(param) for every element of every
// parameter. loss_fn must rebuild its computation from the parameters' current
// values on each call. Relative error uses max(|analytic|, |numeric|, floor)
// as denominator so near-zero gradients are judged absolutely.
inline GradReport finite_diff_check(const std::vector<algan::Tensor>& params,
                                    const std::function<algan::Tensor()>& loss_fn,
                                    double h = 1e-5, double denom_floor = 1e-3) {
    using namespace algan;

    std::vector<std::vector<double>> analytic;
    {
        for (auto p : params) p.zero_grad();
        Graph graph;
        Recording rec(graph);
        Tensor loss = loss_fn();
        graph.backward(loss);
        for (const auto& p : params) {
            auto g = p.grad();
            analytic.emplace_back(g.begin(), g.end());
        }
    }

    GradReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi];
        auto vals = p.mutable_data();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            double saved = vals[i];
            vals[i] = saved + h;
            double up = loss_fn().value();
            vals[i] = saved - h;
            double down = loss_fn().value();
            vals[i] = saved;

            double numeric = (up - down) / (2.0 * h);
            double a = analytic[pi][i];
            double abs_err = std::abs(a - numeric);
            double denom = std::max({std::abs(a), std::abs(numeric), denom_floor});
            report.max_abs = std::max(report.max_abs, abs_err);
            report.max_rel = std::max(report.max_rel, abs_err / denom);
            ++report.checked;
        }
    }
    return report;
}

} // namespace testsup
