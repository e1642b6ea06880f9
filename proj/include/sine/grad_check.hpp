#pragma once

// Central finite-difference verification of analytic gradients.
//
// loss_fn(want_grad): evaluates the scalar loss; when want_grad is true it
// must also accumulate analytic gradients into the tape's grad tensors
// (which this checker zeroes first). The loss must be deterministic and
// smooth at the evaluation point; argmax-style selections in the graph are
// treated as constants, so callers must evaluate away from tie boundaries.

#include <cmath>
#include <functional>

#include "sine/tape.hpp"

namespace sine {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

inline GradCheckReport grad_check(const std::function<double(bool)>& loss_fn,
                                  ParamTape& tape, double h = 1e-4) {
    const double l0 = loss_fn(false);
    if (loss_fn(false) != l0)
        throw ContractError("grad_check: loss_fn is not deterministic");
    if (!std::isfinite(l0)) throw NumericError("grad_check: loss is not finite");

    tape.zero_grad();
    loss_fn(true);

    GradCheckReport report;
    for (auto& e : tape.entries) {
        if (e.frozen) continue;
        for (std::size_t i = 0; i < e.value->size(); ++i) {
            const double saved = e.value->data[i];
            e.value->data[i] = saved + h;
            const double lp = loss_fn(false);
            e.value->data[i] = saved - h;
            const double lm = loss_fn(false);
            e.value->data[i] = saved;

            const double numeric = (lp - lm) / (2.0 * h);
            const double analytic = e.grad->data[i];
            const double denom =
                std::max(std::max(std::fabs(numeric), std::fabs(analytic)), 1e-8);
            const double rel = std::fabs(numeric - analytic) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = e.name;
                report.worst_index = i;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace sine
