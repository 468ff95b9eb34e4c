#pragma once

#include <functional>
#include <vector>

#include "rgnn/tape.hpp"

namespace rgnn {

struct GradCheckReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    int worst_param = -1;
    int worst_coord = -1;
    bool pass(double tol) const { return max_rel_err < tol; }
};

// A scalar-valued computation over a fixed set of parameter tensors. Must be
// deterministic in the parameters (internal sampling fixed up front).
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Central finite-difference oracle: compares the tape gradient of f against
// (f(x+h e_i) - f(x-h e_i)) / 2h for every coordinate. The per-coordinate
// error is |a-n| / max(1, |a|, |n|): relative for large gradients, absolute
// near zero where difference noise dominates. Throws if f is non-finite.
GradCheckReport grad_check(const ScalarFn& f, const std::vector<Tensor>& params, double step);

}  // namespace rgnn
