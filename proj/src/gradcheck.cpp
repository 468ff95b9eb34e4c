#include "rgnn/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace rgnn {

namespace {

double eval_forward(const ScalarFn& f, const std::vector<Tensor>& params) {
    Tape t;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const Tensor& p : params) vars.push_back(t.param(p));
    Var loss = f(t, vars);
    double v = t.scalar_value(loss);
    if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite loss value");
    return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, const std::vector<Tensor>& params, double step) {
    Tape t;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const Tensor& p : params) vars.push_back(t.param(p));
    Var loss = f(t, vars);
    if (!std::isfinite(t.scalar_value(loss)))
        throw std::runtime_error("grad_check: non-finite loss value");
    t.backward(loss);

    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (Var v : vars) {
        if (t.grad_set(v))
            analytic.push_back(t.grad(v));
        else
            analytic.push_back(Tensor(t.value(v).rows, t.value(v).cols));
    }

    GradCheckReport rep;
    std::vector<Tensor> work = params;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < params[p].data.size(); ++i) {
            const double orig = work[p].data[i];
            work[p].data[i] = orig + step;
            const double fp = eval_forward(f, work);
            work[p].data[i] = orig - step;
            const double fm = eval_forward(f, work);
            work[p].data[i] = orig;

            const double numeric = (fp - fm) / (2.0 * step);
            const double a = analytic[p].data[i];
            const double abs_err = std::fabs(a - numeric);
            const double rel_err =
                abs_err / std::max({1.0, std::fabs(a), std::fabs(numeric)});
            if (rel_err > rep.max_rel_err) {
                rep.max_rel_err = rel_err;
                rep.worst_param = static_cast<int>(p);
                rep.worst_coord = static_cast<int>(i);
            }
            rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
        }
    }
    return rep;
}

}  // namespace rgnn
