#include "rgnn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace rgnn {

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                double lr) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam: params/grads size mismatch");
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const Tensor* p : params) {
            m_.push_back(Tensor(p->rows, p->cols));
            v_.push_back(Tensor(p->rows, p->cols));
        }
    }
    if (m_.size() != params.size())
        throw std::invalid_argument("adam: parameter count changed between steps");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        if (!p.same_shape(m_[i]) || !g.same_shape(p))
            throw std::invalid_argument("adam: shape mismatch at parameter " + std::to_string(i));
        double* pd = p.data.data();
        const double* gd = g.data.data();
        double* md = m_[i].data.data();
        double* vd = v_[i].data.data();
        const size_t sz = p.data.size();
        for (size_t k = 0; k < sz; ++k) {
            md[k] = beta1_ * md[k] + (1.0 - beta1_) * gd[k];
            vd[k] = beta2_ * vd[k] + (1.0 - beta2_) * gd[k] * gd[k];
            const double mhat = md[k] / bc1;
            const double vhat = vd[k] / bc2;
            pd[k] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

}  // namespace rgnn
