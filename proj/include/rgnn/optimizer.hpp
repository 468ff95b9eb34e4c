#pragma once

#include <vector>

#include "rgnn/tensor.hpp"

namespace rgnn {

// Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8).
class Adam {
public:
    Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    // First call sizes the moment buffers from the parameter shapes.
    void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
              double lr);

    int steps_taken() const { return t_; }

private:
    double beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace rgnn
