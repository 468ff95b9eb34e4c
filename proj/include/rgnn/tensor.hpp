#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgnn {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1 tensors.
// All model quantities (features, embeddings, weights, logits) live here.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c, double fill = 0.0);

    static Tensor identity(int n);
    static Tensor scalar(double v);

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const;

    bool all_finite() const;
};

// Throws std::invalid_argument if t contains NaN/Inf. `where` names the op.
void require_finite(const Tensor& t, const char* where);

}  // namespace rgnn
