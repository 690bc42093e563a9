#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gmsplit/errors.hpp"

namespace gmsplit {

// Dense row-major 64-bit tensor. Rank is 1 or 2 in practice (batches and
// weight matrices); nothing here assumes more.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor matrix(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? (shape_.empty() ? 0 : 1) : shape_[1]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    void fill(double v);
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    // throws ShapeError with `what` context when a non-finite value is present
    void check_finite(const std::string& what) const;

    std::string shape_str() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// y = x * w  (x: B x n, w: n x m)
Tensor matmul(const Tensor& x, const Tensor& w);
// y = x * w^T (x: B x m, w: n x m) -- used by backward passes
Tensor matmul_nt(const Tensor& x, const Tensor& w);
// y = x^T * g (x: B x n, g: B x m) -> n x m
Tensor matmul_tn(const Tensor& x, const Tensor& g);

}  // namespace gmsplit
