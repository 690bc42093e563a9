#include "gmsplit/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace gmsplit {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_product(shape_)) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
    }
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void Tensor::check_finite(const std::string& what) const {
    if (!all_finite()) {
        throw ShapeError("non-finite value in " + what);
    }
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << "x";
        os << shape_[i];
    }
    os << "]";
    return os.str();
}

Tensor matmul(const Tensor& x, const Tensor& w) {
    if (x.cols() != w.rows()) {
        throw ShapeError("matmul shape mismatch " + x.shape_str() + " * " + w.shape_str());
    }
    Tensor y({x.rows(), w.cols()});
    const std::size_t n = x.cols(), m = w.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t k = 0; k < n; ++k) {
            const double xv = x.at(r, k);
            if (xv == 0.0) continue;
            const double* wrow = w.data() + k * m;
            double* yrow = y.data() + r * m;
            for (std::size_t c = 0; c < m; ++c) yrow[c] += xv * wrow[c];
        }
    }
    return y;
}

Tensor matmul_nt(const Tensor& x, const Tensor& w) {
    if (x.cols() != w.cols()) {
        throw ShapeError("matmul_nt shape mismatch " + x.shape_str() + " * " + w.shape_str() + "^T");
    }
    Tensor y({x.rows(), w.rows()});
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < w.rows(); ++c) {
            double acc = 0.0;
            const double* xrow = x.data() + r * x.cols();
            const double* wrow = w.data() + c * w.cols();
            for (std::size_t k = 0; k < x.cols(); ++k) acc += xrow[k] * wrow[k];
            y.at(r, c) = acc;
        }
    }
    return y;
}

Tensor matmul_tn(const Tensor& x, const Tensor& g) {
    if (x.rows() != g.rows()) {
        throw ShapeError("matmul_tn shape mismatch " + x.shape_str() + "^T * " + g.shape_str());
    }
    Tensor y({x.cols(), g.cols()});
    for (std::size_t b = 0; b < x.rows(); ++b) {
        const double* xrow = x.data() + b * x.cols();
        const double* grow = g.data() + b * g.cols();
        for (std::size_t i = 0; i < x.cols(); ++i) {
            if (xrow[i] == 0.0) continue;
            double* yrow = y.data() + i * g.cols();
            for (std::size_t j = 0; j < g.cols(); ++j) yrow[j] += xrow[i] * grow[j];
        }
    }
    return y;
}

}  // namespace gmsplit
