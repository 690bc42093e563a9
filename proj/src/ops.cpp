#include "gmsplit/ops.hpp"

#include <cmath>

namespace gmsplit {

const char* op_name(OpKind kind) {
    switch (kind) {
        case OpKind::Zero: return "zero";
        case OpKind::Skip: return "skip";
        case OpKind::LinearTanh: return "linear_tanh";
        case OpKind::LinearRelu: return "linear_relu";
        case OpKind::FeatAvg: return "featavg";
    }
    return "?";
}

std::optional<OpKind> op_from_name(const std::string& name) {
    if (name == "zero") return OpKind::Zero;
    if (name == "skip") return OpKind::Skip;
    if (name == "linear_tanh") return OpKind::LinearTanh;
    if (name == "linear_relu") return OpKind::LinearRelu;
    if (name == "featavg") return OpKind::FeatAvg;
    return std::nullopt;
}

bool op_is_parametric(OpKind kind) {
    return kind == OpKind::LinearTanh || kind == OpKind::LinearRelu;
}

namespace {

void check_linear_params(const ParamBundle* params, const Tensor& x, const std::string& ctx) {
    const std::string where = ctx.empty() ? "linear op" : ctx;
    if (params == nullptr || params->params.size() != 2) {
        throw ShapeError(where + ": linear op requires a (weight, bias) bundle");
    }
    const Tensor& w = params->params[0].value;
    const Tensor& b = params->params[1].value;
    if (w.rows() != x.cols() || w.cols() != x.cols()) {
        throw ShapeError(where + ": weight shape " + w.shape_str() + " incompatible with input " +
                         x.shape_str());
    }
    if (b.size() != x.cols()) {
        throw ShapeError(where + ": bias length " + std::to_string(b.size()) +
                         " incompatible with input " + x.shape_str());
    }
}

Tensor linear_preact(const ParamBundle& params, const Tensor& x) {
    Tensor z = matmul(x, params.params[0].value);
    const Tensor& b = params.params[1].value;
    for (std::size_t r = 0; r < z.rows(); ++r) {
        for (std::size_t c = 0; c < z.cols(); ++c) z.at(r, c) += b[c];
    }
    return z;
}

// window-3 moving average over the feature axis, edges replicated
Tensor featavg_forward(const Tensor& x) {
    const std::size_t d = x.cols();
    Tensor y({x.rows(), d});
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const std::size_t lo = c == 0 ? 0 : c - 1;
            const std::size_t hi = c + 1 >= d ? d - 1 : c + 1;
            y.at(r, c) = (x.at(r, lo) + x.at(r, c) + x.at(r, hi)) / 3.0;
        }
    }
    return y;
}

}  // namespace

Tensor op_forward(OpKind kind, const ParamBundle* params, const Tensor& x,
                  const std::string& context) {
    switch (kind) {
        case OpKind::Zero:
            return Tensor(x.shape());
        case OpKind::Skip:
            return x;
        case OpKind::FeatAvg:
            return featavg_forward(x);
        case OpKind::LinearTanh: {
            check_linear_params(params, x, context);
            Tensor y = linear_preact(*params, x);
            for (double& v : y.values()) v = std::tanh(v);
            return y;
        }
        case OpKind::LinearRelu: {
            check_linear_params(params, x, context);
            Tensor y = linear_preact(*params, x);
            for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
            return y;
        }
    }
    throw ShapeError("unknown op kind");
}

OpBackwardResult op_backward(OpKind kind, const ParamBundle* params, const Tensor& x,
                             const Tensor& upstream_grad, const std::string& context) {
    if (!upstream_grad.same_shape(x)) {
        const std::string where = context.empty() ? std::string(op_name(kind)) : context;
        throw ShapeError(where + ": upstream grad " + upstream_grad.shape_str() +
                         " does not match input " + x.shape_str());
    }
    OpBackwardResult out;
    switch (kind) {
        case OpKind::Zero:
            out.input_grad = Tensor(x.shape());
            return out;
        case OpKind::Skip:
            out.input_grad = upstream_grad;
            return out;
        case OpKind::FeatAvg: {
            // transpose of the forward averaging stencil
            const std::size_t d = x.cols();
            out.input_grad = Tensor(x.shape());
            for (std::size_t r = 0; r < x.rows(); ++r) {
                for (std::size_t c = 0; c < d; ++c) {
                    const double g = upstream_grad.at(r, c) / 3.0;
                    const std::size_t lo = c == 0 ? 0 : c - 1;
                    const std::size_t hi = c + 1 >= d ? d - 1 : c + 1;
                    out.input_grad.at(r, lo) += g;
                    out.input_grad.at(r, c) += g;
                    out.input_grad.at(r, hi) += g;
                }
            }
            return out;
        }
        case OpKind::LinearTanh:
        case OpKind::LinearRelu: {
            check_linear_params(params, x, context);
            Tensor z = linear_preact(*params, x);
            Tensor dz(z.shape());
            if (kind == OpKind::LinearTanh) {
                for (std::size_t i = 0; i < z.size(); ++i) {
                    const double t = std::tanh(z[i]);
                    dz[i] = upstream_grad[i] * (1.0 - t * t);
                }
            } else {
                for (std::size_t i = 0; i < z.size(); ++i) {
                    dz[i] = z[i] > 0.0 ? upstream_grad[i] : 0.0;
                }
            }
            out.input_grad = matmul_nt(dz, params->params[0].value);
            Tensor dw = matmul_tn(x, dz);
            Tensor db({x.cols()});
            for (std::size_t r = 0; r < dz.rows(); ++r) {
                for (std::size_t c = 0; c < dz.cols(); ++c) db[c] += dz.at(r, c);
            }
            out.param_grads.push_back(std::move(dw));
            out.param_grads.push_back(std::move(db));
            return out;
        }
    }
    throw ShapeError("unknown op kind");
}

}  // namespace gmsplit
