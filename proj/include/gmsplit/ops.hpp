#pragma once

#include <optional>
#include <string>

#include "gmsplit/param.hpp"
#include "gmsplit/tensor.hpp"

namespace gmsplit {

// The fixed operation vocabulary. All ops map B x d -> B x d so every edge in
// the cell is shape-compatible with every other.
enum class OpKind { Zero, Skip, LinearTanh, LinearRelu, FeatAvg };

const char* op_name(OpKind kind);
std::optional<OpKind> op_from_name(const std::string& name);
bool op_is_parametric(OpKind kind);

// Forward pass of a single operation. Linear kinds require a (W: d x d, b: d)
// bundle; the rest must be called with params == nullptr or an empty bundle.
// `context` names the edge/op for error messages.
Tensor op_forward(OpKind kind, const ParamBundle* params, const Tensor& x,
                  const std::string& context = {});

struct OpBackwardResult {
    Tensor input_grad;
    // gradients matching the bundle layout (weight, bias); empty for
    // parameter-free kinds
    std::vector<Tensor> param_grads;
};

OpBackwardResult op_backward(OpKind kind, const ParamBundle* params, const Tensor& x,
                             const Tensor& upstream_grad, const std::string& context = {});

}  // namespace gmsplit
