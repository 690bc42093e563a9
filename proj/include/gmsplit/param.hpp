#pragma once

#include <string>
#include <vector>

#include "gmsplit/tensor.hpp"

namespace gmsplit {

// Identifies one parameter inside a SharedWeights store. The classifier head
// uses edge == kHeadEdge, op == 0.
struct ParamId {
    int edge = 0;
    int op = 0;
    std::string role;  // "weight" | "bias"

    static constexpr int kHeadEdge = -1;

    std::string str() const {
        return (edge == kHeadEdge ? std::string("head") : "e" + std::to_string(edge) + ".o" + std::to_string(op)) +
               "." + role;
    }
    bool operator==(const ParamId&) const = default;
};

struct Parameter {
    ParamId id;
    Tensor value;
    Tensor grad;
    Tensor momentum;

    Parameter() = default;
    Parameter(ParamId pid, Tensor v)
        : id(std::move(pid)), value(std::move(v)), grad(value.shape()), momentum(value.shape()) {}

    void zero_grad() { grad.fill(0.0); }
};

// Weight + bias pair for affine ops; empty for parameter-free ops.
struct ParamBundle {
    std::vector<Parameter> params;  // stable order: weight, then bias

    bool empty() const { return params.empty(); }
    void zero_grad() {
        for (auto& p : params) p.zero_grad();
    }
};

}  // namespace gmsplit
