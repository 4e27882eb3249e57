#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jtw/tensor.hpp"

namespace jtw {

// Sparse input vector; indices strictly increasing.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<std::uint32_t> index;
    std::vector<double> value;
};

// Handle to a node of a Graph.
struct Var {
    std::uint32_t id = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order, which is a
// topological order by construction; backward walks them in reverse.
//
// Parameter leaves reference caller-owned tensors. Their gradients are
// accumulated straight into the caller-supplied buffer (not zeroed here), so
// one buffer can collect the gradient of many graphs. All other gradient
// accumulators are zeroed at the start of every backward().
//
// clear() keeps node storage around so a graph can be reused per instance
// without reallocating.
class Graph {
public:
    enum class Op : std::uint8_t {
        Param,
        Constant,
        Affine,
        AffineT,
        SparseAffineT,
        Tanh,
        Softmax,
        LogSoftmax,
        Exp,
        Log,
        Mul,
        Add,
        Sub,
        Scale,
        AddScalar,
        Sum,
        Mean,
        DotConst,
        Pick,
        CosineConst,
        LogHalfAngle,
    };

    void clear() noexcept { size_ = 0; }
    std::size_t size() const noexcept { return size_; }

    // Leaves. `grad` may be null, in which case the parameter is treated as a
    // constant.
    Var param(const Tensor& value, Tensor* grad = nullptr);
    Var constant(const Tensor& value);
    Var constant(std::span<const double> values);

    // y = W x + b, W is (out x in).
    Var affine(Var W, Var x, Var b);
    // y = W^T x + b, W is (in x out).
    Var affine_t(Var W, Var x, Var b);
    // y = W^T x + b for a constant sparse x; W is (in x out). Only the rows of
    // W selected by x receive gradient.
    Var sparse_affine_t(Var W, const SparseVector& x, Var b);

    Var tanh(Var x);
    Var softmax(Var x);
    Var log_softmax(Var x);
    Var exp(Var x);
    Var log(Var x);
    Var mul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var x, double c);
    Var add_scalar(Var x, double c);
    Var sum(Var x);
    Var mean(Var x);
    // sum_i w_i x_i for constant weights w.
    Var dot_const(Var x, std::span<const double> w);
    // x[i] as a scalar.
    Var pick(Var x, std::size_t i);
    // Cosine between a constant target and x.
    Var cosine_const(std::span<const double> target, Var x);
    // log cos(acos(c)/2) = 0.5 log((1 + c)/2), with c clamped to [-1, 1] and
    // the result floored at `floor` (zero gradient below the floor).
    Var log_half_angle(Var c, double floor);

    const Tensor& value(Var v) const;
    double scalar(Var v) const { return value(v).item(); }
    // Gradient of the last backward() w.r.t. a non-parameter node.
    const Tensor& grad(Var v) const;

    // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be scalar.
    void backward(Var loss, double seed = 1.0);

    // Softmax nodes whose output is not a strictly positive probability
    // vector summing to 1 within `tol`.
    struct SimplexAudit {
        std::size_t checked = 0;
        std::size_t violations = 0;
        double max_sum_error = 0.0;
    };
    SimplexAudit audit_softmax(double tol) const;

private:
    struct Node {
        Op op = Op::Constant;
        std::uint32_t a = 0, b = 0, c = 0;
        bool needs_grad = false;
        Tensor value;
        Tensor grad;
        const Tensor* param_value = nullptr;
        Tensor* param_grad = nullptr;
        std::vector<double> aux;
        SparseVector sparse;
        std::size_t index = 0;
        double scalar = 0.0;
        double scratch = 0.0;
    };

    Node& push(Op op, const std::vector<std::size_t>& shape, bool needs_grad);
    const Tensor& val(std::uint32_t id) const;
    Tensor* grad_slot(std::uint32_t id);
    void check_finite(const Node& n) const;
    void backward_node(std::uint32_t id);

    std::vector<Node> nodes_;
    std::size_t size_ = 0;
};

const char* op_name(Graph::Op op);

}  // namespace jtw
