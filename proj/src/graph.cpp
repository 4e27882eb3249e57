#include "jtw/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jtw/errors.hpp"

namespace jtw {

namespace {

void require(bool cond, const char* op, const std::string& what) {
    if (!cond) throw ConfigError(std::string(op) + ": " + what);
}

double max_of(std::span<const double> x) { return *std::max_element(x.begin(), x.end()); }

}  // namespace

const char* op_name(Graph::Op op) {
    switch (op) {
        case Graph::Op::Param: return "param";
        case Graph::Op::Constant: return "constant";
        case Graph::Op::Affine: return "affine";
        case Graph::Op::AffineT: return "affine_t";
        case Graph::Op::SparseAffineT: return "sparse_affine_t";
        case Graph::Op::Tanh: return "tanh";
        case Graph::Op::Softmax: return "softmax";
        case Graph::Op::LogSoftmax: return "log_softmax";
        case Graph::Op::Exp: return "exp";
        case Graph::Op::Log: return "log";
        case Graph::Op::Mul: return "mul";
        case Graph::Op::Add: return "add";
        case Graph::Op::Sub: return "sub";
        case Graph::Op::Scale: return "scale";
        case Graph::Op::AddScalar: return "add_scalar";
        case Graph::Op::Sum: return "sum";
        case Graph::Op::Mean: return "mean";
        case Graph::Op::DotConst: return "dot_const";
        case Graph::Op::Pick: return "pick";
        case Graph::Op::CosineConst: return "cosine_const";
        case Graph::Op::LogHalfAngle: return "log_half_angle";
    }
    return "?";
}

Graph::Node& Graph::push(Op op, const std::vector<std::size_t>& shape, bool needs_grad) {
    if (size_ == nodes_.size()) nodes_.emplace_back();
    Node& n = nodes_[size_++];
    n.op = op;
    n.a = n.b = n.c = 0;
    n.needs_grad = needs_grad;
    n.param_value = nullptr;
    n.param_grad = nullptr;
    n.index = 0;
    n.scalar = 0.0;
    n.scratch = 0.0;
    n.value.reset(shape);
    return n;
}

const Tensor& Graph::val(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.param_value ? *n.param_value : n.value;
}

Tensor* Graph::grad_slot(std::uint32_t id) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return nullptr;
    if (n.op == Op::Param) return n.param_grad;
    return &n.grad;
}

void Graph::check_finite(const Node& n) const {
    if (!n.value.all_finite()) {
        throw NumericError(std::string("non-finite value produced by ") + op_name(n.op));
    }
}

const Tensor& Graph::value(Var v) const {
    if (v.id >= size_) throw UsageError("stale or invalid graph variable");
    return val(v.id);
}

const Tensor& Graph::grad(Var v) const {
    if (v.id >= size_) throw UsageError("stale or invalid graph variable");
    const Node& n = nodes_[v.id];
    if (n.op == Op::Param) throw UsageError("parameter gradients live in the caller's buffer");
    return n.grad;
}

// ---------------------------------------------------------------- leaves

Var Graph::param(const Tensor& value, Tensor* grad) {
    if (grad && !grad->same_shape(value)) {
        throw ConfigError("param: gradient buffer shape " + shape_string(grad->shape()) +
                          " does not match value shape " + shape_string(value.shape()));
    }
    Node& n = push(Op::Param, {}, grad != nullptr);
    n.param_value = &value;
    n.param_grad = grad;
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::constant(const Tensor& value) {
    Node& n = push(Op::Constant, value.shape(), false);
    std::copy(value.values().begin(), value.values().end(), n.value.data());
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::constant(std::span<const double> values) {
    Node& n = push(Op::Constant, {values.size()}, false);
    std::copy(values.begin(), values.end(), n.value.data());
    return {static_cast<std::uint32_t>(size_ - 1)};
}

// ---------------------------------------------------------------- forward

Var Graph::affine(Var W, Var x, Var b) {
    const auto& w = val(W.id);
    require(w.rank() == 2, "affine", "weight must be a matrix, got " + shape_string(w.shape()));
    const std::size_t out = w.rows(), in = w.cols();
    require(val(x.id).size() == in, "affine", "input size " + std::to_string(val(x.id).size()) +
                                                  " != weight cols " + std::to_string(in));
    require(val(b.id).size() == out, "affine", "bias size mismatch");
    const bool ng = nodes_[W.id].needs_grad || nodes_[x.id].needs_grad || nodes_[b.id].needs_grad;
    Node& n = push(Op::Affine, {out}, ng);
    n.a = W.id;
    n.b = x.id;
    n.c = b.id;
    const auto& wv = val(W.id);
    const double* xv = val(x.id).data();
    const double* bv = val(b.id).data();
    double* y = n.value.data();
    for (std::size_t r = 0; r < out; ++r) {
        const double* wr = wv.data() + r * in;
        double acc = bv[r];
        for (std::size_t k = 0; k < in; ++k) acc += wr[k] * xv[k];
        y[r] = acc;
    }
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::affine_t(Var W, Var x, Var b) {
    const auto& w = val(W.id);
    require(w.rank() == 2, "affine_t", "weight must be a matrix, got " + shape_string(w.shape()));
    const std::size_t in = w.rows(), out = w.cols();
    require(val(x.id).size() == in, "affine_t", "input size " + std::to_string(val(x.id).size()) +
                                                    " != weight rows " + std::to_string(in));
    require(val(b.id).size() == out, "affine_t", "bias size mismatch");
    const bool ng = nodes_[W.id].needs_grad || nodes_[x.id].needs_grad || nodes_[b.id].needs_grad;
    Node& n = push(Op::AffineT, {out}, ng);
    n.a = W.id;
    n.b = x.id;
    n.c = b.id;
    const auto& wv = val(W.id);
    const double* xv = val(x.id).data();
    double* y = n.value.data();
    std::copy_n(val(b.id).data(), out, y);
    for (std::size_t i = 0; i < in; ++i) {
        const double xi = xv[i];
        if (xi == 0.0) continue;
        const double* wr = wv.data() + i * out;
        for (std::size_t j = 0; j < out; ++j) y[j] += xi * wr[j];
    }
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::sparse_affine_t(Var W, const SparseVector& x, Var b) {
    const auto& w = val(W.id);
    require(w.rank() == 2, "sparse_affine_t", "weight must be a matrix");
    const std::size_t in = w.rows(), out = w.cols();
    require(x.dim == in, "sparse_affine_t",
            "input dim " + std::to_string(x.dim) + " != weight rows " + std::to_string(in));
    require(x.index.size() == x.value.size(), "sparse_affine_t", "index/value length mismatch");
    require(val(b.id).size() == out, "sparse_affine_t", "bias size mismatch");
    for (std::size_t k = 0; k < x.index.size(); ++k) {
        require(x.index[k] < in, "sparse_affine_t", "index out of range");
    }
    const bool ng = nodes_[W.id].needs_grad || nodes_[b.id].needs_grad;
    Node& n = push(Op::SparseAffineT, {out}, ng);
    n.a = W.id;
    n.c = b.id;
    n.sparse = x;
    const auto& wv = val(W.id);
    double* y = n.value.data();
    std::copy_n(val(b.id).data(), out, y);
    for (std::size_t k = 0; k < x.index.size(); ++k) {
        const double xi = x.value[k];
        const double* wr = wv.data() + std::size_t{x.index[k]} * out;
        for (std::size_t j = 0; j < out; ++j) y[j] += xi * wr[j];
    }
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::tanh(Var x) {
    const auto shape = val(x.id).shape();
    Node& n = push(Op::Tanh, shape, nodes_[x.id].needs_grad);
    n.a = x.id;
    const auto& xv = val(x.id);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = std::tanh(xv[i]);
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::softmax(Var x) {
    const auto shape = val(x.id).shape();
    require(shape_size(shape) >= 1, "softmax", "empty input");
    Node& n = push(Op::Softmax, shape, nodes_[x.id].needs_grad);
    n.a = x.id;
    const auto& xv = val(x.id);
    const double m = max_of(xv.values());
    double z = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
        n.value[i] = std::exp(xv[i] - m);
        z += n.value[i];
    }
    for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] /= z;
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::log_softmax(Var x) {
    const auto shape = val(x.id).shape();
    require(shape_size(shape) >= 1, "log_softmax", "empty input");
    Node& n = push(Op::LogSoftmax, shape, nodes_[x.id].needs_grad);
    n.a = x.id;
    const auto& xv = val(x.id);
    const double m = max_of(xv.values());
    double z = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) z += std::exp(xv[i] - m);
    const double lse = m + std::log(z);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = xv[i] - lse;
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::exp(Var x) {
    const auto shape = val(x.id).shape();
    Node& n = push(Op::Exp, shape, nodes_[x.id].needs_grad);
    n.a = x.id;
    const auto& xv = val(x.id);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = std::exp(xv[i]);
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::log(Var x) {
    const auto shape = val(x.id).shape();
    Node& n = push(Op::Log, shape, nodes_[x.id].needs_grad);
    n.a = x.id;
    const auto& xv = val(x.id);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = std::log(xv[i]);
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::mul(Var a, Var b) {
    require(val(a.id).size() == val(b.id).size(), "mul", "size mismatch");
    const auto shape = val(a.id).shape();
    Node& n = push(Op::Mul, shape, nodes_[a.id].needs_grad || nodes_[b.id].needs_grad);
    n.a = a.id;
    n.b = b.id;
    const auto &av = val(a.id), &bv = val(b.id);
    for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * bv[i];
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::add(Var a, Var b) {
    require(val(a.id).size() == val(b.id).size(), "add", "size mismatch");
    const auto shape = val(a.id).shape();
    Node& n = push(Op::Add, shape, nodes_[a.id].needs_grad || nodes_[b.id].needs_grad);
    n.a = a.id;
    n.b = b.id;
    const auto &av = val(a.id), &bv = val(b.id);
    for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + bv[i];
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::sub(Var a, Var b) {
    require(val(a.id).size() == val(b.id).size(), "sub", "size mismatch");
    const auto shape = val(a.id).shape();
    Node& n = push(Op::Sub, shape, nodes_[a.id].needs_grad || nodes_[b.id].needs_grad);
    n.a = a.id;
    n.b = b.id;
    const auto &av = val(a.id), &bv = val(b.id);
    for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] - bv[i];
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::scale(Var x, double c) {
    const auto shape = val(x.id).shape();
    Node& n = push(Op::Scale, shape, nodes_[x.id].needs_grad);
    n.a = x.id;
    n.scalar = c;
    const auto& xv = val(x.id);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = c * xv[i];
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::add_scalar(Var x, double c) {
    const auto shape = val(x.id).shape();
    Node& n = push(Op::AddScalar, shape, nodes_[x.id].needs_grad);
    n.a = x.id;
    n.scalar = c;
    const auto& xv = val(x.id);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value[i] = xv[i] + c;
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::sum(Var x) {
    Node& n = push(Op::Sum, {}, nodes_[x.id].needs_grad);
    n.a = x.id;
    double acc = 0.0;
    for (double v : val(x.id).values()) acc += v;
    n.value[0] = acc;
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::mean(Var x) {
    require(val(x.id).size() >= 1, "mean", "empty input");
    Node& n = push(Op::Mean, {}, nodes_[x.id].needs_grad);
    n.a = x.id;
    const auto& xv = val(x.id);
    double acc = 0.0;
    for (double v : xv.values()) acc += v;
    n.value[0] = acc / static_cast<double>(xv.size());
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::dot_const(Var x, std::span<const double> w) {
    require(val(x.id).size() == w.size(), "dot_const", "size mismatch");
    Node& n = push(Op::DotConst, {}, nodes_[x.id].needs_grad);
    n.a = x.id;
    n.aux.assign(w.begin(), w.end());
    const auto& xv = val(x.id);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * xv[i];
    n.value[0] = acc;
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::pick(Var x, std::size_t i) {
    require(i < val(x.id).size(), "pick", "index out of range");
    Node& n = push(Op::Pick, {}, nodes_[x.id].needs_grad);
    n.a = x.id;
    n.index = i;
    n.value[0] = val(x.id)[i];
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::cosine_const(std::span<const double> target, Var x) {
    require(val(x.id).size() == target.size(), "cosine_const",
            "dimension mismatch: target " + std::to_string(target.size()) + " vs " +
                std::to_string(val(x.id).size()));
    Node& n = push(Op::CosineConst, {}, nodes_[x.id].needs_grad);
    n.a = x.id;
    n.aux.assign(target.begin(), target.end());
    const auto& xv = val(x.id);
    double tt = 0.0, xx = 0.0, tx = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        tt += target[i] * target[i];
        xx += xv[i] * xv[i];
        tx += target[i] * xv[i];
    }
    if (tt == 0.0 || xx == 0.0) throw NumericError("cosine_const: zero vector");
    n.scalar = std::sqrt(tt);    // |t|
    n.scratch = std::sqrt(xx);   // |x|
    n.value[0] = tx / (n.scalar * n.scratch);
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

Var Graph::log_half_angle(Var c, double floor) {
    require(val(c.id).size() == 1, "log_half_angle", "scalar input required");
    Node& n = push(Op::LogHalfAngle, {}, nodes_[c.id].needs_grad);
    n.a = c.id;
    const double raw = val(c.id)[0];
    const double cc = std::clamp(raw, -1.0, 1.0);
    const double v = 0.5 * std::log((1.0 + cc) / 2.0);
    if (!(v > floor)) {
        n.value[0] = floor;
        n.scratch = 0.0;
    } else {
        n.value[0] = v;
        // d/dc, zero where the clamp is active
        n.scratch = (raw > -1.0 && raw < 1.0) ? 0.5 / (1.0 + cc) : 0.0;
    }
    check_finite(n);
    return {static_cast<std::uint32_t>(size_ - 1)};
}

// ---------------------------------------------------------------- backward

void Graph::backward(Var loss, double seed) {
    if (loss.id >= size_) throw UsageError("backward: invalid loss variable");
    if (val(loss.id).size() != 1) {
        throw UsageError("backward: loss must be scalar, got shape " +
                         shape_string(val(loss.id).shape()));
    }
    for (std::size_t i = 0; i < size_; ++i) {
        Node& n = nodes_[i];
        if (n.op != Op::Param && n.op != Op::Constant) n.grad.reset(n.value.shape());
    }
    if (!nodes_[loss.id].needs_grad) return;
    nodes_[loss.id].grad[0] = seed;
    for (std::uint32_t id = loss.id + 1; id-- > 0;) {
        const Node& n = nodes_[id];
        if (n.needs_grad && n.op != Op::Param && n.op != Op::Constant) backward_node(id);
    }
}

void Graph::backward_node(std::uint32_t id) {
    Node& n = nodes_[id];
    const Tensor& gy = n.grad;
    switch (n.op) {
        case Op::Param:
        case Op::Constant:
            break;
        case Op::Affine: {
            const auto& w = val(n.a);
            const auto& x = val(n.b);
            const std::size_t out = w.rows(), in = w.cols();
            if (Tensor* gw = grad_slot(n.a)) {
                for (std::size_t r = 0; r < out; ++r) {
                    const double g = gy[r];
                    if (g == 0.0) continue;
                    double* gr = gw->data() + r * in;
                    for (std::size_t k = 0; k < in; ++k) gr[k] += g * x[k];
                }
            }
            if (Tensor* gx = grad_slot(n.b)) {
                for (std::size_t r = 0; r < out; ++r) {
                    const double g = gy[r];
                    const double* wr = w.data() + r * in;
                    for (std::size_t k = 0; k < in; ++k) (*gx)[k] += g * wr[k];
                }
            }
            if (Tensor* gb = grad_slot(n.c)) {
                for (std::size_t r = 0; r < out; ++r) (*gb)[r] += gy[r];
            }
            break;
        }
        case Op::AffineT: {
            const auto& w = val(n.a);
            const auto& x = val(n.b);
            const std::size_t in = w.rows(), out = w.cols();
            if (Tensor* gw = grad_slot(n.a)) {
                for (std::size_t i = 0; i < in; ++i) {
                    const double xi = x[i];
                    if (xi == 0.0) continue;
                    double* gr = gw->data() + i * out;
                    for (std::size_t j = 0; j < out; ++j) gr[j] += xi * gy[j];
                }
            }
            if (Tensor* gx = grad_slot(n.b)) {
                for (std::size_t i = 0; i < in; ++i) {
                    const double* wr = w.data() + i * out;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < out; ++j) acc += wr[j] * gy[j];
                    (*gx)[i] += acc;
                }
            }
            if (Tensor* gb = grad_slot(n.c)) {
                for (std::size_t j = 0; j < out; ++j) (*gb)[j] += gy[j];
            }
            break;
        }
        case Op::SparseAffineT: {
            const std::size_t out = val(n.a).cols();
            if (Tensor* gw = grad_slot(n.a)) {
                for (std::size_t k = 0; k < n.sparse.index.size(); ++k) {
                    const double xi = n.sparse.value[k];
                    double* gr = gw->data() + std::size_t{n.sparse.index[k]} * out;
                    for (std::size_t j = 0; j < out; ++j) gr[j] += xi * gy[j];
                }
            }
            if (Tensor* gb = grad_slot(n.c)) {
                for (std::size_t j = 0; j < out; ++j) (*gb)[j] += gy[j];
            }
            break;
        }
        case Op::Tanh: {
            if (Tensor* gx = grad_slot(n.a)) {
                for (std::size_t i = 0; i < gy.size(); ++i) {
                    const double y = n.value[i];
                    (*gx)[i] += gy[i] * (1.0 - y * y);
                }
            }
            break;
        }
        case Op::Softmax: {
            if (Tensor* gx = grad_slot(n.a)) {
                double dot = 0.0;
                for (std::size_t i = 0; i < gy.size(); ++i) dot += gy[i] * n.value[i];
                for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += n.value[i] * (gy[i] - dot);
            }
            break;
        }
        case Op::LogSoftmax: {
            if (Tensor* gx = grad_slot(n.a)) {
                double total = 0.0;
                for (std::size_t i = 0; i < gy.size(); ++i) total += gy[i];
                for (std::size_t i = 0; i < gy.size(); ++i) {
                    (*gx)[i] += gy[i] - std::exp(n.value[i]) * total;
                }
            }
            break;
        }
        case Op::Exp: {
            if (Tensor* gx = grad_slot(n.a)) {
                for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i] * n.value[i];
            }
            break;
        }
        case Op::Log: {
            if (Tensor* gx = grad_slot(n.a)) {
                const auto& x = val(n.a);
                for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i] / x[i];
            }
            break;
        }
        case Op::Mul: {
            const auto& a = val(n.a);
            const auto& b = val(n.b);
            if (Tensor* ga = grad_slot(n.a)) {
                for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i] * b[i];
            }
            if (Tensor* gb = grad_slot(n.b)) {
                for (std::size_t i = 0; i < gy.size(); ++i) (*gb)[i] += gy[i] * a[i];
            }
            break;
        }
        case Op::Add:
        case Op::Sub: {
            const double sign = n.op == Op::Add ? 1.0 : -1.0;
            if (Tensor* ga = grad_slot(n.a)) {
                for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i];
            }
            if (Tensor* gb = grad_slot(n.b)) {
                for (std::size_t i = 0; i < gy.size(); ++i) (*gb)[i] += sign * gy[i];
            }
            break;
        }
        case Op::Scale: {
            if (Tensor* gx = grad_slot(n.a)) {
                for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += n.scalar * gy[i];
            }
            break;
        }
        case Op::AddScalar: {
            if (Tensor* gx = grad_slot(n.a)) {
                for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i];
            }
            break;
        }
        case Op::Sum:
        case Op::Mean: {
            if (Tensor* gx = grad_slot(n.a)) {
                const double g =
                    n.op == Op::Sum ? gy[0] : gy[0] / static_cast<double>(gx->size());
                for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += g;
            }
            break;
        }
        case Op::DotConst: {
            if (Tensor* gx = grad_slot(n.a)) {
                for (std::size_t i = 0; i < n.aux.size(); ++i) (*gx)[i] += gy[0] * n.aux[i];
            }
            break;
        }
        case Op::Pick: {
            if (Tensor* gx = grad_slot(n.a)) (*gx)[n.index] += gy[0];
            break;
        }
        case Op::CosineConst: {
            if (Tensor* gx = grad_slot(n.a)) {
                const auto& x = val(n.a);
                const double c = n.value[0];
                const double tn = n.scalar, xn = n.scratch;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    (*gx)[i] += gy[0] * (n.aux[i] / (tn * xn) - c * x[i] / (xn * xn));
                }
            }
            break;
        }
        case Op::LogHalfAngle: {
            if (Tensor* gx = grad_slot(n.a)) (*gx)[0] += gy[0] * n.scratch;
            break;
        }
    }
}

Graph::SimplexAudit Graph::audit_softmax(double tol) const {
    SimplexAudit audit;
    for (std::size_t i = 0; i < size_; ++i) {
        const Node& n = nodes_[i];
        if (n.op != Op::Softmax) continue;
        ++audit.checked;
        double s = 0.0;
        bool positive = true;
        for (double v : n.value.values()) {
            s += v;
            positive = positive && v > 0.0;
        }
        const double err = std::abs(s - 1.0);
        audit.max_sum_error = std::max(audit.max_sum_error, err);
        if (!positive || err > tol) ++audit.violations;
    }
    return audit;
}

}  // namespace jtw
