#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "algan/errors.hpp"

namespace algan {

/// Dimension sizes, outermost first. A rank-0 shape holds one element.
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad; // empty until a gradient is accumulated
    bool requires_grad = false;
};

} // namespace detail

/// Dense row-major tensor of 64-bit floats. Copies share storage; use
/// clone() for an independent copy. Tensors whose requires_grad flag is
/// set accumulate gradients when a Graph replays its tape.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);
    static Tensor from_data(Shape shape, std::vector<double> data);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t size() const;
    std::size_t rank() const;
    /// Rank-2 accessors.
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<const double> data() const;
    std::span<double> mutable_data();
    double value() const; // single-element tensors
    double at(std::size_t i) const;
    double at(std::size_t r, std::size_t c) const;

    bool requires_grad() const;
    Tensor& set_requires_grad(bool value);
    bool has_grad() const;
    std::span<const double> grad() const;
    void zero_grad();

    /// Shares storage but never receives gradient.
    Tensor detach() const;
    /// Independent deep copy (leaf, gradient state not carried over).
    Tensor clone() const;

    /// Extract rows [begin, begin+count) of a rank-2 tensor as a new leaf.
    Tensor slice_rows(std::size_t begin, std::size_t count) const;

    const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<detail::TensorImpl> impl_;
};

/// Reverse-mode tape. Ops executed while a Recording guard is alive append
/// their backward closures here; backward() replays them in reverse append
/// order, accumulating gradients additively. One backward pass per graph.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    std::size_t node_count() const { return nodes_.size(); }
    void push(std::function<void()> backward_fn);
    /// Seeds d(loss)/d(loss) = 1 and replays the tape in reverse.
    void backward(const Tensor& loss);

private:
    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
};

/// Routes op recording onto `graph` for the current thread while alive.
class Recording {
public:
    explicit Recording(Graph& graph);
    ~Recording();
    Recording(const Recording&) = delete;
    Recording& operator=(const Recording&) = delete;

private:
    Graph* previous_;
};

Graph* active_graph();

namespace autodiff {

/// Extension points for fused ops defined outside this module (batch norm).
bool tracing(std::initializer_list<const Tensor*> inputs);
Tensor make_traced(Shape shape, std::vector<double> data, bool requires_grad);
void push_backward(std::function<void()> fn);
/// Upstream gradient of an op output; empty span if the output did not
/// contribute to the loss.
std::span<const double> upstream_grad(const Tensor& output);
void accumulate_grad(const Tensor& input, std::span<const double> values);

} // namespace autodiff

// --- differentiable ops -------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);

/// Binary elementwise ops accept equal shapes or a single-element operand
/// broadcast against the other side. add/sub additionally accept a rank-1
/// [n] bias against a rank-2 [m x n] matrix.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor neg(const Tensor& a);

Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor sigmoid(const Tensor& a);
/// log(1 + e^x), overflow-safe.
Tensor softplus(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum(const Tensor& a, std::size_t axis);
Tensor mean(const Tensor& a, std::size_t axis);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double c) { return scale(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return scale(a, c); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

} // namespace algan
