#include "algan/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace algan {

namespace {

thread_local Graph* g_active_graph = nullptr;

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

std::vector<double>& ensure_grad(const ImplPtr& impl) {
    if (impl->grad.empty()) {
        impl->grad.assign(impl->data.size(), 0.0);
    }
    return impl->grad;
}

ImplPtr make_impl(Shape shape, std::vector<double> data, bool requires_grad) {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return impl;
}

[[noreturn]] void dimension_mismatch(const char* op, const Shape& a, const Shape& b) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) +
                         " and " + shape_str(b));
}

// How a binary elementwise op pairs its operands.
enum class Pairing { equal, a_scalar, b_scalar, row_bias };

Pairing classify_binary(const char* op, const Tensor& a, const Tensor& b, bool allow_row_bias) {
    if (a.shape() == b.shape()) return Pairing::equal;
    if (allow_row_bias && a.rank() == 2 && b.rank() == 1 &&
        a.shape()[1] == b.shape()[0]) {
        return Pairing::row_bias; // checked before scalar so [1x1]+[1] keeps rank 2
    }
    if (a.size() == 1) return Pairing::a_scalar;
    if (b.size() == 1) return Pairing::b_scalar;
    dimension_mismatch(op, a.shape(), b.shape());
}

} // namespace

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

// --- Tensor ---------------------------------------------------------------

Tensor Tensor::zeros(Shape shape) {
    std::size_t n = shape_size(shape);
    return Tensor(make_impl(std::move(shape), std::vector<double>(n, 0.0), false));
}

Tensor Tensor::full(Shape shape, double value) {
    std::size_t n = shape_size(shape);
    return Tensor(make_impl(std::move(shape), std::vector<double>(n, value), false));
}

Tensor Tensor::scalar(double value) {
    return Tensor(make_impl(Shape{}, std::vector<double>{value}, false));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
    if (shape_size(shape) != data.size()) {
        throw DimensionError("from_data: shape " + shape_str(shape) + " expects " +
                             std::to_string(shape_size(shape)) + " values, got " +
                             std::to_string(data.size()));
    }
    return Tensor(make_impl(std::move(shape), std::move(data), false));
}

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::size() const { return impl_->data.size(); }
std::size_t Tensor::rank() const { return impl_->shape.size(); }

std::size_t Tensor::rows() const {
    if (rank() != 2) throw DimensionError("rows(): tensor is not rank-2, shape " + shape_str(shape()));
    return impl_->shape[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw DimensionError("cols(): tensor is not rank-2, shape " + shape_str(shape()));
    return impl_->shape[1];
}

std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::value() const {
    if (size() != 1) {
        throw DimensionError("value(): tensor has " + std::to_string(size()) + " elements");
    }
    return impl_->data[0];
}

double Tensor::at(std::size_t i) const { return impl_->data.at(i); }

double Tensor::at(std::size_t r, std::size_t c) const {
    return impl_->data.at(r * cols() + c);
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool value) {
    impl_->requires_grad = value;
    return *this;
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::span<const double> Tensor::grad() const {
    if (!has_grad()) {
        throw Error("grad(): no gradient accumulated for this tensor");
    }
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (impl_) impl_->grad.assign(impl_->data.size(), 0.0);
}

Tensor Tensor::detach() const {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = impl_->shape;
    impl->data = impl_->data; // copy keeps detached values stable
    impl->requires_grad = false;
    return Tensor(std::move(impl));
}

Tensor Tensor::clone() const {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = impl_->shape;
    impl->data = impl_->data;
    impl->requires_grad = impl_->requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::slice_rows(std::size_t begin, std::size_t count) const {
    std::size_t m = rows(), n = cols();
    if (begin + count > m) {
        throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " +
                             std::to_string(begin + count) + ") out of " + std::to_string(m) + " rows");
    }
    std::vector<double> out(impl_->data.begin() + static_cast<std::ptrdiff_t>(begin * n),
                            impl_->data.begin() + static_cast<std::ptrdiff_t>((begin + count) * n));
    return from_data({count, n}, std::move(out));
}

// --- Graph ------------------------------------------------------------------

void Graph::push(std::function<void()> backward_fn) {
    nodes_.push_back(std::move(backward_fn));
}

void Graph::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw DimensionError("backward: loss must hold exactly one element");
    }
    if (nodes_.empty()) {
        throw ConfigError("backward: graph has no recorded operations");
    }
    if (consumed_) {
        throw ConfigError("backward: graph already replayed");
    }
    consumed_ = true;
    ensure_grad(loss.impl())[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        (*it)();
    }
}

Recording::Recording(Graph& graph) : previous_(g_active_graph) {
    g_active_graph = &graph;
}

Recording::~Recording() { g_active_graph = previous_; }

Graph* active_graph() { return g_active_graph; }

namespace autodiff {

bool tracing(std::initializer_list<const Tensor*> inputs) {
    if (!g_active_graph) return false;
    for (const Tensor* t : inputs) {
        if (t->requires_grad()) return true;
    }
    return false;
}

Tensor make_traced(Shape shape, std::vector<double> data, bool requires_grad) {
    return Tensor(make_impl(std::move(shape), std::move(data), requires_grad));
}

void push_backward(std::function<void()> fn) {
    g_active_graph->push(std::move(fn));
}

std::span<const double> upstream_grad(const Tensor& output) {
    if (!output.has_grad()) return {};
    return output.impl()->grad;
}

void accumulate_grad(const Tensor& input, std::span<const double> values) {
    auto& g = ensure_grad(input.impl());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += values[i];
}

} // namespace autodiff

// --- op helpers --------------------------------------------------------------

namespace {

bool tracing2(const Tensor& a, const Tensor& b) {
    return autodiff::tracing({&a, &b});
}

bool tracing1(const Tensor& a) { return autodiff::tracing({&a}); }

Tensor finish_unary(const Tensor& a, Shape shape, std::vector<double> out,
                    std::function<void(const ImplPtr&, const ImplPtr&)> back) {
    bool traced = tracing1(a);
    Tensor result = autodiff::make_traced(std::move(shape), std::move(out), traced);
    if (traced) {
        ImplPtr ai = a.impl(), oi = result.impl();
        g_active_graph->push([ai, oi, back = std::move(back)]() {
            if (oi->grad.empty() || !ai->requires_grad) return;
            back(ai, oi);
        });
    }
    return result;
}

// Elementwise unary where d(out)/d(in) depends on saved per-element factors.
Tensor pointwise(const Tensor& a, std::vector<double> out, std::vector<double> dfactor) {
    bool traced = tracing1(a);
    Tensor result = autodiff::make_traced(a.shape(), std::move(out), traced);
    if (traced) {
        ImplPtr ai = a.impl(), oi = result.impl();
        g_active_graph->push([ai, oi, df = std::move(dfactor)]() {
            if (oi->grad.empty() || !ai->requires_grad) return;
            auto& ga = ensure_grad(ai);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i] * df[i];
        });
    }
    return result;
}

} // namespace

// --- matmul -------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
        dimension_mismatch("matmul", a.shape(), b.shape());
    }
    std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> out(m * n, 0.0);
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            double aik = ad[i * k + kk];
            const double* brow = bd + kk * n;
            double* orow = out.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }

    bool traced = tracing2(a, b);
    Tensor result = autodiff::make_traced({m, n}, std::move(out), traced);
    if (traced) {
        ImplPtr ai = a.impl(), bi = b.impl(), oi = result.impl();
        g_active_graph->push([ai, bi, oi, m, k, n]() {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (ai->requires_grad) {
                auto& ga = ensure_grad(ai);
                const double* bd = bi->data.data();
                // dL/dA = G * B^T
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        double acc = 0.0;
                        const double* grow = g + i * n;
                        const double* brow = bd + kk * n;
                        for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                        ga[i * k + kk] += acc;
                    }
                }
            }
            if (bi->requires_grad) {
                auto& gb = ensure_grad(bi);
                const double* ad = ai->data.data();
                // dL/dB = A^T * G
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        double aik = ad[i * k + kk];
                        const double* grow = g + i * n;
                        double* gbrow = gb.data() + kk * n;
                        for (std::size_t j = 0; j < n; ++j) gbrow[j] += aik * grow[j];
                    }
                }
            }
        });
    }
    return result;
}

// --- binary elementwise ---------------------------------------------------------

namespace {

// sign: +1 for add, -1 for sub
Tensor add_like(const char* name, const Tensor& a, const Tensor& b, double sign) {
    Pairing pairing = classify_binary(name, a, b, /*allow_row_bias=*/true);
    std::vector<double> out;
    const auto& ad = a.impl()->data;
    const auto& bd = b.impl()->data;
    switch (pairing) {
    case Pairing::equal: {
        out.resize(ad.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + sign * bd[i];
        break;
    }
    case Pairing::a_scalar: {
        out.resize(bd.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[0] + sign * bd[i];
        break;
    }
    case Pairing::b_scalar: {
        out.resize(ad.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + sign * bd[0];
        break;
    }
    case Pairing::row_bias: {
        std::size_t m = a.rows(), n = a.cols();
        out.resize(m * n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] = ad[i * n + j] + sign * bd[j];
        }
        break;
    }
    }
    Shape shape = (pairing == Pairing::a_scalar) ? b.shape() : a.shape();

    bool traced = tracing2(a, b);
    Tensor result = autodiff::make_traced(std::move(shape), std::move(out), traced);
    if (traced) {
        ImplPtr ai = a.impl(), bi = b.impl(), oi = result.impl();
        g_active_graph->push([ai, bi, oi, pairing, sign]() {
            if (oi->grad.empty()) return;
            const auto& g = oi->grad;
            if (ai->requires_grad) {
                auto& ga = ensure_grad(ai);
                if (pairing == Pairing::a_scalar) {
                    for (double gv : g) ga[0] += gv;
                } else {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                }
            }
            if (bi->requires_grad) {
                auto& gb = ensure_grad(bi);
                if (pairing == Pairing::b_scalar) {
                    for (double gv : g) gb[0] += sign * gv;
                } else if (pairing == Pairing::row_bias) {
                    std::size_t n = gb.size();
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i % n] += sign * g[i];
                } else {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign * g[i];
                }
            }
        });
    }
    return result;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_like("add", a, b, +1.0); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_like("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
    Pairing pairing = classify_binary("mul", a, b, /*allow_row_bias=*/false);
    const auto& ad = a.impl()->data;
    const auto& bd = b.impl()->data;
    std::vector<double> out;
    if (pairing == Pairing::equal) {
        out.resize(ad.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
    } else if (pairing == Pairing::a_scalar) {
        out.resize(bd.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[0] * bd[i];
    } else {
        out.resize(ad.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[0];
    }
    Shape shape = (pairing == Pairing::a_scalar) ? b.shape() : a.shape();

    bool traced = tracing2(a, b);
    Tensor result = autodiff::make_traced(std::move(shape), std::move(out), traced);
    if (traced) {
        ImplPtr ai = a.impl(), bi = b.impl(), oi = result.impl();
        g_active_graph->push([ai, bi, oi, pairing]() {
            if (oi->grad.empty()) return;
            const auto& g = oi->grad;
            const auto& ad = ai->data;
            const auto& bd = bi->data;
            if (ai->requires_grad) {
                auto& ga = ensure_grad(ai);
                if (pairing == Pairing::a_scalar) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[0] += g[i] * bd[i];
                } else if (pairing == Pairing::b_scalar) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bd[0];
                } else {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bd[i];
                }
            }
            if (bi->requires_grad) {
                auto& gb = ensure_grad(bi);
                if (pairing == Pairing::b_scalar) {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[0] += g[i] * ad[i];
                } else if (pairing == Pairing::a_scalar) {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ad[0];
                } else {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ad[i];
                }
            }
        });
    }
    return result;
}

Tensor div(const Tensor& a, const Tensor& b) {
    Pairing pairing = classify_binary("div", a, b, /*allow_row_bias=*/false);
    const auto& ad = a.impl()->data;
    const auto& bd = b.impl()->data;
    std::vector<double> out;
    if (pairing == Pairing::equal) {
        out.resize(ad.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] / bd[i];
    } else if (pairing == Pairing::a_scalar) {
        out.resize(bd.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[0] / bd[i];
    } else {
        out.resize(ad.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] / bd[0];
    }
    Shape shape = (pairing == Pairing::a_scalar) ? b.shape() : a.shape();

    bool traced = tracing2(a, b);
    Tensor result = autodiff::make_traced(std::move(shape), std::move(out), traced);
    if (traced) {
        ImplPtr ai = a.impl(), bi = b.impl(), oi = result.impl();
        g_active_graph->push([ai, bi, oi, pairing]() {
            if (oi->grad.empty()) return;
            const auto& g = oi->grad;
            const auto& ad = ai->data;
            const auto& bd = bi->data;
            if (ai->requires_grad) {
                auto& ga = ensure_grad(ai);
                if (pairing == Pairing::a_scalar) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[0] += g[i] / bd[i];
                } else if (pairing == Pairing::b_scalar) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bd[0];
                } else {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bd[i];
                }
            }
            if (bi->requires_grad) {
                auto& gb = ensure_grad(bi);
                if (pairing == Pairing::b_scalar) {
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        gb[0] -= g[i] * ad[i] / (bd[0] * bd[0]);
                    }
                } else if (pairing == Pairing::a_scalar) {
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        gb[i] -= g[i] * ad[0] / (bd[i] * bd[i]);
                    }
                } else {
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        gb[i] -= g[i] * ad[i] / (bd[i] * bd[i]);
                    }
                }
            }
        });
    }
    return result;
}

// --- unary -----------------------------------------------------------------------

Tensor scale(const Tensor& a, double c) {
    const auto& ad = a.impl()->data;
    std::vector<double> out(ad.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * c;
    return finish_unary(a, a.shape(), std::move(out), [c](const ImplPtr& ai, const ImplPtr& oi) {
        auto& ga = ensure_grad(ai);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i] * c;
    });
}

Tensor add_scalar(const Tensor& a, double c) {
    const auto& ad = a.impl()->data;
    std::vector<double> out(ad.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + c;
    return finish_unary(a, a.shape(), std::move(out), [](const ImplPtr& ai, const ImplPtr& oi) {
        auto& ga = ensure_grad(ai);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += oi->grad[i];
    });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor exp(const Tensor& a) {
    const auto& ad = a.impl()->data;
    std::vector<double> out(ad.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(ad[i]);
    std::vector<double> df = out; // d(e^x)/dx = e^x
    return pointwise(a, std::move(out), std::move(df));
}

Tensor log(const Tensor& a) {
    const auto& ad = a.impl()->data;
    std::vector<double> out(ad.size());
    std::vector<double> df(ad.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (ad[i] <= 0.0) {
            throw DomainError("log: non-positive input " + std::to_string(ad[i]) +
                              " at index " + std::to_string(i));
        }
        out[i] = std::log(ad[i]);
        df[i] = 1.0 / ad[i];
    }
    return pointwise(a, std::move(out), std::move(df));
}

Tensor relu(const Tensor& a) {
    const auto& ad = a.impl()->data;
    std::vector<double> out(ad.size());
    std::vector<double> df(ad.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = ad[i] > 0.0 ? ad[i] : 0.0;
        df[i] = ad[i] > 0.0 ? 1.0 : 0.0;
    }
    return pointwise(a, std::move(out), std::move(df));
}

Tensor leaky_relu(const Tensor& a, double slope) {
    const auto& ad = a.impl()->data;
    std::vector<double> out(ad.size());
    std::vector<double> df(ad.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = ad[i] >= 0.0 ? ad[i] : slope * ad[i];
        df[i] = ad[i] >= 0.0 ? 1.0 : slope;
    }
    return pointwise(a, std::move(out), std::move(df));
}

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Tensor sigmoid(const Tensor& a) {
    const auto& ad = a.impl()->data;
    std::vector<double> out(ad.size());
    std::vector<double> df(ad.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = stable_sigmoid(ad[i]);
        out[i] = s;
        df[i] = s * (1.0 - s);
    }
    return pointwise(a, std::move(out), std::move(df));
}

Tensor softplus(const Tensor& a) {
    const auto& ad = a.impl()->data;
    std::vector<double> out(ad.size());
    std::vector<double> df(ad.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x = ad[i];
        out[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
        df[i] = stable_sigmoid(x);
    }
    return pointwise(a, std::move(out), std::move(df));
}

// --- reductions ----------------------------------------------------------------

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.impl()->data) acc += v;
    return finish_unary(a, Shape{}, {acc}, [](const ImplPtr& ai, const ImplPtr& oi) {
        auto& ga = ensure_grad(ai);
        double g = oi->grad[0];
        for (double& v : ga) v += g;
    });
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw DimensionError("mean: empty tensor");
    double acc = 0.0;
    for (double v : a.impl()->data) acc += v;
    double inv = 1.0 / static_cast<double>(a.size());
    return finish_unary(a, Shape{}, {acc * inv}, [inv](const ImplPtr& ai, const ImplPtr& oi) {
        auto& ga = ensure_grad(ai);
        double g = oi->grad[0] * inv;
        for (double& v : ga) v += g;
    });
}

namespace {

Tensor reduce_axis(const Tensor& a, std::size_t axis, bool take_mean) {
    if (axis >= a.rank()) {
        throw DimensionError("reduce: axis " + std::to_string(axis) + " out of range for shape " +
                             shape_str(a.shape()));
    }
    if (a.rank() == 1) {
        return take_mean ? mean(a) : sum(a);
    }
    if (a.rank() != 2) {
        throw DimensionError("reduce: axis reductions support rank 1 or 2, shape " +
                             shape_str(a.shape()));
    }
    std::size_t m = a.rows(), n = a.cols();
    const auto& ad = a.impl()->data;
    std::size_t out_len = axis == 0 ? n : m;
    std::size_t count = axis == 0 ? m : n;
    std::vector<double> out(out_len, 0.0);
    if (axis == 0) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) out[j] += ad[i * n + j];
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) out[i] += ad[i * n + j];
        }
    }
    double inv = take_mean ? 1.0 / static_cast<double>(count) : 1.0;
    if (take_mean) {
        for (double& v : out) v *= inv;
    }
    return finish_unary(a, Shape{out_len}, std::move(out),
                        [axis, m, n, inv](const ImplPtr& ai, const ImplPtr& oi) {
                            auto& ga = ensure_grad(ai);
                            const auto& g = oi->grad;
                            for (std::size_t i = 0; i < m; ++i) {
                                for (std::size_t j = 0; j < n; ++j) {
                                    ga[i * n + j] += inv * (axis == 0 ? g[j] : g[i]);
                                }
                            }
                        });
}

} // namespace

Tensor sum(const Tensor& a, std::size_t axis) { return reduce_axis(a, axis, false); }
Tensor mean(const Tensor& a, std::size_t axis) { return reduce_axis(a, axis, true); }

} // namespace algan
