#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace intragen {

using Shape = std::vector<int>;

inline std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (const int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
    out << ']';
    return out.str();
}

// Dense reverse-mode tape. Nodes are appended in evaluation order, so the
// reverse of creation order is a valid topological order for backprop. The
// scalar type is a template parameter: float for training, double for
// finite-difference gradient checks.
template <typename T>
class Graph {
public:
    struct Node {
        Shape shape;
        std::vector<T> value;
        std::vector<T> grad;
        std::function<void(Graph&, const Node&)> backprop;  // null for leaves
    };

    int input(Shape shape, std::vector<T> values) {
        if (values.size() != numel(shape))
            throw std::invalid_argument("input: value count does not match shape " +
                                        shape_str(shape));
        return push(std::move(shape), std::move(values), nullptr);
    }

    int zeros(Shape shape) { return push(std::move(shape), {}, nullptr); }

    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const Shape& shape(int id) const { return node(id).shape; }
    const std::vector<T>& value(int id) const { return node(id).value; }
    const std::vector<T>& grad(int id) const { return node(id).grad; }
    std::size_t size() const { return nodes_.size(); }

    // ---- ops ----------------------------------------------------------

    // A [..., m, k] x B [k, n] or [..., k, n]; leading dims must match.
    int matmul(int a, int b) {
        const Shape& sa = shape(a);
        const Shape& sb = shape(b);
        if (sa.size() < 2 || sb.size() < 2) fail("matmul", sa, sb);
        const int m = sa[sa.size() - 2], k = sa[sa.size() - 1];
        const int kb = sb[sb.size() - 2], n = sb[sb.size() - 1];
        if (k != kb) fail("matmul", sa, sb);
        const bool shared_rhs = sb.size() == 2;
        if (!shared_rhs) {
            if (sa.size() != sb.size()) fail("matmul", sa, sb);
            for (std::size_t i = 0; i + 2 < sa.size(); ++i)
                if (sa[i] != sb[i]) fail("matmul", sa, sb);
        }
        Shape out_shape(sa.begin(), sa.end() - 1);
        out_shape.push_back(n);
        const std::size_t batches = numel(Shape(sa.begin(), sa.end() - 2));

        std::vector<T> out(numel(out_shape), T(0));
        const T* pa = value(a).data();
        const T* pb = value(b).data();
        for (std::size_t bi = 0; bi < batches; ++bi)
            gemm(pa + bi * static_cast<std::size_t>(m) * k,
                 shared_rhs ? pb : pb + bi * static_cast<std::size_t>(k) * n,
                 out.data() + bi * static_cast<std::size_t>(m) * n, m, k, n);

        return push(std::move(out_shape), std::move(out),
                    [a, b, m, k, n, batches, shared_rhs](Graph& g, const Node& self) {
                        const T* dy = self.grad.data();
                        const T* va = g.value(a).data();
                        const T* vb = g.value(b).data();
                        T* da = g.mutable_grad(a);
                        T* db = g.mutable_grad(b);
                        std::vector<T> bt(static_cast<std::size_t>(n) * k);
                        std::vector<T> at(static_cast<std::size_t>(k) * m);
                        for (std::size_t bi = 0; bi < batches; ++bi) {
                            const T* dyb = dy + bi * static_cast<std::size_t>(m) * n;
                            const T* vab = va + bi * static_cast<std::size_t>(m) * k;
                            const T* vbb = shared_rhs ? vb : vb + bi * static_cast<std::size_t>(k) * n;
                            // dA += dY * B^T
                            transpose2d(vbb, bt.data(), k, n);
                            gemm(dyb, bt.data(), da + bi * static_cast<std::size_t>(m) * k, m, n, k);
                            // dB += A^T * dY
                            transpose2d(vab, at.data(), m, k);
                            gemm(at.data(), dyb,
                                 shared_rhs ? db : db + bi * static_cast<std::size_t>(k) * n, k, m,
                                 n);
                        }
                    });
    }

    // Elementwise add; rhs shape may be a trailing suffix of lhs (broadcast).
    int add(int a, int b) { return binary_broadcast(a, b, /*is_add=*/true); }

    // Elementwise (Hadamard) product with the same broadcast rule.
    int multiply(int a, int b) { return binary_broadcast(a, b, /*is_add=*/false); }

    int scale(int a, double c) {
        std::vector<T> out = value(a);
        for (auto& v : out) v = static_cast<T>(v * c);
        return push(Shape(shape(a)), std::move(out), [a, c](Graph& g, const Node& self) {
            T* da = g.mutable_grad(a);
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                da[i] += static_cast<T>(self.grad[i] * c);
        });
    }

    int reshape(int a, Shape new_shape) {
        if (numel(new_shape) != value(a).size())
            throw std::invalid_argument("reshape: " + shape_str(shape(a)) + " -> " +
                                        shape_str(new_shape) + " changes element count");
        std::vector<T> out = value(a);
        return push(std::move(new_shape), std::move(out), [a](Graph& g, const Node& self) {
            T* da = g.mutable_grad(a);
            for (std::size_t i = 0; i < self.grad.size(); ++i) da[i] += self.grad[i];
        });
    }

    int transpose(int a, std::vector<int> perm) {
        const Shape& sa = shape(a);
        if (perm.size() != sa.size())
            throw std::invalid_argument("transpose: permutation rank mismatch for " +
                                        shape_str(sa));
        Shape out_shape(sa.size());
        for (std::size_t i = 0; i < perm.size(); ++i)
            out_shape[i] = sa[static_cast<std::size_t>(perm[i])];

        std::vector<T> out(value(a).size());
        permute_copy(value(a).data(), out.data(), sa, perm);

        std::vector<int> inverse(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i)
            inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);

        return push(std::move(out_shape), std::move(out),
                    [a, inverse](Graph& g, const Node& self) {
                        std::vector<T> back(self.grad.size());
                        permute_copy(self.grad.data(), back.data(), self.shape, inverse);
                        T* da = g.mutable_grad(a);
                        for (std::size_t i = 0; i < back.size(); ++i) da[i] += back[i];
                    });
    }

    // softmax over the last axis
    int softmax(int a) {
        const Shape& sa = shape(a);
        if (sa.empty()) throw std::invalid_argument("softmax: scalar input");
        const std::size_t cols = static_cast<std::size_t>(sa.back());
        const std::size_t rows = value(a).size() / cols;
        std::vector<T> out(value(a).size());
        const T* x = value(a).data();
        for (std::size_t r = 0; r < rows; ++r) {
            const T* xr = x + r * cols;
            T* yr = out.data() + r * cols;
            T mx = xr[0];
            for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
            T sum = T(0);
            for (std::size_t j = 0; j < cols; ++j) {
                yr[j] = std::exp(xr[j] - mx);
                sum += yr[j];
            }
            for (std::size_t j = 0; j < cols; ++j) yr[j] /= sum;
        }
        return push(Shape(sa), std::move(out), [a, rows, cols](Graph& g, const Node& self) {
            const T* y = self.value.data();
            const T* dy = self.grad.data();
            T* da = g.mutable_grad(a);
            for (std::size_t r = 0; r < rows; ++r) {
                const T* yr = y + r * cols;
                const T* dyr = dy + r * cols;
                T dot = T(0);
                for (std::size_t j = 0; j < cols; ++j) dot += dyr[j] * yr[j];
                T* dar = da + r * cols;
                for (std::size_t j = 0; j < cols; ++j) dar[j] += yr[j] * (dyr[j] - dot);
            }
        });
    }

    // normalization over the last axis, no affine parameters
    int layer_norm(int a, double eps = 1e-5) {
        const Shape& sa = shape(a);
        if (sa.empty()) throw std::invalid_argument("layer_norm: scalar input");
        const std::size_t cols = static_cast<std::size_t>(sa.back());
        const std::size_t rows = value(a).size() / cols;
        std::vector<T> out(value(a).size());
        std::vector<T> inv_std(rows);
        const T* x = value(a).data();
        for (std::size_t r = 0; r < rows; ++r) {
            const T* xr = x + r * cols;
            T mean = T(0);
            for (std::size_t j = 0; j < cols; ++j) mean += xr[j];
            mean /= static_cast<T>(cols);
            T var = T(0);
            for (std::size_t j = 0; j < cols; ++j) {
                const T d = xr[j] - mean;
                var += d * d;
            }
            var /= static_cast<T>(cols);
            const T is = T(1) / std::sqrt(var + static_cast<T>(eps));
            inv_std[r] = is;
            T* yr = out.data() + r * cols;
            for (std::size_t j = 0; j < cols; ++j) yr[j] = (xr[j] - mean) * is;
        }
        return push(Shape(sa), std::move(out),
                    [a, rows, cols, inv_std](Graph& g, const Node& self) {
                        const T* y = self.value.data();
                        const T* dy = self.grad.data();
                        T* da = g.mutable_grad(a);
                        for (std::size_t r = 0; r < rows; ++r) {
                            const T* yr = y + r * cols;
                            const T* dyr = dy + r * cols;
                            T mean_dy = T(0), mean_dy_y = T(0);
                            for (std::size_t j = 0; j < cols; ++j) {
                                mean_dy += dyr[j];
                                mean_dy_y += dyr[j] * yr[j];
                            }
                            mean_dy /= static_cast<T>(cols);
                            mean_dy_y /= static_cast<T>(cols);
                            T* dar = da + r * cols;
                            for (std::size_t j = 0; j < cols; ++j)
                                dar[j] += inv_std[r] * (dyr[j] - mean_dy - yr[j] * mean_dy_y);
                        }
                    });
    }

    int gelu(int a) {
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        constexpr double inv_sqrt2pi = 0.39894228040143267794;
        std::vector<T> out = value(a);
        for (auto& v : out)
            v = static_cast<T>(0.5 * v * (1.0 + std::erf(static_cast<double>(v) * inv_sqrt2)));
        return push(Shape(shape(a)), std::move(out), [a](Graph& g, const Node& self) {
            const T* x = g.value(a).data();
            T* da = g.mutable_grad(a);
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                const double xv = static_cast<double>(x[i]);
                const double cdf = 0.5 * (1.0 + std::erf(xv * inv_sqrt2));
                const double pdf = inv_sqrt2pi * std::exp(-0.5 * xv * xv);
                da[i] += static_cast<T>(self.grad[i] * (cdf + xv * pdf));
            }
        });
    }

    // scalar mean of squared differences
    int mean_square_error(int a, int b) {
        if (shape(a) != shape(b)) fail("mean_square_error", shape(a), shape(b));
        const std::size_t n = value(a).size();
        const T* pa = value(a).data();
        const T* pb = value(b).data();
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
            acc += d * d;
        }
        std::vector<T> out{static_cast<T>(acc / static_cast<double>(n))};
        return push(Shape{}, std::move(out), [a, b, n](Graph& g, const Node& self) {
            const T dy = self.grad[0];
            const T* pa = g.value(a).data();
            const T* pb = g.value(b).data();
            T* da = g.mutable_grad(a);
            T* db = g.mutable_grad(b);
            const T f = static_cast<T>(2.0 / static_cast<double>(n)) * dy;
            for (std::size_t i = 0; i < n; ++i) {
                const T d = (pa[i] - pb[i]) * f;
                da[i] += d;
                db[i] -= d;
            }
        });
    }

    // ---- backward -------------------------------------------------------

    void backward(int loss) {
        if (numel(shape(loss)) != 1)
            throw std::invalid_argument("backward: loss must be scalar, got " +
                                        shape_str(shape(loss)));
        if (backward_done_)
            throw std::logic_error("backward: gradients not zeroed since previous pass");
        backward_done_ = true;
        nodes_[static_cast<std::size_t>(loss)].grad.assign(1, T(1));
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            Node& n = nodes_[i];
            if (n.backprop && !n.grad.empty()) n.backprop(*this, n);
        }
    }

    void zero_grad() {
        for (auto& n : nodes_) n.grad.assign(n.grad.size(), T(0));
        backward_done_ = false;
    }

    T* mutable_grad(int id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
        return n.grad.data();
    }

private:
    std::vector<Node> nodes_;
    bool backward_done_ = false;

    int push(Shape shape, std::vector<T> values,
             std::function<void(Graph&, const Node&)> backprop) {
        Node n;
        if (values.empty()) values.assign(numel(shape), T(0));
        n.shape = std::move(shape);
        n.value = std::move(values);
        n.grad.assign(n.value.size(), T(0));
        n.backprop = std::move(backprop);
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    [[noreturn]] static void fail(const char* op, const Shape& a, const Shape& b) {
        throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a) +
                                    " and " + shape_str(b));
    }

    int binary_broadcast(int a, int b, bool is_add) {
        const Shape& sa = shape(a);
        const Shape& sb = shape(b);
        const char* name = is_add ? "add" : "multiply";
        if (sb.size() > sa.size()) fail(name, sa, sb);
        for (std::size_t i = 0; i < sb.size(); ++i)
            if (sb[sb.size() - 1 - i] != sa[sa.size() - 1 - i]) fail(name, sa, sb);
        const std::size_t span = numel(sb);
        const std::size_t repeats = value(a).size() / std::max<std::size_t>(1, span);

        std::vector<T> out(value(a).size());
        const T* pa = value(a).data();
        const T* pb = value(b).data();
        if (is_add) {
            for (std::size_t r = 0; r < repeats; ++r)
                for (std::size_t i = 0; i < span; ++i)
                    out[r * span + i] = pa[r * span + i] + pb[i];
        } else {
            for (std::size_t r = 0; r < repeats; ++r)
                for (std::size_t i = 0; i < span; ++i)
                    out[r * span + i] = pa[r * span + i] * pb[i];
        }
        return push(Shape(sa), std::move(out),
                    [a, b, span, repeats, is_add](Graph& g, const Node& self) {
                        const T* dy = self.grad.data();
                        T* da = g.mutable_grad(a);
                        T* db = g.mutable_grad(b);
                        if (is_add) {
                            for (std::size_t r = 0; r < repeats; ++r)
                                for (std::size_t i = 0; i < span; ++i) {
                                    da[r * span + i] += dy[r * span + i];
                                    db[i] += dy[r * span + i];
                                }
                        } else {
                            const T* pa = g.value(a).data();
                            const T* pb = g.value(b).data();
                            for (std::size_t r = 0; r < repeats; ++r)
                                for (std::size_t i = 0; i < span; ++i) {
                                    da[r * span + i] += dy[r * span + i] * pb[i];
                                    db[i] += dy[r * span + i] * pa[r * span + i];
                                }
                        }
                    });
    }

    // C += A * B, row-major
    static void gemm(const T* a, const T* b, T* c, int m, int k, int n) {
        for (int i = 0; i < m; ++i) {
            const T* arow = a + static_cast<std::size_t>(i) * k;
            T* crow = c + static_cast<std::size_t>(i) * n;
            for (int p = 0; p < k; ++p) {
                const T av = arow[p];
                const T* brow = b + static_cast<std::size_t>(p) * n;
                for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    }

    static void transpose2d(const T* src, T* dst, int rows, int cols) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                dst[static_cast<std::size_t>(j) * rows + i] =
                    src[static_cast<std::size_t>(i) * cols + j];
    }

    static void permute_copy(const T* src, T* dst, const Shape& src_shape,
                             const std::vector<int>& perm) {
        const std::size_t rank = src_shape.size();
        if (rank == 0) {
            dst[0] = src[0];
            return;
        }
        std::vector<std::size_t> src_strides(rank, 1);
        for (std::size_t i = rank; i-- > 1;)
            src_strides[i - 1] = src_strides[i] * static_cast<std::size_t>(src_shape[i]);
        Shape dst_shape(rank);
        for (std::size_t i = 0; i < rank; ++i)
            dst_shape[i] = src_shape[static_cast<std::size_t>(perm[i])];
        std::vector<std::size_t> dst_index(rank, 0);
        const std::size_t total = numel(src_shape);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t src_offset = 0;
            for (std::size_t i = 0; i < rank; ++i)
                src_offset += dst_index[i] * src_strides[static_cast<std::size_t>(perm[i])];
            dst[flat] = src[src_offset];
            for (std::size_t i = rank; i-- > 0;) {
                if (++dst_index[i] < static_cast<std::size_t>(dst_shape[i])) break;
                dst_index[i] = 0;
            }
        }
    }
};

}  // namespace intragen
