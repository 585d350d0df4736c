// Differentiable tensor operations. Each op validates shapes, computes the
// forward result, and records a backward closure on the innermost active
// Graph when any input participates in differentiation.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "tfgan/kernels.hpp"
#include "tfgan/tensor.hpp"

namespace tfgan {

enum class PadMode { kZero, kReflect };

namespace detail {

// Registers `out` on the active graph when any input is differentiable.
// `make` receives the parent node ids and returns the backward closure.
template <typename S, typename Make>
void maybe_record(Tensor<S>& out, std::initializer_list<const Tensor<S>*> inputs, Make make) {
  Graph<S>* g = Graph<S>::current();
  if (!g) return;
  std::vector<int> pid;
  pid.reserve(inputs.size());
  bool any = false;
  for (const Tensor<S>* t : inputs) {
    const int id = g->input_node(*t);
    pid.push_back(id);
    any = any || id >= 0;
  }
  if (!any) return;
  auto fn = make(pid);
  out.bind_node(g, g->emit(pid, out.numel(), std::move(fn)));
}

template <typename S, typename Fwd, typename Dfdx>
Tensor<S> unary_op(const Tensor<S>& a, Fwd fwd, Dfdx dfdx) {
  Tensor<S> out = Tensor<S>::zeros(a.shape());
  const S* ad = a.data().data();
  S* od = out.mutable_data().data();
  const int64_t n = a.numel();
#pragma omp parallel for schedule(static) if (n >= kernels::kLightGrain)
  for (int64_t i = 0; i < n; ++i) od[i] = fwd(ad[i]);
  maybe_record(out, {&a}, [&](const std::vector<int>& pid) {
    return [pid, ax = a.data_ptr(), yx = out.data_ptr(), dfdx](Graph<S>& g,
                                                               const std::vector<S>& go) {
      auto& ga = g.grad_buf(pid[0]);
      const S* av = ax->data();
      const S* yv = yx->data();
      const int64_t m = static_cast<int64_t>(go.size());
#pragma omp parallel for schedule(static) if (m >= kernels::kLightGrain)
      for (int64_t i = 0; i < m; ++i) ga[i] += go[i] * dfdx(av[i], yv[i]);
    };
  });
  return out;
}

// Binary elementwise with scalar broadcast: shapes must match, or one
// operand must have a single element.
template <typename S, typename Fwd, typename Dfda, typename Dfdb>
Tensor<S> binary_op(const char* name, const Tensor<S>& a, const Tensor<S>& b, Fwd fwd,
                    Dfda dfda, Dfdb dfdb) {
  const bool a_scalar = a.numel() == 1, b_scalar = b.numel() == 1;
  check(a.shape() == b.shape() || a_scalar || b_scalar,
        std::string(name) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
            shape_str(b.shape()));
  const Shape& out_shape = a_scalar && !b_scalar ? b.shape() : a.shape();
  Tensor<S> out = Tensor<S>::zeros(out_shape);
  const S* ad = a.data().data();
  const S* bd = b.data().data();
  S* od = out.mutable_data().data();
  const int64_t n = out.numel();
  const int64_t sa = a_scalar ? 0 : 1, sb = b_scalar ? 0 : 1;
#pragma omp parallel for schedule(static) if (n >= kernels::kLightGrain)
  for (int64_t i = 0; i < n; ++i) od[i] = fwd(ad[i * sa], bd[i * sb]);
  maybe_record(out, {&a, &b}, [&](const std::vector<int>& pid) {
    return [pid, ax = a.data_ptr(), bx = b.data_ptr(), sa, sb, n, dfda,
            dfdb](Graph<S>& g, const std::vector<S>& go) {
      const S* av = ax->data();
      const S* bv = bx->data();
      if (pid[0] >= 0) {
        auto& ga = g.grad_buf(pid[0]);
        if (sa == 0) {
          S acc = S(0);
          for (int64_t i = 0; i < n; ++i) acc += go[i] * dfda(av[0], bv[i * sb]);
          ga[0] += acc;
        } else {
#pragma omp parallel for schedule(static) if (n >= kernels::kLightGrain)
          for (int64_t i = 0; i < n; ++i) ga[i] += go[i] * dfda(av[i], bv[i * sb]);
        }
      }
      if (pid[1] >= 0) {
        auto& gb = g.grad_buf(pid[1]);
        if (sb == 0) {
          S acc = S(0);
          for (int64_t i = 0; i < n; ++i) acc += go[i] * dfdb(av[i * sa], bv[0]);
          gb[0] += acc;
        } else {
#pragma omp parallel for schedule(static) if (n >= kernels::kLightGrain)
          for (int64_t i = 0; i < n; ++i) gb[i] += go[i] * dfdb(av[i * sa], bv[i]);
        }
      }
    };
  });
  return out;
}

inline std::vector<int64_t> row_major_strides(const Shape& s) {
  std::vector<int64_t> st(s.size(), 1);
  for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i) st[i] = st[i + 1] * s[i + 1];
  return st;
}

}  // namespace detail

// --- elementwise -----------------------------------------------------------

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  return detail::binary_op(
      "add", a, b, [](S x, S y) { return x + y; }, [](S, S) { return S(1); },
      [](S, S) { return S(1); });
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  return detail::binary_op(
      "sub", a, b, [](S x, S y) { return x - y; }, [](S, S) { return S(1); },
      [](S, S) { return S(-1); });
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  return detail::binary_op(
      "mul", a, b, [](S x, S y) { return x * y; }, [](S, S y) { return y; },
      [](S x, S) { return x; });
}

template <typename S>
Tensor<S> div(const Tensor<S>& a, const Tensor<S>& b) {
  return detail::binary_op(
      "div", a, b, [](S x, S y) { return x / y; }, [](S, S y) { return S(1) / y; },
      [](S x, S y) { return -x / (y * y); });
}

template <typename S>
Tensor<S> add(const Tensor<S>& a, S c) { return add(a, Tensor<S>::scalar(c)); }
template <typename S>
Tensor<S> sub(const Tensor<S>& a, S c) { return sub(a, Tensor<S>::scalar(c)); }
template <typename S>
Tensor<S> sub(S c, const Tensor<S>& a) { return sub(Tensor<S>::scalar(c), a); }
template <typename S>
Tensor<S> mul(const Tensor<S>& a, S c) { return mul(a, Tensor<S>::scalar(c)); }

template <typename S>
Tensor<S> neg(const Tensor<S>& a) {
  return detail::unary_op(a, [](S x) { return -x; }, [](S, S) { return S(-1); });
}

// Gradient at exactly 0 is defined as 0 (valid subgradient, deterministic).
template <typename S>
Tensor<S> abs(const Tensor<S>& a) {
  return detail::unary_op(
      a, [](S x) { return std::abs(x); },
      [](S x, S) { return x > S(0) ? S(1) : (x < S(0) ? S(-1) : S(0)); });
}

template <typename S>
Tensor<S> tanh(const Tensor<S>& a) {
  return detail::unary_op(a, [](S x) { return std::tanh(x); },
                          [](S, S y) { return S(1) - y * y; });
}

template <typename S>
Tensor<S> sin(const Tensor<S>& a) {
  return detail::unary_op(a, [](S x) { return std::sin(x); },
                          [](S x, S) { return std::cos(x); });
}

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
  return detail::unary_op(a, [](S x) { return x > S(0) ? x : S(0); },
                          [](S x, S) { return x > S(0) ? S(1) : S(0); });
}

template <typename S>
Tensor<S> leaky_relu(const Tensor<S>& a, S slope = S(0.2)) {
  return detail::unary_op(a, [slope](S x) { return x > S(0) ? x : slope * x; },
                          [slope](S x, S) { return x > S(0) ? S(1) : slope; });
}

template <typename S>
Tensor<S> square(const Tensor<S>& a) {
  return detail::unary_op(a, [](S x) { return x * x; }, [](S x, S) { return S(2) * x; });
}

template <typename S>
Tensor<S> log(const Tensor<S>& a) {
  const auto d = a.data();
  for (size_t i = 0; i < d.size(); ++i)
    check(d[i] > S(0), "log: non-positive input at index " + std::to_string(i) + " (value " +
                           std::to_string(static_cast<double>(d[i])) + ")");
  return detail::unary_op(a, [](S x) { return std::log(x); }, [](S x, S) { return S(1) / x; });
}

// --- reductions -------------------------------------------------------------

namespace detail {

enum class ReduceKind { kSum, kMean, kL1, kFrobenius };

template <typename S>
Tensor<S> reduce_op(const char* name, ReduceKind kind, const Tensor<S>& a,
                    const std::optional<std::vector<int64_t>>& axes_opt) {
  const Shape& in_shape = a.shape();
  const int64_t rank = static_cast<int64_t>(in_shape.size());
  std::vector<int64_t> axes;
  if (axes_opt) {
    axes = *axes_opt;
    std::sort(axes.begin(), axes.end());
    for (size_t i = 0; i < axes.size(); ++i) {
      check(axes[i] >= 0 && axes[i] < rank, std::string(name) + ": invalid axis " +
                                                std::to_string(axes[i]) + " for shape " +
                                                shape_str(in_shape));
      check(i == 0 || axes[i] != axes[i - 1], std::string(name) + ": duplicate axis");
    }
  } else {
    axes.resize(static_cast<size_t>(rank));
    for (int64_t i = 0; i < rank; ++i) axes[static_cast<size_t>(i)] = i;
  }

  const auto strides = row_major_strides(in_shape);
  Shape out_shape;
  std::vector<int64_t> kept_dims, kept_strides, red_dims, red_strides;
  for (int64_t i = 0; i < rank; ++i) {
    if (std::binary_search(axes.begin(), axes.end(), i)) {
      red_dims.push_back(in_shape[static_cast<size_t>(i)]);
      red_strides.push_back(strides[static_cast<size_t>(i)]);
    } else {
      out_shape.push_back(in_shape[static_cast<size_t>(i)]);
      kept_dims.push_back(in_shape[static_cast<size_t>(i)]);
      kept_strides.push_back(strides[static_cast<size_t>(i)]);
    }
  }
  int64_t n_red = 1;
  for (int64_t d : red_dims) n_red *= d;
  check(n_red > 0 && a.numel() > 0, std::string(name) + ": reduction over empty tensor");

  const auto base_of = [kept_dims, kept_strides](int64_t out_idx) {
    int64_t base = 0;
    for (int i = static_cast<int>(kept_dims.size()) - 1; i >= 0; --i) {
      base += (out_idx % kept_dims[static_cast<size_t>(i)]) * kept_strides[static_cast<size_t>(i)];
      out_idx /= kept_dims[static_cast<size_t>(i)];
    }
    return base;
  };
  const auto red_off_of = [red_dims, red_strides](int64_t red_idx) {
    int64_t off = 0;
    for (int i = static_cast<int>(red_dims.size()) - 1; i >= 0; --i) {
      off += (red_idx % red_dims[static_cast<size_t>(i)]) * red_strides[static_cast<size_t>(i)];
      red_idx /= red_dims[static_cast<size_t>(i)];
    }
    return off;
  };

  Tensor<S> out = Tensor<S>::zeros(out_shape);
  const S* ad = a.data().data();
  S* od = out.mutable_data().data();
  const int64_t n_out = out.numel();
#pragma omp parallel for schedule(static) if (n_out >= 64 && n_out * n_red >= kernels::kLightGrain)
  for (int64_t o = 0; o < n_out; ++o) {
    const int64_t base = base_of(o);
    S acc = S(0);
    for (int64_t r = 0; r < n_red; ++r) {
      const S v = ad[base + red_off_of(r)];
      switch (kind) {
        case ReduceKind::kSum: acc += v; break;
        case ReduceKind::kMean: acc += v; break;
        case ReduceKind::kL1: acc += std::abs(v); break;
        case ReduceKind::kFrobenius: acc += v * v; break;
      }
    }
    if (kind == ReduceKind::kMean) acc /= static_cast<S>(n_red);
    if (kind == ReduceKind::kFrobenius) acc = std::sqrt(acc);
    od[o] = acc;
  }

  maybe_record(out, {&a}, [&](const std::vector<int>& pid) {
    return [pid, ax = a.data_ptr(), yx = out.data_ptr(), kind, n_out, n_red, base_of,
            red_off_of](Graph<S>& g, const std::vector<S>& go) {
      auto& ga = g.grad_buf(pid[0]);
      const S* av = ax->data();
      const S* yv = yx->data();
#pragma omp parallel for schedule(static) if (n_out >= 64)
      for (int64_t o = 0; o < n_out; ++o) {
        const int64_t base = base_of(o);
        const S gup = go[static_cast<size_t>(o)];
        for (int64_t r = 0; r < n_red; ++r) {
          const int64_t idx = base + red_off_of(r);
          S d = S(0);
          switch (kind) {
            case ReduceKind::kSum: d = S(1); break;
            case ReduceKind::kMean: d = S(1) / static_cast<S>(n_red); break;
            case ReduceKind::kL1:
              d = av[idx] > S(0) ? S(1) : (av[idx] < S(0) ? S(-1) : S(0));
              break;
            case ReduceKind::kFrobenius:
              d = yv[o] > S(0) ? av[idx] / yv[o] : S(0);
              break;
          }
          ga[static_cast<size_t>(idx)] += gup * d;
        }
      }
    };
  });
  return out;
}

}  // namespace detail

template <typename S>
Tensor<S> sum(const Tensor<S>& a, const std::optional<std::vector<int64_t>>& axes = std::nullopt) {
  return detail::reduce_op("sum", detail::ReduceKind::kSum, a, axes);
}
template <typename S>
Tensor<S> mean(const Tensor<S>& a, const std::optional<std::vector<int64_t>>& axes = std::nullopt) {
  return detail::reduce_op("mean", detail::ReduceKind::kMean, a, axes);
}
template <typename S>
Tensor<S> l1_norm(const Tensor<S>& a,
                  const std::optional<std::vector<int64_t>>& axes = std::nullopt) {
  return detail::reduce_op("l1_norm", detail::ReduceKind::kL1, a, axes);
}
template <typename S>
Tensor<S> frobenius_norm(const Tensor<S>& a,
                         const std::optional<std::vector<int64_t>>& axes = std::nullopt) {
  return detail::reduce_op("frobenius_norm", detail::ReduceKind::kFrobenius, a, axes);
}

// --- convolutions -----------------------------------------------------------

template <typename S>
Tensor<S> conv1d(const Tensor<S>& x, const Tensor<S>& w,
                 const std::optional<Tensor<S>>& bias = std::nullopt, int64_t stride = 1,
                 int64_t dilation = 1, int64_t padding = 0, int64_t groups = 1) {
  check(x.rank() == 3, "conv1d: input must be [B,Cin,T], got " + shape_str(x.shape()));
  check(w.rank() == 3, "conv1d: weight must be [Cout,Cin/groups,K], got " + shape_str(w.shape()));
  check(stride >= 1 && dilation >= 1 && padding >= 0 && groups >= 1,
        "conv1d: stride/dilation must be >= 1, padding >= 0");
  const int64_t B = x.dim(0), Ci = x.dim(1), T = x.dim(2);
  const int64_t Co = w.dim(0), K = w.dim(2);
  check(K >= 1, "conv1d: kernel size must be >= 1");
  check(Ci % groups == 0 && Co % groups == 0,
        "conv1d: channels not divisible by groups=" + std::to_string(groups));
  check(w.dim(1) == Ci / groups, "conv1d: weight expects " + std::to_string(w.dim(1) * groups) +
                                     " input channels, input has " + std::to_string(Ci));
  if (bias) check(bias->rank() == 1 && bias->dim(0) == Co, "conv1d: bias must be [Cout]");
  const int64_t To = kernels::conv_out_len(T, K, stride, dilation, padding);
  check(To >= 1, "conv1d: output length would be < 1 (T=" + std::to_string(T) +
                     ", K=" + std::to_string(K) + ", stride=" + std::to_string(stride) +
                     ", dilation=" + std::to_string(dilation) +
                     ", padding=" + std::to_string(padding) + ")");

  Tensor<S> out = Tensor<S>::zeros({B, Co, To});
  kernels::conv1d_forward(x.data().data(), w.data().data(),
                          bias ? bias->data().data() : nullptr, out.mutable_data().data(), B, Ci,
                          T, Co, K, To, stride, dilation, padding, groups);

  const auto make = [&](const std::vector<int>& pid) {
    return [pid, xx = x.data_ptr(), wx = w.data_ptr(), B, Ci, T, Co, K, To, stride, dilation,
            padding, groups](Graph<S>& g, const std::vector<S>& go) {
      if (pid[0] >= 0)
        kernels::conv1d_backward_x(go.data(), wx->data(), g.grad_buf(pid[0]).data(), B, Ci, T,
                                   Co, K, To, stride, dilation, padding, groups);
      if (pid[1] >= 0)
        kernels::conv1d_backward_w(go.data(), xx->data(), g.grad_buf(pid[1]).data(), B, Ci, T,
                                   Co, K, To, stride, dilation, padding, groups);
      if (pid.size() > 2 && pid[2] >= 0)
        kernels::conv1d_backward_bias(go.data(), g.grad_buf(pid[2]).data(), B, Co, To);
    };
  };
  if (bias) detail::maybe_record(out, {&x, &w, &*bias}, make);
  else detail::maybe_record(out, {&x, &w}, make);
  return out;
}

template <typename S>
Tensor<S> conv_transpose1d(const Tensor<S>& x, const Tensor<S>& w,
                           const std::optional<Tensor<S>>& bias = std::nullopt,
                           int64_t stride = 1) {
  check(x.rank() == 3, "conv_transpose1d: input must be [B,Cin,T], got " + shape_str(x.shape()));
  check(w.rank() == 3,
        "conv_transpose1d: weight must be [Cin,Cout,K], got " + shape_str(w.shape()));
  const int64_t B = x.dim(0), Ci = x.dim(1), T = x.dim(2);
  const int64_t Co = w.dim(1), K = w.dim(2);
  check(w.dim(0) == Ci, "conv_transpose1d: weight expects " + std::to_string(w.dim(0)) +
                            " input channels, input has " + std::to_string(Ci));
  check(stride >= 1 && K >= stride,
        "conv_transpose1d: requires K >= stride >= 1, got K=" + std::to_string(K) +
            " stride=" + std::to_string(stride));
  if (bias) check(bias->rank() == 1 && bias->dim(0) == Co, "conv_transpose1d: bias must be [Cout]");
  const int64_t To = (T - 1) * stride + K;

  Tensor<S> out = Tensor<S>::zeros({B, Co, To});
  kernels::conv_transpose1d_forward(x.data().data(), w.data().data(),
                                    bias ? bias->data().data() : nullptr,
                                    out.mutable_data().data(), B, Ci, T, Co, K, To, stride);

  const auto make = [&](const std::vector<int>& pid) {
    return [pid, xx = x.data_ptr(), wx = w.data_ptr(), B, Ci, T, Co, K, To,
            stride](Graph<S>& g, const std::vector<S>& go) {
      if (pid[0] >= 0)
        kernels::conv_transpose1d_backward_x(go.data(), wx->data(), g.grad_buf(pid[0]).data(), B,
                                             Ci, T, Co, K, To, stride);
      if (pid[1] >= 0)
        kernels::conv_transpose1d_backward_w(go.data(), xx->data(), g.grad_buf(pid[1]).data(), B,
                                             Ci, T, Co, K, To, stride);
      if (pid.size() > 2 && pid[2] >= 0)
        kernels::conv1d_backward_bias(go.data(), g.grad_buf(pid[2]).data(), B, Co, To);
    };
  };
  if (bias) detail::maybe_record(out, {&x, &w, &*bias}, make);
  else detail::maybe_record(out, {&x, &w}, make);
  return out;
}

template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w,
                 const std::optional<Tensor<S>>& bias = std::nullopt, int64_t stride_h = 1,
                 int64_t stride_w = 1, int64_t pad_h = 0, int64_t pad_w = 0) {
  check(x.rank() == 4, "conv2d: input must be [B,Cin,H,W], got " + shape_str(x.shape()));
  check(w.rank() == 4, "conv2d: weight must be [Cout,Cin,Kh,Kw], got " + shape_str(w.shape()));
  const int64_t B = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t Co = w.dim(0), Kh = w.dim(2), Kw = w.dim(3);
  check(w.dim(1) == Ci, "conv2d: channel mismatch, weight expects " + std::to_string(w.dim(1)) +
                            ", input has " + std::to_string(Ci));
  check(stride_h >= 1 && stride_w >= 1 && pad_h >= 0 && pad_w >= 0, "conv2d: bad stride/pad");
  const int64_t Ho = (H + 2 * pad_h - Kh) / stride_h + 1;
  const int64_t Wo = (W + 2 * pad_w - Kw) / stride_w + 1;
  check(Ho >= 1 && Wo >= 1 && H + 2 * pad_h >= Kh && W + 2 * pad_w >= Kw,
        "conv2d: output size would be < 1 for input " + shape_str(x.shape()));
  if (bias) check(bias->rank() == 1 && bias->dim(0) == Co, "conv2d: bias must be [Cout]");

  Tensor<S> out = Tensor<S>::zeros({B, Co, Ho, Wo});
  kernels::conv2d_forward(x.data().data(), w.data().data(),
                          bias ? bias->data().data() : nullptr, out.mutable_data().data(), B, Ci,
                          H, W, Co, Kh, Kw, Ho, Wo, stride_h, stride_w, pad_h, pad_w);

  const auto make = [&](const std::vector<int>& pid) {
    return [pid, xx = x.data_ptr(), wx = w.data_ptr(), B, Ci, H, W, Co, Kh, Kw, Ho, Wo, stride_h,
            stride_w, pad_h, pad_w](Graph<S>& g, const std::vector<S>& go) {
      if (pid[0] >= 0)
        kernels::conv2d_backward_x(go.data(), wx->data(), g.grad_buf(pid[0]).data(), B, Ci, H, W,
                                   Co, Kh, Kw, Ho, Wo, stride_h, stride_w, pad_h, pad_w);
      if (pid[1] >= 0)
        kernels::conv2d_backward_w(go.data(), xx->data(), g.grad_buf(pid[1]).data(), B, Ci, H, W,
                                   Co, Kh, Kw, Ho, Wo, stride_h, stride_w, pad_h, pad_w);
      if (pid.size() > 2 && pid[2] >= 0)
        kernels::conv1d_backward_bias(go.data(), g.grad_buf(pid[2]).data(), B, Co, Ho * Wo);
    };
  };
  if (bias) detail::maybe_record(out, {&x, &w, &*bias}, make);
  else detail::maybe_record(out, {&x, &w}, make);
  return out;
}

// --- structural -------------------------------------------------------------

template <typename S>
Tensor<S> repeat_interleave(const Tensor<S>& x, int64_t factor) {
  check(x.rank() >= 1, "repeat_interleave: tensor must have at least 1 axis");
  check(factor >= 1, "repeat_interleave: factor must be >= 1");
  const int64_t T = x.shape().back();
  const int64_t N = x.numel() / T;
  Shape out_shape = x.shape();
  out_shape.back() = T * factor;
  Tensor<S> out = Tensor<S>::zeros(out_shape);
  kernels::repeat_interleave_forward(x.data().data(), out.mutable_data().data(), N, T, factor);
  detail::maybe_record(out, {&x}, [&](const std::vector<int>& pid) {
    return [pid, N, T, factor](Graph<S>& g, const std::vector<S>& go) {
      kernels::repeat_interleave_backward(go.data(), g.grad_buf(pid[0]).data(), N, T, factor);
    };
  });
  return out;
}

template <typename S>
Tensor<S> avg_pool1d(const Tensor<S>& x, int64_t k, int64_t stride) {
  check(x.rank() >= 1, "avg_pool1d: tensor must have at least 1 axis");
  check(k >= 1 && stride >= 1, "avg_pool1d: k and stride must be >= 1");
  const int64_t T = x.shape().back();
  check(T >= k, "avg_pool1d: window " + std::to_string(k) + " longer than axis " +
                    std::to_string(T));
  const int64_t To = (T - k) / stride + 1;
  const int64_t N = x.numel() / T;
  Shape out_shape = x.shape();
  out_shape.back() = To;
  Tensor<S> out = Tensor<S>::zeros(out_shape);
  kernels::avg_pool1d_forward(x.data().data(), out.mutable_data().data(), N, T, k, stride, To);
  detail::maybe_record(out, {&x}, [&](const std::vector<int>& pid) {
    return [pid, N, T, k, stride, To](Graph<S>& g, const std::vector<S>& go) {
      kernels::avg_pool1d_backward(go.data(), g.grad_buf(pid[0]).data(), N, T, k, stride, To);
    };
  });
  return out;
}

namespace detail {

// Shared pad implementation; `tiled_mirror` permits multi-bounce reflection
// for padding that exceeds the signal (used by model same-padding).
template <typename S>
Tensor<S> pad1d_impl(const Tensor<S>& x, int64_t left, int64_t right, PadMode mode,
                     bool tiled_mirror) {
  check(x.rank() >= 1, "pad1d: tensor must have at least 1 axis");
  check(left >= 0 && right >= 0, "pad1d: negative padding");
  const int64_t T = x.shape().back();
  check(T >= 1, "pad1d: empty axis");
  if (mode == PadMode::kReflect && !tiled_mirror)
    check(left <= T - 1 && right <= T - 1,
          "pad1d: reflect padding (" + std::to_string(std::max(left, right)) +
              ") requires signal length > padding, got length " + std::to_string(T));
  const int64_t N = x.numel() / T;
  Shape out_shape = x.shape();
  out_shape.back() = T + left + right;
  Tensor<S> out = Tensor<S>::zeros(out_shape);
  const bool mirror = mode == PadMode::kReflect;
  kernels::pad1d_forward(x.data().data(), out.mutable_data().data(), N, T, left, right, mirror);
  maybe_record(out, {&x}, [&](const std::vector<int>& pid) {
    return [pid, N, T, left, right, mirror](Graph<S>& g, const std::vector<S>& go) {
      kernels::pad1d_backward(go.data(), g.grad_buf(pid[0]).data(), N, T, left, right, mirror);
    };
  });
  return out;
}

}  // namespace detail

template <typename S>
Tensor<S> pad1d(const Tensor<S>& x, int64_t left, int64_t right, PadMode mode) {
  return detail::pad1d_impl(x, left, right, mode, /*tiled_mirror=*/false);
}

template <typename S>
Tensor<S> reshape(const Tensor<S>& x, Shape new_shape) {
  check(numel_of(new_shape) == x.numel(), "reshape: cannot reshape " + shape_str(x.shape()) +
                                              " to " + shape_str(new_shape));
  Tensor<S> out = Tensor<S>::from(std::move(new_shape),
                                  std::vector<S>(x.data().begin(), x.data().end()));
  detail::maybe_record(out, {&x}, [&](const std::vector<int>& pid) {
    return [pid](Graph<S>& g, const std::vector<S>& go) {
      auto& ga = g.grad_buf(pid[0]);
      for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    };
  });
  return out;
}

template <typename S>
Tensor<S> slice(const Tensor<S>& x, int64_t axis, int64_t start, int64_t stop) {
  const int64_t rank = static_cast<int64_t>(x.rank());
  check(axis >= 0 && axis < rank, "slice: invalid axis " + std::to_string(axis));
  const int64_t D = x.dim(static_cast<size_t>(axis));
  check(0 <= start && start < stop && stop <= D,
        "slice: invalid range [" + std::to_string(start) + "," + std::to_string(stop) +
            ") for axis of size " + std::to_string(D));
  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= x.dim(static_cast<size_t>(i));
  for (int64_t i = axis + 1; i < rank; ++i) inner *= x.dim(static_cast<size_t>(i));
  const int64_t Dn = stop - start;
  Shape out_shape = x.shape();
  out_shape[static_cast<size_t>(axis)] = Dn;
  Tensor<S> out = Tensor<S>::zeros(out_shape);
  const S* xd = x.data().data();
  S* od = out.mutable_data().data();
  const int64_t total = outer * Dn * inner;
#pragma omp parallel for schedule(static) if (total >= kernels::kLightGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t in = idx % inner, j = (idx / inner) % Dn, o = idx / (inner * Dn);
    od[idx] = xd[(o * D + start + j) * inner + in];
  }
  detail::maybe_record(out, {&x}, [&](const std::vector<int>& pid) {
    return [pid, outer, inner, D, Dn, start, total](Graph<S>& g, const std::vector<S>& go) {
      auto& ga = g.grad_buf(pid[0]);
#pragma omp parallel for schedule(static) if (total >= kernels::kLightGrain)
      for (int64_t idx = 0; idx < total; ++idx) {
        const int64_t in = idx % inner, j = (idx / inner) % Dn, o = idx / (inner * Dn);
        ga[static_cast<size_t>((o * D + start + j) * inner + in)] += go[static_cast<size_t>(idx)];
      }
    };
  });
  return out;
}

template <typename S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, int64_t axis) {
  check(!parts.empty(), "concat: no tensors given");
  const Shape& s0 = parts[0].shape();
  const int64_t rank = static_cast<int64_t>(s0.size());
  check(axis >= 0 && axis < rank, "concat: invalid axis " + std::to_string(axis));
  int64_t D_total = 0;
  for (const auto& p : parts) {
    check(static_cast<int64_t>(p.rank()) == rank, "concat: rank mismatch");
    for (int64_t i = 0; i < rank; ++i)
      check(i == axis || p.dim(static_cast<size_t>(i)) == s0[static_cast<size_t>(i)],
            "concat: shape mismatch at axis " + std::to_string(i));
    D_total += p.dim(static_cast<size_t>(axis));
  }
  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= s0[static_cast<size_t>(i)];
  for (int64_t i = axis + 1; i < rank; ++i) inner *= s0[static_cast<size_t>(i)];
  Shape out_shape = s0;
  out_shape[static_cast<size_t>(axis)] = D_total;
  Tensor<S> out = Tensor<S>::zeros(out_shape);
  S* od = out.mutable_data().data();
  int64_t offset = 0;
  for (const auto& p : parts) {
    const int64_t Dp = p.dim(static_cast<size_t>(axis));
    const S* pd = p.data().data();
    for (int64_t o = 0; o < outer; ++o)
      std::copy(pd + o * Dp * inner, pd + (o + 1) * Dp * inner,
                od + (o * D_total + offset) * inner);
    offset += Dp;
  }
  Graph<S>* g = Graph<S>::current();
  if (g) {
    std::vector<int> pid;
    std::vector<int64_t> dims;
    bool any = false;
    for (const auto& p : parts) {
      pid.push_back(g->input_node(p));
      dims.push_back(p.dim(static_cast<size_t>(axis)));
      any = any || pid.back() >= 0;
    }
    if (any) {
      auto fn = [pid, dims, outer, inner, D_total](Graph<S>& gg, const std::vector<S>& go) {
        int64_t off = 0;
        for (size_t k = 0; k < pid.size(); ++k) {
          const int64_t Dp = dims[k];
          if (pid[k] >= 0) {
            auto& ga = gg.grad_buf(pid[k]);
            for (int64_t o = 0; o < outer; ++o)
              for (int64_t i = 0; i < Dp * inner; ++i)
                ga[static_cast<size_t>(o * Dp * inner + i)] +=
                    go[static_cast<size_t>((o * D_total + off) * inner + i)];
          }
          off += Dp;
        }
      };
      out.bind_node(g, g->emit(pid, out.numel(), std::move(fn)));
    }
  }
  return out;
}

template <typename S>
Tensor<S> permute(const Tensor<S>& x, const std::vector<int64_t>& perm) {
  const int64_t rank = static_cast<int64_t>(x.rank());
  check(static_cast<int64_t>(perm.size()) == rank, "permute: perm rank mismatch");
  std::vector<bool> seen(static_cast<size_t>(rank), false);
  for (int64_t p : perm) {
    check(p >= 0 && p < rank && !seen[static_cast<size_t>(p)], "permute: invalid permutation");
    seen[static_cast<size_t>(p)] = true;
  }
  Shape out_shape(static_cast<size_t>(rank));
  for (int64_t i = 0; i < rank; ++i)
    out_shape[static_cast<size_t>(i)] = x.dim(static_cast<size_t>(perm[static_cast<size_t>(i)]));
  const auto in_strides = detail::row_major_strides(x.shape());
  const auto out_dims = out_shape;
  // stride in the input for each output axis
  std::vector<int64_t> gather_strides(static_cast<size_t>(rank));
  for (int64_t i = 0; i < rank; ++i)
    gather_strides[static_cast<size_t>(i)] = in_strides[static_cast<size_t>(perm[static_cast<size_t>(i)])];

  Tensor<S> out = Tensor<S>::zeros(out_shape);
  const S* xd = x.data().data();
  S* od = out.mutable_data().data();
  const int64_t n = out.numel();
  const auto src_of = [out_dims, gather_strides, rank](int64_t idx) {
    int64_t src = 0;
    for (int64_t i = rank - 1; i >= 0; --i) {
      src += (idx % out_dims[static_cast<size_t>(i)]) * gather_strides[static_cast<size_t>(i)];
      idx /= out_dims[static_cast<size_t>(i)];
    }
    return src;
  };
#pragma omp parallel for schedule(static) if (n >= kernels::kLightGrain)
  for (int64_t i = 0; i < n; ++i) od[i] = xd[src_of(i)];
  detail::maybe_record(out, {&x}, [&](const std::vector<int>& pid) {
    return [pid, src_of, n](Graph<S>& g, const std::vector<S>& go) {
      auto& ga = g.grad_buf(pid[0]);
      for (int64_t i = 0; i < n; ++i) ga[static_cast<size_t>(src_of(i))] += go[static_cast<size_t>(i)];
    };
  });
  return out;
}

// backward() lives on Graph; free-function form for call-site symmetry.
template <typename S>
void backward(const Tensor<S>& loss) {
  Graph<S>* g = Graph<S>::current();
  check(g != nullptr, "backward: no active graph");
  g->backward(loss);
}

}  // namespace tfgan
