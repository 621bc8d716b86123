#include "cosnet/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kernels.hpp"

namespace cosnet {
namespace {

template <std::floating_point T>
Graph<T>& same_graph(Var<T> a, Var<T> b, const char* op) {
  if (&a.graph() != &b.graph()) {
    throw ContractError(std::string(op) + ": operands belong to different compute records");
  }
  return a.graph();
}

template <std::floating_point T>
void require_matrix(const Tensor<T>& t, const char* op) {
  if (t.rank() != 1 && t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a vector or matrix, got " +
                     shape_to_string(t.shape()));
  }
}

std::string pair_shapes(const Shape& a, const Shape& b) {
  return shape_to_string(a) + " and " + shape_to_string(b);
}

template <std::floating_point T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

template <std::floating_point T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b, "matmul");
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require_matrix(av, "matmul");
  require_matrix(bv, "matmul");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw ShapeError("matmul: inner dimensions disagree for " + pair_shapes(av.shape(), bv.shape()));
  }
  Tensor<T> out({m, n});
  kernels::gemm_nn(av.data(), bv.data(), out.data(), m, k, n, false);
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, "matmul", [ia, ib, m, k, n](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    if (gr.requires_grad(ia)) {
      kernels::gemm_nt(dy.data(), gr.value(ib).data(), gr.grad(ia).data(), m, n, k, true);
    }
    if (gr.requires_grad(ib)) {
      kernels::gemm_tn(gr.value(ia).data(), dy.data(), gr.grad(ib).data(), m, k, n, true);
    }
  });
}

template <std::floating_point T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b, "matmul_nt");
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require_matrix(av, "matmul_nt");
  require_matrix(bv, "matmul_nt");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
  if (bv.cols() != k) {
    throw ShapeError("matmul_nt: inner dimensions disagree for " +
                     pair_shapes(av.shape(), bv.shape()));
  }
  Tensor<T> out({m, n});
  kernels::gemm_nt(av.data(), bv.data(), out.data(), m, k, n, false);
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, "matmul_nt", [ia, ib, m, k, n](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);  // m x n
    if (gr.requires_grad(ia)) {
      kernels::gemm_nn(dy.data(), gr.value(ib).data(), gr.grad(ia).data(), m, n, k, true);
    }
    if (gr.requires_grad(ib)) {
      kernels::gemm_tn(dy.data(), gr.value(ia).data(), gr.grad(ib).data(), m, n, k, true);
    }
  });
}

template <std::floating_point T>
Var<T> transpose(Var<T> a) {
  const Tensor<T>& av = a.value();
  require_matrix(av, "transpose");
  const std::size_t r = av.rows(), c = av.cols();
  Tensor<T> out({c, r});
  kernels::transpose(av.data(), out.data(), r, c);
  const std::size_t ia = a.id();
  return a.graph().record(std::move(out), {ia}, "transpose", [ia, r, c](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dx = gr.grad(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) dx[i * c + j] += dy[j * r + i];
  });
}

template <std::floating_point T>
Var<T> add(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b, "add");
  if (a.shape() != b.shape()) throw ShapeError("add: shape mismatch " + pair_shapes(a.shape(), b.shape()));
  Tensor<T> out = a.value();
  add_into(out, b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, "add", [ia, ib](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    if (gr.requires_grad(ia)) add_into(gr.grad(ia), dy);
    if (gr.requires_grad(ib)) add_into(gr.grad(ib), dy);
  });
}

template <std::floating_point T>
Var<T> sub(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b, "sub");
  if (a.shape() != b.shape()) throw ShapeError("sub: shape mismatch " + pair_shapes(a.shape(), b.shape()));
  Tensor<T> out = a.value();
  auto o = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, "sub", [ia, ib](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    if (gr.requires_grad(ia)) add_into(gr.grad(ia), dy);
    if (gr.requires_grad(ib)) {
      auto dx = gr.grad(ib).values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] -= dy[i];
    }
  });
}

template <std::floating_point T>
Var<T> mul(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b, "mul");
  if (a.shape() != b.shape()) throw ShapeError("mul: shape mismatch " + pair_shapes(a.shape(), b.shape()));
  Tensor<T> out = a.value();
  auto o = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), {ia, ib}, "mul", [ia, ib](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    if (gr.requires_grad(ia)) {
      auto dx = gr.grad(ia).values();
      auto other = gr.value(ib).values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * other[i];
    }
    if (gr.requires_grad(ib)) {
      auto dx = gr.grad(ib).values();
      auto other = gr.value(ia).values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * other[i];
    }
  });
}

template <std::floating_point T>
Var<T> scale(Var<T> a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.values()) v *= factor;
  const std::size_t ia = a.id();
  return a.graph().record(std::move(out), {ia}, "scale", [ia, factor](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    auto dx = gr.grad(ia).values();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factor * dy[i];
  });
}

template <std::floating_point T>
Var<T> add_row(Var<T> a, Var<T> row) {
  Graph<T>& g = same_graph(a, row, "add_row");
  const Tensor<T>& av = a.value();
  require_matrix(av, "add_row");
  const std::size_t m = av.rows(), n = av.cols();
  if (row.value().size() != n) {
    throw ShapeError("add_row: row " + shape_to_string(row.shape()) + " does not match columns of " +
                     shape_to_string(av.shape()));
  }
  Tensor<T> out = av;
  const T* r = row.value().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += r[j];
  const std::size_t ia = a.id(), ir = row.id();
  return g.record(std::move(out), {ia, ir}, "add_row", [ia, ir, m, n](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    if (gr.requires_grad(ia)) add_into(gr.grad(ia), dy);
    if (gr.requires_grad(ir)) {
      Tensor<T>& dr = gr.grad(ir);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) dr[j] += dy[i * n + j];
    }
  });
}

template <std::floating_point T>
Var<T> sum(Var<T> a) {
  T total = T(0);
  for (T v : a.value().values()) total += v;
  const std::size_t ia = a.id();
  return a.graph().record(Tensor<T>::scalar(total), {ia}, "sum", [ia](Graph<T>& gr, std::size_t self) {
    const T dy = gr.grad(self)[0];
    for (auto& v : gr.grad(ia).values()) v += dy;
  });
}

template <std::floating_point T>
Var<T> mean(Var<T> a) {
  const T inv = T(1) / static_cast<T>(a.value().size());
  return scale(sum(a), inv);
}

template <std::floating_point T>
Var<T> softmax(Var<T> x, int axis) {
  const Tensor<T>& xv = x.value();
  require_matrix(xv, "softmax");
  std::size_t groups = 0, len = 0, stride = 0, group_step = 0;
  if (xv.rank() == 1 && axis == 0) {
    groups = 1; len = xv.cols(); stride = 1; group_step = 0;
  } else if (xv.rank() == 2 && axis == 1) {
    groups = xv.rows(); len = xv.cols(); stride = 1; group_step = xv.cols();
  } else if (xv.rank() == 2 && axis == 0) {
    groups = xv.cols(); len = xv.rows(); stride = xv.cols(); group_step = 1;
  } else {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                     shape_to_string(xv.shape()));
  }
  Tensor<T> out(xv.shape());
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const std::size_t base = gi * group_step;
    T mx = xv[base];
    for (std::size_t k = 1; k < len; ++k) mx = std::max(mx, xv[base + k * stride]);
    T total = T(0);
    for (std::size_t k = 0; k < len; ++k) {
      const T e = std::exp(xv[base + k * stride] - mx);
      out[base + k * stride] = e;
      total += e;
    }
    for (std::size_t k = 0; k < len; ++k) out[base + k * stride] /= total;
  }
  const std::size_t ix = x.id();
  return x.graph().record(std::move(out), {ix}, "softmax",
                          [ix, groups, len, stride, group_step](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& y = gr.value(self);
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dx = gr.grad(ix);
    for (std::size_t gi = 0; gi < groups; ++gi) {
      const std::size_t base = gi * group_step;
      T dot = T(0);
      for (std::size_t k = 0; k < len; ++k) dot += dy[base + k * stride] * y[base + k * stride];
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t idx = base + k * stride;
        dx[idx] += y[idx] * (dy[idx] - dot);
      }
    }
  });
}

template <std::floating_point T>
Var<T> log_softmax(Var<T> x) {
  const Tensor<T>& xv = x.value();
  require_matrix(xv, "log_softmax");
  const std::size_t m = xv.rows(), n = xv.cols();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = xv.data() + i * n;
    T mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    T total = T(0);
    for (std::size_t j = 0; j < n; ++j) total += std::exp(row[j] - mx);
    const T lse = mx + std::log(total);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = row[j] - lse;
  }
  const std::size_t ix = x.id();
  return x.graph().record(std::move(out), {ix}, "log_softmax", [ix, m, n](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& y = gr.value(self);
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dx = gr.grad(ix);
    for (std::size_t i = 0; i < m; ++i) {
      T total = T(0);
      for (std::size_t j = 0; j < n; ++j) total += dy[i * n + j];
      for (std::size_t j = 0; j < n; ++j) dx[i * n + j] += dy[i * n + j] - std::exp(y[i * n + j]) * total;
    }
  });
}

template <std::floating_point T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, double eps) {
  Graph<T>& g = same_graph(x, gain, "layer_norm");
  same_graph(x, bias, "layer_norm");
  const Tensor<T>& xv = x.value();
  require_matrix(xv, "layer_norm");
  const std::size_t m = xv.rows(), n = xv.cols();
  if (gain.value().size() != n || bias.value().size() != n) {
    throw ShapeError("layer_norm: gain " + shape_to_string(gain.shape()) + " / bias " +
                     shape_to_string(bias.shape()) + " do not match last dimension of " +
                     shape_to_string(xv.shape()));
  }
  Tensor<T> out(xv.shape());
  // Saved per-row statistics: normalised input and reciprocal std.
  Tensor<T> xhat(xv.shape());
  std::vector<T> rstd(m);
  const T* gv = gain.value().data();
  const T* bv = bias.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = xv.data() + i * n;
    T mu = T(0);
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<T>(n);
    T var = T(0);
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(n);
    rstd[i] = T(1) / std::sqrt(var + static_cast<T>(eps));
    for (std::size_t j = 0; j < n; ++j) {
      const T h = (row[j] - mu) * rstd[i];
      xhat[i * n + j] = h;
      out[i * n + j] = h * gv[j] + bv[j];
    }
  }
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return g.record(std::move(out), {ix, ig, ib}, "layer_norm",
                  [ix, ig, ib, m, n, xhat = std::move(xhat), rstd = std::move(rstd)](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    const T* gv = gr.value(ig).data();
    if (gr.requires_grad(ix)) {
      Tensor<T>& dx = gr.grad(ix);
      for (std::size_t i = 0; i < m; ++i) {
        T mean_d = T(0), mean_dh = T(0);
        for (std::size_t j = 0; j < n; ++j) {
          const T d = dy[i * n + j] * gv[j];
          mean_d += d;
          mean_dh += d * xhat[i * n + j];
        }
        mean_d /= static_cast<T>(n);
        mean_dh /= static_cast<T>(n);
        for (std::size_t j = 0; j < n; ++j) {
          const T d = dy[i * n + j] * gv[j];
          dx[i * n + j] += rstd[i] * (d - mean_d - xhat[i * n + j] * mean_dh);
        }
      }
    }
    if (gr.requires_grad(ig)) {
      Tensor<T>& dg = gr.grad(ig);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) dg[j] += dy[i * n + j] * xhat[i * n + j];
    }
    if (gr.requires_grad(ib)) {
      Tensor<T>& db = gr.grad(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) db[j] += dy[i * n + j];
    }
  });
}

template <std::floating_point T>
Var<T> gelu(Var<T> x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  constexpr double kA = 0.044715;
  Tensor<T> out = x.value();
  for (auto& v : out.values()) {
    const double xd = v;
    v = static_cast<T>(0.5 * xd * (1.0 + std::tanh(kC * (xd + kA * xd * xd * xd))));
  }
  const std::size_t ix = x.id();
  return x.graph().record(std::move(out), {ix}, "gelu", [ix](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    const Tensor<T>& xv = gr.value(ix);
    auto dx = gr.grad(ix).values();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double xd = xv[i];
      const double t = std::tanh(kC * (xd + kA * xd * xd * xd));
      const double d = 0.5 * (1.0 + t) + 0.5 * xd * (1.0 - t * t) * kC * (1.0 + 3.0 * kA * xd * xd);
      dx[i] += static_cast<T>(d) * dy[i];
    }
  });
}

template <std::floating_point T>
Var<T> sigmoid(Var<T> x) {
  Tensor<T> out = x.value();
  for (auto& v : out.values()) {
    if (v >= T(0)) {
      v = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      v = e / (T(1) + e);
    }
  }
  const std::size_t ix = x.id();
  return x.graph().record(std::move(out), {ix}, "sigmoid", [ix](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    const Tensor<T>& y = gr.value(self);
    auto dx = gr.grad(ix).values();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * y[i] * (T(1) - y[i]);
  });
}

template <std::floating_point T>
Var<T> log(Var<T> x) {
  Tensor<T> out = x.value();
  for (auto& v : out.values()) {
    if (!(v > T(0))) throw ContractError("log: input must be positive");
    v = std::log(v);
  }
  const std::size_t ix = x.id();
  return x.graph().record(std::move(out), {ix}, "log", [ix](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    const Tensor<T>& xv = gr.value(ix);
    auto dx = gr.grad(ix).values();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] / xv[i];
  });
}

template <std::floating_point T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no operands");
  Graph<T>& g = parts.front().graph();
  const std::size_t n = parts.front().cols();
  std::size_t total = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    same_graph(parts.front(), p, "concat_rows");
    require_matrix(p.value(), "concat_rows");
    if (p.cols() != n) {
      throw ShapeError("concat_rows: column mismatch " + pair_shapes(parts.front().shape(), p.shape()));
    }
    ids.push_back(p.id());
    offsets.push_back(total * n);
    total += p.rows();
  }
  Tensor<T> out({total, n});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto src = parts[k].value().values();
    std::copy(src.begin(), src.end(), out.data() + offsets[k]);
  }
  return g.record(std::move(out), ids, "concat_rows", [ids, offsets](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!gr.requires_grad(ids[k])) continue;
      auto dx = gr.grad(ids[k]).values();
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[offsets[k] + i];
    }
  });
}

template <std::floating_point T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  Graph<T>& g = parts.front().graph();
  const std::size_t m = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids, offsets, widths;
  for (const auto& p : parts) {
    same_graph(parts.front(), p, "concat_cols");
    require_matrix(p.value(), "concat_cols");
    if (p.rows() != m) {
      throw ShapeError("concat_cols: row mismatch " + pair_shapes(parts.front().shape(), p.shape()));
    }
    ids.push_back(p.id());
    offsets.push_back(total);
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor<T> out({m, total});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor<T>& src = parts[k].value();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(src.data() + i * widths[k], widths[k], out.data() + i * total + offsets[k]);
  }
  return g.record(std::move(out), ids, "concat_cols",
                  [ids, offsets, widths, m, total](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!gr.requires_grad(ids[k])) continue;
      Tensor<T>& dx = gr.grad(ids[k]);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < widths[k]; ++j) dx[i * widths[k] + j] += dy[i * total + offsets[k] + j];
    }
  });
}

template <std::floating_point T>
Var<T> slice_rows(Var<T> x, std::size_t begin, std::size_t count) {
  const Tensor<T>& xv = x.value();
  require_matrix(xv, "slice_rows");
  if (count == 0 || begin + count > xv.rows()) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") out of range for " + shape_to_string(xv.shape()));
  }
  const std::size_t n = xv.cols();
  Tensor<T> out({count, n});
  std::copy_n(xv.data() + begin * n, count * n, out.data());
  const std::size_t ix = x.id();
  return x.graph().record(std::move(out), {ix}, "slice_rows", [ix, begin, n](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dx = gr.grad(ix);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[begin * n + i] += dy[i];
  });
}

template <std::floating_point T>
Var<T> slice_cols(Var<T> x, std::size_t begin, std::size_t count) {
  const Tensor<T>& xv = x.value();
  require_matrix(xv, "slice_cols");
  if (count == 0 || begin + count > xv.cols()) {
    throw ShapeError("slice_cols: columns [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of range for " + shape_to_string(xv.shape()));
  }
  const std::size_t m = xv.rows(), n = xv.cols();
  Tensor<T> out({m, count});
  for (std::size_t i = 0; i < m; ++i) std::copy_n(xv.data() + i * n + begin, count, out.data() + i * count);
  const std::size_t ix = x.id();
  return x.graph().record(std::move(out), {ix}, "slice_cols", [ix, begin, count, m, n](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dx = gr.grad(ix);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < count; ++j) dx[i * n + begin + j] += dy[i * count + j];
  });
}

template <std::floating_point T>
Var<T> gather_rows(Var<T> table, std::span<const std::size_t> indices) {
  const Tensor<T>& tv = table.value();
  require_matrix(tv, "gather_rows");
  if (indices.empty()) throw ContractError("gather_rows: empty index list");
  const std::size_t n = tv.cols();
  Tensor<T> out({indices.size(), n});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= tv.rows()) {
      throw ContractError("gather_rows: index " + std::to_string(indices[i]) + " outside table " +
                          shape_to_string(tv.shape()));
    }
    std::copy_n(tv.data() + indices[i] * n, n, out.data() + i * n);
  }
  const std::size_t it = table.id();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return table.graph().record(std::move(out), {it}, "gather_rows", [it, n, idx = std::move(idx)](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dt = gr.grad(it);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) dt[idx[i] * n + j] += dy[i * n + j];
  });
}

template <std::floating_point T>
Var<T> max_over_rows(Var<T> x) {
  const Tensor<T>& xv = x.value();
  require_matrix(xv, "max_over_rows");
  const std::size_t m = xv.rows(), n = xv.cols();
  Tensor<T> out({1, n});
  std::vector<std::size_t> arg(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    T best = xv[j];
    for (std::size_t i = 1; i < m; ++i) {
      if (xv[i * n + j] > best) {
        best = xv[i * n + j];
        arg[j] = i;
      }
    }
    out[j] = best;
  }
  const std::size_t ix = x.id();
  return x.graph().record(std::move(out), {ix}, "max_over_rows", [ix, n, arg = std::move(arg)](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dx = gr.grad(ix);
    for (std::size_t j = 0; j < n; ++j) dx[arg[j] * n + j] += dy[j];
  });
}

template <std::floating_point T>
Var<T> pick(Var<T> x, std::span<const std::size_t> index) {
  const Tensor<T>& xv = x.value();
  require_matrix(xv, "pick");
  const std::size_t m = xv.rows(), n = xv.cols();
  if (index.size() != m) {
    throw ShapeError("pick: " + std::to_string(index.size()) + " indices for " + shape_to_string(xv.shape()));
  }
  Tensor<T> out({m});
  for (std::size_t i = 0; i < m; ++i) {
    if (index[i] >= n) throw ContractError("pick: column index out of range");
    out[i] = xv[i * n + index[i]];
  }
  const std::size_t ix = x.id();
  std::vector<std::size_t> idx(index.begin(), index.end());
  return x.graph().record(std::move(out), {ix}, "pick", [ix, n, idx = std::move(idx)](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& dy = gr.grad(self);
    Tensor<T>& dx = gr.grad(ix);
    for (std::size_t i = 0; i < idx.size(); ++i) dx[i * n + idx[i]] += dy[i];
  });
}

template <std::floating_point T>
Var<T> cross_entropy(Var<T> logits, std::span<const std::size_t> targets, std::size_t ignore_index) {
  const Tensor<T>& lv = logits.value();
  require_matrix(lv, "cross_entropy");
  const std::size_t m = lv.rows(), n = lv.cols();
  if (targets.size() != m) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                     shape_to_string(lv.shape()));
  }
  Tensor<T> probs(lv.shape());
  std::size_t counted = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = lv.data() + i * n;
    T mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    T total = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      probs[i * n + j] = std::exp(row[j] - mx);
      total += probs[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) probs[i * n + j] /= total;
    if (targets[i] == ignore_index) continue;
    if (targets[i] >= n) throw ContractError("cross_entropy: target outside vocabulary");
    ++counted;
    loss -= static_cast<double>(row[targets[i]] - mx - std::log(total));
  }
  const T value = counted ? static_cast<T>(loss / static_cast<double>(counted)) : T(0);
  const std::size_t il = logits.id();
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return logits.graph().record(
      Tensor<T>::scalar(value), {il}, "cross_entropy",
      [il, m, n, counted, ignore_index, tgt = std::move(tgt), probs = std::move(probs)](Graph<T>& gr, std::size_t self) {
        if (counted == 0) return;
        const T dy = gr.grad(self)[0] / static_cast<T>(counted);
        Tensor<T>& dx = gr.grad(il);
        for (std::size_t i = 0; i < m; ++i) {
          if (tgt[i] == ignore_index) continue;
          for (std::size_t j = 0; j < n; ++j) dx[i * n + j] += dy * probs[i * n + j];
          dx[i * n + tgt[i]] -= dy;
        }
      });
}

#define COSNET_INSTANTIATE_OPS(T)                                                        \
  template Var<T> matmul(Var<T>, Var<T>);                                               \
  template Var<T> matmul_nt(Var<T>, Var<T>);                                            \
  template Var<T> transpose(Var<T>);                                                    \
  template Var<T> add(Var<T>, Var<T>);                                                  \
  template Var<T> sub(Var<T>, Var<T>);                                                  \
  template Var<T> mul(Var<T>, Var<T>);                                                  \
  template Var<T> scale(Var<T>, T);                                                     \
  template Var<T> add_row(Var<T>, Var<T>);                                              \
  template Var<T> sum(Var<T>);                                                          \
  template Var<T> mean(Var<T>);                                                         \
  template Var<T> softmax(Var<T>, int);                                                 \
  template Var<T> log_softmax(Var<T>);                                                  \
  template Var<T> layer_norm(Var<T>, Var<T>, Var<T>, double);                           \
  template Var<T> gelu(Var<T>);                                                         \
  template Var<T> sigmoid(Var<T>);                                                      \
  template Var<T> log(Var<T>);                                                          \
  template Var<T> concat_rows(std::span<const Var<T>>);                                 \
  template Var<T> concat_cols(std::span<const Var<T>>);                                 \
  template Var<T> slice_rows(Var<T>, std::size_t, std::size_t);                         \
  template Var<T> slice_cols(Var<T>, std::size_t, std::size_t);                         \
  template Var<T> gather_rows(Var<T>, std::span<const std::size_t>);                    \
  template Var<T> max_over_rows(Var<T>);                                                \
  template Var<T> pick(Var<T>, std::span<const std::size_t>);                           \
  template Var<T> cross_entropy(Var<T>, std::span<const std::size_t>, std::size_t);

COSNET_INSTANTIATE_OPS(float)
COSNET_INSTANTIATE_OPS(double)

#undef COSNET_INSTANTIATE_OPS

}  // namespace cosnet
