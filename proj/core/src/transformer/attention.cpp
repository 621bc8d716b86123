#include "cosnet/transformer/attention.hpp"

#include <cmath>

namespace cosnet {

AttentionMask AttentionMask::all(std::size_t rows, std::size_t cols) {
  return AttentionMask{rows, cols, std::vector<std::uint8_t>(rows * cols, 1)};
}

AttentionMask AttentionMask::causal(std::size_t n) {
  AttentionMask m{n, n, std::vector<std::uint8_t>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, true);
  return m;
}

AttentionMask AttentionMask::block_causal(const std::vector<std::size_t>& lengths) {
  std::size_t n = 0;
  for (auto l : lengths) n += l;
  AttentionMask m{n, n, std::vector<std::uint8_t>(n * n, 0)};
  std::size_t offset = 0;
  for (auto l : lengths) {
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j <= i; ++j) m.set(offset + i, offset + j, true);
    offset += l;
  }
  return m;
}

template <std::floating_point T>
AttentionParams<T> make_attention(ParameterStore<T>& store, const std::string& prefix,
                                  std::size_t model_dim, std::size_t heads, Rng& rng) {
  if (heads == 0 || model_dim % heads != 0) {
    throw ContractError("attention '" + prefix + "': head count " + std::to_string(heads) +
                        " must divide model width " + std::to_string(model_dim));
  }
  AttentionParams<T> p;
  p.heads = heads;
  p.model_dim = model_dim;
  p.query = &store.create(prefix + ".wq", {model_dim, model_dim});
  p.key = &store.create(prefix + ".wk", {model_dim, model_dim});
  p.value = &store.create(prefix + ".wv", {model_dim, model_dim});
  p.output = &store.create(prefix + ".wo", {model_dim, model_dim});
  for (auto* w : {p.query, p.key, p.value, p.output}) xavier_uniform(*w, rng);
  return p;
}

template <std::floating_point T>
Var<T> multi_head_attention(const AttentionParams<T>& params, Var<T> q, Var<T> k, Var<T> v,
                            const AttentionMask* mask, std::vector<Tensor<T>>* weights) {
  Graph<T>& g = q.graph();
  const std::size_t d = params.model_dim;
  if (q.cols() != d || k.cols() != d || v.cols() != d) {
    throw ShapeError("multi_head_attention: query " + shape_to_string(q.shape()) + ", key " +
                     shape_to_string(k.shape()) + ", value " + shape_to_string(v.shape()) +
                     " must all have width " + std::to_string(d));
  }
  if (k.rows() != v.rows()) {
    throw ShapeError("multi_head_attention: key " + shape_to_string(k.shape()) + " and value " +
                     shape_to_string(v.shape()) + " differ in length");
  }
  const std::size_t nq = q.rows(), nk = k.rows();
  Var<T> additive;
  if (mask != nullptr) {
    if (mask->rows != nq || mask->cols != nk) {
      throw ShapeError("multi_head_attention: mask " + std::to_string(mask->rows) + "x" +
                       std::to_string(mask->cols) + " does not match scores " + std::to_string(nq) +
                       "x" + std::to_string(nk));
    }
    Tensor<T> bias({nq, nk});
    for (std::size_t i = 0; i < nq; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < nk; ++j) {
        if ((*mask)(i, j)) {
          any = true;
        } else {
          bias(i, j) = static_cast<T>(-1e9);
        }
      }
      if (!any) throw ContractError("multi_head_attention: query row " + std::to_string(i) + " is fully masked");
    }
    additive = g.constant(std::move(bias));
  }

  Var<T> qp = matmul(q, g.param(*params.query));
  Var<T> kp = matmul(k, g.param(*params.key));
  Var<T> vp = matmul(v, g.param(*params.value));
  const std::size_t dh = params.head_dim();
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));

  std::vector<Var<T>> heads;
  heads.reserve(params.heads);
  if (weights) weights->clear();
  for (std::size_t h = 0; h < params.heads; ++h) {
    Var<T> qh = params.heads == 1 ? qp : slice_cols(qp, h * dh, dh);
    Var<T> kh = params.heads == 1 ? kp : slice_cols(kp, h * dh, dh);
    Var<T> vh = params.heads == 1 ? vp : slice_cols(vp, h * dh, dh);
    Var<T> scores = scale(matmul_nt(qh, kh), inv_sqrt);
    if (additive.valid()) scores = add(scores, additive);
    Var<T> attn = softmax(scores, 1);
    if (weights) weights->push_back(attn.value());
    heads.push_back(matmul(attn, vh));
  }
  Var<T> joined = heads.size() == 1 ? heads.front() : concat_cols<T>(heads);
  return matmul(joined, g.param(*params.output));
}

template AttentionParams<float> make_attention(ParameterStore<float>&, const std::string&, std::size_t,
                                               std::size_t, Rng&);
template AttentionParams<double> make_attention(ParameterStore<double>&, const std::string&, std::size_t,
                                                std::size_t, Rng&);
template Var<float> multi_head_attention(const AttentionParams<float>&, Var<float>, Var<float>, Var<float>,
                                         const AttentionMask*, std::vector<Tensor<float>>*);
template Var<double> multi_head_attention(const AttentionParams<double>&, Var<double>, Var<double>,
                                          Var<double>, const AttentionMask*, std::vector<Tensor<double>>*);

}  // namespace cosnet
