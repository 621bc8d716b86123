#include "cosnet/semantics/ranker.hpp"

#include "cosnet/numerics/errors.hpp"

namespace cosnet::semantics {

template <std::floating_point T>
RankerParams<T> make_ranker(ParameterStore<T>& store, const std::string& prefix, std::size_t positions,
                            std::size_t model_dim, Rng& rng) {
  if (positions == 0) throw ContractError("the position codebook needs at least one row");
  RankerParams<T> p;
  p.codebook = &store.create(prefix + ".codebook", {positions, model_dim});
  fill_normal(*p.codebook, rng, 0.1);
  return p;
}

template <std::floating_point T>
PositionAwareSemantics<T> rank_semantics(const RankerParams<T>& p, Var<T> tokens) {
  Graph<T>& g = tokens.graph();
  Var<T> codebook = g.param(*p.codebook);
  PositionAwareSemantics<T> out;
  out.weights = softmax(matmul_nt(tokens, codebook), 1);
  out.positions = matmul(out.weights, codebook);
  out.tokens = add(tokens, out.positions);
  return out;
}

template RankerParams<float> make_ranker(ParameterStore<float>&, const std::string&, std::size_t, std::size_t, Rng&);
template RankerParams<double> make_ranker(ParameterStore<double>&, const std::string&, std::size_t, std::size_t,
                                          Rng&);
template PositionAwareSemantics<float> rank_semantics(const RankerParams<float>&, Var<float>);
template PositionAwareSemantics<double> rank_semantics(const RankerParams<double>&, Var<double>);

}  // namespace cosnet::semantics
