#include "cosnet/semantics/visual_encoder.hpp"

#include "cosnet/numerics/errors.hpp"

namespace cosnet::semantics {

template <std::floating_point T>
VisualEncoderParams<T> make_visual_encoder(ParameterStore<T>& store, const std::string& prefix,
                                           std::size_t input_dim, std::size_t model_dim, std::size_t heads,
                                           std::size_t layers, Rng& rng) {
  if (layers == 0) throw ContractError("visual encoder needs at least one block");
  VisualEncoderParams<T> p;
  p.global_weight = &store.create(prefix + ".global_proj.weight", {input_dim, model_dim});
  p.global_bias = &store.create(prefix + ".global_proj.bias", {model_dim});
  p.grid_weight = &store.create(prefix + ".grid_proj.weight", {input_dim, model_dim});
  p.grid_bias = &store.create(prefix + ".grid_proj.bias", {model_dim});
  xavier_uniform(*p.global_weight, rng);
  xavier_uniform(*p.grid_weight, rng);
  for (std::size_t i = 0; i < layers; ++i) {
    p.blocks.push_back(make_block(store, prefix + ".block" + std::to_string(i), model_dim, heads, rng));
  }
  p.combine = &store.create(prefix + ".combine", {(layers + 1) * model_dim, model_dim});
  xavier_uniform(*p.combine, rng);
  return p;
}

template <std::floating_point T>
Var<T> project_visual_inputs(const VisualEncoderParams<T>& p, Var<T> global, Var<T> grids) {
  const std::size_t d_in = p.grid_weight->value.shape()[0];
  if (global.value().size() != d_in || grids.cols() != d_in) {
    throw ShapeError("visual inputs must have width " + std::to_string(d_in) + ", got global " +
                     shape_to_string(global.shape()) + " and grids " + shape_to_string(grids.shape()));
  }
  Graph<T>& g = grids.graph();
  Var<T> v_global = add_row(matmul(global, g.param(*p.global_weight)), g.param(*p.global_bias));
  Var<T> v_grids = add_row(matmul(grids, g.param(*p.grid_weight)), g.param(*p.grid_bias));
  const Var<T> parts[] = {v_global, v_grids};
  return concat_rows<T>(parts);
}

template <std::floating_point T>
VisualTokens<T> encode_visual(const VisualEncoderParams<T>& p, Var<T> projected) {
  if (projected.rows() < 2) throw ShapeError("visual encoder needs a global row and at least one grid row");
  Graph<T>& g = projected.graph();
  VisualTokens<T> out;
  Var<T> x = projected;
  out.layer_globals.push_back(slice_rows(x, 0, 1));
  for (const auto& block : p.blocks) {
    x = encoder_block(block, x);
    out.layer_globals.push_back(slice_rows(x, 0, 1));
  }
  out.holistic_global = matmul(concat_cols<T>(out.layer_globals), g.param(*p.combine));
  const Var<T> parts[] = {out.holistic_global, slice_rows(x, 1, x.rows() - 1)};
  out.tokens = concat_rows<T>(parts);
  return out;
}

#define COSNET_INSTANTIATE(T)                                                                            \
  template VisualEncoderParams<T> make_visual_encoder(ParameterStore<T>&, const std::string&, std::size_t, \
                                                      std::size_t, std::size_t, std::size_t, Rng&);        \
  template Var<T> project_visual_inputs(const VisualEncoderParams<T>&, Var<T>, Var<T>);                    \
  template VisualTokens<T> encode_visual(const VisualEncoderParams<T>&, Var<T>);
COSNET_INSTANTIATE(float)
COSNET_INSTANTIATE(double)
#undef COSNET_INSTANTIATE

}  // namespace cosnet::semantics
