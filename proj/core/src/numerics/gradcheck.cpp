#include "cosnet/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace cosnet {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

namespace {

void track(GradCheckResult& r, std::size_t index, double analytic, double numeric) {
  const double err = relative_error(analytic, numeric);
  ++r.coordinates;
  if (r.coordinates == 1 || err > r.max_rel_error) {
    r.max_rel_error = err;
    r.worst_index = index;
    r.analytic_at_worst = analytic;
    r.numeric_at_worst = numeric;
  }
}

void check_eps(double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw ContractError("finite-difference step must lie in [1e-7, 1e-3]");
}

}  // namespace

template <std::floating_point T>
GradCheckResult finite_diff_check(const std::function<Var<T>(Graph<T>&, Var<T>)>& f,
                                  const Tensor<T>& x, double eps) {
  check_eps(eps);
  Tensor<T> analytic;
  {
    Graph<T> g;
    Var<T> xv = g.variable(x);
    Var<T> loss = f(g, xv);
    g.backward(loss);
    analytic = g.has_grad(xv.id()) ? g.grad(xv.id()) : Tensor<T>(x.shape());
  }
  auto evaluate = [&](const Tensor<T>& point) {
    Graph<T> g;
    Var<T> xv = g.constant(point);
    return static_cast<double>(f(g, xv).value().item());
  };
  GradCheckResult result;
  Tensor<T> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T original = probe[i];
    probe[i] = original + static_cast<T>(eps);
    const double up = evaluate(probe);
    probe[i] = original - static_cast<T>(eps);
    const double down = evaluate(probe);
    probe[i] = original;
    track(result, i, analytic[i], (up - down) / (2.0 * eps));
  }
  return result;
}

template <std::floating_point T>
std::vector<ParameterCheck> check_parameters(ParameterStore<T>& store,
                                             const std::function<Var<T>(Graph<T>&)>& loss,
                                             double eps) {
  check_eps(eps);
  std::vector<Tensor<T>> analytic;
  {
    Graph<T> g;
    Var<T> l = loss(g);
    g.backward(l);
    std::unordered_map<const Parameter<T>*, std::size_t> nodes;
    for (const auto& [p, id] : g.bound_parameters()) nodes.emplace(p, id);
    for (auto& p : store) {
      auto it = nodes.find(&p);
      if (it != nodes.end() && g.has_grad(it->second)) {
        analytic.push_back(g.grad(it->second));
      } else {
        analytic.emplace_back(p.value.shape());
      }
    }
  }
  auto evaluate = [&]() {
    Graph<T> g;
    return static_cast<double>(loss(g).value().item());
  };
  std::vector<ParameterCheck> out;
  std::size_t k = 0;
  for (auto& p : store) {
    ParameterCheck check{p.name, {}};
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const T original = p.value[i];
      p.value[i] = original + static_cast<T>(eps);
      const double up = evaluate();
      p.value[i] = original - static_cast<T>(eps);
      const double down = evaluate();
      p.value[i] = original;
      track(check.result, i, analytic[k][i], (up - down) / (2.0 * eps));
    }
    out.push_back(std::move(check));
    ++k;
  }
  return out;
}

template GradCheckResult finite_diff_check(const std::function<Var<float>(Graph<float>&, Var<float>)>&,
                                           const Tensor<float>&, double);
template GradCheckResult finite_diff_check(const std::function<Var<double>(Graph<double>&, Var<double>)>&,
                                           const Tensor<double>&, double);
template std::vector<ParameterCheck> check_parameters(ParameterStore<float>&,
                                                      const std::function<Var<float>(Graph<float>&)>&, double);
template std::vector<ParameterCheck> check_parameters(ParameterStore<double>&,
                                                      const std::function<Var<double>(Graph<double>&)>&, double);

}  // namespace cosnet
