#include "eegraph/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace eegraph {

void Adam::step(const ParamList& params, double lr) {
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double bc1 = 1.0 - std::pow(beta1_, t);
  const double bc2 = 1.0 - std::pow(beta2_, t);

  for (const auto& p : params) {
    if (!p.learnable) continue;
    if (!p.tensor.has_grad())
      throw std::runtime_error("Adam::step: parameter '" + p.name +
                               "' has no gradient");
    auto& mom = state_[p.tensor.node()];
    if (mom.m.size() != p.tensor.size()) {
      mom.m.assign(p.tensor.size(), 0.0);
      mom.v.assign(p.tensor.size(), 0.0);
    }
    const auto& g = p.tensor.grad();
    double* w = const_cast<Tensor&>(p.tensor).data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      mom.m[i] = beta1_ * mom.m[i] + (1.0 - beta1_) * g[i];
      mom.v[i] = beta2_ * mom.v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = mom.m[i] / bc1;
      const double vhat = mom.v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace eegraph
