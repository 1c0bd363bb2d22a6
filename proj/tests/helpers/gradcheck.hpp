#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "eegraph/tensor.hpp"

namespace testutil {

struct GradCheck {
  double max_rel = 0.0;
  std::string worst;

  bool ok(double tol = 1e-4) const { return max_rel < tol; }
};

inline double rel_err(double a, double b) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-3});
  return std::fabs(a - b) / denom;
}

/// Central finite differences at h on every element of every input versus
/// the gradients a single backward pass reports. `f` must rebuild the scalar
/// loss from the inputs' current values on each call.
inline GradCheck gradcheck(const std::function<eegraph::Tensor()>& f,
                           std::vector<eegraph::Tensor> inputs,
                           double h = 1e-5) {
  using eegraph::NoGradGuard;
  using eegraph::Tensor;

  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  Tensor loss = f();
  eegraph::backward(loss);

  GradCheck out;
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    Tensor& t = inputs[p];
    const std::vector<double> analytic =
        t.has_grad() ? t.grad() : std::vector<double>(t.size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t.data()[i];
      double fp, fm;
      {
        NoGradGuard guard;
        t.data()[i] = orig + h;
        fp = f().at(0);
        t.data()[i] = orig - h;
        fm = f().at(0);
        t.data()[i] = orig;
      }
      const double numeric = (fp - fm) / (2.0 * h);
      const double e = rel_err(analytic[i], numeric);
      if (e > out.max_rel) {
        out.max_rel = e;
        out.worst = "input " + std::to_string(p) + " element " +
                    std::to_string(i) + ": analytic " +
                    std::to_string(analytic[i]) + " vs numeric " +
                    std::to_string(numeric);
      }
    }
  }
  return out;
}

}  // namespace testutil
