// Central-difference gradient checker. Runs the function under a fresh
// graph for the analytic gradient and compares per coordinate against
// (f(x+eps*e_i) - f(x-eps*e_i)) / (2*eps). Coordinates where the one-sided
// differences disagree are reported as skipped (subgradient points).
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tfgan/ops.hpp"
#include "tfgan/tensor.hpp"

namespace tfgan {

struct GradCheckReport {
  bool passed = false;
  bool finite = true;          // false if any evaluation produced NaN/Inf
  double max_rel_err = 0.0;
  int64_t worst_index = -1;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  int64_t checked = 0;
  std::vector<int64_t> skipped;  // kink coordinates, excluded from the verdict
  double tol = 0.0;

  std::string summary() const {
    std::string s = passed ? "pass" : "FAIL";
    s += " max_rel_err=" + std::to_string(max_rel_err) + " checked=" + std::to_string(checked) +
         " skipped=" + std::to_string(skipped.size());
    if (!passed && worst_index >= 0)
      s += " worst[" + std::to_string(worst_index) + "] analytic=" +
           std::to_string(analytic_at_worst) + " numeric=" + std::to_string(numeric_at_worst);
    if (!finite) s += " (non-finite values encountered)";
    return s;
  }
};

// f must map a tensor to a scalar tensor. Evaluations of f for the numeric
// side run without an active graph.
template <typename S>
GradCheckReport grad_check(const std::function<Tensor<S>(const Tensor<S>&)>& f,
                           const Tensor<S>& x0, double eps = 1e-5, double tol = 1e-4) {
  GradCheckReport rep;
  rep.tol = tol;

  // analytic gradient
  Tensor<S> x = x0.clone();
  x.set_requires_grad(true);
  std::vector<double> analytic(static_cast<size_t>(x.numel()));
  {
    Graph<S> tape;
    Tensor<S> y = f(x);
    check(y.numel() == 1, "grad_check: function must return a scalar");
    if (!std::isfinite(static_cast<double>(y.value()))) rep.finite = false;
    tape.backward(y);
    auto g = x.grad();
    for (size_t i = 0; i < g.size(); ++i) {
      analytic[i] = static_cast<double>(g[i]);
      if (!std::isfinite(analytic[i])) rep.finite = false;
    }
  }
  if (!rep.finite) return rep;

  const auto eval = [&f](const Tensor<S>& v) -> double {
    Tensor<S> y = f(v);
    check(y.numel() == 1, "grad_check: function must return a scalar");
    return static_cast<double>(y.value());
  };

  Tensor<S> probe = x0.clone();
  auto pd = probe.mutable_data();
  const double f0 = eval(probe);
  if (!std::isfinite(f0)) {
    rep.finite = false;
    return rep;
  }

  for (int64_t i = 0; i < probe.numel(); ++i) {
    const S saved = pd[static_cast<size_t>(i)];
    pd[static_cast<size_t>(i)] = saved + static_cast<S>(eps);
    const double fp = eval(probe);
    pd[static_cast<size_t>(i)] = saved - static_cast<S>(eps);
    const double fm = eval(probe);
    pd[static_cast<size_t>(i)] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      rep.finite = false;
      return rep;
    }
    const double fwd = (fp - f0) / eps;
    const double bwd = (f0 - fm) / eps;
    // One-sided estimates disagreeing by O(1) marks a kink; O(eps)
    // disagreement is ordinary truncation error.
    if (std::abs(fwd - bwd) > 1e-2 * std::max({1.0, std::abs(fwd), std::abs(bwd)})) {
      rep.skipped.push_back(i);
      continue;
    }
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = analytic[static_cast<size_t>(i)];
    const double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
    ++rep.checked;
    if (rel > rep.max_rel_err) {
      rep.max_rel_err = rel;
      rep.worst_index = i;
      rep.analytic_at_worst = a;
      rep.numeric_at_worst = numeric;
    }
  }
  rep.passed = rep.finite && rep.max_rel_err <= tol;
  return rep;
}

}  // namespace tfgan
