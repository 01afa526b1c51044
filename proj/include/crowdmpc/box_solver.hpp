// Copyright 2026 The crowdmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Bound-constrained smooth minimisation: projected gradient with an Armijo
// backtracking line search along the projection arc, accelerated by a
// limited-memory BFGS direction on the variables that are not held at a
// bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <vector>

namespace crowdmpc {

struct BoxSolverOptions {
  double tolerance{1e-4};      // on the infinity norm of the projected gradient
  int max_iterations{200};
  std::size_t memory{10};
  double armijo{1e-4};
  int max_backtracks{60};
  bool record_trace{false};
};

struct BoxSolverResult {
  std::vector<double> x;
  double value{0.0};
  int iterations{0};
  bool converged{false};
  double projected_gradient_norm{0.0};
  std::vector<double> trace;  // accepted objective values, if requested
};

namespace detail {

inline double projected_gradient_inf_norm(const std::vector<double>& x, const std::vector<double>& g,
                                          const std::vector<double>& lower, const std::vector<double>& upper) {
  double out = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = std::clamp(x[i] - g[i], lower[i], upper[i]) - x[i];
    out = std::max(out, std::abs(p));
  }
  return out;
}

}  // namespace detail

/// Minimises `objective` over the box [lower, upper]. `objective(x, grad)`
/// returns f(x) and writes the gradient. Accepted iterates never increase f.
template <class Objective>
BoxSolverResult minimize_box(Objective&& objective, std::vector<double> x, const std::vector<double>& lower,
                             const std::vector<double>& upper, const BoxSolverOptions& options = {}) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);

  std::vector<double> g(n), g_new(n), x_new(n), d(n), q(n);
  std::vector<char> free(n);
  double fx = objective(x, g);

  struct Pair {
    std::vector<double> s, y;
  };
  std::deque<Pair> memory;

  BoxSolverResult result;
  if (options.record_trace) result.trace.push_back(fx);

  auto masked_dot = [&free, n](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (free[i]) acc += a[i] * b[i];
    }
    return acc;
  };

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    result.projected_gradient_norm = detail::projected_gradient_inf_norm(x, g, lower, upper);
    if (result.projected_gradient_norm <= options.tolerance) {
      result.converged = true;
      break;
    }

    for (std::size_t i = 0; i < n; ++i) {
      const bool held_low = x[i] <= lower[i] && g[i] > 0.0;
      const bool held_high = x[i] >= upper[i] && g[i] < 0.0;
      free[i] = !(held_low || held_high);
    }

    bool accepted = false;
    bool used_memory = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      // Two-loop recursion restricted to the free variables.
      for (std::size_t i = 0; i < n; ++i) q[i] = free[i] ? g[i] : 0.0;
      std::vector<double> alphas(memory.size(), 0.0);
      std::vector<double> rhos(memory.size(), 0.0);
      double gamma = 1.0;
      bool have_curvature = false;
      for (std::size_t m = memory.size(); m-- > 0;) {
        const double sy = masked_dot(memory[m].s, memory[m].y);
        if (sy <= 0.0) continue;
        rhos[m] = 1.0 / sy;
        alphas[m] = rhos[m] * masked_dot(memory[m].s, q);
        for (std::size_t i = 0; i < n; ++i) {
          if (free[i]) q[i] -= alphas[m] * memory[m].y[i];
        }
        if (!have_curvature) {
          gamma = sy / masked_dot(memory[m].y, memory[m].y);
          have_curvature = true;
        }
      }
      for (std::size_t i = 0; i < n; ++i) q[i] *= gamma;
      for (std::size_t m = 0; m < memory.size(); ++m) {
        if (rhos[m] == 0.0) continue;
        const double beta = rhos[m] * masked_dot(memory[m].y, q);
        for (std::size_t i = 0; i < n; ++i) {
          if (free[i]) q[i] += (alphas[m] - beta) * memory[m].s[i];
        }
      }
      double gd = 0.0;
      double d_inf = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        d[i] = free[i] ? -q[i] : 0.0;
        gd += g[i] * d[i];
        d_inf = std::max(d_inf, std::abs(d[i]));
      }
      if (!have_curvature || !(gd < 0.0)) {
        memory.clear();
        d_inf = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          d[i] = free[i] ? -g[i] : 0.0;
          d_inf = std::max(d_inf, std::abs(d[i]));
        }
        have_curvature = false;
      }
      if (d_inf == 0.0) break;
      used_memory = have_curvature;

      double step = have_curvature ? 1.0 : std::min(1.0, 1.0 / d_inf);
      for (int bt = 0; bt < options.max_backtracks; ++bt, step *= 0.5) {
        double decrease = 0.0;
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
          x_new[i] = std::clamp(x[i] + step * d[i], lower[i], upper[i]);
          decrease += g[i] * (x_new[i] - x[i]);
          moved = moved || x_new[i] != x[i];
        }
        if (!moved) break;
        if (!(decrease < 0.0)) continue;
        const double f_new = objective(x_new, g_new);
        if (std::isfinite(f_new) && f_new <= fx + options.armijo * decrease) {
          Pair p{std::vector<double>(n), std::vector<double>(n)};
          double sy = 0.0, ss = 0.0, yy = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            p.s[i] = x_new[i] - x[i];
            p.y[i] = g_new[i] - g[i];
            sy += p.s[i] * p.y[i];
            ss += p.s[i] * p.s[i];
            yy += p.y[i] * p.y[i];
          }
          if (sy > 1e-12 * std::sqrt(ss * yy)) {
            memory.push_back(std::move(p));
            if (memory.size() > options.memory) memory.pop_front();
          }
          x.swap(x_new);
          g.swap(g_new);
          fx = f_new;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (!used_memory) break;
        memory.clear();  // retry once along steepest descent
      }
    }
    if (!accepted) break;  // stalled
    if (options.record_trace) result.trace.push_back(fx);
  }

  if (it == options.max_iterations || !result.converged) {
    result.projected_gradient_norm = detail::projected_gradient_inf_norm(x, g, lower, upper);
    result.converged = result.projected_gradient_norm <= options.tolerance;
  }
  result.x = std::move(x);
  result.value = fx;
  result.iterations = it;
  return result;
}

}  // namespace crowdmpc
