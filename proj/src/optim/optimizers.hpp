#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optim/objective.hpp"

namespace matfit {

struct OptResult {
  ParamVector x{};
  double value = 0.0;
  long evals = 0;                 // counter delta consumed by this run
  std::vector<Checkpoint> trace;  // reporting marks hit during this run
  std::string reason;             // "spread_tol" | "max_evals" | "line_search"
};

// Simplex search with dimension-adaptive coefficients (alpha 1, gamma 1+2/m,
// rho 0.75-1/(2m), sigma 1-1/m). The initial simplex steps 5% of each range
// along the axes, reflected inward when a step would leave the box. Stops
// when the vertex-value spread drops below spread_tol or the budget runs
// out; returns the best point ever evaluated, not the final simplex best.
OptResult nelder_mead(Objective& obj, const ParamVector& x_init, long max_evals,
                      double spread_tol = 1e-6);

// Gradient methods on the barrier objective, gradients by central
// differences in normalized parameter space (h = 1e-3, every probe counted).
// The FD stencil is deliberately not clamped to the box: at the boundary it
// straddles the barrier cliff and the line search cannot make progress,
// which is the honest "unable to improve" behavior for these methods.
OptResult cg_fd(Objective& obj, const ParamVector& x_init, long max_evals);
OptResult lbfgs_fd(Objective& obj, const ParamVector& x_init, long max_evals);

// Perturb-minimize-accept global wrapper: seeded Gaussian hops (std =
// step_scale * range per component, clamped to the box), nelder_mead legs of
// local_evals each, Metropolis acceptance at `temperature` (delta <= 0
// always accepted; temperature <= 0 accepts improvements only).
OptResult basin_hopping(Objective& obj, const ParamVector& x_init, long total_evals,
                        long local_evals, double temperature = 1.0, double step_scale = 0.1,
                        std::uint64_t seed = 0, double spread_tol = 1e-6);

}  // namespace matfit
