#include "optim/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace matfit {

namespace {

constexpr double kFdStep = 1e-3;      // normalized-space central-difference step
constexpr double kArmijoC = 1e-4;
constexpr int kArmijoSteps = 20;      // halvings from t = 1
constexpr int kCgRestart = 19;
constexpr size_t kLbfgsMemory = 10;

// Shared run bookkeeping: budget fence, run-local best, trace extraction.
struct RunState {
  Objective& obj;
  long start;
  long max_evals;
  bool exhausted = false;
  bool has_best = false;
  double best_f = 0.0;
  ParamVector best_x{};

  RunState(Objective& o, long budget) : obj(o), start(o.evals()), max_evals(budget) {}

  long used() const { return obj.evals() - start; }

  // Budget-fenced evaluation; false (and no eval) once the budget is spent.
  bool ev(const ParamVector& x, double& f) {
    if (used() >= max_evals) {
      exhausted = true;
      return false;
    }
    f = obj.evaluate(x);
    if (!has_best || f < best_f) {
      has_best = true;
      best_f = f;
      best_x = x;
    }
    return true;
  }

  OptResult finish(const std::string& reason) const {
    OptResult res;
    res.x = best_x;
    res.value = best_f;
    res.evals = used();
    res.reason = reason;
    for (const Checkpoint& c : obj.checkpoints()) {
      if (c.evals > start) res.trace.push_back(c);
    }
    return res;
  }
};

void check_start(const Objective& obj, const ParamVector& x_init, long budget,
                 const char* who) {
  if (budget < 1) {
    fail(ErrorCode::kInvalidArgument, std::string(who) + ": budget must be at least 1");
  }
  if (!is_feasible(x_init, obj.bounds())) {
    fail(ErrorCode::kInfeasible, std::string(who) + ": initial point is out of bounds");
  }
}

}  // namespace

OptResult nelder_mead(Objective& obj, const ParamVector& x_init, long max_evals,
                      double spread_tol) {
  check_start(obj, x_init, max_evals, "nelder_mead");
  const Bounds& b = obj.bounds();
  const int m = obj.dim();
  RunState run(obj, max_evals);

  const double alpha = 1.0;
  const double gamma = 1.0 + 2.0 / m;
  const double rho = 0.75 - 1.0 / (2.0 * m);
  const double sigma = 1.0 - 1.0 / static_cast<double>(m);

  // x_init plus one 5%-of-range step per axis, reflected inward at the box.
  std::vector<ParamVector> xs(m + 1, x_init);
  std::vector<double> fs(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    const double h = 0.05 * (b.upper[i] - b.lower[i]);
    double v = x_init[i] + h;
    if (v > b.upper[i]) v = x_init[i] - h;
    xs[i + 1][i] = v;
  }
  // The initial simplex is evaluated unfenced: it is the one allowed
  // overshoot (<= m+1) when the budget is smaller than the simplex.
  for (int i = 0; i <= m; ++i) {
    fs[i] = obj.evaluate(xs[i]);
    if (!run.has_best || fs[i] < run.best_f) {
      run.has_best = true;
      run.best_f = fs[i];
      run.best_x = xs[i];
    }
  }

  std::vector<int> ord(m + 1);
  std::string reason = "max_evals";
  while (true) {
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int c) { return fs[a] < fs[c]; });
    const int worst = ord[m];
    if (fs[ord[m]] - fs[ord[0]] < spread_tol) {
      reason = "spread_tol";
      break;
    }
    if (run.used() >= max_evals) break;

    ParamVector cen = x_init;
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int k = 0; k <= m; ++k) {
        if (k != worst) s += xs[k][i];
      }
      cen[i] = s / m;
    }
    auto along = [&](double t) {  // cen + t*(cen - worst)
      ParamVector p = cen;
      for (int i = 0; i < m; ++i) p[i] = cen[i] + t * (cen[i] - xs[worst][i]);
      return p;
    };

    const ParamVector xr = along(alpha);
    double fr;
    if (!run.ev(xr, fr)) break;

    if (fr < fs[ord[0]]) {
      const ParamVector xe = along(alpha * gamma);
      double fe;
      if (!run.ev(xe, fe)) break;
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[ord[m - 1]]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }

    bool contracted = false;
    if (fr < fs[worst]) {  // outside
      const ParamVector xc = along(alpha * rho);
      double fc;
      if (!run.ev(xc, fc)) break;
      if (fc <= fr) {
        xs[worst] = xc;
        fs[worst] = fc;
        contracted = true;
      }
    } else {  // inside
      const ParamVector xc = along(-rho);
      double fc;
      if (!run.ev(xc, fc)) break;
      if (fc < fs[worst]) {
        xs[worst] = xc;
        fs[worst] = fc;
        contracted = true;
      }
    }
    if (contracted) continue;

    const int best = ord[0];
    bool aborted = false;
    for (int k = 0; k <= m; ++k) {
      if (k == best) continue;
      for (int i = 0; i < m; ++i) xs[k][i] = xs[best][i] + sigma * (xs[k][i] - xs[best][i]);
      if (!run.ev(xs[k], fs[k])) {
        aborted = true;
        break;
      }
    }
    if (aborted) break;
  }
  return run.finish(reason);
}

namespace {

// Gradient-method scaffolding in normalized coordinates. Mapping back to
// parameter space is intentionally unclamped so probes and steps can cross
// the box edge and hit the barrier.
struct FdSpace {
  const Bounds& b;
  int m;
  ParamVector tail;  // holds the frozen components beyond dim

  ParamVector to_x(const std::vector<double>& u) const {
    ParamVector x = tail;
    for (int i = 0; i < m; ++i) x[i] = b.lower[i] + u[i] * (b.upper[i] - b.lower[i]);
    return x;
  }
};

bool fd_gradient(RunState& run, const FdSpace& sp, const std::vector<double>& u,
                 std::vector<double>& g) {
  std::vector<double> probe = u;
  for (int i = 0; i < sp.m; ++i) {
    double fp, fm;
    probe[i] = u[i] + kFdStep;
    if (!run.ev(sp.to_x(probe), fp)) return false;
    probe[i] = u[i] - kFdStep;
    if (!run.ev(sp.to_x(probe), fm)) return false;
    probe[i] = u[i];
    g[i] = (fp - fm) / (2.0 * kFdStep);
  }
  return true;
}

double dot(const std::vector<double>& a, const std::vector<double>& c) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
  return s;
}

// Armijo backtracking from t = 1. Returns false when no step is acceptable
// (20 halvings exhausted) or the budget died; `accepted` disambiguates.
bool armijo(RunState& run, const FdSpace& sp, std::vector<double>& u, double& fcur,
            const std::vector<double>& d, double gd, bool& accepted) {
  accepted = false;
  double t = 1.0;
  std::vector<double> ut(u.size());
  for (int step = 0; step < kArmijoSteps; ++step) {
    for (size_t i = 0; i < u.size(); ++i) ut[i] = u[i] + t * d[i];
    double ft;
    if (!run.ev(sp.to_x(ut), ft)) return false;
    if (ft <= fcur + kArmijoC * t * gd) {
      u = ut;
      fcur = ft;
      accepted = true;
      return true;
    }
    t *= 0.5;
  }
  return true;
}

std::vector<double> normalize_dim(const ParamVector& x, const Bounds& b, int m) {
  std::vector<double> u(m);
  for (int i = 0; i < m; ++i) u[i] = (x[i] - b.lower[i]) / (b.upper[i] - b.lower[i]);
  return u;
}

}  // namespace

OptResult cg_fd(Objective& obj, const ParamVector& x_init, long max_evals) {
  check_start(obj, x_init, max_evals, "cg_fd");
  const int m = obj.dim();
  RunState run(obj, max_evals);
  FdSpace sp{obj.bounds(), m, x_init};

  std::vector<double> u = normalize_dim(x_init, sp.b, m);
  double fcur;
  if (!run.ev(x_init, fcur)) return run.finish("max_evals");

  std::vector<double> g(m), d(m);
  if (!fd_gradient(run, sp, u, g)) return run.finish("max_evals");
  for (int i = 0; i < m; ++i) d[i] = -g[i];
  int since_restart = 0;
  std::string reason = "max_evals";

  while (run.used() < max_evals) {
    const double gg = dot(g, g);
    if (gg < 1e-18) {
      reason = "line_search";  // stationary: gradient numerically zero
      break;
    }
    double gd = dot(g, d);
    if (gd >= 0.0) {  // not a descent direction; fall back to steepest
      for (int i = 0; i < m; ++i) d[i] = -g[i];
      gd = -gg;
      since_restart = 0;
    }
    bool accepted = false;
    const bool steepest = since_restart == 0;
    if (!armijo(run, sp, u, fcur, d, gd, accepted)) break;
    if (!accepted) {
      if (steepest) {
        reason = "line_search";  // cannot improve even along -g
        break;
      }
      for (int i = 0; i < m; ++i) d[i] = -g[i];
      since_restart = 0;
      continue;
    }
    std::vector<double> gn(m);
    if (!fd_gradient(run, sp, u, gn)) break;
    ++since_restart;
    if (since_restart >= kCgRestart) {
      for (int i = 0; i < m; ++i) d[i] = -gn[i];
      since_restart = 0;
    } else {
      double beta = 0.0;  // Polak-Ribiere, clipped at zero
      for (int i = 0; i < m; ++i) beta += gn[i] * (gn[i] - g[i]);
      beta = std::max(0.0, beta / gg);
      for (int i = 0; i < m; ++i) d[i] = -gn[i] + beta * d[i];
    }
    g = gn;
  }
  return run.finish(run.exhausted ? "max_evals" : reason);
}

OptResult lbfgs_fd(Objective& obj, const ParamVector& x_init, long max_evals) {
  check_start(obj, x_init, max_evals, "lbfgs_fd");
  const int m = obj.dim();
  RunState run(obj, max_evals);
  FdSpace sp{obj.bounds(), m, x_init};

  std::vector<double> u = normalize_dim(x_init, sp.b, m);
  double fcur;
  if (!run.ev(x_init, fcur)) return run.finish("max_evals");

  std::vector<double> g(m);
  if (!fd_gradient(run, sp, u, g)) return run.finish("max_evals");

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> hist;
  std::string reason = "max_evals";

  while (run.used() < max_evals) {
    if (dot(g, g) < 1e-18) {
      reason = "line_search";
      break;
    }
    // Two-loop recursion.
    std::vector<double> q = g;
    std::vector<double> a(hist.size());
    for (size_t k = hist.size(); k-- > 0;) {
      a[k] = hist[k].rho * dot(hist[k].s, q);
      for (int i = 0; i < m; ++i) q[i] -= a[k] * hist[k].y[i];
    }
    if (!hist.empty()) {
      const Pair& last = hist.back();
      const double scale = dot(last.s, last.y) / dot(last.y, last.y);
      for (int i = 0; i < m; ++i) q[i] *= scale;
    }
    for (size_t k = 0; k < hist.size(); ++k) {
      const double bk = hist[k].rho * dot(hist[k].y, q);
      for (int i = 0; i < m; ++i) q[i] += (a[k] - bk) * hist[k].s[i];
    }
    std::vector<double> d(m);
    for (int i = 0; i < m; ++i) d[i] = -q[i];

    double gd = dot(g, d);
    if (gd >= 0.0) {
      hist.clear();
      for (int i = 0; i < m; ++i) d[i] = -g[i];
      gd = -dot(g, g);
    }
    const std::vector<double> u_prev = u;
    bool accepted = false;
    if (!armijo(run, sp, u, fcur, d, gd, accepted)) break;
    if (!accepted) {
      if (hist.empty()) {
        reason = "line_search";
        break;
      }
      hist.clear();  // curvature model is off; retry from steepest descent
      continue;
    }
    std::vector<double> gn(m);
    if (!fd_gradient(run, sp, u, gn)) break;
    Pair p;
    p.s.resize(m);
    p.y.resize(m);
    for (int i = 0; i < m; ++i) {
      p.s[i] = u[i] - u_prev[i];
      p.y[i] = gn[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12) {
      p.rho = 1.0 / sy;
      hist.push_back(std::move(p));
      if (hist.size() > kLbfgsMemory) hist.pop_front();
    }
    g = gn;
  }
  return run.finish(run.exhausted ? "max_evals" : reason);
}

OptResult basin_hopping(Objective& obj, const ParamVector& x_init, long total_evals,
                        long local_evals, double temperature, double step_scale,
                        std::uint64_t seed, double spread_tol) {
  check_start(obj, x_init, total_evals, "basin_hopping");
  if (local_evals < 1) {
    fail(ErrorCode::kInvalidArgument, "basin_hopping: local budget must be at least 1");
  }
  const Bounds& b = obj.bounds();
  const int m = obj.dim();
  RunState run(obj, total_evals);
  Rng rng(seed);

  ParamVector cur = x_init;
  double fcur;
  run.ev(x_init, fcur);

  while (run.used() < total_evals) {
    ParamVector cand = cur;
    for (int i = 0; i < m; ++i) {
      const double range = b.upper[i] - b.lower[i];
      cand[i] = std::clamp(cur[i] + rng.gaussian() * step_scale * range, b.lower[i], b.upper[i]);
    }
    const long remaining = total_evals - run.used();
    const OptResult leg = nelder_mead(obj, cand, std::min(local_evals, remaining), spread_tol);
    if (!run.has_best || leg.value < run.best_f) {
      run.has_best = true;
      run.best_f = leg.value;
      run.best_x = leg.x;
    }
    const double delta = leg.value - fcur;
    bool accept = delta <= 0.0;
    if (!accept && temperature > 0.0) accept = rng.uniform() < std::exp(-delta / temperature);
    if (accept) {
      cur = leg.x;
      fcur = leg.value;
    }
  }
  return run.finish("max_evals");
}

}  // namespace matfit
