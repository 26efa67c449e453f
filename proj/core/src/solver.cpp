#include "optimize_internal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <thread>

namespace spheretile::detail {

namespace {

double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace

LbfgsOutcome minimize_lbfgs(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg,
    std::vector<double>& x, const LbfgsOptions& opt) {
  const std::size_t n = x.size();
  std::vector<double> g(n), g_new(n), x_new(n), d(n);
  std::deque<std::vector<double>> hist_s, hist_y;
  std::deque<double> hist_rho;

  LbfgsOutcome out;
  double f = fg(x, g);
  out.value = f;
  int stagnant = 0;

  for (int it = 0; it < opt.max_iterations; ++it) {
    if (inf_norm(g) <= opt.gtol) return out;

    // two-loop recursion for d = -H * g
    d.assign(g.begin(), g.end());
    std::vector<double> alpha(hist_s.size());
    for (int i = static_cast<int>(hist_s.size()) - 1; i >= 0; --i) {
      alpha[i] = hist_rho[i] * dot_v(hist_s[i], d);
      for (std::size_t k = 0; k < n; ++k) d[k] -= alpha[i] * hist_y[i][k];
    }
    if (!hist_s.empty()) {
      double gamma =
          dot_v(hist_s.back(), hist_y.back()) / std::max(1e-300, dot_v(hist_y.back(), hist_y.back()));
      for (double& v : d) v *= gamma;
    } else {
      double gn = inf_norm(g);
      double scale = gn > 1.0 ? 1.0 / gn : 1.0;
      for (double& v : d) v *= scale;
    }
    for (int i = 0; i < static_cast<int>(hist_s.size()); ++i) {
      double beta = hist_rho[i] * dot_v(hist_y[i], d);
      for (std::size_t k = 0; k < n; ++k) d[k] += (alpha[i] - beta) * hist_s[i][k];
    }
    for (double& v : d) v = -v;

    double gd = dot_v(g, d);
    if (!(gd < 0.0)) {  // not a descent direction: restart from steepest descent
      hist_s.clear();
      hist_y.clear();
      hist_rho.clear();
      double gn = inf_norm(g);
      double scale = gn > 1.0 ? 1.0 / gn : 1.0;
      for (std::size_t k = 0; k < n; ++k) d[k] = -g[k] * scale;
      gd = dot_v(g, d);
      if (!(gd < 0.0)) return out;  // zero gradient
    }

    // Armijo backtracking
    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 48; ++ls) {
      for (std::size_t k = 0; k < n; ++k) x_new[k] = x[k] + step * d[k];
      f_new = fg(x_new, g_new);
      if (f_new <= f + 1e-4 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // leave the backend eval'd at the incumbent
      f = fg(x, g);
      out.stalled = true;
      return out;
    }

    // curvature update
    std::vector<double> s(n), y(n);
    double sy = 0.0, ss = 0.0, yy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = x_new[k] - x[k];
      y[k] = g_new[k] - g[k];
      sy += s[k] * y[k];
      ss += s[k] * s[k];
      yy += y[k] * y[k];
    }
    if (sy > 1e-12 * std::sqrt(ss * yy)) {
      hist_s.push_back(std::move(s));
      hist_y.push_back(std::move(y));
      hist_rho.push_back(1.0 / sy);
      if (static_cast<int>(hist_s.size()) > opt.history) {
        hist_s.pop_front();
        hist_y.pop_front();
        hist_rho.pop_front();
      }
    }

    double drop = f - f_new;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    out.value = f;
    ++out.iterations;
    if (opt.on_accept) opt.on_accept(out.iterations, f);
    if (opt.should_stop && opt.should_stop()) return out;

    stagnant = drop <= opt.ftol * std::max(1.0, std::abs(f)) ? stagnant + 1 : 0;
    if (stagnant >= 8) return out;
  }
  out.exhausted = true;
  return out;
}

double max_violation_of(const ResidualBackend& backend) {
  double worst = 0.0;
  for (int i = 0; i < backend.ineq_count(); ++i) worst = std::max(worst, backend.ineq(i));
  for (int j = 0; j < backend.eq_count(); ++j) worst = std::max(worst, std::abs(backend.eq(j)));
  return worst;
}

SolveOutcome run_feasibility_solve(ResidualBackend& backend, const OptimizerConfig& cfg,
                                   std::vector<double>& x) {
  SolveOutcome out;

  // already feasible at the fine resolution: nothing to do
  backend.set_resolution(cfg.h_fine);
  backend.eval(x);
  if (max_violation_of(backend) <= cfg.tol_feas) return out;

  std::vector<double> lambda(backend.eq_count(), 0.0);

  // quadratic penalty rounds; equalities carry running multipliers
  double mu = cfg.mu0;
  for (int stage = 0; stage < cfg.penalty_stages; ++stage) {
    backend.rebase(x);
    backend.set_resolution(stage + 1 == cfg.penalty_stages ? cfg.h_fine : cfg.h_opt);

    auto fg = [&](const std::vector<double>& xv, std::vector<double>& grad) {
      backend.eval(xv);
      std::fill(grad.begin(), grad.end(), 0.0);
      double merit = 0.0;
      for (int i = 0; i < backend.ineq_count(); ++i) {
        double gi = backend.ineq(i);
        if (gi > 0.0) {
          double w = backend.ineq_weight(i);
          merit += w * 0.5 * mu * gi * gi;
          backend.add_ineq_grad(i, w * mu * gi, grad);
        }
      }
      for (int j = 0; j < backend.eq_count(); ++j) {
        double cj = backend.eq(j);
        double w = backend.eq_weight(j);
        merit += w * (lambda[j] * cj + 0.5 * mu * cj * cj);
        backend.add_eq_grad(j, w * (lambda[j] + mu * cj), grad);
      }
      return merit;
    };

    LbfgsOptions opt;
    opt.history = cfg.lbfgs_history;
    opt.max_iterations = cfg.max_inner_iterations;
    opt.gtol = 0.5 * cfg.tol_feas * mu;
    opt.ftol = 1e-14;
    if (cfg.trace)
      opt.on_accept = [&, stage](int it, double merit) { cfg.trace(stage, it, merit); };
    auto res = minimize_lbfgs(fg, x, opt);
    out.iterations += res.iterations;
    out.stalled = out.stalled || res.stalled;
    out.exhausted = out.exhausted || res.exhausted;

    for (int j = 0; j < backend.eq_count(); ++j)
      lambda[j] = std::clamp(lambda[j] + mu * backend.eq(j), -1e8, 1e8);
    mu *= cfg.penalty_factor;
  }

  // smoothed max-violation polish at the verification resolution
  backend.rebase(x);
  backend.set_resolution(cfg.h_fine);
  backend.eval(x);
  int polish_budget = cfg.polish_iterations;
  for (int round = 0; round < 6 && polish_budget > 0; ++round) {
    double vmax = max_violation_of(backend);
    if (vmax <= cfg.tol_feas) break;
    int terms = backend.ineq_count() + 2 * backend.eq_count();
    double beta = std::clamp(std::log(std::max(8.0, double(terms))) /
                                 std::max(cfg.tol_feas, vmax / 4.0),
                             1e2, 3e9);

    auto fg = [&](const std::vector<double>& xv, std::vector<double>& grad) {
      backend.eval(xv);
      std::fill(grad.begin(), grad.end(), 0.0);
      double top = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < backend.ineq_count(); ++i) top = std::max(top, backend.ineq(i));
      for (int j = 0; j < backend.eq_count(); ++j) top = std::max(top, std::abs(backend.eq(j)));
      double z = 0.0;
      for (int i = 0; i < backend.ineq_count(); ++i)
        z += backend.ineq_weight(i) * std::exp(beta * (backend.ineq(i) - top));
      for (int j = 0; j < backend.eq_count(); ++j) {
        double cj = backend.eq(j), w = backend.eq_weight(j);
        z += w * std::exp(beta * (cj - top)) + w * std::exp(beta * (-cj - top));
      }
      for (int i = 0; i < backend.ineq_count(); ++i) {
        double p = backend.ineq_weight(i) * std::exp(beta * (backend.ineq(i) - top)) / z;
        if (p > 1e-14) backend.add_ineq_grad(i, p, grad);
      }
      for (int j = 0; j < backend.eq_count(); ++j) {
        double cj = backend.eq(j), w = backend.eq_weight(j);
        double p = (w * std::exp(beta * (cj - top)) - w * std::exp(beta * (-cj - top))) / z;
        if (std::abs(p) > 1e-14) backend.add_eq_grad(j, p, grad);
      }
      return top + std::log(z) / beta;
    };

    LbfgsOptions opt;
    opt.history = cfg.lbfgs_history;
    opt.max_iterations = polish_budget;
    opt.gtol = 1e-13;
    opt.ftol = 1e-15;
    opt.should_stop = [&]() { return max_violation_of(backend) <= cfg.tol_feas; };
    if (cfg.trace)
      opt.on_accept = [&, round](int it, double merit) {
        cfg.trace(cfg.penalty_stages + round, it, merit);
      };
    auto res = minimize_lbfgs(fg, x, opt);
    out.iterations += res.iterations;
    polish_budget -= std::max(1, res.iterations);
    if (res.exhausted) out.exhausted = true;
    if (res.stalled && max_violation_of(backend) > cfg.tol_feas && beta >= 3e9) {
      out.stalled = true;
      break;
    }
  }
  backend.eval(x);
  return out;
}

int resolve_threads(const OptimizerConfig& cfg) {
  int t = cfg.threads;
  if (t <= 0) {
    if (const char* env = std::getenv("SPHERETILE_THREADS")) t = std::atoi(env);
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(t, 1, 16);
}

void parallel_ranges(int n, int threads, const std::function<void(int, int)>& fn) {
  if (threads <= 1 || n < 256) {
    fn(0, n);
    return;
  }
  int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  int chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(fn, lo, hi);
  }
  fn(0, std::min(chunk, n));
  for (auto& th : pool) th.join();
}

}  // namespace spheretile::detail
