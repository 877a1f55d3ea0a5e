#include "fkwave/wavesolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fkwave/banded.hpp"
#include "fkwave/oracles.hpp"

namespace fkwave {

void SolverConfig::validate() const {
  if (!(L > 0.0)) throw ConfigError("solver.L", "must be positive");
  if (N < 1001) throw ConfigError("solver.N", "must be at least 1001");
  if (!(newton_tol >= 1e-12)) throw ConfigError("solver.newton_tol", "must be at least 1e-12");
  if (max_iter < 1) throw ConfigError("solver.max_iter", "must be positive");
  if (max_halvings < 0 || max_halvings > 30) throw ConfigError("solver.max_halvings", "must lie in [0, 30]");
  if (!(continuation_step > 0.0)) throw ConfigError("solver.continuation_step", "must be positive");
  if (!(dt0 > 0.0)) throw ConfigError("solver.dt0", "must be positive");
}

SolverConfig default_solver_config(const EnvironmentProfile& prof) {
  SolverConfig cfg;
  if (std::holds_alternative<ExpTail>(prof.tail())) {
    cfg.L = 60.0;
    cfg.N = 4001;
  }
  return cfg;
}

std::string right_bc_name(RightBC b) {
  switch (b) {
    case RightBC::Robin: return "robin";
    case RightBC::Dirichlet: return "dirichlet";
    case RightBC::Neumann: return "neumann";
  }
  return "?";
}

std::string start_kind_name(StartKind s) {
  switch (s) {
    case StartKind::SubSolution: return "sub";
    case StartKind::Tanh: return "tanh";
    case StartKind::SuperSolution: return "super";
  }
  return "?";
}

std::string wave_status_name(WaveStatus s) {
  switch (s) {
    case WaveStatus::Converged: return "converged";
    case WaveStatus::NoPositiveWave: return "no-positive-wave";
    case WaveStatus::NewtonDiverged: return "newton-diverged";
  }
  return "?";
}

RightBC target_bc(const EnvironmentProfile& prof, double c, const DecayAnsatz& target, double L, double& value) {
  if (target.kind == DecayKind::SlowMaximal && !std::isfinite(tail_mass_ratio(prof, c, L))) {
    // the truncated law c*ta/int_z^Zmax ta tends to tilde_a's log-derivative as Zmax grows
    value = -prof.a(L) / c;
    return RightBC::Robin;
  }
  value = AnsatzEvaluator(prof, c, target).log_derivative(L);
  return RightBC::Robin;
}

namespace {

struct Grid {
  std::vector<double> z, a;
  double h;
};

Grid make_grid(const EnvironmentProfile& prof, const SolverConfig& cfg) {
  Grid g;
  g.h = cfg.h();
  g.z.resize(cfg.N);
  g.a.resize(cfg.N);
  for (int i = 0; i < cfg.N; ++i) {
    g.z[i] = -cfg.L + i * g.h;
    g.a[i] = prof.a(g.z[i]);
  }
  g.z.back() = cfg.L;
  return g;
}

// F(phi) with the left Dirichlet row and the chosen right row
void residual(const Grid& g, double c, RightBC bc, double bcv, const std::vector<double>& p, std::vector<double>& F) {
  const size_t n = p.size();
  const double h = g.h, ih2 = 1.0 / (h * h), ch = c / (2.0 * h);
  F.resize(n);
  F[0] = p[0] - g.a[0];
  for (size_t i = 1; i + 1 < n; ++i)
    F[i] = (p[i + 1] - 2.0 * p[i] + p[i - 1]) * ih2 + (p[i + 1] - p[i - 1]) * ch + p[i] * (g.a[i] - p[i]);
  size_t m = n - 1;
  switch (bc) {
    case RightBC::Dirichlet: F[m] = p[m] - bcv; break;
    case RightBC::Neumann:
    case RightBC::Robin: {
      double s = bc == RightBC::Robin ? bcv : 0.0;
      // ghost point phi_{n} = phi_{n-2} + 2 h s phi_{n-1}
      F[m] = 2.0 * (p[m - 1] - p[m]) * ih2 + (2.0 * s / h + c * s) * p[m] + p[m] * (g.a[m] - p[m]);
      break;
    }
  }
}

void jacobian(const Grid& g, double c, RightBC bc, double bcv, const std::vector<double>& p, Tridiag& J) {
  const size_t n = p.size();
  const double h = g.h, ih2 = 1.0 / (h * h), ch = c / (2.0 * h);
  J = Tridiag(n);
  J.diag[0] = 1.0;
  for (size_t i = 1; i + 1 < n; ++i) {
    J.lower[i] = ih2 - ch;
    J.upper[i] = ih2 + ch;
    J.diag[i] = -2.0 * ih2 + g.a[i] - 2.0 * p[i];
  }
  size_t m = n - 1;
  if (bc == RightBC::Dirichlet) {
    J.diag[m] = 1.0;
  } else {
    double s = bc == RightBC::Robin ? bcv : 0.0;
    J.lower[m] = 2.0 * ih2;
    J.diag[m] = -2.0 * ih2 + 2.0 * s / h + c * s + g.a[m] - 2.0 * p[m];
  }
}

constexpr double kMonotoneDtMax = 1e6;
constexpr double kScaledTol = 1e-6;

// largest |F_i| relative to the size of the terms in row i; rows whose terms all underflow are skipped
double scaled_residual(const Grid& g, double c, RightBC bc, double bcv, const std::vector<double>& p,
                       const std::vector<double>& F) {
  const size_t n = p.size();
  const double h = g.h, ih2 = 1.0 / (h * h), ch = c / (2.0 * h);
  double worst = 0.0;
  auto take = [&](double f, double scale) {
    if (scale > 1e-290) worst = std::max(worst, std::abs(f) / scale);
  };
  for (size_t i = 1; i + 1 < n; ++i)
    take(F[i], (std::abs(p[i + 1]) + 2.0 * std::abs(p[i]) + std::abs(p[i - 1])) * ih2 +
                   (std::abs(p[i + 1]) + std::abs(p[i - 1])) * std::abs(ch) +
                   std::abs(p[i]) * (std::abs(g.a[i]) + std::abs(p[i])));
  size_t m = n - 1;
  if (bc != RightBC::Dirichlet) {
    double s = bc == RightBC::Robin ? bcv : 0.0;
    take(F[m], 2.0 * (std::abs(p[m - 1]) + std::abs(p[m])) * ih2 + std::abs(2.0 * s / h + c * s) * std::abs(p[m]) +
                   std::abs(p[m]) * (std::abs(g.a[m]) + std::abs(p[m])));
  }
  return worst;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

}  // namespace

std::vector<double> initial_guess(const EnvironmentProfile& prof, double c, const DecayAnsatz& target,
                                  const SolverConfig& cfg, StartKind start) {
  Grid g = make_grid(prof, cfg);
  const double alpha = prof.alpha();
  const bool slow = target.kind == DecayKind::TildeA || target.kind == DecayKind::SlowMaximal ||
                    target.kind == DecayKind::ProfileItself;
  std::vector<double> u(g.z.size(), 0.0);
  switch (start) {
    case StartKind::Tanh: {
      // slow targets hand over to the ansatz on the right, otherwise the tanh tail sits in the
      // basin of the minimal wave
      std::optional<AnsatzEvaluator> ev;
      if (slow) {
        DecayAnsatz t = target;
        if (t.kind == DecayKind::SlowMaximal && !std::isfinite(tail_mass_ratio(prof, c, cfg.L))) t.kind = DecayKind::TildeA;
        ev.emplace(prof, c, t);
      }
      double z0 = std::max(target.z0, prof.z_switch());
      for (size_t i = 0; i < u.size(); ++i) {
        double t = std::tanh((g.z[i] - prof.center()) / 2.0);
        u[i] = 0.5 * alpha * (1.0 - t);
        if (ev && g.z[i] >= z0) {
          double v = ev->value(g.z[i]);
          if (std::isfinite(v)) u[i] += 0.5 * (1.0 + t) * std::min(alpha, v);
        }
      }
      break;
    }
    case StartKind::SubSolution: {
      std::vector<ComparisonFunction> subs;
      try {
        subs.push_back(cos_bump_sub(prof, c));
      } catch (const NotApplicable&) {
      }
      if (slow) {
        try {
          subs.push_back(slow_sub(prof, c));
        } catch (const NotApplicable&) {
        }
      }
      for (size_t i = 0; i < u.size(); ++i)
        for (const auto& f : subs) u[i] = std::max(u[i], f(g.z[i]));
      break;
    }
    case StartKind::SuperSolution: {
      if (slow || !(c > 0.0)) {
        std::fill(u.begin(), u.end(), alpha);
      } else {
        ComparisonFunction f = exp_super(prof, c, 0.5 * c);
        for (size_t i = 0; i < u.size(); ++i) u[i] = f(g.z[i]);
      }
      break;
    }
  }
  u[0] = g.a[0];
  return u;
}

WaveOutcome solve_wave_from(const EnvironmentProfile& prof, double c, const DecayAnsatz& target,
                            const SolverConfig& cfg, std::vector<double> p, RightBC bc, double bcv) {
  cfg.validate();
  if (p.size() != static_cast<size_t>(cfg.N)) throw std::invalid_argument("initial guess has the wrong size");
  Grid g = make_grid(prof, cfg);
  const double tol = cfg.newton_tol * std::max(1.0, prof.alpha());
  const size_t n = p.size();
  WaveOutcome out;
  std::vector<double> F, Ft, trial(n);
  Tridiag J;
  residual(g, c, bc, bcv, p, F);
  double norm = max_abs(F);
  double dt = cfg.dt0;
  int it = 0;
  out.residual_history.push_back(norm);
  // pseudo-transient continuation: implicit Euler on phi_t = F(phi), dt grows as the residual falls.
  // A step is tried with the full Jacobian first; if it loses positivity or fails to reduce the
  // residual, the destabilizing part of the reaction derivative is dropped so the step is an
  // M-matrix solve (monotone, like one implicit PDE step).
  auto step = [&](bool monotone, double dtv, std::vector<double>& dp) {
    jacobian(g, c, bc, bcv, p, J);
    std::vector<double> rhs(n);
    for (size_t i = 0; i < n; ++i) rhs[i] = -F[i];
    double idt = dtv > 1e10 ? 0.0 : 1.0 / dtv;
    for (size_t i = 1; i < n; ++i) {
      if (i == n - 1 && bc == RightBC::Dirichlet) continue;
      if (monotone) J.diag[i] -= std::max(g.a[i] - 2.0 * p[i], 0.0);
      J.diag[i] -= idt;
    }
    dp = solve_tridiag(J, rhs);
  };
  auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
  };
  std::vector<double> dp;
  for (; it < cfg.max_iter && norm > tol; ++it) {
    bool pure_newton = dt > 1e10;
    double tnorm = std::numeric_limits<double>::infinity();
    bool accepted = false;
    try {
      step(false, dt, dp);
      double lam = 1.0;
      for (int k = 0; k <= (pure_newton ? cfg.max_halvings : 0); ++k, lam *= 0.5) {
        for (size_t i = 0; i < n; ++i) trial[i] = p[i] + lam * dp[i];
        residual(g, c, bc, bcv, trial, Ft);
        tnorm = max_abs(Ft);
        if (tnorm < norm && (positive(trial) || !positive(p))) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        step(true, std::min(dt, kMonotoneDtMax), dp);
        for (size_t i = 0; i < n; ++i) trial[i] = p[i] + dp[i];
        residual(g, c, bc, bcv, trial, Ft);
        tnorm = max_abs(Ft);
        accepted = std::isfinite(tnorm);
      }
    } catch (const std::runtime_error&) {
      accepted = false;
    }
    if (!accepted) {
      dt *= 0.1;
      if (dt < 1e-10) {
        out.message = "pseudo-time step collapsed";
        break;
      }
      continue;
    }
    std::swap(p, trial);
    std::swap(F, Ft);
    dt = std::clamp(dt * norm / tnorm, 1e-6, 1e12);
    norm = tnorm;
    out.residual_history.push_back(norm);
  }

  // a few undamped Newton steps once the absolute test passes, so the tail is resolved relative to
  // its own size and not only to the tolerance
  if (norm <= tol) {
    for (int k = 0; k < 3; ++k) {
      // solve for the new iterate itself, J p_new = J p - F, so tiny tail values do not cancel
      jacobian(g, c, bc, bcv, p, J);
      std::vector<double> rhs(n);
      for (size_t i = 0; i < n; ++i) {
        double jp = J.diag[i] * p[i];
        if (i > 0) jp += J.lower[i] * p[i - 1];
        if (i + 1 < n) jp += J.upper[i] * p[i + 1];
        rhs[i] = jp - F[i];
      }
      // interior rows reduce to -p^2 exactly
      for (size_t i = 1; i + 1 < n; ++i) rhs[i] = -p[i] * p[i];
      if (bc != RightBC::Dirichlet) rhs[n - 1] = -p[n - 1] * p[n - 1];
      try {
        trial = solve_tridiag(J, rhs);
      } catch (const std::runtime_error&) {
        break;
      }
      residual(g, c, bc, bcv, trial, Ft);
      double tnorm = max_abs(Ft);
      if (!(tnorm <= tol) || !positive(trial)) break;
      std::swap(p, trial);
      std::swap(F, Ft);
      norm = tnorm;
    }
  }

  WaveSolution& w = out.solution;
  w.c = c;
  w.L = cfg.L;
  w.N = cfg.N;
  w.z = g.z;
  w.phi = p;
  w.residual_norm = norm;
  w.iterations = it;
  w.target = target;
  w.bc = bc;
  w.bc_value = bcv;
  if (!(norm <= tol)) {
    out.status = WaveStatus::NewtonDiverged;
    if (out.message.empty()) out.message = "residual " + std::to_string(norm) + " after " + std::to_string(it) + " iterations";
    return out;
  }
  double srel = scaled_residual(g, c, bc, bcv, p, F);
  if (!(srel <= kScaledTol)) {
    out.status = WaveStatus::NewtonDiverged;
    out.message = "equations hold only in absolute terms (scaled residual " + std::to_string(srel) +
                  "); the tail does not satisfy the boundary law";
    return out;
  }
  const double alpha = prof.alpha();
  auto neg = std::find_if(p.begin(), p.end(), [](double x) { return !(x > 0.0); });
  if (neg != p.end()) {
    out.status = WaveStatus::NoPositiveWave;
    out.message = "converged profile is not positive at z = " + std::to_string(g.z[neg - p.begin()]);
    return out;
  }
  // a profile that drops to alpha/2 within the first quarter of the half-domain is a boundary layer
  // glued to the Dirichlet data, not a front that keeps pace with the habitat
  double zf = front_position(w, alpha);
  if (zf < -cfg.L + 0.25 * cfg.L) {
    out.status = WaveStatus::NoPositiveWave;
    out.message = "front collapsed onto the left boundary (front at z = " + std::to_string(zf) + ")";
    return out;
  }
  out.status = WaveStatus::Converged;
  return out;
}

WaveOutcome solve_wave(const EnvironmentProfile& prof, double c, const DecayAnsatz& target, const SolverConfig& cfg,
                       StartKind start) {
  cfg.validate();
  double bcv = 0.0;
  RightBC bc = target_bc(prof, c, target, cfg.L, bcv);
  return solve_wave_from(prof, c, target, cfg, initial_guess(prof, c, target, cfg, start), bc, bcv);
}

ContinuationResult continuation_in_c(const EnvironmentProfile& prof, const std::vector<double>& cs, DecayKind kind,
                                     const SolverConfig& cfg) {
  ContinuationResult res;
  std::optional<std::vector<double>> warm;
  for (double c : cs) {
    DecayAnsatz target{kind, prof.z_switch(), 1.0};
    double bcv = 0.0;
    RightBC bc = target_bc(prof, c, target, cfg.L, bcv);
    WaveOutcome o = warm ? solve_wave_from(prof, c, target, cfg, *warm, bc, bcv)
                         : solve_wave(prof, c, target, cfg, StartKind::Tanh);
    if (!o.ok() && warm) {
      WaveOutcome cold = solve_wave(prof, c, target, cfg, StartKind::Tanh);
      if (cold.ok()) o = std::move(cold);
    }
    if (o.ok())
      warm = o.solution.phi;
    else if (!res.first_failure)
      res.first_failure = c;
    res.cs.push_back(c);
    res.outcomes.push_back(std::move(o));
  }
  return res;
}

std::vector<WaveOutcome> wave_family(const EnvironmentProfile& prof, double c, const std::vector<double>& Ks,
                                     double z0, const SolverConfig& cfg) {
  std::vector<WaveOutcome> out;
  for (double K : Ks) {
    DecayAnsatz target{DecayKind::TildeA, z0, K};
    double pin = AnsatzEvaluator(prof, c, target).value(cfg.L);
    auto guess = initial_guess(prof, c, target, cfg, StartKind::Tanh);
    out.push_back(solve_wave_from(prof, c, target, cfg, std::move(guess), RightBC::Dirichlet, pin));
  }
  return out;
}

double discrete_residual(const EnvironmentProfile& prof, const WaveSolution& w) {
  SolverConfig cfg;
  cfg.L = w.L;
  cfg.N = w.N;
  Grid g = make_grid(prof, cfg);
  std::vector<double> F;
  residual(g, w.c, w.bc, w.bc_value, w.phi, F);
  return max_abs(F);
}

double continuum_residual(const EnvironmentProfile& prof, const WaveSolution& w) {
  const auto& p = w.phi;
  const double h = w.z[1] - w.z[0];
  double m = 0.0;
  // skip a margin at each end so the wide stencil stays inside
  for (size_t i = 2; i + 2 < p.size(); ++i) {
    double d1 = (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) / (12.0 * h);
    double d2 = (-p[i + 2] + 16.0 * p[i + 1] - 30.0 * p[i] + 16.0 * p[i - 1] - p[i - 2]) / (12.0 * h * h);
    m = std::max(m, std::abs(d2 + w.c * d1 + p[i] * (prof.a(w.z[i]) - p[i])));
  }
  return m;
}

double front_position(const WaveSolution& w, double alpha) {
  double zf = w.z.front();
  for (size_t i = 0; i < w.phi.size(); ++i)
    if (w.phi[i] >= 0.5 * alpha) zf = w.z[i];
  return zf;
}

OrderingReport ordering_check(const std::vector<const WaveSolution*>& waves, double tol) {
  OrderingReport r;
  if (waves.empty()) return r;
  for (const auto* w : waves) {
    if (w->N != waves[0]->N || w->L != waves[0]->L)
      throw GridMismatch("waves live on different grids; resample before comparing");
  }
  std::vector<size_t> idx(waves.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto mass = [&](size_t k) { return std::accumulate(waves[k]->phi.begin(), waves[k]->phi.end(), 0.0); };
  std::sort(idx.begin(), idx.end(), [&](size_t x, size_t y) { return mass(x) < mass(y); });
  r.violation.assign(waves.size(), std::vector<double>(waves.size(), 0.0));
  for (size_t a = 0; a < idx.size(); ++a)
    for (size_t b = a + 1; b < idx.size(); ++b) {
      const auto& lo = waves[idx[a]]->phi;
      const auto& hi = waves[idx[b]]->phi;
      double v = 0.0;
      for (size_t i = 0; i < lo.size(); ++i) v = std::max(v, lo[i] - hi[i]);
      r.violation[idx[a]][idx[b]] = v;
      r.max_violation = std::max(r.max_violation, v);
    }
  r.ordered = r.max_violation <= tol;
  return r;
}

}  // namespace fkwave
