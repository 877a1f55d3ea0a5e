#include "fkwave/pdesim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fkwave/banded.hpp"

namespace fkwave {

SimulationState make_state(const EnvironmentProfile& prof, double c, double L, int N, std::vector<double> u0,
                           RightBC bc, double bc_value) {
  if (N < 5) throw std::invalid_argument("simulation needs at least 5 grid points");
  if (u0.size() != static_cast<size_t>(N)) throw std::invalid_argument("initial data has the wrong size");
  SimulationState s;
  s.c = c;
  s.L = L;
  s.alpha = prof.alpha();
  s.bc = bc;
  s.bc_value = bc_value;
  s.z.resize(N);
  s.a.resize(N);
  const double h = 2.0 * L / (N - 1);
  for (int i = 0; i < N; ++i) {
    s.z[i] = -L + i * h;
    s.a[i] = prof.a(s.z[i]);
  }
  s.z.back() = L;
  for (double v : u0)
    if (!(v >= 0.0)) throw std::invalid_argument("initial data must be nonnegative");
  s.u = std::move(u0);
  s.u[0] = s.a[0];
  if (bc == RightBC::Dirichlet) s.u.back() = bc_value;
  return s;
}

SimulationState make_state(const EnvironmentProfile& prof, const WaveSolution& w) {
  return make_state(prof, w.c, w.L, w.N, w.phi, w.bc, w.bc_value);
}

double default_time_step(const SimulationState& s) { return std::min(0.1 / s.alpha, 0.05); }

namespace {

double grid_step(const SimulationState& s) { return s.z[1] - s.z[0]; }

// row i of A u
double apply(const SimulationState& s, const std::vector<double>& u, size_t i) {
  const double h = grid_step(s), ih2 = 1.0 / (h * h), ch = s.c / (2.0 * h);
  const size_t m = u.size() - 1;
  if (i < m) return (u[i + 1] - 2.0 * u[i] + u[i - 1]) * ih2 + (u[i + 1] - u[i - 1]) * ch;
  double sl = s.bc == RightBC::Robin ? s.bc_value : 0.0;
  return 2.0 * (u[m - 1] - u[m]) * ih2 + (2.0 * sl / h + s.c * sl) * u[m];
}

}  // namespace

double pde_residual(const SimulationState& s) {
  const size_t n = s.u.size();
  const size_t last = s.bc == RightBC::Dirichlet ? n - 1 : n;
  double m = 0.0;
  for (size_t i = 1; i < last; ++i) m = std::max(m, std::abs(apply(s, s.u, i) + s.u[i] * (s.a[i] - s.u[i])));
  return m;
}

void step(SimulationState& s, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const size_t n = s.u.size();
  double react = 0.0;
  for (size_t i = 0; i < n; ++i) react = std::max(react, std::abs(s.a[i] - 2.0 * s.u[i]));
  if (dt * react >= 1.0)
    throw StepRejected("dt max|a - 2u| = " + std::to_string(dt * react) + " is not below 1", 0.5 / react);
  const double h = grid_step(s), ih2 = 1.0 / (h * h), ch = s.c / (2.0 * h);
  Tridiag M(n);
  std::vector<double> rhs(n);
  M.diag[0] = 1.0;
  rhs[0] = s.a[0];
  for (size_t i = 1; i + 1 < n; ++i) {
    M.lower[i] = -dt * (ih2 - ch);
    M.upper[i] = -dt * (ih2 + ch);
    M.diag[i] = 1.0 + 2.0 * dt * ih2;
    rhs[i] = s.u[i] + dt * s.u[i] * (s.a[i] - s.u[i]);
  }
  const size_t m = n - 1;
  if (s.bc == RightBC::Dirichlet) {
    M.diag[m] = 1.0;
    rhs[m] = s.bc_value;
  } else {
    double sl = s.bc == RightBC::Robin ? s.bc_value : 0.0;
    M.lower[m] = -dt * 2.0 * ih2;
    M.diag[m] = 1.0 + dt * (2.0 * ih2 - 2.0 * sl / h - s.c * sl);
    rhs[m] = s.u[m] + dt * s.u[m] * (s.a[m] - s.u[m]);
  }
  s.u = solve_tridiag(M, std::move(rhs));
  s.t += dt;
}

TrajectorySummary evolve(SimulationState& s, double T, double dt, const EvolveOptions& opt) {
  if (!(T > 0.0)) throw std::invalid_argument("evolution time must be positive");
  if (opt.reference && opt.reference->phi.size() != s.u.size())
    throw GridMismatch("reference wave lives on a different grid");
  TrajectorySummary out;
  out.min_u = *std::min_element(s.u.begin(), s.u.end());
  out.max_u = *std::max_element(s.u.begin(), s.u.end());
  const double t_end = s.t + T;
  double next_monitor = s.t;
  int ticks = 0;
  auto monitor = [&] {
    out.t.push_back(s.t);
    double d = std::numeric_limits<double>::quiet_NaN();
    if (opt.reference) {
      d = 0.0;
      for (size_t i = 0; i < s.u.size(); ++i) d = std::max(d, std::abs(s.u[i] - opt.reference->phi[i]));
    }
    out.distance.push_back(d);
    out.residual.push_back(pde_residual(s));
    double zf = s.z.front();
    for (size_t i = 0; i < s.u.size(); ++i)
      if (s.u[i] > 0.5 * s.alpha) zf = s.z[i];
    out.front.push_back(zf);
    if (opt.snapshot_every > 0 && ticks % opt.snapshot_every == 0) out.snapshots.push_back({s.t, s.u});
    ++ticks;
  };
  while (true) {
    if (s.t >= next_monitor - 1e-12) {
      monitor();
      next_monitor += opt.monitor_every;
    }
    if (s.t >= t_end - 1e-12) break;
    step(s, std::min(dt, t_end - s.t));
    for (double v : s.u) {
      out.min_u = std::min(out.min_u, v);
      out.max_u = std::max(out.max_u, v);
    }
  }
  if (out.t.empty() || out.t.back() < s.t) monitor();
  return out;
}

double comparison_test(SimulationState lo, SimulationState hi, double T, double dt) {
  if (lo.u.size() != hi.u.size() || lo.L != hi.L || lo.bc != hi.bc || lo.c != hi.c)
    throw GridMismatch("comparison needs identical grids and boundary rows");
  // pinned right values only need to be ordered
  if (lo.bc == RightBC::Dirichlet ? lo.bc_value > hi.bc_value : lo.bc_value != hi.bc_value)
    throw std::invalid_argument("boundary data of the two states are not ordered");
  auto violation = [&] {
    double v = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < lo.u.size(); ++i) v = std::max(v, lo.u[i] - hi.u[i]);
    return v;
  };
  double worst = violation();
  const double t_end = lo.t + T;
  while (lo.t < t_end - 1e-12) {
    double d = std::min(dt, t_end - lo.t);
    step(lo, d);
    step(hi, d);
    worst = std::max(worst, violation());
  }
  return worst;
}

}  // namespace fkwave
