#include "fkwave/localsolve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "fkwave/banded.hpp"

namespace fkwave {

namespace odeint = boost::numeric::odeint;

namespace {

struct Stop {
  std::string why;
};

bool exponential(DecayKind k) { return k == DecayKind::PureExp || k == DecayKind::Sigma1Int; }

std::vector<double> descending_grid(double z_hi, double z_lo, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = z_hi - (z_hi - z_lo) * i / (n - 1);
  t.back() = z_lo;
  return t;
}

// fills an ascending solution from a backward sweep recorded in descending order
void store(LocalSolution& s, const std::vector<double>& zs, const std::vector<double>& ls,
           const std::vector<double>& ths) {
  const size_t m = zs.size();
  s.grid.resize(m);
  s.log_psi.resize(m);
  s.psi.resize(m);
  s.dpsi.resize(m);
  for (size_t i = 0; i < m; ++i) {
    size_t j = m - 1 - i;
    s.grid[i] = zs[j];
    s.log_psi[i] = ls[j];
    s.psi[i] = std::exp(ls[j]);
    s.dpsi[i] = ths[j] * s.psi[i];
  }
}

void sweep_exponential(const EnvironmentProfile& prof, double c, double z_hi, const std::vector<double>& times,
                       double l0, double th0, const LocalSolveOptions& opt, LocalSolution& s) {
  using State = std::array<double, 2>;
  const double lmax = std::log(2.0 * prof.alpha());
  auto sys = [&](const State& x, State& dx, double z) {
    dx[0] = x[1];
    dx[1] = -x[1] * x[1] - c * x[1] - prof.a(z) + std::exp(x[0]);
  };
  std::vector<double> zs, ls, ths;
  auto obs = [&](const State& x, double z) {
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) throw Stop{"state is not finite"};
    if (x[0] >= lmax) throw Stop{"psi reached 2 alpha"};
    zs.push_back(z);
    ls.push_back(x[0]);
    ths.push_back(x[1]);
  };
  State x{l0, th0};
  try {
    odeint::integrate_times(odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>()),
                            sys, x, times.begin(), times.end(), -1e-3 * std::max(1.0, z_hi - times.back()), obs);
  } catch (const Stop& e) {
    s.truncated = true;
    s.message = e.why + " at z = " + std::to_string(zs.empty() ? z_hi : zs.back());
  } catch (const std::exception& e) {
    s.truncated = true;
    s.message = e.what();
  }
  store(s, zs, ls, ths);
}

// slope on the slow manifold: the root of theta^2 + c theta + a - psi near zero plus its first correction
double slow_slope(const EnvironmentProfile& prof, double c, double z, double psi) {
  double a = prof.a(z);
  double D = c * c - 4.0 * (a - psi);
  if (D < 0.0) throw Stop{"slow manifold lost (a - psi > c^2/4)"};
  double sd = std::sqrt(D);
  double s0 = -2.0 * (a - psi) / (c + sd);
  return s0 + (prof.da(z) - psi * s0) / D;
}

void sweep_slow(const EnvironmentProfile& prof, double c, double z_hi, const std::vector<double>& times, double l0,
                const LocalSolveOptions& opt, LocalSolution& s) {
  using State = std::array<double, 1>;
  const double lmax = std::log(2.0 * prof.alpha());
  auto sys = [&](const State& x, State& dx, double z) { dx[0] = slow_slope(prof, c, z, std::exp(x[0])); };
  std::vector<double> zs, ls, ths;
  auto obs = [&](const State& x, double z) {
    if (!std::isfinite(x[0])) throw Stop{"state is not finite"};
    if (x[0] >= lmax) throw Stop{"psi reached 2 alpha"};
    zs.push_back(z);
    ls.push_back(x[0]);
    ths.push_back(slow_slope(prof, c, z, std::exp(x[0])));
  };
  State x{l0};
  try {
    odeint::integrate_times(odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>()),
                            sys, x, times.begin(), times.end(), -1e-3 * std::max(1.0, z_hi - times.back()), obs);
  } catch (const Stop& e) {
    s.truncated = true;
    s.message = e.why + " at z = " + std::to_string(zs.empty() ? z_hi : zs.back());
  } catch (const std::exception& e) {
    s.truncated = true;
    s.message = e.what();
  }
  store(s, zs, ls, ths);
}

// Newton on the full equation over the stored grid: psi fixed at the right end, the slope of the
// sweep kept at the left end. Interior rows use 4th-order stencils; each step solves with the
// 2nd-order tridiagonal Jacobian (defect correction).
void polish(const EnvironmentProfile& prof, double c, LocalSolution& s) {
  const size_t n = s.grid.size();
  if (n < 7) return;
  const double h = s.grid[1] - s.grid[0], ih2 = 1.0 / (h * h), ch = c / (2.0 * h);
  const double th0 = s.dpsi[0] / s.psi[0];
  const double right = s.psi.back();
  std::vector<double> a(n);
  for (size_t i = 0; i < n; ++i) a[i] = prof.a(s.grid[i]);
  std::vector<double> p = s.psi, G(n);
  double change = 1.0;
  for (int it = 0; it < 100 && change > 1e-14; ++it) {
    Tridiag J(n);
    // ghost psi_{-1} = psi_1 - 2 h th0 psi_0
    G[0] = 2.0 * (p[1] - p[0]) * ih2 - 2.0 * th0 * p[0] / h + c * th0 * p[0] + p[0] * (a[0] - p[0]);
    J.upper[0] = 2.0 * ih2;
    J.diag[0] = -2.0 * ih2 - 2.0 * th0 / h + c * th0 + a[0] - 2.0 * p[0];
    for (size_t i = 1; i + 1 < n; ++i) {
      J.lower[i] = ih2 - ch;
      J.upper[i] = ih2 + ch;
      J.diag[i] = -2.0 * ih2 + a[i] - 2.0 * p[i];
      if (i < 2 || i + 2 >= n) {
        G[i] = (p[i + 1] - 2.0 * p[i] + p[i - 1]) * ih2 + (p[i + 1] - p[i - 1]) * ch;
      } else {
        G[i] = (-p[i + 2] + 16.0 * p[i + 1] - 30.0 * p[i] + 16.0 * p[i - 1] - p[i - 2]) * ih2 / 12.0 +
               c * (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) / (12.0 * h);
      }
      G[i] += p[i] * (a[i] - p[i]);
    }
    J.diag[n - 1] = 1.0;
    G[n - 1] = p[n - 1] - right;
    for (double& g : G) g = -g;
    std::vector<double> d = solve_tridiag(J, G);
    change = 0.0;
    for (size_t i = 0; i < n; ++i) {
      p[i] += d[i];
      if (!(p[i] > 0.0)) throw Stop{"Newton correction lost positivity"};
      change = std::max(change, std::abs(d[i]) / p[i]);
    }
  }
  if (change > 1e-10) throw Stop{"Newton correction did not settle"};
  s.psi = p;
  for (size_t i = 0; i < n; ++i) s.log_psi[i] = std::log(p[i]);
  // 4th-order differences throughout, one-sided at the ends
  const size_t m = n - 1;
  s.dpsi[0] = (-25.0 * p[0] + 48.0 * p[1] - 36.0 * p[2] + 16.0 * p[3] - 3.0 * p[4]) / (12.0 * h);
  s.dpsi[1] = (-3.0 * p[0] - 10.0 * p[1] + 18.0 * p[2] - 6.0 * p[3] + p[4]) / (12.0 * h);
  for (size_t i = 2; i + 2 < n; ++i) s.dpsi[i] = (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) / (12.0 * h);
  s.dpsi[m - 1] = (3.0 * p[m] + 10.0 * p[m - 1] - 18.0 * p[m - 2] + 6.0 * p[m - 3] - p[m - 4]) / (12.0 * h);
  s.dpsi[m] = (25.0 * p[m] - 48.0 * p[m - 1] + 36.0 * p[m - 2] - 16.0 * p[m - 3] + 3.0 * p[m - 4]) / (12.0 * h);
}

}  // namespace

std::pair<double, double> seed_state(const EnvironmentProfile& prof, double c, const DecayAnsatz& ansatz, double z_hi) {
  if (z_hi < std::max(prof.z_star(), tail_z_safe(prof.tail())))
    throw std::invalid_argument("seed point must lie beyond z* and the tail's safe range");
  AnsatzEvaluator ev(prof, c, ansatz);
  double v = ev.value(z_hi);
  double th = ev.log_derivative(z_hi);
  if (!(v > 0.0) || !std::isfinite(th)) throw std::domain_error("ansatz is undefined at z = " + std::to_string(z_hi));
  return {v, th * v};
}

LocalSolution integrate_local(const EnvironmentProfile& prof, double c, const DecayAnsatz& ansatz, double z_hi,
                              double z_lo, const LocalSolveOptions& opt) {
  if (!(z_lo < z_hi)) throw std::invalid_argument("integrate_local needs z_lo < z_hi");
  auto [v, dv] = seed_state(prof, c, ansatz, z_hi);
  LocalSolution s;
  s.c = c;
  s.family = ansatz;
  s.K = ansatz.K;
  AnsatzEvaluator ev(prof, c, ansatz);
  const double l0 = ev.log_value(z_hi), th0 = dv / v;
  int n = opt.points;
  if (exponential(ansatz.kind)) {
    if (n <= 0) n = static_cast<int>(std::ceil((z_hi - z_lo) / 0.025)) + 1;
    sweep_exponential(prof, c, z_hi, descending_grid(z_hi, z_lo, std::max(n, 5)), l0, th0, opt, s);
  } else {
    if (n <= 0) n = 4001;
    sweep_slow(prof, c, z_hi, descending_grid(z_hi, z_lo, std::max(n, 5)), l0, opt, s);
    try {
      polish(prof, c, s);
    } catch (const Stop& e) {
      s.truncated = true;
      s.message = e.why;
    } catch (const std::runtime_error& e) {
      s.truncated = true;
      s.message = e.what();
    }
  }
  s.max_relative_residual = local_residual(prof, s);
  return s;
}

double local_residual(const EnvironmentProfile& prof, const LocalSolution& s) {
  const size_t n = s.grid.size();
  if (n < 7) return 0.0;
  const double h = s.grid[1] - s.grid[0];
  double worst = 0.0;
  for (size_t i = 3; i + 3 < n; ++i) {
    // psi'_j / psi_i, kept in log form so tiny tails do not underflow
    auto r = [&](size_t j) { return (s.dpsi[j] / s.psi[j]) * std::exp(s.log_psi[j] - s.log_psi[i]); };
    double d2 = (r(i + 3) - 9.0 * r(i + 2) + 45.0 * r(i + 1) - 45.0 * r(i - 1) + 9.0 * r(i - 2) - r(i - 3)) / (60.0 * h);
    double res = d2 + s.c * s.dpsi[i] / s.psi[i] + prof.a(s.grid[i]) - s.psi[i];
    worst = std::max(worst, std::abs(res) * s.psi[i] / std::max(s.psi[i], 1e-300));
  }
  return worst;
}

size_t tail_window_start(const std::vector<double>& grid) {
  if (grid.empty()) return 0;
  double cut = grid.back() - 0.2 * (grid.back() - grid.front());
  auto it = std::lower_bound(grid.begin(), grid.end(), cut);
  return static_cast<size_t>(it - grid.begin());
}

CheckResult tail_law_check(const EnvironmentProfile& prof, const LocalSolution& s) {
  CheckResult r;
  if (s.grid.size() < 2) {
    r.name = "tail law";
    return r;
  }
  const size_t w = tail_window_start(s.grid);
  const DecayAnsatz& f = s.family;
  AnsatzEvaluator ev(prof, s.c, f);
  std::vector<size_t> idx;
  const size_t stride = std::max<size_t>(1, (s.grid.size() - w) / 50);
  for (size_t i = w; i < s.grid.size(); i += stride) idx.push_back(i);
  if (idx.back() != s.grid.size() - 1) idx.push_back(s.grid.size() - 1);
  switch (f.kind) {
    case DecayKind::PureExp:
    case DecayKind::Sigma1Int:
    case DecayKind::TildeA: {
      std::vector<double> zs;
      for (size_t i : idx) zs.push_back(s.grid[i]);
      auto lv = ev.log_values(zs);
      double lo = 1e300, hi = -1e300;
      for (size_t k = 0; k < idx.size(); ++k) {
        double d = s.log_psi[idx[k]] - lv[k];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      r.name = f.kind == DecayKind::TildeA ? "log psi + (1/c) int a constant" : "log psi - int sigma1 constant";
      r.measured = hi - lo;
      r.threshold = f.kind == DecayKind::TildeA ? 1e-2 : 1e-3;
      break;
    }
    case DecayKind::SlowMaximal: {
      r.name = "psi R / c -> 1";
      r.threshold = 0.05;
      for (size_t i : idx) {
        double R = tail_mass_ratio(prof, s.c, s.grid[i]);
        r.measured = std::max(r.measured, std::isfinite(R) ? std::abs(s.psi[i] * R / s.c - 1.0) : 1e300);
      }
      break;
    }
    case DecayKind::ProfileItself: {
      r.name = "psi / a -> 1";
      r.threshold = 0.02;
      for (size_t i : idx) r.measured = std::max(r.measured, std::abs(s.psi[i] / prof.a(s.grid[i]) - 1.0));
      break;
    }
  }
  r.pass = r.measured <= r.threshold;
  return r;
}

NecessaryReport check_nonexponential_necessaries(const LocalSolution& s, const EnvironmentProfile& prof) {
  NecessaryReport rep;
  rep.log_derivative.name = "psi'/psi -> 0";
  rep.curvature_ratio.name = "psi''/psi' -> 0";
  rep.below_profile.name = "psi < a";
  rep.below_profile_band.name = "psi <= a (1 + 1e-2)";
  const size_t n = s.grid.size();
  if (n < 2) return rep;
  const double c = s.c, thr = 1e-2 * c;
  const size_t w = tail_window_start(s.grid);
  auto theta = [&](size_t i) { return s.dpsi[i] / s.psi[i]; };
  // psi''/psi' from the equation itself
  auto curv = [&](size_t i) { return -c - (prof.a(s.grid[i]) - s.psi[i]) / theta(i); };
  auto trend = [&](CheckResult& r, auto f) {
    double first = std::abs(f(w)), last = std::abs(f(n - 1));
    r.measured = last;
    r.threshold = thr;
    r.pass = std::isfinite(last) && last <= first && last < thr;
  };
  trend(rep.log_derivative, theta);
  trend(rep.curvature_ratio, curv);
  double ratio = 0.0;
  for (size_t i = 0; i < n; ++i) ratio = std::max(ratio, s.psi[i] / prof.a(s.grid[i]));
  rep.below_profile.measured = ratio;
  rep.below_profile.threshold = 1.0;
  // equality up to rounding does not count as strictly below
  rep.below_profile.pass = ratio < 1.0 - 1e-9;
  rep.below_profile_band.measured = ratio;
  rep.below_profile_band.threshold = 1.01;
  rep.below_profile_band.pass = ratio <= 1.01;
  return rep;
}

}  // namespace fkwave
