// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fkwave/analysis.hpp"
#include "fkwave/oracles.hpp"
#include "fkwave/pdesim.hpp"
#include "fkwave/wavesolver.hpp"

using namespace fkwave;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

EnvironmentProfile expp() { return EnvironmentProfile(1.0, ExpTail{2.0}, 0.0, 2.0); }
EnvironmentProfile alg(double g) { return EnvironmentProfile(1.0, Algebraic{g}, 6.0, 2.0); }
EnvironmentProfile pw(double p) { return EnvironmentProfile(1.0, Power{1.0, p}, 6.0, 2.0); }
EnvironmentProfile ilog(double r) { return EnvironmentProfile(1.0, IteratedLog{1, r, 1.0}, 20.0, 3.0); }

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", x);
  return b;
}

// indices of the tail window: last 20% by z-extent, final 2% dropped
std::pair<size_t, size_t> window(const std::vector<double>& z) {
  double a = z.front() + 0.8 * (z.back() - z.front());
  double b = z.back() - 0.02 * (z.back() - z.front());
  size_t i = std::lower_bound(z.begin(), z.end(), a) - z.begin();
  size_t j = std::upper_bound(z.begin(), z.end(), b) - z.begin();
  return {i, j};
}

// tail window on z >= 0 only, for waves on [-L, L]
std::pair<size_t, size_t> wave_window(const WaveSolution& w) {
  std::vector<double> pos(w.z.begin() + (w.N - 1) / 2, w.z.end());
  auto [i, j] = window(pos);
  return {i + (w.N - 1) / 2, j + (w.N - 1) / 2};
}

// shared solves, computed once
struct Waves {
  EnvironmentProfile e = expp(), a3 = alg(3.0), p5 = pw(0.5);
  WaveOutcome exp_min, alg_min, alg_max, pw_max;
  std::vector<WaveOutcome> fam;
  Waves() {
    exp_min = solve_wave(e, 1.0, {DecayKind::Sigma1Int, e.z_switch(), 1.0}, default_solver_config(e));
    auto cfg = default_solver_config(a3);
    alg_min = solve_wave(a3, 1.0, {DecayKind::Sigma1Int, a3.z_switch(), 1.0}, cfg);
    alg_max = solve_wave(a3, 1.0, {DecayKind::SlowMaximal, a3.z_switch(), 1.0}, cfg);
    fam = wave_family(a3, 1.0, {0.5, 1.0, 2.0}, 10.0, cfg);
    pw_max = solve_wave(p5, 1.0, {DecayKind::ProfileItself, p5.z_switch(), 1.0}, default_solver_config(p5));
  }
};

Verdict c1_eigenvalues(Waves&) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ua(0.05, 5.0), uc(-1.0, 6.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    double alpha = ua(rng), c = uc(rng);
    if (i == 0) c = 0.0;
    if (i == 1) c = 2.0 * std::sqrt(alpha);
    double l1 = c * c / 4.0 - alpha;
    double l1p = c <= 0.0 ? -alpha : (c < 2.0 * std::sqrt(alpha) ? l1 : 0.0);
    auto ev = generalized_eigenvalues(alpha, c);
    worst = std::max({worst, std::abs(ev.lambda1 - l1), std::abs(ev.lambda1_prime - l1p)});
  }
  return {worst <= 1e-12, "max abs error " + fmt(worst) + " over 100 pairs"};
}

Verdict c2_threshold(Waves& W) {
  std::vector<double> cs;
  for (int i = 0; i <= 44; ++i) cs.push_back(0.2 + 0.05 * i);
  auto r = continuation_in_c(W.e, cs, DecayKind::Sigma1Int, default_solver_config(W.e));
  int bad_low = 0, bad_high = 0;
  std::string first;
  for (size_t i = 0; i < cs.size(); ++i) {
    const auto& o = r.outcomes[i];
    if (cs[i] <= 1.95 + 1e-9) {
      bool ok = o.ok() && *std::min_element(o.solution.phi.begin(), o.solution.phi.end()) > 0.0;
      if (ok) {
        auto fit = fit_decay(W.e, cs[i], tail_data(o.solution), default_candidates(W.e));
        ok = fit.winner_class == DecayClass::Exponential;
      }
      if (!ok) {
        ++bad_low;
        if (first.empty()) first = "c=" + fmt(cs[i]) + " " + o.message;
      }
    } else if (cs[i] >= 2.05 - 1e-9) {
      if (o.status != WaveStatus::NoPositiveWave && o.ok()) {
        ++bad_high;
        if (first.empty()) first = "c=" + fmt(cs[i]) + " converged";
      }
    }
  }
  std::string d = std::to_string(bad_low) + " failures at c <= 1.95, " + std::to_string(bad_high) +
                  " positive waves at c >= 2.05";
  if (!first.empty()) d += " (first: " + first + ")";
  return {bad_low == 0 && bad_high == 0, d};
}

Verdict c3_exponential_rate(Waves& W) {
  if (!W.exp_min.ok()) return {false, "no wave: " + W.exp_min.message};
  const auto& w = W.exp_min.solution;
  auto d = local_log_derivative(w.phi, w.z);
  auto [i, j] = wave_window(w);
  double worst = 0.0, mean = 0.0;
  for (size_t k = i; k < j; ++k) {
    worst = std::max(worst, std::abs(d[k] + 1.0));
    mean += d[k] / (j - i);
  }
  return {worst <= 0.02, "mean log-derivative " + fmt(mean) + ", max deviation from -c " + fmt(worst)};
}

Verdict c4_uniqueness(Waves& W) {
  auto cfg = default_solver_config(W.e);
  std::vector<WaveOutcome> o;
  for (auto s : {StartKind::SubSolution, StartKind::Tanh, StartKind::SuperSolution}) {
    o.push_back(solve_wave(W.e, 1.0, {DecayKind::Sigma1Int, W.e.z_switch(), 1.0}, cfg, s));
    if (!o.back().ok()) return {false, start_kind_name(s) + " start: " + o.back().message};
  }
  double m = 0.0;
  for (size_t a = 0; a < 3; ++a)
    for (size_t b = a + 1; b < 3; ++b)
      for (size_t k = 0; k < o[a].solution.phi.size(); ++k)
        m = std::max(m, std::abs(o[a].solution.phi[k] - o[b].solution.phi[k]));
  return {m <= 1e-6, "max pairwise difference " + fmt(m)};
}

Verdict c5_case1_nonexistence(Waves&) {
  auto p = alg(0.5);
  auto cfg = default_solver_config(p);
  bool all_fail = true;
  std::string d;
  for (auto k : {DecayKind::TildeA, DecayKind::SlowMaximal})
    for (auto s : {StartKind::SubSolution, StartKind::Tanh, StartKind::SuperSolution}) {
      auto o = solve_wave(p, 1.0, {k, p.z_switch(), 1.0}, cfg, s);
      bool failed = !o.ok() || *std::min_element(o.solution.phi.begin(), o.solution.phi.end()) <= 0.0;
      all_fail = all_fail && failed;
      d += decay_kind_name(k) + "/" + start_kind_name(s) + ": " + wave_status_name(o.status);
      if (!failed) {
        // a converged tail should vanish as the domain grows if it is a truncation artifact
        auto big = cfg;
        big.L = 2.0 * cfg.L;
        big.N = 2 * cfg.N - 1;
        auto o2 = solve_wave(p, 1.0, {k, p.z_switch(), 1.0}, big, s);
        size_t i1 = (cfg.N - 1) / 2 + static_cast<size_t>(std::lround(100.0 / cfg.h()));
        size_t i2 = (big.N - 1) / 2 + static_cast<size_t>(std::lround(100.0 / big.h()));
        if (o2.ok()) d += " (phi(100) ratio for 2L over L: " + fmt(o2.solution.phi[i2] / o.solution.phi[i1]) + ")";
      }
      d += "; ";
    }
  return {all_fail, d};
}

Verdict c6_ordered_family(Waves& W) {
  std::vector<const WaveSolution*> ws;
  for (const WaveOutcome* o : {&W.alg_min, &W.fam[0], &W.fam[1], &W.fam[2], &W.alg_max}) {
    if (!o->ok()) return {false, "a member failed: " + o->message};
    ws.push_back(&o->solution);
  }
  auto r = ordering_check(ws);
  return {r.ordered && r.max_violation <= 1e-8, "5 waves, max violation " + fmt(r.max_violation)};
}

Verdict c7_maximal_algebraic(Waves& W) {
  if (!W.alg_max.ok()) return {false, W.alg_max.message};
  const auto& w = W.alg_max.solution;
  auto [i, j] = wave_window(w);
  double lo = INFINITY, hi = -INFINITY;
  for (size_t k = i; k < j; ++k) {
    lo = std::min(lo, w.z[k] * w.phi[k]);
    hi = std::max(hi, w.z[k] * w.phi[k]);
  }
  bool ok = std::abs(lo / 2.0 - 1.0) <= 0.1 && std::abs(hi / 2.0 - 1.0) <= 0.1;
  return {ok, "z*phi in [" + fmt(lo) + ", " + fmt(hi) + "] on [" + fmt(w.z[i]) + ", " + fmt(w.z[j - 1]) + "]"};
}

Verdict c8_intermediate(Waves& W) {
  const auto& o = W.fam[1];
  if (!o.ok()) return {false, o.message};
  const auto& w = o.solution;
  auto d = local_log_derivative(w.phi, w.z);
  auto [i, j] = wave_window(w);
  double worst = 0.0, mean = 0.0;
  for (size_t k = i; k < j; ++k) {
    double rate = w.z[k] * d[k];
    worst = std::max(worst, std::abs(rate / -3.0 - 1.0));
    mean += rate / (j - i);
  }
  auto fit = fit_decay(W.a3, 1.0, tail_data(w), default_candidates(W.a3));
  return {worst <= 0.05, "mean z*dlog(phi) " + fmt(mean) + ", max relative deviation " + fmt(worst) + ", best fit " +
                             decay_kind_name(fit.best().candidate.kind)};
}

Verdict c9_profile_itself(Waves& W) {
  if (!W.pw_max.ok()) return {false, W.pw_max.message};
  const auto& w = W.pw_max.solution;
  auto [i, j] = wave_window(w);
  double worst = 0.0;
  for (size_t k = i; k < j; ++k) worst = std::max(worst, std::abs(w.phi[k] / W.p5.a(w.z[k]) - 1.0));
  return {worst <= 0.05, "max |phi/a - 1| " + fmt(worst)};
}

Verdict c10_oracles(Waves&) {
  auto e = expp(), a3 = alg(3.0), il = ilog(2.0), p = pw(0.5);
  std::vector<std::pair<ComparisonFunction, const EnvironmentProfile*>> fs{
      {cos_bump_sub(e, 1.0), &e},
      {slow_sub(a3, 1.0), &a3},
      {sub2_slow(a3, 1.0, default_surrogate(a3, 1.0)), &a3},
      {exp_super(e, 1.0, 0.3), &e},
      {alpha_super(e), &e},
      {g1_sub(il, 1.0), &il},
      {alg_super(il, 1.0), &il},
      {profile_band(p, 1.0, 0.05, OracleSign::Sub), &p},
      {profile_band(p, 1.0, 0.05, OracleSign::Super), &p},
  };
  for (const auto* q : {&il, &a3, &p}) {
    auto [sub, sup] = bracket_pair(*q, 1.0);
    fs.push_back({sub, q});
    fs.push_back({sup, q});
  }
  int passed = 0;
  std::string bad;
  for (const auto& [f, q] : fs) {
    auto r = residual_sign_check(f, *q, 1.0, 10000);
    if (r.pass && r.corners_ok)
      ++passed;
    else
      bad += oracle_kind_name(f.kind) + " ";
  }
  std::string d = std::to_string(passed) + "/" + std::to_string(fs.size()) + " constructions (nine kinds plus three pairs)";
  if (!bad.empty()) d += ", failing: " + bad;
  return {passed == static_cast<int>(fs.size()), d};
}

Verdict c11_pde(Waves& W) {
  struct Item {
    const EnvironmentProfile* p;
    const WaveOutcome* o;
  };
  std::vector<Item> items{{&W.e, &W.exp_min}, {&W.a3, &W.alg_min}, {&W.a3, &W.alg_max}, {&W.p5, &W.pw_max}};
  for (const auto& f : W.fam) items.push_back({&W.a3, &f});
  double worst = 0.0;
  for (const auto& it : items) {
    if (!it.o->ok()) return {false, "a wave failed: " + it.o->message};
    auto s = make_state(*it.p, it.o->solution);
    evolve(s, 10.0, default_time_step(s));
    double d = 0.0;
    for (size_t k = 0; k < s.u.size(); ++k) d = std::max(d, std::abs(s.u[k] - it.o->solution.phi[k]));
    worst = std::max(worst, d / 10.0);
  }
  const auto& w = W.exp_min.solution;
  auto cfg = default_solver_config(W.e);
  auto zero = make_state(W.e, 1.0, cfg.L, cfg.N, std::vector<double>(cfg.N, 0.0), w.bc, w.bc_value);
  double v1 = comparison_test(zero, make_state(W.e, w), 10.0, 0.05);
  auto sample = [&](const ComparisonFunction& f) {
    std::vector<double> u(cfg.N);
    for (int k = 0; k < cfg.N; ++k) u[k] = f(-cfg.L + k * cfg.h());
    return u;
  };
  double v2 = comparison_test(make_state(W.e, 1.0, cfg.L, cfg.N, sample(cos_bump_sub(W.e, 1.0))),
                              make_state(W.e, 1.0, cfg.L, cfg.N, sample(exp_super(W.e, 1.0, 0.5))), 50.0, 0.05);
  double v3 = comparison_test(make_state(W.a3, W.fam[0].solution), make_state(W.a3, W.fam[2].solution), 10.0, 0.05);
  bool ok = worst <= 1e-6 && v1 <= 1e-10 && v2 <= 1e-8 && v3 <= 1e-8;
  return {ok, "worst drift/T " + fmt(worst) + " over " + std::to_string(items.size()) + " waves; violations " +
                  fmt(v1) + ", " + fmt(v2) + ", " + fmt(v3)};
}

Verdict c12_tilde_a(Waves&) {
  auto p = alg(3.0);
  double worst = 0.0;
  for (double c : {0.5, 1.0, 2.0}) {
    double z0 = 10.0;
    for (int k = 0; k <= 300; ++k) {
      double z = z0 * std::pow(1e3, k / 300.0);
      double exact = std::pow(z / z0, -3.0 / c);
      worst = std::max(worst, std::abs(tilde_a(p, c, z0, z) / exact - 1.0));
    }
  }
  return {worst <= 1e-8, "max relative error " + fmt(worst)};
}

Verdict c13_golden_table(Waves&) {
  struct Row {
    EnvironmentProfile p;
    double c;
    std::string abcd;
    int case123;
    std::string inventory;
    std::string maximal;  // empty: none
  };
  const std::string U = "unique-exponential", N = "none", E = "exponential-plus-infinitely-many-nonexponential",
                    I = "infinitely-many-nonexponential-only";
  std::vector<Row> rows{
      {expp(), 1.0, "A", 1, U, ""},
      {expp(), 3.0, "A", 1, N, ""},
      {alg(0.5), 1.0, "A", 1, U, ""},
      {alg(0.5), 3.0, "A", 1, N, ""},
      {alg(1.0), 1.0, "B", 1, U, ""},
      {alg(3.0), 1.0, "C", 2, E, "SlowMaximal"},
      {alg(3.0), 2.5, "C", 2, I, "SlowMaximal"},
      {pw(0.5), 1.0, "D", 3, E, "ProfileItself"},
      {pw(0.5), 3.0, "D", 3, I, "ProfileItself"},
      {pw(0.75), 1.0, "D", 2, E, "ProfileItself"},
      {ilog(2.0), 1.0, "B", 2, E, "SlowMaximal"},
      {ilog(0.5), 1.0, "B", 1, U, ""},
  };
  int ok = 0;
  std::string bad;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto rep = classify(r.p, r.c);
    std::string mx = rep.maximal_decay ? decay_kind_name(*rep.maximal_decay) : "";
    bool match = !rep.exceptional && rep.case_abcd == r.abcd && rep.case_123 == r.case123 &&
                 rep.inventory.value_or("") == r.inventory && mx == r.maximal;
    if (match)
      ++ok;
    else
      bad += " row" + std::to_string(i + 1);
  }
  return {ok == 12, std::to_string(ok) + "/12 rows match" + bad};
}

Verdict c14_grid_convergence(Waves& W) {
  if (!W.exp_min.ok()) return {false, W.exp_min.message};
  auto cfg = default_solver_config(W.e);
  cfg.N = 2 * cfg.N - 1;
  auto fine = solve_wave(W.e, 1.0, {DecayKind::Sigma1Int, W.e.z_switch(), 1.0}, cfg);
  if (!fine.ok()) return {false, fine.message};
  double r1 = continuum_residual(W.e, W.exp_min.solution), r2 = continuum_residual(W.e, fine.solution);
  double ratio = r1 / r2;
  return {ratio >= 3.5 && ratio <= 4.5,
          "residual " + fmt(r1) + " -> " + fmt(r2) + ", ratio " + fmt(ratio)};
}

}  // namespace

int main() {
  Waves W;
  const std::vector<std::pair<std::string, std::function<Verdict(Waves&)>>> criteria{
      {"eigenvalue formula", c1_eigenvalues},
      {"existence threshold in c", c2_threshold},
      {"exponential decay rate", c3_exponential_rate},
      {"uniqueness of the exponential wave", c4_uniqueness},
      {"no non-exponential wave when tilde_a is not integrable", c5_case1_nonexistence},
      {"ordered family", c6_ordered_family},
      {"maximal wave law, algebraic tail", c7_maximal_algebraic},
      {"intermediate wave rate", c8_intermediate},
      {"maximal wave follows a, power tail", c9_profile_itself},
      {"comparison function residual signs", c10_oracles},
      {"waves are PDE steady states, comparison holds", c11_pde},
      {"closed-form tilde_a", c12_tilde_a},
      {"classifier golden table", c13_golden_table},
      {"grid convergence", c14_grid_convergence},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second(W);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
