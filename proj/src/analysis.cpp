#include "fkwave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fkwave {

std::vector<double> local_log_derivative(const std::vector<double>& values, const std::vector<double>& grid) {
  const size_t n = values.size();
  if (grid.size() != n) throw std::invalid_argument("values and grid differ in length");
  if (n < 2) throw std::invalid_argument("need at least two samples");
  std::vector<double> l(n), d(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0)) throw std::domain_error("log-derivative needs positive values");
    l[i] = std::log(values[i]);
  }
  d[0] = (l[1] - l[0]) / (grid[1] - grid[0]);
  d[n - 1] = (l[n - 1] - l[n - 2]) / (grid[n - 1] - grid[n - 2]);
  for (size_t i = 1; i + 1 < n; ++i) d[i] = (l[i + 1] - l[i - 1]) / (grid[i + 1] - grid[i - 1]);
  return d;
}

TailData tail_data(const WaveSolution& w) {
  TailData t;
  t.z = w.z;
  t.log_value.resize(w.phi.size());
  for (size_t i = 0; i < w.phi.size(); ++i)
    t.log_value[i] = w.phi[i] > 0.0 ? std::log(w.phi[i]) : -std::numeric_limits<double>::infinity();
  return t;
}

TailData tail_data(const LocalSolution& s) { return {s.grid, s.log_psi}; }

std::string decay_class_name(DecayClass k) {
  switch (k) {
    case DecayClass::Exponential: return "exponential";
    case DecayClass::NonExponential: return "non-exponential";
    case DecayClass::Ambiguous: return "ambiguous";
  }
  return "?";
}

bool is_exponential(DecayKind k) { return k == DecayKind::PureExp || k == DecayKind::Sigma1Int; }

std::vector<DecayAnsatz> default_candidates(const EnvironmentProfile& prof) {
  std::vector<DecayAnsatz> out;
  for (DecayKind k : {DecayKind::PureExp, DecayKind::Sigma1Int, DecayKind::TildeA, DecayKind::SlowMaximal,
                      DecayKind::ProfileItself})
    out.push_back({k, prof.z_switch(), 1.0});
  return out;
}

namespace {

constexpr double kAmbiguity = 1.2;

// log V on zs and its log-derivative, anchored at the candidate's z0 when possible
bool evaluate(const EnvironmentProfile& prof, double c, DecayAnsatz cand, const std::vector<double>& zs,
              std::vector<double>& lv, std::vector<double>& dv, std::string& note) {
  auto attempt = [&](const DecayAnsatz& a) {
    AnsatzEvaluator ev(prof, c, a);
    lv = ev.log_values(zs);
    dv.resize(zs.size());
    for (size_t i = 0; i < zs.size(); ++i) dv[i] = ev.log_derivative(zs[i]);
    return std::all_of(lv.begin(), lv.end(), [](double x) { return std::isfinite(x); }) &&
           std::all_of(dv.begin(), dv.end(), [](double x) { return std::isfinite(x); });
  };
  try {
    if (attempt(cand)) return true;
  } catch (const std::domain_error&) {
  }
  DecayAnsatz moved = cand;
  moved.z0 = zs.front();
  try {
    if (attempt(moved)) {
      note = "anchored at the window start";
      return true;
    }
  } catch (const std::domain_error& e) {
    note = e.what();
    return false;
  }
  note = "not finite on the window";
  return false;
}

}  // namespace

FitResult fit_decay(const EnvironmentProfile& prof, double c, const TailData& data,
                    const std::vector<DecayAnsatz>& candidates, const FitOptions& opt) {
  const size_t n = data.z.size();
  if (n < 3 || data.log_value.size() != n) throw FitError("tail data is empty or inconsistent");
  const double extent = data.z.back() - data.z.front();
  const double za = data.z.back() - opt.window_fraction * extent;
  const double zb = data.z.back() - opt.exclude_fraction * extent;
  size_t i0 = static_cast<size_t>(std::lower_bound(data.z.begin(), data.z.end(), za) - data.z.begin());
  size_t i1 = static_cast<size_t>(std::upper_bound(data.z.begin(), data.z.end(), zb) - data.z.begin());
  i0 = std::max<size_t>(i0, 1);
  i1 = std::min(i1, n - 1);
  const double floor = std::log(10.0 * std::numeric_limits<double>::min());
  size_t usable = 0;
  for (size_t i = i0; i < i1; ++i)
    if (std::isfinite(data.log_value[i]) && data.log_value[i] > floor) ++usable;
  if (i1 <= i0 || i1 - i0 < 100) throw FitError("tail window holds fewer than 100 grid points");
  if (usable < i1 - i0) throw FitError("tail values underflow inside the fit window");

  std::vector<size_t> idx;
  const size_t stride = std::max<size_t>(1, (i1 - i0) / static_cast<size_t>(std::max(opt.max_points, 2)));
  for (size_t i = i0; i < i1; i += stride) idx.push_back(i);
  std::vector<double> zs, ls, rate;
  for (size_t i : idx) {
    zs.push_back(data.z[i]);
    ls.push_back(data.log_value[i]);
    rate.push_back((data.log_value[i + 1] - data.log_value[i - 1]) / (data.z[i + 1] - data.z[i - 1]));
  }

  FitResult out;
  for (const auto& cand : candidates) {
    DecayFit f;
    f.candidate = cand;
    f.z_a = zs.front();
    f.z_b = zs.back();
    std::vector<double> lv, dv;
    if (!evaluate(prof, c, cand, zs, lv, dv, f.note)) {
      f.valid = false;
      f.rms_log_error = std::numeric_limits<double>::infinity();
      f.local_rate_error = std::numeric_limits<double>::infinity();
      out.ranked.push_back(f);
      continue;
    }
    // lv already carries log K of the candidate; the fitted shift multiplies it
    double mean = 0.0;
    for (size_t k = 0; k < zs.size(); ++k) mean += ls[k] - lv[k];
    mean /= static_cast<double>(zs.size());
    double ss = 0.0;
    for (size_t k = 0; k < zs.size(); ++k) {
      double r = ls[k] - lv[k] - mean;
      ss += r * r;
      f.local_rate_error = std::max(f.local_rate_error, std::abs(rate[k] - dv[k]));
    }
    f.rms_log_error = std::sqrt(ss / static_cast<double>(zs.size()));
    f.amplitude = cand.K * std::exp(mean);
    out.ranked.push_back(f);
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const DecayFit& x, const DecayFit& y) {
    if (x.valid != y.valid) return x.valid;
    // shapes that agree to rounding keep the caller's order
    return x.rms_log_error < y.rms_log_error * (1.0 - 1e-9);
  });
  if (out.ranked.size() >= 2 && out.ranked[1].valid)
    out.ambiguous = out.ranked[1].rms_log_error <= kAmbiguity * out.ranked[0].rms_log_error;
  double best_exp = std::numeric_limits<double>::infinity(), best_slow = best_exp;
  for (const auto& f : out.ranked) {
    if (!f.valid) continue;
    double& slot = is_exponential(f.candidate.kind) ? best_exp : best_slow;
    slot = std::min(slot, f.rms_log_error);
  }
  if (best_exp <= best_slow / kAmbiguity)
    out.winner_class = DecayClass::Exponential;
  else if (best_slow <= best_exp / kAmbiguity)
    out.winner_class = DecayClass::NonExponential;
  else
    out.winner_class = DecayClass::Ambiguous;
  return out;
}

namespace {

double max_diff(const WaveSolution& x, const WaveSolution& y) {
  if (x.phi.size() != y.phi.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (size_t i = 0; i < x.phi.size(); ++i) m = std::max(m, std::abs(x.phi[i] - y.phi[i]));
  return m;
}

// waves that differ pairwise by more than tol
size_t distinct(const std::vector<const WaveSolution*>& ws, double tol) {
  std::vector<const WaveSolution*> reps;
  for (const auto* w : ws) {
    bool seen = std::any_of(reps.begin(), reps.end(), [&](const WaveSolution* r) { return max_diff(*r, *w) <= tol; });
    if (!seen) reps.push_back(w);
  }
  return reps.size();
}

}  // namespace

InventoryVerdict inventory_verdict(const EnvironmentProfile& prof, double c,
                                   const std::vector<const WaveSolution*>& waves, const std::vector<FitResult>& fits) {
  if (waves.size() != fits.size()) throw std::invalid_argument("one fit per wave is required");
  InventoryVerdict v;
  v.predicted = classify(prof, c);
  std::vector<const WaveSolution*> expw, slow;
  size_t amb = 0;
  for (size_t i = 0; i < waves.size(); ++i) {
    switch (fits[i].winner_class) {
      case DecayClass::Exponential: expw.push_back(waves[i]); break;
      case DecayClass::NonExponential: slow.push_back(waves[i]); break;
      case DecayClass::Ambiguous: ++amb; break;
    }
  }
  const double tol = 1e-6;
  const size_t n_exp = distinct(expw, tol), n_slow = distinct(slow, tol);
  std::ostringstream counts;
  counts << waves.size() << " waves: " << n_exp << " exponential, " << n_slow << " non-exponential, " << amb
         << " ambiguous";
  auto add = [&](std::string name, bool pass, std::string measured) {
    v.checks.push_back({std::move(name), pass, std::move(measured)});
  };
  if (!v.predicted.inventory) {
    add("prediction available", false, "exceptional tail: no inventory is predicted");
    v.pass = false;
    return v;
  }
  const std::string& inv = *v.predicted.inventory;
  if (inv == "none") {
    add("no wave converges", waves.empty(), counts.str());
  } else if (inv == "unique-exponential") {
    add("one exponential wave", n_exp == 1, counts.str());
    add("no non-exponential wave", n_slow == 0 && amb == 0, counts.str());
  } else if (inv == "exponential-plus-infinitely-many-nonexponential") {
    add("one exponential wave", n_exp == 1, counts.str());
    add("several distinct non-exponential waves", n_slow >= 2, counts.str());
  } else {
    add("no exponential wave", n_exp == 0, counts.str());
    add("several distinct non-exponential waves", n_slow >= 2, counts.str());
  }
  if (waves.size() >= 2) {
    bool same_grid = std::all_of(waves.begin(), waves.end(), [&](const WaveSolution* w) {
      return w->N == waves[0]->N && w->L == waves[0]->L;
    });
    if (same_grid) {
      auto rep = ordering_check(waves);
      std::ostringstream m;
      m << "max violation " << rep.max_violation;
      add("waves are ordered", rep.ordered, m.str());
    }
  }
  if (v.predicted.maximal_decay && !slow.empty()) {
    // the largest non-exponential wave should follow the predicted maximal law with amplitude near 1:
    // c/R for SlowMaximal, a itself for ProfileItself
    size_t top = 0;
    double best_mass = -1.0;
    for (size_t i = 0; i < waves.size(); ++i) {
      if (fits[i].winner_class != DecayClass::NonExponential) continue;
      double mass = 0.0;
      for (double x : waves[i]->phi) mass += x;
      if (mass > best_mass) {
        best_mass = mass;
        top = i;
      }
    }
    const DecayFit* mine = nullptr;
    for (const auto& d : fits[top].ranked)
      if (d.valid && d.candidate.kind == *v.predicted.maximal_decay && d.note.empty()) mine = &d;
    std::ostringstream m;
    bool ok = false;
    if (mine) {
      m << decay_kind_name(mine->candidate.kind) << " amplitude " << mine->amplitude << " rms "
        << mine->rms_log_error;
      ok = std::abs(mine->amplitude - 1.0) <= 0.1 && mine->rms_log_error < 1e-2;
    } else {
      m << decay_kind_name(*v.predicted.maximal_decay) << " was not fitted";
    }
    add("largest wave follows the maximal law", ok, m.str());
  }
  v.pass = std::all_of(v.checks.begin(), v.checks.end(), [](const PredictionCheck& p) { return p.pass; });
  return v;
}

}  // namespace fkwave
