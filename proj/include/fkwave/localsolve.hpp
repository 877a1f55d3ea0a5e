#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fkwave/decay_ansatz.hpp"
#include "fkwave/environment.hpp"

namespace fkwave {

// A positive solution of psi'' + c psi' + psi (a - psi) = 0 near +infinity.
struct LocalSolution {
  double c = 0.0;
  std::vector<double> grid, psi, dpsi, log_psi;
  DecayAnsatz family;
  double K = 1.0;
  bool truncated = false;  // integration stopped before z_lo
  std::string message;
  double max_relative_residual = 0.0;
};

struct LocalSolveOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  int points = 0;  // 0: spacing 0.025 for exponential seeds, 4001 points otherwise
};

// (psi, psi') at z_hi from the ansatz
std::pair<double, double> seed_state(const EnvironmentProfile& prof, double c, const DecayAnsatz& ansatz, double z_hi);

// Exponential seeds are integrated backward with an adaptive Dormand-Prince stepper. Slow seeds are
// integrated backward on the slow manifold and then corrected by Newton on the full equation, since
// the fast mode makes a plain backward sweep unstable.
LocalSolution integrate_local(const EnvironmentProfile& prof, double c, const DecayAnsatz& ansatz, double z_hi,
                              double z_lo, const LocalSolveOptions& opt = {});

// |psi'' + c psi' + psi (a - psi)| / psi with psi'' from 6th-order differences of psi'
double local_residual(const EnvironmentProfile& prof, const LocalSolution& s);

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// the rate law of the seeding family over the tail window
CheckResult tail_law_check(const EnvironmentProfile& prof, const LocalSolution& s);

struct NecessaryReport {
  CheckResult log_derivative;       // psi'/psi -> 0
  CheckResult curvature_ratio;      // psi''/psi' -> 0
  CheckResult below_profile;        // psi < a
  CheckResult below_profile_band;   // psi <= a (1 + 1e-2)
  bool all_pass() const { return log_derivative.pass && curvature_ratio.pass && below_profile.pass; }
};
NecessaryReport check_nonexponential_necessaries(const LocalSolution& s, const EnvironmentProfile& prof);

// first index of the last 20% of the grid by z-extent
size_t tail_window_start(const std::vector<double>& grid);

}  // namespace fkwave
