#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fkwave/decay_ansatz.hpp"
#include "fkwave/environment.hpp"

namespace fkwave {

struct SolverConfig {
  double L = 200.0;
  int N = 8001;
  double newton_tol = 1e-10;
  int max_iter = 3000;
  int max_halvings = 30;
  double continuation_step = 0.05;
  double dt0 = 0.5;  // first pseudo-time step of the globalized Newton iteration

  void validate() const;
  double h() const { return 2.0 * L / (N - 1); }
};

// L = 60, N = 4001 for exponential tails, L = 200, N = 8001 otherwise
SolverConfig default_solver_config(const EnvironmentProfile& prof);

enum class RightBC { Robin, Dirichlet, Neumann };
std::string right_bc_name(RightBC b);

enum class StartKind { SubSolution, Tanh, SuperSolution };
std::string start_kind_name(StartKind s);

enum class WaveStatus { Converged, NoPositiveWave, NewtonDiverged };
std::string wave_status_name(WaveStatus s);

struct WaveSolution {
  double c = 0.0, L = 0.0;
  int N = 0;
  std::vector<double> z, phi;
  double residual_norm = 0.0;
  int iterations = 0;
  DecayAnsatz target;
  RightBC bc = RightBC::Robin;
  double bc_value = 0.0;  // sigma_R for Robin, the pinned value for Dirichlet
};

struct WaveOutcome {
  WaveStatus status = WaveStatus::NewtonDiverged;
  WaveSolution solution;  // last iterate when not converged
  std::vector<double> residual_history;
  std::string message;
  bool ok() const { return status == WaveStatus::Converged; }
};

// Right boundary row for a target: Robin with the ansatz log-derivative at L.
RightBC target_bc(const EnvironmentProfile& prof, double c, const DecayAnsatz& target, double L, double& value);

std::vector<double> initial_guess(const EnvironmentProfile& prof, double c, const DecayAnsatz& target,
                                  const SolverConfig& cfg, StartKind start);

WaveOutcome solve_wave(const EnvironmentProfile& prof, double c, const DecayAnsatz& target, const SolverConfig& cfg,
                       StartKind start = StartKind::Tanh);
WaveOutcome solve_wave_from(const EnvironmentProfile& prof, double c, const DecayAnsatz& target,
                            const SolverConfig& cfg, std::vector<double> guess, RightBC bc, double bc_value);

struct ContinuationResult {
  std::vector<double> cs;
  std::vector<WaveOutcome> outcomes;
  std::optional<double> first_failure;
};
// warm-started sweep; a failure does not stop the sweep, the next point restarts from the last success
ContinuationResult continuation_in_c(const EnvironmentProfile& prof, const std::vector<double>& cs,
                                     DecayKind target, const SolverConfig& cfg);

// intermediate waves pinned at z = L by phi(L) = K tilde_a(L)
std::vector<WaveOutcome> wave_family(const EnvironmentProfile& prof, double c, const std::vector<double>& Ks,
                                     double z0, const SolverConfig& cfg);

// residual of the interior rows, and the same with 4th-order stencils on the discrete solution
double discrete_residual(const EnvironmentProfile& prof, const WaveSolution& w);
double continuum_residual(const EnvironmentProfile& prof, const WaveSolution& w);

// rightmost grid point still above alpha/2
double front_position(const WaveSolution& w, double alpha);

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OrderingReport {
  std::vector<std::vector<double>> violation;  // [i][j]: max(phi_i - phi_j) where i is expected below j
  double max_violation = 0.0;
  bool ordered = true;
};
// waves are sorted by total mass, then checked pairwise
OrderingReport ordering_check(const std::vector<const WaveSolution*>& waves, double tol = 1e-8);

}  // namespace fkwave
