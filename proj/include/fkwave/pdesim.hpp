#pragma once

#include <stdexcept>
#include <vector>

#include "fkwave/environment.hpp"
#include "fkwave/wavesolver.hpp"

namespace fkwave {

// u_t = u_zz + c u_z + u (a - u) on [-L, L]; u(-L) = a(-L), right row Neumann, Robin or Dirichlet
struct SimulationState {
  double t = 0.0;
  double c = 0.0, L = 0.0, alpha = 0.0;
  std::vector<double> z, a, u;
  RightBC bc = RightBC::Neumann;
  double bc_value = 0.0;
};

SimulationState make_state(const EnvironmentProfile& prof, double c, double L, int N, std::vector<double> u0,
                           RightBC bc = RightBC::Neumann, double bc_value = 0.0);
// same grid and right row as the wave
SimulationState make_state(const EnvironmentProfile& prof, const WaveSolution& w);

class StepRejected : public std::runtime_error {
 public:
  StepRejected(const std::string& msg, double suggested) : std::runtime_error(msg), suggested_(suggested) {}
  double suggested_dt() const { return suggested_; }

 private:
  double suggested_;
};

// (I - dt A) u_new = u + dt u (a - u), A the diffusion-advection stencil with the boundary rows.
// Rejected when dt max|a - 2u| >= 1.
void step(SimulationState& s, double dt);

// min(0.1 / alpha, 0.05)
double default_time_step(const SimulationState& s);

// max |A u + u (a - u)| over the rows that evolve
double pde_residual(const SimulationState& s);

struct EvolveOptions {
  double monitor_every = 1.0;
  const WaveSolution* reference = nullptr;
  int snapshot_every = 0;  // in monitor ticks, 0 for none
};

struct Snapshot {
  double t;
  std::vector<double> u;
};

struct TrajectorySummary {
  std::vector<double> t, distance, residual, front;  // distance is NaN without a reference
  std::vector<Snapshot> snapshots;
  double min_u = 0.0, max_u = 0.0;  // over every accepted step
};

TrajectorySummary evolve(SimulationState& s, double T, double dt, const EvolveOptions& opt = {});

// co-evolves two states and returns the largest lo - hi seen at any step; a pinned right value of lo
// may sit below that of hi
double comparison_test(SimulationState lo, SimulationState hi, double T, double dt);

}  // namespace fkwave
