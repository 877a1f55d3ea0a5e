#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fkwave/decay_ansatz.hpp"
#include "fkwave/environment.hpp"
#include "fkwave/localsolve.hpp"
#include "fkwave/wavesolver.hpp"

namespace fkwave {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// centered differences of log values, one-sided at the ends; throws on nonpositive values
std::vector<double> local_log_derivative(const std::vector<double>& values, const std::vector<double>& grid);

struct TailData {
  std::vector<double> z, log_value;
};
TailData tail_data(const WaveSolution& w);
TailData tail_data(const LocalSolution& s);

struct DecayFit {
  DecayAnsatz candidate;
  double z_a = 0.0, z_b = 0.0;
  double amplitude = 0.0;  // fitted K
  double rms_log_error = 0.0;
  double local_rate_error = 0.0;
  bool valid = true;  // false when the candidate is undefined on the window
  std::string note;
};

enum class DecayClass { Exponential, NonExponential, Ambiguous };
std::string decay_class_name(DecayClass k);
bool is_exponential(DecayKind k);

struct FitResult {
  std::vector<DecayFit> ranked;  // valid fits by rms, then invalid ones
  bool ambiguous = false;        // top two within 20% of each other
  DecayClass winner_class = DecayClass::Ambiguous;  // best exponential vs best non-exponential
  const DecayFit& best() const { return ranked.front(); }
};

struct FitOptions {
  double window_fraction = 0.2;
  double exclude_fraction = 0.02;  // dropped at the right end
  int max_points = 200;            // the window is thinned to at most this many samples
};

// the five laws with z0 at the start of the tail
std::vector<DecayAnsatz> default_candidates(const EnvironmentProfile& prof);

FitResult fit_decay(const EnvironmentProfile& prof, double c, const TailData& data,
                    const std::vector<DecayAnsatz>& candidates, const FitOptions& opt = {});

struct PredictionCheck {
  std::string name;
  bool pass = false;
  std::string measured;
};

struct InventoryVerdict {
  RegimeReport predicted;
  std::vector<PredictionCheck> checks;
  bool pass = false;
};

// waves: the converged solutions found at speed c, fits: one FitResult per wave
InventoryVerdict inventory_verdict(const EnvironmentProfile& prof, double c,
                                   const std::vector<const WaveSolution*>& waves, const std::vector<FitResult>& fits);

}  // namespace fkwave
