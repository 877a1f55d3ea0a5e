#pragma once

#include <span>
#include <vector>

#include "fkwave/environment.hpp"

namespace fkwave {

// Asymptotic decay law. K is ignored by SlowMaximal except as a multiplier.
struct DecayAnsatz {
  DecayKind kind = DecayKind::Sigma1Int;
  double z0 = 0.0;
  double K = 1.0;
};

class AnsatzEvaluator {
 public:
  AnsatzEvaluator(const EnvironmentProfile& prof, double c, DecayAnsatz ans);

  double log_value(double z) const;
  double value(double z) const { return std::exp(log_value(z)); }
  double log_derivative(double z) const;
  // zs must be sorted ascending
  std::vector<double> log_values(std::span<const double> zs) const;

  const DecayAnsatz& ansatz() const { return ans_; }
  double speed() const { return c_; }
  const EnvironmentProfile& profile() const { return prof_; }

 private:
  double sigma1_integral(double z1, double z2) const;

  const EnvironmentProfile& prof_;
  double c_;
  DecayAnsatz ans_;
};

}  // namespace fkwave
