#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fkwave/environment.hpp"

namespace fkwave {

class NotApplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OracleKind {
  CosBumpSub,
  SlowSub,
  Sub2Slow,
  ExpSuper,
  AlphaSuper,
  G1Sub,
  AlgSuper,
  ProfileBandSub,
  ProfileBandSuper
};
enum class OracleSign { Sub, Super };

std::string oracle_kind_name(OracleKind k);

struct Jet {
  double u, du, d2u;
};

// A comparison function with analytic derivatives on each smooth piece.
struct ComparisonFunction {
  OracleKind kind;
  OracleSign sign;
  double lo, hi;                   // sampling window (interior of the support)
  std::vector<double> corners;     // weak corners where the pieces meet
  std::map<std::string, double> constants;
  std::function<Jet(double)> jet;  // valid for every z, zero outside the support for subs

  double operator()(double z) const { return jet(z).u; }
};

ComparisonFunction cos_bump_sub(const EnvironmentProfile& prof, double c);
ComparisonFunction slow_sub(const EnvironmentProfile& prof, double c, double A = 0.0);
ComparisonFunction sub2_slow(const EnvironmentProfile& prof, double c, const TailFamily& a_plus, double A = 0.0);
// A <= 0 selects the largest amplitude whose cut sits where a < c^2/2 first holds
// surrogate a_plus picked from the admissible family of the tail
TailFamily default_surrogate(const EnvironmentProfile& prof, double c);
ComparisonFunction exp_super(const EnvironmentProfile& prof, double c, double eps);
ComparisonFunction alpha_super(const EnvironmentProfile& prof);
ComparisonFunction g1_sub(const EnvironmentProfile& prof, double c);
ComparisonFunction alg_super(const EnvironmentProfile& prof, double c);
ComparisonFunction profile_band(const EnvironmentProfile& prof, double c, double eps, OracleSign sign);
// paired sub/super for the slow maximal wave, chosen by tail type
std::pair<ComparisonFunction, ComparisonFunction> bracket_pair(const EnvironmentProfile& prof, double c);

double comparison_residual(const ComparisonFunction& f, const EnvironmentProfile& prof, double c, double z);

struct SignReport {
  double min_residual, max_residual;
  double worst_z;
  int samples;
  bool corners_ok;
  bool pass;
};
// Samples the open window; subs need min R >= -1e-9, supers max R <= 1e-9.
SignReport residual_sign_check(const ComparisonFunction& f, const EnvironmentProfile& prof, double c, int n_samples);

}  // namespace fkwave
