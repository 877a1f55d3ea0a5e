#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fkwave {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& msg)
      : std::runtime_error(key + ": " + msg), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(double achieved, double requested);
  double achieved;
};

// amp <= 0 means "normalize so the tail equals alpha where the blend starts"
struct ExpTail {
  double kappa;
  double amp = 0.0;
};
struct Algebraic {
  double gamma;
};
// c0 * sum_{j<k} (1/z) prod_{i<=j} 1/ln^i z + (r/z) prod_{i=1}^k 1/ln^i z
struct IteratedLog {
  int k;
  double r;
  double c0;
};
struct Power {
  double gamma;
  double p;
};

using TailFamily = std::variant<ExpTail, Algebraic, IteratedLog, Power>;

std::string tail_kind_name(const TailFamily& t);

// Iterated logarithm ln^m z (ln^0 z = z). NaN when undefined.
double iterated_log(int m, double z);
// Smallest z at which every iterated log used by the tail is >= 1.
double tail_z_safe(const TailFamily& t);

struct TailValue {
  double v, d1, d2;
};
TailValue tail_eval(const TailFamily& t, double z);
// Antiderivative of the tail (defined up to a constant).
double tail_antiderivative(const TailFamily& t, double z);

class EnvironmentProfile {
 public:
  EnvironmentProfile(double alpha, TailFamily tail, double center, double width);

  double alpha() const { return alpha_; }
  const TailFamily& tail() const { return tail_; }
  double center() const { return center_; }
  double width() const { return width_; }
  double blend_start() const { return center_ - width_; }
  // beyond this point a(z) is exactly the tail
  double z_switch() const { return center_ + width_; }
  // a is nonincreasing on [z_star, inf)
  double z_star() const { return blend_start(); }

  double a(double z) const;
  double da(double z) const;
  double d2a(double z) const;

  // int_{z1}^{z2} a by adaptive Gauss-Kronrod
  double integral(double z1, double z2) const;
  // running integral of a from zs[0] to each zs[i]; zs must be sorted
  std::vector<double> cumulative_integral(std::span<const double> zs) const;

 private:
  double alpha_;
  TailFamily tail_;
  double center_, width_;
};

// Adaptive G7-K15. Throws QuadratureError if abs 1e-10 / rel 1e-8 is not met.
template <class F>
double integrate(F f, double lo, double hi);

double log_tilde_a(const EnvironmentProfile& prof, double c, double z0, double z);
double tilde_a(const EnvironmentProfile& prof, double c, double z0, double z);

// R(z) = int_z^inf tilde_a(s)/tilde_a(z) ds; +inf when tilde_a is not integrable.
double tail_mass_ratio(const EnvironmentProfile& prof, double c, double z);

struct SigmaPair {
  double sigma1, sigma2;  // real parts when complex
  double imag = 0.0;
  bool complex_pair = false;
};
SigmaPair sigma(double a, double c);
SigmaPair sigma(const EnvironmentProfile& prof, double c, double z);

struct Eigenvalues {
  double lambda1;
  double lambda1_prime;
};
Eigenvalues generalized_eigenvalues(double alpha, double c);
inline double critical_speed(double alpha) { return 2.0 * std::sqrt(alpha); }

enum class DecayKind { PureExp, Sigma1Int, TildeA, SlowMaximal, ProfileItself };
std::string decay_kind_name(DecayKind k);
DecayKind decay_kind_from_name(const std::string& s);

// asymptotic descriptors of a tail at a given speed
struct TailAsymptotics {
  double za_liminf, za_limsup;  // of z*a(z), may be +inf
  bool a_squared_integrable;
  bool tilde_a_integrable;
};
TailAsymptotics tail_asymptotics(const TailFamily& t, double c);

struct RegimeReport {
  double alpha = 0, c = 0;
  std::string case_abcd;  // "A".."D" or "undetermined"
  int case_123 = 0;       // 0 when exceptional
  bool exceptional = false;
  double lambda1 = 0, lambda1_prime = 0;
  std::optional<std::string> inventory;
  std::optional<DecayKind> minimal_decay;
  std::optional<DecayKind> maximal_decay;
};
RegimeReport classify(const TailAsymptotics& t, double alpha, double c, bool profile_is_power = false);
RegimeReport classify(const EnvironmentProfile& prof, double c);

// Partial integrals int_{z0}^{Z} tilde_a over Z = z0*10^m, m = 1..decades.
struct IntegrabilityProbe {
  std::vector<double> z, partial;
  double increment_exponent;  // fitted p in Delta_m ~ m^-p
  bool looks_integrable;
};
IntegrabilityProbe probe_tilde_a_integrability(const EnvironmentProfile& prof, double c,
                                               double z0, int decades);

}  // namespace fkwave

#include "fkwave/quadrature_impl.hpp"
