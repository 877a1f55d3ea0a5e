#include "fkwave/decay_ansatz.hpp"

#include <cmath>
#include <stdexcept>

namespace fkwave {

AnsatzEvaluator::AnsatzEvaluator(const EnvironmentProfile& prof, double c, DecayAnsatz ans)
    : prof_(prof), c_(c), ans_(ans) {
  if (!(c > 0.0)) throw std::invalid_argument("ansatz needs c > 0");
  if (!(ans.K > 0.0)) throw std::invalid_argument("ansatz needs K > 0");
}

double AnsatzEvaluator::sigma1_integral(double z1, double z2) const {
  // sigma1 = -c + 2a/(c + sqrt(c^2 - 4a)), integrated as -c*dz plus a smooth correction
  auto corr = [&](double s) {
    double a = prof_.a(s);
    double D = c_ * c_ - 4.0 * a;
    if (D < 0.0) throw std::domain_error("sigma1 is complex at z = " + std::to_string(s));
    return 2.0 * a / (c_ + std::sqrt(D));
  };
  double lo = std::min(z1, z2), hi = std::max(z1, z2);
  double total = 0.0;
  for (double cut : {prof_.blend_start(), prof_.z_switch()}) {
    if (cut > lo && cut < hi) {
      total += integrate(corr, lo, cut);
      lo = cut;
    }
  }
  total += integrate(corr, lo, hi);
  if (z2 < z1) total = -total;
  return -c_ * (z2 - z1) + total;
}

double AnsatzEvaluator::log_value(double z) const {
  double lk = std::log(ans_.K);
  switch (ans_.kind) {
    case DecayKind::PureExp: return lk - c_ * (z - ans_.z0);
    case DecayKind::Sigma1Int: return lk + sigma1_integral(ans_.z0, z);
    case DecayKind::TildeA: return lk + log_tilde_a(prof_, c_, ans_.z0, z);
    case DecayKind::SlowMaximal: {
      double R = tail_mass_ratio(prof_, c_, z);
      if (!std::isfinite(R)) throw std::domain_error("SlowMaximal undefined: tilde_a is not integrable");
      return lk + std::log(c_ / R);
    }
    case DecayKind::ProfileItself: return lk + std::log(prof_.a(z));
  }
  return 0.0;
}

double AnsatzEvaluator::log_derivative(double z) const {
  switch (ans_.kind) {
    case DecayKind::PureExp: return -c_;
    case DecayKind::Sigma1Int: {
      SigmaPair s = sigma(prof_, c_, z);
      if (s.complex_pair) throw std::domain_error("sigma1 is complex at z = " + std::to_string(z));
      return s.sigma1;
    }
    case DecayKind::TildeA: return -prof_.a(z) / c_;
    case DecayKind::SlowMaximal: {
      double R = tail_mass_ratio(prof_, c_, z);
      if (!std::isfinite(R)) throw std::domain_error("SlowMaximal undefined: tilde_a is not integrable");
      return 1.0 / R - prof_.a(z) / c_;
    }
    case DecayKind::ProfileItself: return prof_.da(z) / prof_.a(z);
  }
  return 0.0;
}

std::vector<double> AnsatzEvaluator::log_values(std::span<const double> zs) const {
  std::vector<double> out(zs.size());
  if (zs.empty()) return out;
  double lk = std::log(ans_.K);
  switch (ans_.kind) {
    case DecayKind::TildeA: {
      double base = log_tilde_a(prof_, c_, ans_.z0, zs[0]);
      auto cum = prof_.cumulative_integral(zs);
      for (size_t i = 0; i < zs.size(); ++i) out[i] = lk + base - cum[i] / c_;
      return out;
    }
    case DecayKind::Sigma1Int: {
      double acc = lk + sigma1_integral(ans_.z0, zs[0]);
      out[0] = acc;
      for (size_t i = 1; i < zs.size(); ++i) {
        acc += sigma1_integral(zs[i - 1], zs[i]);
        out[i] = acc;
      }
      return out;
    }
    default:
      for (size_t i = 0; i < zs.size(); ++i) out[i] = log_value(zs[i]);
      return out;
  }
}

}  // namespace fkwave
