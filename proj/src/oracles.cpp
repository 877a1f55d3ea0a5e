#include "fkwave/oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace fkwave {

namespace {

bool same_speed(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// first z in [lo, ...) where f(z) <= thr, for f nonincreasing beyond lo
double first_below(const std::function<double(double)>& f, double thr, double lo) {
  if (f(lo) <= thr) return lo;
  double hi = std::max(1.0, std::abs(lo)) * 2.0 + lo;
  while (f(hi) > thr) {
    hi = lo + 2.0 * (hi - lo);
    if (hi > 1e15) throw NotApplicable("profile never drops below the required threshold");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > thr ? lo : hi) = mid;
  }
  return hi;
}

const IteratedLog* critical_iterated_log(const EnvironmentProfile& prof, double c) {
  const auto* il = std::get_if<IteratedLog>(&prof.tail());
  if (il && same_speed(il->c0, c) && il->r > c && !same_speed(il->r, c)) return il;
  return nullptr;
}

double g1_delta(const Algebraic& g, double c) { return 0.5 * std::min((g.gamma - c) / c, 0.5); }

ComparisonFunction build_slow(const EnvironmentProfile& src, double c, double A, OracleKind kind) {
  if (!tail_asymptotics(src.tail(), c).tilde_a_integrable)
    throw NotApplicable("tilde_a is not integrable (case 1): no slow sub-solution");
  double za = first_below([&](double z) { return src.a(z); }, 0.5 * c * c * (1.0 - 1e-9), src.z_switch());
  auto log_ta = [&src, c, za](double z) { return -src.integral(za, z) / c; };
  auto b = [&src, c, log_ta](double z) { return std::exp(log_ta(z)) * tail_mass_ratio(src, c, z); };
  double bza = b(za);
  // A <= 0 picks the amplitude that puts the cut exactly at z_a
  if (!(A > 0.0)) A = c / (3.0 * bza);
  double M = std::max(3.0 * A / c, 1.0 / bza);
  double zM = za;
  if (M * b(za) > 1.0) {
    zM = first_below([&](double z) { return std::log(M * b(z)); }, 0.0, za);
  }
  ComparisonFunction f;
  f.kind = kind;
  f.sign = OracleSign::Sub;
  f.lo = zM;
  f.hi = 100.0 * zM;
  f.corners = {zM};
  f.constants = {{"A", A}, {"M", M}, {"z_M", zM}, {"z_ref", za}};
  f.jet = [src, c, A, M, zM, za](double z) -> Jet {
    if (z <= zM) return {0.0, 0.0, 0.0};
    double ta = std::exp(-src.integral(za, z) / c);
    double bb = ta * tail_mass_ratio(src, c, z);
    double a = src.a(z), da = src.da(z);
    double w = 1.0 - M * bb;
    double u = A * ta * w;
    double du = A * (-(a / c) * ta * w + M * ta * ta);
    double d2u = A * ((a * a / (c * c) - da / c) * ta * w - (a / c) * M * ta * ta);
    return {u, du, d2u};
  };
  return f;
}

}  // namespace

std::string oracle_kind_name(OracleKind k) {
  switch (k) {
    case OracleKind::CosBumpSub: return "cos_bump_sub";
    case OracleKind::SlowSub: return "slow_sub";
    case OracleKind::Sub2Slow: return "sub2_slow";
    case OracleKind::ExpSuper: return "exp_super";
    case OracleKind::AlphaSuper: return "alpha_super";
    case OracleKind::G1Sub: return "g1_sub";
    case OracleKind::AlgSuper: return "alg_super";
    case OracleKind::ProfileBandSub: return "profile_band_sub";
    case OracleKind::ProfileBandSuper: return "profile_band_super";
  }
  return "?";
}

ComparisonFunction cos_bump_sub(const EnvironmentProfile& prof, double c) {
  double alpha = prof.alpha();
  if (!(c < critical_speed(alpha))) throw NotApplicable("cos bump needs c < 2 sqrt(alpha)");
  double a0 = 0.25 * (alpha - 0.25 * c * c);
  double thr = 0.25 * c * c + 2.0 * a0;
  // a is nonincreasing, so a >= thr holds on (-inf, z_thr]
  double z_thr = first_below([&](double z) { return prof.a(z); }, thr, prof.blend_start());
  double L = std::max(std::numbers::pi / std::sqrt(a0), z_thr < 0.0 ? -2.0 * z_thr : 0.0);
  double delta = a0 * std::exp(-0.75 * c * L);
  ComparisonFunction f;
  f.kind = OracleKind::CosBumpSub;
  f.sign = OracleSign::Sub;
  f.lo = -1.5 * L;
  f.hi = -0.5 * L;
  f.corners = {f.lo, f.hi};
  f.constants = {{"a0", a0}, {"L", L}, {"delta", delta}};
  f.jet = [=](double z) -> Jet {
    if (z <= -1.5 * L || z >= -0.5 * L) return {0.0, 0.0, 0.0};
    double k = std::numbers::pi / L;
    double W = std::cos(k * z + std::numbers::pi), dW = -k * std::sin(k * z + std::numbers::pi), d2W = -k * k * W;
    double e = delta * std::exp(-0.5 * c * z);
    return {e * W, e * (dW - 0.5 * c * W), e * (d2W - c * dW + 0.25 * c * c * W)};
  };
  return f;
}

ComparisonFunction slow_sub(const EnvironmentProfile& prof, double c, double A) {
  return build_slow(prof, c, A, OracleKind::SlowSub);
}

TailFamily default_surrogate(const EnvironmentProfile& prof, double c) {
  const TailFamily& t = prof.tail();
  if (const auto* g = std::get_if<Algebraic>(&t); g && g->gamma > c) return Algebraic{0.5 * (g->gamma + c)};
  if (const auto* w = std::get_if<Power>(&t)) return Power{0.5 * w->gamma, w->p};
  if (const auto* il = critical_iterated_log(prof, c)) return IteratedLog{il->k, 0.5 * (il->r + c), il->c0};
  throw NotApplicable("no admissible surrogate for this tail at this speed");
}

ComparisonFunction sub2_slow(const EnvironmentProfile& prof, double c, const TailFamily& a_plus, double A) {
  const TailFamily& t = prof.tail();
  bool ok = false;
  std::string why = "surrogate must be the same tail type with a strictly smaller coefficient";
  if (const auto* g = std::get_if<Algebraic>(&t)) {
    const auto* gp = std::get_if<Algebraic>(&a_plus);
    ok = gp && gp->gamma < g->gamma && gp->gamma > c;
  } else if (const auto* w = std::get_if<Power>(&t)) {
    const auto* wp = std::get_if<Power>(&a_plus);
    ok = wp && wp->p == w->p && wp->gamma < w->gamma && wp->gamma > 0.0;
  } else if (const auto* il = critical_iterated_log(prof, c)) {
    const auto* ip = std::get_if<IteratedLog>(&a_plus);
    ok = ip && ip->k == il->k && same_speed(ip->c0, il->c0) && ip->r < il->r && ip->r > c;
  } else {
    why = "tail has no slow family at this speed";
  }
  if (!ok) throw NotApplicable("sub2_slow: " + why);
  EnvironmentProfile src(prof.alpha(), a_plus, prof.center(), prof.width());
  ComparisonFunction f = build_slow(src, c, A, OracleKind::Sub2Slow);
  return f;
}

ComparisonFunction exp_super(const EnvironmentProfile& prof, double c, double eps) {
  if (!(eps > 0.0 && eps < c)) throw NotApplicable("exp_super needs 0 < eps < c");
  double thr = eps * (c - eps);
  if (c - eps < 1e-6 * c) throw NotApplicable("eps too close to c: a <= eps(c - eps) is never reached");
  double zbar = first_below([&](double z) { return prof.a(z); }, thr, prof.blend_start());
  double rate = c - eps, alpha = prof.alpha();
  ComparisonFunction f;
  f.kind = OracleKind::ExpSuper;
  f.sign = OracleSign::Super;
  f.lo = std::min(prof.blend_start(), zbar) - 20.0;
  f.hi = zbar + 40.0 / rate;
  f.corners = {zbar};
  f.constants = {{"eps", eps}, {"z_bar", zbar}, {"log_k", std::log(alpha) + rate * zbar}};
  f.jet = [=](double z) -> Jet {
    if (z <= zbar) return {alpha, 0.0, 0.0};
    double u = alpha * std::exp(-rate * (z - zbar));
    return {u, -rate * u, rate * rate * u};
  };
  return f;
}

ComparisonFunction alpha_super(const EnvironmentProfile& prof) {
  ComparisonFunction f;
  double alpha = prof.alpha();
  f.kind = OracleKind::AlphaSuper;
  f.sign = OracleSign::Super;
  f.lo = prof.blend_start() - 20.0;
  f.hi = prof.z_switch() + 200.0;
  f.constants = {{"alpha", alpha}};
  f.jet = [alpha](double) -> Jet { return {alpha, 0.0, 0.0}; };
  return f;
}

ComparisonFunction g1_sub(const EnvironmentProfile& prof, double c) {
  int k;
  double lambda, zs;
  if (const auto* il = critical_iterated_log(prof, c)) {
    k = il->k;
    lambda = 0.5 * (1.0 + il->r / c);
    double T = std::max(1.0, std::pow(il->r - c * lambda, -1.0 / (lambda - 1.0)));
    zs = T;
    for (int i = 0; i < k; ++i) zs = std::exp(zs);
  } else if (const auto* g = std::get_if<Algebraic>(&prof.tail()); g && g->gamma > c) {
    k = 0;
    lambda = 1.0 + g1_delta(*g, c);
    zs = std::max(1.0, std::pow(g->gamma - c * lambda, -1.0 / (lambda - 1.0)));
  } else {
    throw NotApplicable("g1_sub needs a critical iterated-log tail with r > c or an algebraic tail with gamma > c");
  }
  zs = std::max(zs, prof.z_switch());
  ComparisonFunction f;
  f.kind = OracleKind::G1Sub;
  f.sign = OracleSign::Sub;
  f.lo = zs;
  f.hi = 100.0 * zs;
  f.constants = {{"k", double(k)}, {"lambda", lambda}, {"z_start", zs}};
  double zsafe = tail_z_safe(prof.tail());
  f.jet = [k, lambda, zsafe](double z) -> Jet {
    if (z <= std::max(zsafe, 1.0)) return {0.0, 0.0, 0.0};
    // G = log g1; P_j = 1/(z ln z ... ln^j z), S_j = sum_{m<=j} P_m
    double G = std::log(z), prod = z, l = z, S = 0.0, G1 = 0.0, G2 = 0.0;
    for (int j = 0; j <= k; ++j) {
      if (j > 0) {
        l = std::log(l);
        prod *= l;
        G += (j < k ? 1.0 : lambda) * std::log(l);
      }
      double P = 1.0 / prod;
      S += P;
      double w = j < k ? 1.0 : lambda;
      G1 += w * P;
      G2 -= w * P * S;
    }
    if (k == 0) G = lambda * std::log(z);
    double u = std::exp(-G);
    return {u, -G1 * u, (G1 * G1 - G2) * u};
  };
  return f;
}

ComparisonFunction alg_super(const EnvironmentProfile& prof, double c) {
  double M, q;
  if (critical_iterated_log(prof, c)) {
    M = prof.alpha();
    q = 0.5;
  } else if (const auto* g = std::get_if<Algebraic>(&prof.tail()); g && g->gamma > c) {
    q = 1.0;
    M = g->gamma + g1_delta(*g, c);
  } else {
    throw NotApplicable("alg_super needs a critical iterated-log tail or an algebraic tail with gamma > c");
  }
  // sufficient condition a + q(q+1)/z^2 <= cq/z + M z^-q, scanned on a geometric grid
  auto ok = [&](double z) { return prof.a(z) + q * (q + 1.0) / (z * z) <= c * q / z + M * std::pow(z, -q); };
  double z0 = std::max(prof.z_switch(), 1.0), zs = z0;
  for (double z = z0; z < 1e8; z *= 1.01)
    if (!ok(z)) zs = z * 1.01;
  ComparisonFunction f;
  f.kind = OracleKind::AlgSuper;
  f.sign = OracleSign::Super;
  f.lo = zs;
  f.hi = 100.0 * zs;
  f.constants = {{"M", M}, {"q", q}, {"z_start", zs}};
  f.jet = [M, q](double z) -> Jet {
    double u = M * std::pow(z, -q);
    return {u, -q * u / z, q * (q + 1.0) * u / (z * z)};
  };
  return f;
}

ComparisonFunction profile_band(const EnvironmentProfile& prof, double c, double eps, OracleSign sign) {
  const auto* w = std::get_if<Power>(&prof.tail());
  if (!w) throw NotApplicable("profile band needs a power tail");
  if (!(eps > 0.0 && eps < 1.0)) throw NotApplicable("profile band needs 0 < eps < 1");
  double zs = sign == OracleSign::Super ? (w->p + 1.0) / c
                                        : std::pow(c * w->p / (eps * w->gamma), 1.0 / (1.0 - w->p));
  zs = std::max(zs, prof.z_switch());
  double f_mul = sign == OracleSign::Super ? 1.0 + eps : 1.0 - eps;
  ComparisonFunction f;
  f.kind = sign == OracleSign::Super ? OracleKind::ProfileBandSuper : OracleKind::ProfileBandSub;
  f.sign = sign;
  f.lo = zs;
  f.hi = 100.0 * zs;
  f.constants = {{"eps", eps}, {"z_start", zs}};
  f.jet = [prof, f_mul](double z) -> Jet { return {f_mul * prof.a(z), f_mul * prof.da(z), f_mul * prof.d2a(z)}; };
  return f;
}

std::pair<ComparisonFunction, ComparisonFunction> bracket_pair(const EnvironmentProfile& prof, double c) {
  if (std::holds_alternative<Power>(prof.tail()))
    return {profile_band(prof, c, 0.05, OracleSign::Sub), profile_band(prof, c, 0.05, OracleSign::Super)};
  try {
    return {g1_sub(prof, c), alg_super(prof, c)};
  } catch (const NotApplicable&) {
    throw NotApplicable("no sub/super pair applies to this tail at this speed");
  }
}

double comparison_residual(const ComparisonFunction& f, const EnvironmentProfile& prof, double c, double z) {
  Jet j = f.jet(z);
  return j.d2u + c * j.du + j.u * (prof.a(z) - j.u);
}

SignReport residual_sign_check(const ComparisonFunction& f, const EnvironmentProfile& prof, double c, int n) {
  SignReport r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), f.lo, n, true, false};
  bool geometric = f.lo > 0.0 && f.hi / f.lo > 10.0;
  for (int i = 0; i < n; ++i) {
    double t = (i + 0.5) / n;
    double z = geometric ? f.lo * std::pow(f.hi / f.lo, t) : f.lo + (f.hi - f.lo) * t;
    double R = comparison_residual(f, prof, c, z);
    if (R < r.min_residual) {
      r.min_residual = R;
      if (f.sign == OracleSign::Sub) r.worst_z = z;
    }
    if (R > r.max_residual) {
      r.max_residual = R;
      if (f.sign == OracleSign::Super) r.worst_z = z;
    }
  }
  for (double b : f.corners) {
    double h = 1e-7 * std::max(1.0, std::abs(b));
    double left = f.jet(b - h).du, right = f.jet(b + h).du;
    double slack = 1e-9 * std::max(1.0, std::abs(left) + std::abs(right));
    if (f.sign == OracleSign::Sub ? right < left - slack : right > left + slack) r.corners_ok = false;
  }
  bool sign_ok = f.sign == OracleSign::Sub ? r.min_residual >= -1e-9 : r.max_residual <= 1e-9;
  r.pass = sign_ok && r.corners_ok;
  return r;
}

}  // namespace fkwave
