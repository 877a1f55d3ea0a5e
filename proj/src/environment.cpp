#include "fkwave/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fkwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool same_speed(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// P_j = 1/(z ln z ... ln^j z); fills P[0..k] and S_j = sum_{m<=j} P_m
void log_products(int k, double z, std::vector<double>& P, std::vector<double>& S) {
  P.assign(k + 1, 0.0);
  S.assign(k + 1, 0.0);
  double prod = z, l = z;
  P[0] = 1.0 / z;
  for (int j = 1; j <= k; ++j) {
    l = std::log(l);
    prod *= l;
    P[j] = 1.0 / prod;
  }
  double acc = 0.0;
  for (int j = 0; j <= k; ++j) {
    acc += P[j];
    S[j] = acc;
  }
}

}  // namespace

QuadratureError::QuadratureError(double ach, double req)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "quadrature did not converge: achieved error " << ach << ", requested " << req;
        return os.str();
      }()),
      achieved(ach) {}

std::string tail_kind_name(const TailFamily& t) {
  return std::visit(overloaded{[](const ExpTail&) { return std::string("exp"); },
                               [](const Algebraic&) { return std::string("algebraic"); },
                               [](const IteratedLog&) { return std::string("iterated_log"); },
                               [](const Power&) { return std::string("power"); }},
                    t);
}

double iterated_log(int m, double z) {
  double l = z;
  for (int i = 0; i < m; ++i) {
    if (!(l > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    l = std::log(l);
  }
  return l;
}

double tail_z_safe(const TailFamily& t) {
  if (const auto* il = std::get_if<IteratedLog>(&t)) {
    double z = 1.0;
    for (int i = 0; i < il->k; ++i) z = std::exp(z);
    return z;
  }
  if (std::holds_alternative<ExpTail>(t)) return -kInf;
  return 0.0;
}

TailValue tail_eval(const TailFamily& t, double z) {
  return std::visit(
      overloaded{
          [z](const ExpTail& e) {
            double v = e.amp * std::exp(-e.kappa * z);
            return TailValue{v, -e.kappa * v, e.kappa * e.kappa * v};
          },
          [z](const Algebraic& g) {
            return TailValue{g.gamma / z, -g.gamma / (z * z), 2.0 * g.gamma / (z * z * z)};
          },
          [z](const Power& w) {
            double v = w.gamma * std::pow(z, -w.p);
            return TailValue{v, -w.p * v / z, w.p * (w.p + 1.0) * v / (z * z)};
          },
          [z](const IteratedLog& il) {
            std::vector<double> P, S;
            log_products(il.k, z, P, S);
            double v = 0, d1 = 0, d2 = 0, dS = 0;
            for (int j = 0; j <= il.k; ++j) {
              double w = j < il.k ? il.c0 : il.r;
              double Pj1 = -P[j] * S[j];
              dS += Pj1;  // S_j' = sum_{m<=j} P_m'
              double Pj2 = P[j] * S[j] * S[j] - P[j] * dS;
              v += w * P[j];
              d1 += w * Pj1;
              d2 += w * Pj2;
            }
            return TailValue{v, d1, d2};
          }},
      t);
}

double tail_antiderivative(const TailFamily& t, double z) {
  return std::visit(overloaded{[z](const ExpTail& e) { return -e.amp / e.kappa * std::exp(-e.kappa * z); },
                               [z](const Algebraic& g) { return g.gamma * std::log(z); },
                               [z](const Power& w) { return w.gamma * std::pow(z, 1.0 - w.p) / (1.0 - w.p); },
                               [z](const IteratedLog& il) {
                                 double s = 0.0;
                                 for (int m = 1; m <= il.k; ++m) s += il.c0 * iterated_log(m, z);
                                 return s + il.r * iterated_log(il.k + 1, z);
                               }},
                    t);
}

EnvironmentProfile::EnvironmentProfile(double alpha, TailFamily tail, double center, double width)
    : alpha_(alpha), tail_(std::move(tail)), center_(center), width_(width) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw ConfigError("alpha", "must be positive and finite");
  if (!(width_ > 0.0) || !std::isfinite(width_)) throw ConfigError("width", "must be positive");
  if (!std::isfinite(center_)) throw ConfigError("center", "must be finite");
  std::visit(overloaded{[&](ExpTail& e) {
                          if (!(e.kappa > 0.0)) throw ConfigError("tail.params", "exp tail needs kappa > 0");
                          if (e.amp <= 0.0) e.amp = alpha_ * std::exp(e.kappa * blend_start());
                        },
                        [&](Algebraic& g) {
                          if (!(g.gamma > 0.0)) throw ConfigError("tail.params", "algebraic tail needs gamma > 0");
                        },
                        [&](Power& w) {
                          if (!(w.gamma > 0.0)) throw ConfigError("tail.params", "power tail needs gamma > 0");
                          if (!(w.p > 0.0 && w.p < 1.0))
                            throw ConfigError("tail.params", "power tail needs 0 < p < 1");
                        },
                        [&](IteratedLog& il) {
                          if (il.k < 1 || il.k > 3) throw ConfigError("tail.params", "iterated log needs 1 <= k <= 3");
                          if (!(il.r > 0.0) || !(il.c0 > 0.0))
                            throw ConfigError("tail.params", "iterated log needs r > 0 and c0 > 0");
                        }},
             tail_);
  if (blend_start() < tail_z_safe(tail_))
    throw ConfigError("center", "blend must start beyond z_safe = " + std::to_string(tail_z_safe(tail_)));
  // tail is decreasing, so checking the blend start is enough for a <= alpha
  TailValue t0 = tail_eval(tail_, blend_start());
  if (!(t0.v <= alpha_ * (1.0 + 1e-12)))
    throw ConfigError("center", "tail exceeds alpha at the start of the blend; move center right");
  for (int i = 0; i <= 200; ++i) {
    double z = blend_start() + (2.0 * width_) * i / 200.0;
    TailValue tv = tail_eval(tail_, z);
    if (!(tv.v > 0.0) || tv.d1 > 0.0) throw ConfigError("tail.params", "tail must be positive and decreasing");
  }
}

namespace {
struct Blend {
  double s, d1, d2;
};
Blend smootherstep(double z, double lo, double width2) {
  double t = (z - lo) / width2;
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  double s = t * t * t * (t * (6.0 * t - 15.0) + 10.0);
  double d1 = 30.0 * t * t * (1.0 - t) * (1.0 - t) / width2;
  double d2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (width2 * width2);
  return {s, d1, d2};
}
}  // namespace

double EnvironmentProfile::a(double z) const {
  if (z <= blend_start()) return alpha_;
  Blend b = smootherstep(z, blend_start(), 2.0 * width_);
  double t = tail_eval(tail_, z).v;
  return alpha_ * (1.0 - b.s) + t * b.s;
}

double EnvironmentProfile::da(double z) const {
  if (z <= blend_start()) return 0.0;
  Blend b = smootherstep(z, blend_start(), 2.0 * width_);
  TailValue t = tail_eval(tail_, z);
  return b.d1 * (t.v - alpha_) + b.s * t.d1;
}

double EnvironmentProfile::d2a(double z) const {
  if (z <= blend_start()) return 0.0;
  Blend b = smootherstep(z, blend_start(), 2.0 * width_);
  TailValue t = tail_eval(tail_, z);
  return b.d2 * (t.v - alpha_) + 2.0 * b.d1 * t.d1 + b.s * t.d2;
}

double EnvironmentProfile::integral(double z1, double z2) const {
  if (z1 == z2) return 0.0;
  if (z1 > z2) return -integral(z2, z1);
  double total = 0.0;
  double cuts[] = {blend_start(), z_switch()};
  double lo = z1;
  auto piece = [&](double p, double q) {
    if (q <= blend_start()) return alpha_ * (q - p);
    if (p > 0.0 && q / p > 8.0) {
      return integrate([&](double u) { double s = std::exp(u); return a(s) * s; }, std::log(p), std::log(q));
    }
    return integrate([&](double s) { return a(s); }, p, q);
  };
  for (double cut : cuts) {
    if (cut > lo && cut < z2) {
      total += piece(lo, cut);
      lo = cut;
    }
  }
  total += piece(lo, z2);
  return total;
}

std::vector<double> EnvironmentProfile::cumulative_integral(std::span<const double> zs) const {
  std::vector<double> out(zs.size(), 0.0);
  for (size_t i = 1; i < zs.size(); ++i) out[i] = out[i - 1] + integral(zs[i - 1], zs[i]);
  return out;
}

double log_tilde_a(const EnvironmentProfile& prof, double c, double z0, double z) {
  return -prof.integral(z0, z) / c;
}

double tilde_a(const EnvironmentProfile& prof, double c, double z0, double z) {
  return std::exp(log_tilde_a(prof, c, z0, z));
}

namespace {

double tail_mass_ratio_pure(const EnvironmentProfile& prof, double c, double z) {
  const TailFamily& t = prof.tail();
  if (const auto* g = std::get_if<Algebraic>(&t)) return z / (g->gamma / c - 1.0);
  if (const auto* il = std::get_if<IteratedLog>(&t); il && same_speed(il->c0, c)) {
    std::vector<double> P, S;
    log_products(il->k, z, P, S);
    return 1.0 / ((il->r / c - 1.0) * P[il->k]);
  }
  double F0 = tail_antiderivative(t, z);
  return integrate(
      [&](double tt) {
        if (!std::isfinite(tt)) return 0.0;
        double s = z * std::exp(tt);
        double e = -(tail_antiderivative(t, s) - F0) / c + tt;
        if (!(e > -700.0)) return 0.0;
        return z * std::exp(e);
      },
      0.0, kInf);
}

}  // namespace

double tail_mass_ratio(const EnvironmentProfile& prof, double c, double z) {
  if (!tail_asymptotics(prof.tail(), c).tilde_a_integrable) return kInf;
  double zs = prof.z_switch();
  if (z >= zs) return tail_mass_ratio_pure(prof, c, z);
  double head = integrate([&](double s) { return std::exp(-prof.integral(z, s) / c); }, z, zs);
  return head + std::exp(-prof.integral(z, zs) / c) * tail_mass_ratio_pure(prof, c, zs);
}

SigmaPair sigma(double a, double c) {
  double D = c * c - 4.0 * a;
  SigmaPair out{};
  if (D < 0.0) {
    out.sigma1 = out.sigma2 = -0.5 * c;
    out.imag = 0.5 * std::sqrt(-D);
    out.complex_pair = true;
    return out;
  }
  double sq = std::sqrt(D);
  double q = -0.5 * (c + (c >= 0.0 ? sq : -sq));
  double r1 = q, r2 = q != 0.0 ? a / q : 0.0;
  out.sigma1 = std::min(r1, r2);
  out.sigma2 = std::max(r1, r2);
  return out;
}

SigmaPair sigma(const EnvironmentProfile& prof, double c, double z) { return sigma(prof.a(z), c); }

Eigenvalues generalized_eigenvalues(double alpha, double c) {
  double l1 = -alpha + 0.25 * c * c;
  double l1p;
  if (c <= 0.0)
    l1p = -alpha;
  else if (c < critical_speed(alpha))
    l1p = l1;
  else
    l1p = 0.0;
  return {l1, l1p};
}

std::string decay_kind_name(DecayKind k) {
  switch (k) {
    case DecayKind::PureExp: return "PureExp";
    case DecayKind::Sigma1Int: return "Sigma1Int";
    case DecayKind::TildeA: return "TildeA";
    case DecayKind::SlowMaximal: return "SlowMaximal";
    case DecayKind::ProfileItself: return "ProfileItself";
  }
  return "?";
}

DecayKind decay_kind_from_name(const std::string& s) {
  for (DecayKind k : {DecayKind::PureExp, DecayKind::Sigma1Int, DecayKind::TildeA, DecayKind::SlowMaximal,
                      DecayKind::ProfileItself}) {
    std::string n = decay_kind_name(k);
    if (n == s) return k;
    std::string lower;
    for (char ch : n) lower += static_cast<char>(std::tolower(ch));
    if (lower == s) return k;
  }
  if (s == "minimal") return DecayKind::Sigma1Int;
  if (s == "maximal") return DecayKind::SlowMaximal;
  throw ConfigError("target.kind", "unknown decay kind '" + s + "'");
}

TailAsymptotics tail_asymptotics(const TailFamily& t, double c) {
  return std::visit(
      overloaded{[](const ExpTail&) { return TailAsymptotics{0.0, 0.0, true, false}; },
                 [c](const Algebraic& g) {
                   return TailAsymptotics{g.gamma, g.gamma, true, g.gamma > c && !same_speed(g.gamma, c)};
                 },
                 [](const Power& w) { return TailAsymptotics{kInf, kInf, w.p > 0.5, true}; },
                 [c](const IteratedLog& il) {
                   bool l1;
                   if (same_speed(il.c0, c))
                     l1 = il.r > c && !same_speed(il.r, c);
                   else
                     l1 = il.c0 > c;
                   double lim = same_speed(il.c0, c) ? c : il.c0;
                   return TailAsymptotics{lim, lim, true, l1};
                 }},
      t);
}

RegimeReport classify(const TailAsymptotics& t, double alpha, double c, bool profile_is_power) {
  RegimeReport r;
  r.alpha = alpha;
  r.c = c;
  Eigenvalues ev = generalized_eigenvalues(alpha, c);
  r.lambda1 = ev.lambda1;
  r.lambda1_prime = ev.lambda1_prime;

  if (t.za_limsup < c && !same_speed(t.za_limsup, c))
    r.case_abcd = "A";
  else if (same_speed(t.za_liminf, c) && same_speed(t.za_limsup, c))
    r.case_abcd = "B";
  else if (std::isinf(t.za_liminf))
    r.case_abcd = "D";
  else if (t.za_liminf > c && std::isfinite(t.za_liminf))
    r.case_abcd = "C";
  else
    r.case_abcd = "undetermined";

  if (t.a_squared_integrable && !t.tilde_a_integrable)
    r.case_123 = 1;
  else if (t.a_squared_integrable && t.tilde_a_integrable)
    r.case_123 = 2;
  else if (!t.a_squared_integrable && t.tilde_a_integrable)
    r.case_123 = 3;
  else
    r.exceptional = true;

  if (r.exceptional) return r;
  bool below = c < critical_speed(alpha);
  if (r.case_123 == 1)
    r.inventory = below ? "unique-exponential" : "none";
  else
    r.inventory = below ? "exponential-plus-infinitely-many-nonexponential" : "infinitely-many-nonexponential-only";
  if (below) r.minimal_decay = DecayKind::Sigma1Int;
  if (r.case_123 >= 2)
    r.maximal_decay = (profile_is_power || r.case_abcd == "D") ? DecayKind::ProfileItself : DecayKind::SlowMaximal;
  return r;
}

RegimeReport classify(const EnvironmentProfile& prof, double c) {
  if (!(c > 0.0)) throw ConfigError("c", "speed must be positive");
  return classify(tail_asymptotics(prof.tail(), c), prof.alpha(), c,
                  std::holds_alternative<Power>(prof.tail()));
}

IntegrabilityProbe probe_tilde_a_integrability(const EnvironmentProfile& prof, double c, double z0, int decades) {
  if (z0 < prof.z_switch()) throw std::invalid_argument("probe start must lie beyond the blend");
  IntegrabilityProbe out{};
  const TailFamily& t = prof.tail();
  double F0 = tail_antiderivative(t, z0);
  auto log_ta = [&](double s) { return -(tail_antiderivative(t, s) - F0) / c; };
  double acc = 0.0, prev = z0;
  std::vector<double> dm;
  for (int m = 1; m <= decades; ++m) {
    double Z = z0 * std::pow(10.0, m);
    double inc = integrate([&](double u) { double s = std::exp(u); return std::exp(log_ta(s) + u); },
                           std::log(prev), std::log(Z));
    acc += inc;
    out.z.push_back(Z);
    out.partial.push_back(acc);
    dm.push_back(inc);
    prev = Z;
  }
  // log-log fit of the increments over the second half of the decades
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  bool underflow = false;
  for (int m = decades / 2 + 1; m <= decades; ++m) {
    double d = dm[m - 1];
    if (!(d > 1e-300)) {
      underflow = true;
      break;
    }
    double x = std::log(double(m)), y = std::log(d);
    sx += x; sy += y; sxx += x * x; sxy += x * y; ++n;
  }
  if (underflow || n < 2) {
    out.increment_exponent = kInf;
  } else {
    out.increment_exponent = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  out.looks_integrable = out.increment_exponent > 1.5;
  return out;
}

}  // namespace fkwave
