#include <doctest.h>

#include <cmath>

#include "fkwave/oracles.hpp"

using namespace fkwave;

namespace {
EnvironmentProfile expp() { return EnvironmentProfile(1.0, ExpTail{2.0}, 0.0, 2.0); }
EnvironmentProfile alg(double g) { return EnvironmentProfile(1.0, Algebraic{g}, 6.0, 2.0); }
EnvironmentProfile ilog() { return EnvironmentProfile(1.0, IteratedLog{1, 2.0, 1.0}, 20.0, 3.0); }
EnvironmentProfile pw() { return EnvironmentProfile(1.0, Power{1.0, 0.5}, 6.0, 2.0); }

void require_pass(const ComparisonFunction& f, const EnvironmentProfile& p, double c) {
  SignReport r = residual_sign_check(f, p, c, 10000);
  INFO(oracle_kind_name(f.kind), " min ", r.min_residual, " max ", r.max_residual, " at ", r.worst_z);
  CHECK(r.corners_ok);
  CHECK(r.pass);
}
}  // namespace

TEST_CASE("all nine constructions hold their sign") {
  require_pass(cos_bump_sub(expp(), 1.0), expp(), 1.0);
  require_pass(slow_sub(alg(3.0), 1.0, 1.0), alg(3.0), 1.0);
  require_pass(sub2_slow(alg(3.0), 1.0, default_surrogate(alg(3.0), 1.0)), alg(3.0), 1.0);
  require_pass(exp_super(expp(), 1.0, 0.3), expp(), 1.0);
  require_pass(alpha_super(expp()), expp(), 1.0);
  require_pass(g1_sub(ilog(), 1.0), ilog(), 1.0);
  require_pass(alg_super(ilog(), 1.0), ilog(), 1.0);
  require_pass(profile_band(pw(), 1.0, 0.05, OracleSign::Sub), pw(), 1.0);
  require_pass(profile_band(pw(), 1.0, 0.05, OracleSign::Super), pw(), 1.0);
}

TEST_CASE("more tails for the slow constructions") {
  require_pass(slow_sub(pw(), 1.0, 1.0), pw(), 1.0);
  require_pass(sub2_slow(pw(), 1.0, default_surrogate(pw(), 1.0)), pw(), 1.0);
  require_pass(slow_sub(ilog(), 1.0), ilog(), 1.0);
  require_pass(sub2_slow(ilog(), 1.0, default_surrogate(ilog(), 1.0)), ilog(), 1.0);
  require_pass(g1_sub(alg(3.0), 1.0), alg(3.0), 1.0);
  require_pass(alg_super(alg(3.0), 1.0), alg(3.0), 1.0);
  require_pass(cos_bump_sub(alg(3.0), 1.0), alg(3.0), 1.0);
  require_pass(exp_super(alg(3.0), 1.0, 0.5), alg(3.0), 1.0);
}

TEST_CASE("cos bump near the critical speed is tiny but valid") {
  auto f = cos_bump_sub(expp(), 1.999);
  CHECK(f.constants.at("delta") < 1e-100);
  require_pass(f, expp(), 1.999);
  CHECK_THROWS_AS(cos_bump_sub(expp(), 2.0), NotApplicable);
}

TEST_CASE("inapplicable constructions are refused") {
  CHECK_THROWS_AS(slow_sub(alg(0.5), 1.0), NotApplicable);
  CHECK_THROWS_AS(sub2_slow(alg(3.0), 1.0, Algebraic{3.0}), NotApplicable);
  CHECK_THROWS_AS(exp_super(expp(), 1.0, 1.0 - 1e-9), NotApplicable);
  CHECK_THROWS_AS(bracket_pair(expp(), 1.0), NotApplicable);
  CHECK_THROWS_AS(profile_band(alg(3.0), 1.0, 0.05, OracleSign::Sub), NotApplicable);
}

TEST_CASE("slow sub residual bound") {
  auto p = alg(3.0);
  double c = 1.0, A = 1.0;
  auto f = slow_sub(p, c, A);
  double M = f.constants.at("M"), zr = f.constants.at("z_ref");
  CHECK(M > 2 * A / c);
  for (double z = f.lo * 1.01; z < f.hi; z *= 1.3) {
    double ta = std::pow(z / zr, -3.0 / c);
    CHECK(comparison_residual(f, p, c, z) >= A * ta * ta * (c * M / 2 - A) * (1 - 1e-9));
  }
}

TEST_CASE("sub2_slow dominates every multiple of tilde_a") {
  auto p = alg(3.0);
  auto f = sub2_slow(p, 1.0, Algebraic{2.0});
  double zr = f.constants.at("z_ref");
  double prev = 0.0;
  for (double z = 2 * f.lo; z < 1e6; z *= 4) {
    double ratio = f(z) / std::pow(z / zr, -3.0);
    CHECK(ratio > prev);
    prev = ratio;
  }
  CHECK(prev > 1e3);
}

TEST_CASE("g1 sub residual stays above its log-corrected bound") {
  auto p = ilog();
  auto f = g1_sub(p, 1.0);
  double lambda = f.constants.at("lambda");
  for (double z = f.lo * 1.01; z < f.hi; z *= 1.2) {
    double l = std::log(z);
    // u((r - c lambda) P_1 - u) with u = 1/(z l^lambda), P_1 = 1/(z l)
    double bound = (2.0 - lambda) / (z * z * std::pow(l, lambda + 1.0)) - 1.0 / (z * z * std::pow(l, 2 * lambda));
    CHECK(bound > 0.0);
    CHECK(comparison_residual(f, p, 1.0, z) >= bound);
  }
}

TEST_CASE("pairs bracket in order") {
  for (const auto& p : {ilog(), alg(3.0), pw()}) {
    auto [sub, sup] = bracket_pair(p, 1.0);
    double lo = std::max(sub.lo, sup.lo);
    for (double z = lo; z < 50 * lo; z *= 1.5) CHECK(sub(z) <= sup(z));
  }
}
