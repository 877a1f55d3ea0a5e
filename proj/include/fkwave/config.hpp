#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fkwave/decay_ansatz.hpp"
#include "fkwave/environment.hpp"
#include "fkwave/wavesolver.hpp"

namespace fkwave {

struct ProfileConfig {
  double alpha = 1.0;
  TailFamily tail = ExpTail{2.0};
  double center = 0.0, width = 2.0;

  EnvironmentProfile build() const { return EnvironmentProfile(alpha, tail, center, width); }
};

struct SpeedConfig {
  std::optional<double> c;
  double c_min = 0.0, c_max = -1.0, c_step = 0.05;  // empty range unless set
  bool has_range = false;

  // c_min, c_min + step, ... up to c_max (inclusive within step/1000); empty when c_max < c_min
  std::vector<double> range() const;
};

struct TargetConfig {
  std::optional<DecayKind> kind;  // default: minimal decay of the classification, else Sigma1Int
  std::optional<double> z0;       // default: profile z_switch
  double K = 1.0;
  StartKind start = StartKind::Tanh;
};

struct FamilyConfig {
  std::vector<double> Ks{0.5, 1.0, 2.0};
  double z0 = 10.0;
};

enum class InitialKind { CosBump, Plateau, Zero, Wave };

struct SimulationConfig {
  double T = 100.0;
  std::optional<double> dt;  // default_time_step when unset
  double monitor_every = 1.0;
  int snapshot_every = 10;
  InitialKind initial = InitialKind::CosBump;
  RightBC bc = RightBC::Neumann;
};

struct FitConfig {
  bool local = false;  // fit a backward local solution instead of a wave
  double z_hi = 1000.0, z_lo = 20.0;
  double window_fraction = 0.2, exclude_fraction = 0.02;
};

struct OracleConfig {
  int samples = 10000;
  double eps = 0.5;  // for the exponential super and the profile bands
};

struct ExperimentConfig {
  ProfileConfig profile;
  SpeedConfig speed;
  SolverConfig solver;  // defaults from the profile, then the [solver] keys
  TargetConfig target;
  FamilyConfig family;
  SimulationConfig simulation;
  FitConfig fit;
  OracleConfig oracles;
  std::string out_dir = "out";
};

// INI text with [section] headers and key = value lines, '#' or ';' comments.
// Unknown sections or keys, unparsable values and missing required keys throw ConfigError naming the key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// the c of a single-speed command; ConfigError("speed.c") when absent
double require_speed(const ExperimentConfig& cfg);

StartKind start_kind_from_name(const std::string& s);

}  // namespace fkwave
