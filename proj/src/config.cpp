#include "fkwave/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fkwave {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"profile",
       {"alpha", "tail", "tail.kind", "tail.params", "kappa", "amp", "gamma", "k", "r", "c0", "p", "center", "width"}},
      {"speed", {"c", "c_min", "c_max", "c_step"}},
      {"solver", {"L", "N", "newton_tol", "max_iter", "max_halvings", "continuation_step", "dt0"}},
      {"target", {"kind", "z0", "K", "start"}},
      {"family", {"K", "z0"}},
      {"simulation", {"T", "dt", "monitor_every", "snapshot_every", "initial", "bc"}},
      {"fit", {"source", "z_hi", "z_lo", "window_fraction", "exclude_fraction"}},
      {"oracles", {"samples", "eps"}},
      {"output", {"dir"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& root) : root_(root) {}

  bool has(const std::string& sec, const std::string& key) const {
    auto s = root_.get_child_optional(sec);
    return s && s->get_child_optional(pt::ptree::path_type(key, '\0'));
  }

  std::string str(const std::string& sec, const std::string& key) const {
    return root_.get_child(sec).get_child(pt::ptree::path_type(key, '\0')).data();
  }

  double num(const std::string& sec, const std::string& key) const {
    std::string v = str(sec, key);
    try {
      size_t used = 0;
      double x = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError(sec + "." + key, "expected a finite number, got '" + v + "'");
    }
  }

  int integer(const std::string& sec, const std::string& key) const {
    double x = num(sec, key);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(sec + "." + key, "expected an integer");
    return static_cast<int>(x);
  }

  double num_or(const std::string& sec, const std::string& key, double dflt) const {
    return has(sec, key) ? num(sec, key) : dflt;
  }

  double required(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) throw ConfigError(sec + "." + key, "required key is missing");
    return num(sec, key);
  }

  std::vector<double> list(const std::string& sec, const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(sec, key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      size_t b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
      if (b == std::string::npos) throw ConfigError(sec + "." + key, "empty list item");
      item = item.substr(b, e - b + 1);
      try {
        size_t used = 0;
        double x = std::stod(item, &used);
        if (used != item.size() || !std::isfinite(x)) throw std::invalid_argument(item);
        out.push_back(x);
      } catch (const std::exception&) {
        throw ConfigError(sec + "." + key, "expected a comma-separated list of numbers");
      }
    }
    if (out.empty()) throw ConfigError(sec + "." + key, "empty list");
    return out;
  }

 private:
  const pt::ptree& root_;
};

void check_keys(const pt::ptree& root) {
  for (const auto& [sec, body] : root) {
    auto it = schema().find(sec);
    if (it == schema().end()) {
      if (!body.data().empty()) throw ConfigError(sec, "key outside any section");
      throw ConfigError(sec, "unknown section");
    }
    for (const auto& kv : body)
      if (!it->second.count(kv.first)) throw ConfigError(sec + "." + kv.first, "unknown key");
  }
}

// tail.kind (or tail) names the family; parameters come either as named keys or positionally in tail.params
TailFamily read_tail(const Reader& r) {
  if (r.has("profile", "tail") && r.has("profile", "tail.kind"))
    throw ConfigError("profile.tail.kind", "give either tail or tail.kind");
  std::string kind_key = r.has("profile", "tail") ? "tail" : "tail.kind";
  if (!r.has("profile", kind_key)) throw ConfigError("profile.tail.kind", "required key is missing");
  std::string kind = r.str("profile", kind_key);
  const std::map<std::string, std::vector<std::string>> params{{"exp", {"kappa", "amp"}},
                                                               {"algebraic", {"gamma"}},
                                                               {"iterated_log", {"k", "r", "c0"}},
                                                               {"power", {"gamma", "p"}}};
  auto it = params.find(kind);
  if (it == params.end())
    throw ConfigError("profile." + kind_key, "unknown tail '" + kind + "' (exp, algebraic, iterated_log, power)");
  const auto& names = it->second;
  for (const auto& [_, keys] : params)
    for (const auto& k : keys)
      if (r.has("profile", k) && std::find(names.begin(), names.end(), k) == names.end())
        throw ConfigError("profile." + k, "not a parameter of the " + kind + " tail");

  std::map<std::string, double> v;
  if (r.has("profile", "tail.params")) {
    for (const auto& k : names)
      if (r.has("profile", k)) throw ConfigError("profile." + k, "already given in tail.params");
    auto list = r.list("profile", "tail.params");
    size_t need = kind == "exp" ? 1 : names.size();
    if (list.size() < need || list.size() > names.size())
      throw ConfigError("profile.tail.params", "the " + kind + " tail takes " + std::to_string(need) +
                                                   (need < names.size() ? " or " + std::to_string(names.size()) : "") +
                                                   " values");
    for (size_t i = 0; i < list.size(); ++i) v[names[i]] = list[i];
  } else {
    for (const auto& k : names) {
      if (r.has("profile", k))
        v[k] = r.num("profile", k);
      else if (!(kind == "exp" && k == "amp"))
        throw ConfigError("profile." + k, "required key is missing");
    }
  }
  if (kind == "exp") return ExpTail{v["kappa"], v.count("amp") ? v["amp"] : 0.0};
  if (kind == "algebraic") return Algebraic{v["gamma"]};
  if (kind == "power") return Power{v["gamma"], v["p"]};
  double k = v["k"];
  if (k != std::floor(k) || k < 1 || k > 10) throw ConfigError("profile.k", "expected an integer in [1, 10]");
  return IteratedLog{static_cast<int>(k), v["r"], v["c0"]};
}

template <class T>
T pick(const Reader& r, const std::string& sec, const std::string& key, const std::map<std::string, T>& names) {
  std::string v = r.str(sec, key);
  auto it = names.find(v);
  if (it == names.end()) {
    std::string all;
    for (const auto& [n, _] : names) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError(sec + "." + key, "unknown value '" + v + "' (" + all + ")");
  }
  return it->second;
}

}  // namespace

std::vector<double> SpeedConfig::range() const {
  std::vector<double> out;
  if (c_max < c_min) return out;
  int n = static_cast<int>(std::floor((c_max - c_min) / c_step + 1e-3));
  // snapped to 1e-12 so 0.2 + 2 * 0.05 prints as 0.3
  for (int i = 0; i <= n; ++i) out.push_back(std::round((c_min + i * c_step) * 1e12) / 1e12);
  return out;
}

StartKind start_kind_from_name(const std::string& s) {
  for (StartKind k : {StartKind::SubSolution, StartKind::Tanh, StartKind::SuperSolution})
    if (start_kind_name(k) == s) return k;
  throw ConfigError("target.start", "unknown start '" + s + "' (sub, tanh, super)");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  check_keys(root);
  Reader r(root);
  ExperimentConfig cfg;

  cfg.profile.alpha = r.required("profile", "alpha");
  cfg.profile.tail = read_tail(r);
  bool exp_tail = std::holds_alternative<ExpTail>(cfg.profile.tail);
  cfg.profile.center = r.num_or("profile", "center", exp_tail ? 0.0 : 6.0);
  cfg.profile.width = r.num_or("profile", "width", 2.0);
  std::optional<EnvironmentProfile> prof;
  try {
    prof.emplace(cfg.profile.build());
  } catch (const ConfigError& e) {
    std::string k = e.key().rfind("tail", 0) == 0 ? "profile.tail" : "profile." + e.key();
    throw ConfigError(k, std::string(e.what()).substr(e.key().size() + 2));
  }

  if (r.has("speed", "c")) {
    cfg.speed.c = r.num("speed", "c");
    if (!(*cfg.speed.c > 0.0)) throw ConfigError("speed.c", "must be positive");
  }
  if (r.has("speed", "c_min") || r.has("speed", "c_max")) {
    cfg.speed.has_range = true;
    cfg.speed.c_min = r.required("speed", "c_min");
    cfg.speed.c_max = r.required("speed", "c_max");
    cfg.speed.c_step = r.num_or("speed", "c_step", 0.05);
    if (!(cfg.speed.c_min > 0.0)) throw ConfigError("speed.c_min", "must be positive");
    if (!(cfg.speed.c_step > 0.0)) throw ConfigError("speed.c_step", "must be positive");
  } else if (r.has("speed", "c_step")) {
    throw ConfigError("speed.c_step", "needs c_min and c_max");
  }

  cfg.solver = default_solver_config(*prof);
  cfg.solver.L = r.num_or("solver", "L", cfg.solver.L);
  if (r.has("solver", "N")) cfg.solver.N = r.integer("solver", "N");
  cfg.solver.newton_tol = r.num_or("solver", "newton_tol", cfg.solver.newton_tol);
  if (r.has("solver", "max_iter")) cfg.solver.max_iter = r.integer("solver", "max_iter");
  if (r.has("solver", "max_halvings")) cfg.solver.max_halvings = r.integer("solver", "max_halvings");
  cfg.solver.continuation_step = r.num_or("solver", "continuation_step", cfg.solver.continuation_step);
  cfg.solver.dt0 = r.num_or("solver", "dt0", cfg.solver.dt0);
  cfg.solver.validate();

  if (r.has("target", "kind")) cfg.target.kind = decay_kind_from_name(r.str("target", "kind"));
  if (r.has("target", "z0")) cfg.target.z0 = r.num("target", "z0");
  cfg.target.K = r.num_or("target", "K", 1.0);
  if (!(cfg.target.K > 0.0)) throw ConfigError("target.K", "must be positive");
  if (r.has("target", "start")) cfg.target.start = start_kind_from_name(r.str("target", "start"));

  if (r.has("family", "K")) cfg.family.Ks = r.list("family", "K");
  for (double k : cfg.family.Ks)
    if (!(k > 0.0)) throw ConfigError("family.K", "amplitudes must be positive");
  cfg.family.z0 = r.num_or("family", "z0", cfg.family.z0);

  auto& sim = cfg.simulation;
  sim.T = r.num_or("simulation", "T", sim.T);
  if (!(sim.T > 0.0)) throw ConfigError("simulation.T", "must be positive");
  if (r.has("simulation", "dt")) {
    sim.dt = r.num("simulation", "dt");
    if (!(*sim.dt > 0.0)) throw ConfigError("simulation.dt", "must be positive");
  }
  sim.monitor_every = r.num_or("simulation", "monitor_every", sim.monitor_every);
  if (!(sim.monitor_every > 0.0)) throw ConfigError("simulation.monitor_every", "must be positive");
  if (r.has("simulation", "snapshot_every")) sim.snapshot_every = r.integer("simulation", "snapshot_every");
  if (sim.snapshot_every < 0) throw ConfigError("simulation.snapshot_every", "must be nonnegative");
  if (r.has("simulation", "initial"))
    sim.initial = pick<InitialKind>(r, "simulation", "initial",
                                    {{"cos_bump", InitialKind::CosBump},
                                     {"plateau", InitialKind::Plateau},
                                     {"zero", InitialKind::Zero},
                                     {"wave", InitialKind::Wave}});
  if (r.has("simulation", "bc"))
    sim.bc = pick<RightBC>(r, "simulation", "bc", {{"neumann", RightBC::Neumann}, {"wave", RightBC::Robin}});

  if (r.has("fit", "source"))
    cfg.fit.local = pick<bool>(r, "fit", "source", {{"wave", false}, {"local", true}});
  cfg.fit.z_hi = r.num_or("fit", "z_hi", cfg.fit.z_hi);
  cfg.fit.z_lo = r.num_or("fit", "z_lo", cfg.fit.z_lo);
  if (!(cfg.fit.z_lo < cfg.fit.z_hi)) throw ConfigError("fit.z_lo", "must lie below fit.z_hi");
  cfg.fit.window_fraction = r.num_or("fit", "window_fraction", cfg.fit.window_fraction);
  cfg.fit.exclude_fraction = r.num_or("fit", "exclude_fraction", cfg.fit.exclude_fraction);
  if (!(cfg.fit.window_fraction > 0.0 && cfg.fit.window_fraction <= 1.0))
    throw ConfigError("fit.window_fraction", "must lie in (0, 1]");
  if (!(cfg.fit.exclude_fraction >= 0.0 && cfg.fit.exclude_fraction < cfg.fit.window_fraction))
    throw ConfigError("fit.exclude_fraction", "must lie in [0, window_fraction)");

  if (r.has("oracles", "samples")) cfg.oracles.samples = r.integer("oracles", "samples");
  if (cfg.oracles.samples < 10) throw ConfigError("oracles.samples", "must be at least 10");
  cfg.oracles.eps = r.num_or("oracles", "eps", cfg.oracles.eps);
  if (!(cfg.oracles.eps > 0.0 && cfg.oracles.eps < 1.0)) throw ConfigError("oracles.eps", "must lie in (0, 1)");

  if (r.has("output", "dir")) cfg.out_dir = r.str("output", "dir");
  if (cfg.out_dir.empty()) throw ConfigError("output.dir", "must not be empty");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

double require_speed(const ExperimentConfig& cfg) {
  if (!cfg.speed.c) throw ConfigError("speed.c", "required key is missing");
  return *cfg.speed.c;
}

}  // namespace fkwave
