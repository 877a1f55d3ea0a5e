// fkwave: config-driven forced-wave experiments.
// Exit codes: 0 ok, 2 config error, 3 exceptional classification, 4 solver failure, 5 failed check.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "fkwave/analysis.hpp"
#include "fkwave/config.hpp"
#include "fkwave/localsolve.hpp"
#include "fkwave/oracles.hpp"
#include "fkwave/output.hpp"
#include "fkwave/pdesim.hpp"
#include "fkwave/wavesolver.hpp"

namespace fs = std::filesystem;
using namespace fkwave;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kConfig = 2, kExceptional = 3, kSolver = 4, kCheck = 5;
constexpr size_t kSweepChunk = 8;

struct Run {
  ExperimentConfig cfg;
  EnvironmentProfile prof;
  fs::path out;
  bool svg = false;
  int workers = 1;
  std::vector<std::string> files;

  fs::path file(const std::string& name) {
    files.push_back(name);
    return out / name;
  }
  void csv(const std::string& name, const CsvTable& t) { t.write(file(name).string()); }
  void text(const std::string& name, const std::string& s) { write_text(file(name).string(), s); }
  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
};

DecayAnsatz target_of(const Run& r, double c) {
  DecayKind k = DecayKind::Sigma1Int;
  if (r.cfg.target.kind) {
    k = *r.cfg.target.kind;
  } else if (auto m = classify(r.prof, c).minimal_decay) {
    k = *m;
  }
  return {k, r.cfg.target.z0.value_or(r.prof.z_switch()), r.cfg.target.K};
}

int solver_failure(Run& r, const WaveOutcome& o, const std::string& label) {
  r.csv("residual_history_" + label + ".csv", residual_history_table(o.residual_history));
  std::cerr << "fkwave: " << label << " wave: " << wave_status_name(o.status) << ": " << o.message << "\n";
  return kSolver;
}

void wave_plots(Run& r, const std::vector<Series>& all, const std::string& stem) {
  if (!r.svg) return;
  r.text(stem + "_profile.svg", svg_line_plot(all, {"wave profile", "z", "phi", false}));
  std::vector<Series> tails;
  for (const auto& s : all) {
    Series t{s.name, {}, {}};
    for (size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] >= 0.0) {
        t.x.push_back(s.x[i]);
        t.y.push_back(s.y[i]);
      }
    tails.push_back(std::move(t));
  }
  r.text(stem + "_tail.svg", svg_line_plot(tails, {"wave tail", "z", "phi", true}));
}

int cmd_classify(Run& r) {
  double c = require_speed(r.cfg);
  auto rep = classify(r.prof, c);
  json j = to_json(rep);
  std::cout << j.dump(2) << "\n";
  r.json_file("classify.json", j);
  return rep.exceptional ? kExceptional : kOk;
}

int cmd_wave(Run& r) {
  double c = require_speed(r.cfg);
  auto t = target_of(r, c);
  auto o = solve_wave(r.prof, c, t, r.cfg.solver, r.cfg.target.start);
  r.json_file("wave.json", to_json(o, r.prof));
  if (!o.ok()) return solver_failure(r, o, "wave");
  r.csv("wave.csv", wave_table(o.solution));
  wave_plots(r, {{decay_kind_name(t.kind), o.solution.z, o.solution.phi}}, "wave");
  std::cout << "converged: " << decay_kind_name(t.kind) << " wave at c = " << c << ", "
            << o.solution.iterations << " iterations\n";
  return kOk;
}

int cmd_family(Run& r) {
  double c = require_speed(r.cfg);
  auto rep = classify(r.prof, c);
  double z0 = r.prof.z_switch();
  std::vector<std::pair<std::string, WaveOutcome>> waves;
  waves.emplace_back("min", solve_wave(r.prof, c, {DecayKind::Sigma1Int, z0, 1.0}, r.cfg.solver));
  // pinned members only exist when tilde_a is integrable; elsewhere the pin is a truncation artifact
  bool has_family = rep.maximal_decay && rep.case_123 == 2;
  if (has_family) {
    auto fam = wave_family(r.prof, c, r.cfg.family.Ks, r.cfg.family.z0, r.cfg.solver);
    for (size_t i = 0; i < fam.size(); ++i) waves.emplace_back("K=" + format_double(r.cfg.family.Ks[i]), fam[i]);
  }
  if (rep.maximal_decay)
    waves.emplace_back("max", solve_wave(r.prof, c, {*rep.maximal_decay, z0, 1.0}, r.cfg.solver));

  json j;
  j["classification"] = to_json(rep);
  j["waves"] = json::array();
  int code = kOk;
  for (size_t i = 0; i < waves.size(); ++i) {
    json w = to_json(waves[i].second, r.prof);
    w["label"] = waves[i].first;
    j["waves"].push_back(w);
    if (!waves[i].second.ok()) code = solver_failure(r, waves[i].second, "member" + std::to_string(i));
  }
  if (code == kOk) {
    std::vector<const WaveSolution*> ws;
    std::vector<std::string> header{"z"};
    std::vector<Series> series;
    for (const auto& [label, o] : waves) {
      ws.push_back(&o.solution);
      header.push_back("phi_" + label);
      series.push_back({label, o.solution.z, o.solution.phi});
    }
    auto ord = ordering_check(ws);
    j["ordering"] = {{"ordered", ord.ordered}, {"max_violation", number(ord.max_violation)}};
    CsvTable t(header);
    for (size_t i = 0; i < ws[0]->z.size(); ++i) {
      std::vector<CsvTable::Cell> row{ws[0]->z[i]};
      for (auto w : ws) row.push_back(w->phi[i]);
      t.add_row(row);
    }
    r.csv("family.csv", t);
    wave_plots(r, series, "family");
    std::cout << waves.size() << " waves, ordered: " << (ord.ordered ? "yes" : "no") << "\n";
  }
  r.json_file("family.json", j);
  return code;
}

std::vector<double> sample(const ComparisonFunction& f, const std::vector<double>& z) {
  std::vector<double> u;
  for (double x : z) u.push_back(std::max(0.0, f(x)));
  return u;
}

int cmd_simulate(Run& r) {
  double c = require_speed(r.cfg);
  const auto& sc = r.cfg.simulation;
  auto t = target_of(r, c);
  auto ref = solve_wave(r.prof, c, t, r.cfg.solver, r.cfg.target.start);
  if (sc.initial == InitialKind::Wave && !ref.ok()) return solver_failure(r, ref, "initial");
  const auto& cfg = r.cfg.solver;
  std::vector<double> z(cfg.N);
  for (int i = 0; i < cfg.N; ++i) z[i] = -cfg.L + i * cfg.h();
  std::vector<double> u0;
  switch (sc.initial) {
    case InitialKind::CosBump: u0 = sample(cos_bump_sub(r.prof, c), z); break;
    case InitialKind::Plateau: u0.assign(cfg.N, r.prof.alpha()); break;
    case InitialKind::Zero: u0.assign(cfg.N, 0.0); break;
    case InitialKind::Wave: u0 = ref.solution.phi; break;
  }
  RightBC bc = RightBC::Neumann;
  double bcv = 0.0;
  if (sc.bc == RightBC::Robin) bc = target_bc(r.prof, c, t, cfg.L, bcv);
  auto s = make_state(r.prof, c, cfg.L, cfg.N, u0, bc, bcv);
  EvolveOptions opt;
  opt.monitor_every = sc.monitor_every;
  opt.snapshot_every = sc.snapshot_every;
  if (ref.ok()) opt.reference = &ref.solution;
  double dt = sc.dt.value_or(default_time_step(s));
  TrajectorySummary tr;
  try {
    tr = evolve(s, sc.T, dt, opt);
  } catch (const StepRejected& e) {
    std::cerr << "fkwave: " << e.what() << " (try dt = " << format_double(e.suggested_dt()) << ")\n";
    return kSolver;
  }
  r.csv("trajectory.csv", trajectory_table(tr, s.z));
  r.csv("monitor.csv", monitor_table(tr));
  json j{{"T", number(s.t)},
         {"dt", number(dt)},
         {"min_u", number(tr.min_u)},
         {"max_u", number(tr.max_u)},
         {"reference", ref.ok() ? json(decay_kind_name(t.kind)) : json()},
         {"final_residual", number(tr.residual.empty() ? NAN : tr.residual.back())},
         {"final_distance", number(tr.distance.empty() ? NAN : tr.distance.back())}};
  r.json_file("simulate.json", j);
  if (r.svg) {
    std::vector<Series> series;
    for (const auto& snap : tr.snapshots) series.push_back({"t=" + format_double(snap.t), s.z, snap.u});
    series.push_back({"final", s.z, s.u});
    r.text("simulate_snapshots.svg", svg_line_plot(series, {"snapshots", "z", "u", false}));
  }
  std::cout << "evolved to t = " << s.t << ", max u = " << tr.max_u << "\n";
  return kOk;
}

int cmd_fit(Run& r) {
  double c = require_speed(r.cfg);
  auto t = target_of(r, c);
  FitOptions fo{r.cfg.fit.window_fraction, r.cfg.fit.exclude_fraction, 200};
  json j;
  TailData data;
  if (r.cfg.fit.local) {
    auto s = integrate_local(r.prof, c, t, r.cfg.fit.z_hi, r.cfg.fit.z_lo);
    r.csv("local.csv", local_table(s));
    auto law = tail_law_check(r.prof, s);
    auto nec = check_nonexponential_necessaries(s, r.prof);
    auto check = [](const CheckResult& x) {
      return json{{"name", x.name}, {"measured", number(x.measured)}, {"threshold", number(x.threshold)},
                  {"pass", x.pass}};
    };
    j["local"] = {{"truncated", s.truncated},
                  {"message", s.message},
                  {"max_relative_residual", number(s.max_relative_residual)},
                  {"tail_law", check(law)},
                  {"necessaries",
                   {check(nec.log_derivative), check(nec.curvature_ratio), check(nec.below_profile),
                    check(nec.below_profile_band)}}};
    data = tail_data(s);
  } else {
    auto o = solve_wave(r.prof, c, t, r.cfg.solver, r.cfg.target.start);
    if (!o.ok()) return solver_failure(r, o, "wave");
    data = tail_data(o.solution);
  }
  auto fit = fit_decay(r.prof, c, data, default_candidates(r.prof), fo);
  r.csv("fit.csv", fit_table(fit));
  j["fit"] = to_json(fit);
  r.json_file("fit.json", j);
  std::cout << "best: " << decay_kind_name(fit.best().candidate.kind) << " ("
            << decay_class_name(fit.winner_class) << ")\n";
  return kOk;
}

int cmd_verify_oracles(Run& r) {
  double c = require_speed(r.cfg);
  const auto& p = r.prof;
  double eps = r.cfg.oracles.eps;
  std::vector<std::pair<std::string, std::function<ComparisonFunction()>>> builders{
      {"cos_bump_sub", [&] { return cos_bump_sub(p, c); }},
      {"slow_sub", [&] { return slow_sub(p, c); }},
      {"sub2_slow", [&] { return sub2_slow(p, c, default_surrogate(p, c)); }},
      {"exp_super", [&] { return exp_super(p, c, eps * c); }},
      {"alpha_super", [&] { return alpha_super(p); }},
      {"g1_sub", [&] { return g1_sub(p, c); }},
      {"alg_super", [&] { return alg_super(p, c); }},
      {"profile_band_sub", [&] { return profile_band(p, c, eps, OracleSign::Sub); }},
      {"profile_band_super", [&] { return profile_band(p, c, eps, OracleSign::Super); }},
      {"bracket_sub", [&] { return bracket_pair(p, c).first; }},
      {"bracket_super", [&] { return bracket_pair(p, c).second; }},
  };
  CsvTable t({"construction", "sign", "applicable", "min_residual", "max_residual", "worst_z", "corners_ok", "pass",
              "note"});
  bool all = true;
  int applicable = 0;
  for (const auto& [name, build] : builders) {
    try {
      auto f = build();
      auto rep = residual_sign_check(f, p, c, r.cfg.oracles.samples);
      ++applicable;
      all = all && rep.pass;
      t.add_row({name, std::string(f.sign == OracleSign::Sub ? "sub" : "super"), std::string("true"),
                 rep.min_residual, rep.max_residual, rep.worst_z, std::string(rep.corners_ok ? "true" : "false"),
                 std::string(rep.pass ? "true" : "false"), std::string()});
    } catch (const NotApplicable& e) {
      t.add_row({name, std::string(), std::string("false"), NAN, NAN, NAN, std::string(), std::string(),
                 std::string(e.what())});
    }
  }
  r.csv("oracles.csv", t);
  std::cout << applicable << " constructions checked, " << (all ? "all pass" : "FAILURES") << "\n";
  return all ? kOk : kCheck;
}

struct SweepRow {
  double c = 0.0;
  RegimeReport rep;
  std::optional<WaveOutcome> mn, fam, mx;
  std::optional<FitResult> fmn, ffam, fmx;
  std::string note;
  std::optional<InventoryVerdict> verdict;
};

std::optional<FitResult> try_fit(const EnvironmentProfile& p, double c, const WaveOutcome& o, std::string& note) {
  if (!o.ok()) return std::nullopt;
  try {
    return fit_decay(p, c, tail_data(o.solution), default_candidates(p));
  } catch (const FitError& e) {
    note += std::string(note.empty() ? "" : "; ") + e.what();
    return std::nullopt;
  }
}

void sweep_chunk(const Run& r, std::vector<SweepRow>& rows) {
  std::vector<double> cs;
  for (const auto& x : rows) cs.push_back(x.c);
  auto mins = continuation_in_c(r.prof, cs, DecayKind::Sigma1Int, r.cfg.solver);
  for (size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    row.rep = classify(r.prof, row.c);
    row.mn = mins.outcomes[i];
    if (row.rep.maximal_decay) {
      row.mx = solve_wave(r.prof, row.c, {*row.rep.maximal_decay, r.prof.z_switch(), 1.0}, r.cfg.solver);
      // one pinned member besides the maximal wave, so a continuum can be told from a single wave;
      // it is pinned at half the maximal wave's value at z = L so that it sits below it
      if (row.rep.case_123 == 2 && row.mx->ok()) {
        double z0 = r.cfg.family.z0, L = r.cfg.solver.L;
        double K = 0.5 * row.mx->solution.phi.back() / tilde_a(r.prof, row.c, z0, L);
        row.fam = wave_family(r.prof, row.c, {K}, z0, r.cfg.solver)[0];
      }
    }
    row.fmn = try_fit(r.prof, row.c, *row.mn, row.note);
    if (row.fam) row.ffam = try_fit(r.prof, row.c, *row.fam, row.note);
    if (row.mx) row.fmx = try_fit(r.prof, row.c, *row.mx, row.note);
    if (row.rep.exceptional) continue;
    std::vector<const WaveSolution*> ws;
    std::vector<FitResult> fits;
    if (row.fmn) {
      ws.push_back(&row.mn->solution);
      fits.push_back(*row.fmn);
    }
    if (row.ffam) {
      ws.push_back(&row.fam->solution);
      fits.push_back(*row.ffam);
    }
    if (row.fmx) {
      ws.push_back(&row.mx->solution);
      fits.push_back(*row.fmx);
    }
    row.verdict = inventory_verdict(r.prof, row.c, ws, fits);
    for (const auto& chk : row.verdict->checks)
      if (!chk.pass) row.note += std::string(row.note.empty() ? "" : "; ") + chk.name + ": " + chk.measured;
  }
}

int cmd_sweep(Run& r) {
  if (!r.cfg.speed.has_range) throw ConfigError("speed.c_min", "sweep needs c_min and c_max");
  auto cs = r.cfg.speed.range();
  std::vector<SweepRow> rows(cs.size());
  for (size_t i = 0; i < cs.size(); ++i) rows[i].c = cs[i];
  // chunks do not depend on the worker count, so the warm starts and the output do not either
  std::vector<std::vector<SweepRow>> chunks;
  for (size_t i = 0; i < rows.size(); i += kSweepChunk)
    chunks.emplace_back(rows.begin() + i, rows.begin() + std::min(rows.size(), i + kSweepChunk));
  size_t next = 0;
  std::mutex m;
  auto worker = [&] {
    for (;;) {
      size_t k;
      {
        std::lock_guard<std::mutex> lock(m);
        if (next == chunks.size()) return;
        k = next++;
      }
      sweep_chunk(r, chunks[k]);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, r.workers); ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  CsvTable t({"c", "case_abcd", "case_123", "inventory", "min_status", "min_class", "min_best", "max_kind",
              "max_status", "max_class", "max_best", "family_status", "family_class", "verdict", "note"});
  auto cls = [](const std::optional<FitResult>& f) { return f ? decay_class_name(f->winner_class) : std::string(); };
  auto best = [](const std::optional<FitResult>& f) {
    return f ? decay_kind_name(f->best().candidate.kind) : std::string();
  };
  for (const auto& chunk : chunks)
    for (const auto& row : chunk) {
      std::string verdict = row.rep.exceptional ? "exceptional" : (row.verdict->pass ? "pass" : "fail");
      t.add_row({row.c, row.rep.case_abcd, row.rep.case_123, row.rep.inventory.value_or(""),
                 wave_status_name(row.mn->status), cls(row.fmn), best(row.fmn),
                 row.rep.maximal_decay ? decay_kind_name(*row.rep.maximal_decay) : std::string(),
                 row.mx ? wave_status_name(row.mx->status) : std::string(), cls(row.fmx), best(row.fmx),
                 row.fam ? wave_status_name(row.fam->status) : std::string(), cls(row.ffam), verdict,
                 row.note});
    }
  r.csv("sweep.csv", t);
  std::cout << cs.size() << " speeds swept\n";
  return kOk;
}

std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forced waves in shifting degenerate environments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config, out;
  bool svg = false;
  int workers = 1;
  app.add_option("--config", config, "INI experiment file")->required();
  app.add_option("--out", out, "output directory (overrides [output] dir)");
  app.add_flag("--svg", svg, "also write SVG plots");
  app.add_option("--workers", workers, "worker threads for sweep")->check(CLI::Range(1, 256));

  const std::vector<std::pair<std::string, int (*)(Run&)>> commands{
      {"classify", cmd_classify}, {"wave", cmd_wave},     {"family", cmd_family},
      {"simulate", cmd_simulate}, {"fit", cmd_fit},       {"verify-oracles", cmd_verify_oracles},
      {"sweep", cmd_sweep}};
  for (const auto& [name, _] : commands) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  std::string command = app.get_subcommands().front()->get_name();
  int (*fn)(Run&) = nullptr;
  for (const auto& [name, f] : commands)
    if (name == command) fn = f;

  std::optional<Run> run;
  try {
    auto cfg = load_config(config);
    if (!out.empty()) cfg.out_dir = out;
    if (command == "sweep" && !cfg.speed.has_range) throw ConfigError("speed.c_min", "sweep needs c_min and c_max");
    if (command != "sweep") require_speed(cfg);
    auto prof = cfg.profile.build();
    run.emplace(Run{cfg, prof, fs::path(cfg.out_dir), svg, workers, {}});
    fs::create_directories(run->out);
  } catch (const ConfigError& e) {
    std::cerr << "fkwave: config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "fkwave: " << e.what() << "\n";
    return kConfig;
  }

  std::string started = utc_now();
  int code;
  try {
    code = fn(*run);
  } catch (const ConfigError& e) {
    std::cerr << "fkwave: config error: " << e.what() << "\n";
    code = kConfig;
  } catch (const std::exception& e) {
    std::cerr << "fkwave: " << e.what() << "\n";
    code = kSolver;
  }
  json manifest{{"command", command},
                {"config", fs::absolute(config).string()},
                {"workers", workers},
                {"svg", svg},
                {"started_utc", started},
                {"finished_utc", utc_now()},
                {"exit_code", code},
                {"files", run->files}};
  write_text((run->out / "manifest.json").string(), manifest.dump(2) + "\n");
  return code;
}
