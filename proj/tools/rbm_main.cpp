// Command-line driver: experiment dispatch, plain key=value config files with
// flag override, CSV/JSON artifacts, CI exit codes (0 pass, 1 criterion
// failure, 2 configuration error).

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rbm/experiments.hpp"
#include "rbm/parallel.hpp"

namespace {

using namespace rbm;

struct Options {
  std::string config_file;
  std::string geometry = "halfline";
  double horizon = 1.0;
  int n_steps = 1000;
  long n_paths = 10000;
  std::uint64_t seed = 42;
  std::vector<double> epsilon;
  std::string f;
  std::string h;
  std::string out;
  std::string json;
  std::vector<double> x0;
  double band = 0.01;
  double delta = 0.01;
  std::vector<double> probes = {0.25, 0.5, 0.75};
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

// key=value per line, '#' comments; flags override file entries.
void load_config_file(const std::string& path, Options& o) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "geometry") o.geometry = val;
    else if (key == "T") o.horizon = std::stod(val);
    else if (key == "n_steps") o.n_steps = std::stoi(val);
    else if (key == "n_paths") o.n_paths = std::stol(val);
    else if (key == "seed") o.seed = std::stoull(val);
    else if (key == "epsilon") o.epsilon = parse_double_list(val);
    else if (key == "f") o.f = val;
    else if (key == "h") o.h = val;
    else if (key == "out") o.out = val;
    else if (key == "json") o.json = val;
    else if (key == "x0") o.x0 = parse_double_list(val);
    else if (key == "band") o.band = std::stod(val);
    else if (key == "delta") o.delta = std::stod(val);
    else if (key == "probes") o.probes = parse_double_list(val);
    else throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key \"" + key + "\"");
  }
}

void validate(const Options& o) {
  if (o.n_paths < 100) throw ConfigError("n_paths must be >= 100");
  if (o.n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (o.horizon <= 0.0) throw ConfigError("T must be positive");
  if (o.horizon / o.n_steps > 1e-2 + 1e-15) throw ConfigError("dt = T/n_steps must be <= 1e-2");
}

Point start_point(const Geometry& g, const Options& o) {
  if (o.x0.empty()) return g.default_start();
  if (static_cast<int>(o.x0.size()) != g.chart_dim())
    throw ConfigError("x0 needs " + std::to_string(g.chart_dim()) + " coordinates for " + g.name());
  Point p{Vec::Zero(g.chart_dim())};
  for (int i = 0; i < g.chart_dim(); ++i) p.c(i) = o.x0[i];
  if (!g.contains(p)) throw ConfigError("x0 lies outside " + g.name());
  if (g.kind() == GeomKind::Hemisphere && std::abs(p.c.norm() - 1.0) > 1e-9)
    throw ConfigError("hemisphere x0 must lie on the unit sphere");
  return p;
}

int emit(const std::vector<ExperimentReport>& reps, const Options& o) {
  std::ofstream fout;
  std::ostream* os = &std::cout;
  if (!o.out.empty()) {
    fout.open(o.out, std::ios::trunc);
    if (!fout) throw ConfigError("cannot open output file " + o.out);
    os = &fout;
  }
  write_csv_header(*os);
  bool fail = false, inconclusive = false;
  for (const auto& r : reps) {
    write_csv(*os, r);
    fail = fail || !r.pass();
    inconclusive = inconclusive || r.inconclusive();
  }
  if (!o.json.empty()) {
    std::ofstream jf(o.json, std::ios::trunc);
    if (!jf) throw ConfigError("cannot open json file " + o.json);
    write_json(jf, reps);
  }
  for (const auto& r : reps)
    for (const auto& row : r.rows)
      if (row.status == RowStatus::Fail)
        std::cerr << "FAIL: " << r.experiment << "/" << r.geometry << " " << row.quantity
                  << " mean=" << format_double(row.est.mean) << " z=" << format_double(row.z)
                  << "\n";
  if (inconclusive && !fail)
    std::cerr << "warning: some criteria are inconclusive at this sample size (SE too large to "
                 "falsify)\n";
  return fail ? 1 : 0;
}

std::vector<double> default_eps_ladder() {
  return {1e-1, 3.1622776601683794e-2, 1e-2, 3.1622776601683794e-3, 1e-3, 3.1622776601683795e-4, 1e-4};
}

// ----- subcommand runners ------------------------------------------------

int run_simulate(const Options& o) {
  validate(o);
  const Geometry g = Geometry::from_name(o.geometry);
  const Point x0 = start_point(g, o);
  const Frame u0 = g.standard_frame(x0);
  const TimeGrid grid{o.horizon, o.n_steps};
  std::ofstream fout;
  std::ostream* os = &std::cout;
  if (!o.out.empty()) {
    fout.open(o.out, std::ios::trunc);
    if (!fout) throw ConfigError("cannot open output file " + o.out);
    os = &fout;
  }
  *os << "path,t";
  for (int c = 0; c < g.chart_dim(); ++c) *os << ",x" << c;
  *os << ",dl,contact\n";
  PathSample path;
  for (long i = 0; i < o.n_paths; ++i) {
    simulate(g, x0, u0, grid, DriftFn{}, RandomSource{o.seed, static_cast<std::uint64_t>(i)}, path);
    for (int k = 0; k <= grid.n_steps; ++k) {
      *os << i << ',' << format_double(grid.time(k));
      for (int c = 0; c < g.chart_dim(); ++c) *os << ',' << format_double(path.x[k].c(c));
      *os << ',' << format_double(path.dl[k]) << ',' << int(path.contact[k]) << '\n';
    }
  }
  return 0;
}

int run_ibp(const Options& o) {
  validate(o);
  const Geometry g = Geometry::from_name(o.geometry);
  const Point x0 = start_point(g, o);
  const Frame u0 = g.standard_frame(x0);
  const TimeGrid grid{o.horizon, o.n_steps};
  const std::vector<double> eps = o.epsilon.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3} : o.epsilon;
  const RandomSource rng{o.seed, 0};
  std::vector<IbpMember> members;
  if (!o.f.empty() || !o.h.empty()) {
    members.push_back({CylindricalFunction::parse(g, o.f.empty() ? "coord:0@t=" + format_double(o.horizon) : o.f),
                       CameronMartinDirection::parse(g, o.h.empty() ? "linear:0" : o.h, o.horizon)});
  } else {
    members = default_ibp_battery(g, o.horizon);
  }
  return emit(ibp_battery(g, x0, u0, grid, members, eps, static_cast<int>(o.n_paths), rng), o);
}

int run_bismut(const Options& o) {
  validate(o);
  const Geometry g = Geometry::from_name(o.geometry);
  const Point x0 = start_point(g, o);
  const Frame u0 = g.standard_frame(x0);
  const TimeGrid grid{o.horizon, o.n_steps};
  const ScalarFunction f = ScalarFunction::parse(o.f.empty() ? "coord" : o.f);
  Vec v = Vec::Zero(g.dim());
  v(0) = 1.0;
  return emit({bismut_check(g, x0, u0, grid, f, v, o.delta, static_cast<int>(o.n_paths),
                            RandomSource{o.seed, 0})},
              o);
}

int run_martingale(const Options& o) {
  validate(o);
  if (o.geometry != "halfline") throw ConfigError("martingale check runs on halfline only");
  const Geometry g = Geometry::from_name("halfline");
  const Point x0 = start_point(g, o);
  const TimeGrid grid{o.horizon, o.n_steps};
  const ScalarFunction f = ScalarFunction::parse(o.f.empty() ? "coord" : o.f);
  return emit({martingale_check(x0, grid, f, o.probes, static_cast<int>(o.n_paths),
                                RandomSource{o.seed, 0})},
              o);
}

int run_clarkocone(const Options& o) {
  validate(o);
  const Geometry g = Geometry::from_name(o.geometry);
  if (g.dim() != 1) throw ConfigError("clarkocone runs on halfline or interval");
  const Point x0 = start_point(g, o);
  const ScalarFunction f = ScalarFunction::parse(o.f.empty() ? "coord" : o.f);
  return emit({clark_ocone_check(g.kind(), x0, o.horizon, o.horizon / o.n_steps, f,
                                 static_cast<int>(o.n_paths), RandomSource{o.seed, 0})},
              o);
}

int run_lsi(const Options& o) {
  validate(o);
  const Geometry g = Geometry::from_name(o.geometry);
  const Point x0 = start_point(g, o);
  const Frame u0 = g.standard_frame(x0);
  const TimeGrid grid{o.horizon, o.n_steps};
  std::vector<CylindricalFunction> battery;
  if (!o.f.empty())
    battery.push_back(CylindricalFunction::parse(g, o.f));
  else
    battery = default_lsi_battery(g, o.horizon);
  return emit({lsi_check(g, x0, u0, grid, battery, static_cast<int>(o.n_paths),
                         RandomSource{o.seed, 0})},
              o);
}

int run_counterexample(const Options& o) {
  validate(o);
  const TimeGrid grid{1.0, o.n_steps};
  return emit({counterexample_demo(grid, static_cast<int>(o.n_paths), RandomSource{o.seed, 0})}, o);
}

int run_qcheck(const Options& o) {
  validate(o);
  const Geometry g = Geometry::from_name(o.geometry);
  const Point x0 = start_point(g, o);
  const Frame u0 = g.standard_frame(x0);
  const TimeGrid grid{o.horizon, o.n_steps};
  const std::vector<double> ladder = o.epsilon.empty() ? default_eps_ladder() : o.epsilon;
  return emit({qcheck(g, x0, u0, grid, ladder, static_cast<int>(o.n_paths), RandomSource{o.seed, 0})},
              o);
}

int run_girsanov(const Options& o) {
  validate(o);
  const Geometry g = Geometry::from_name(o.geometry);
  const Point x0 = start_point(g, o);
  const Frame u0 = g.standard_frame(x0);
  const TimeGrid grid{o.horizon, o.n_steps};
  const CameronMartinDirection h =
      CameronMartinDirection::parse(g, o.h.empty() ? "linear:0" : o.h, o.horizon);
  const std::vector<double> eps = o.epsilon.empty() ? std::vector<double>{0.2, 0.3} : o.epsilon;
  return emit({girsanov_check(g, x0, u0, grid, h, eps, static_cast<int>(o.n_paths),
                              RandomSource{o.seed, 0})},
              o);
}

// Full battery with documented default budgets (see README); --n-paths
// overrides every member for quick, determinism-checking or smoke runs.
int run_suite(const Options& o, bool n_paths_given) {
  auto paths = [&](long dflt) {
    return static_cast<int>(n_paths_given ? o.n_paths : dflt);
  };
  const std::uint64_t seed = o.seed;
  std::vector<ExperimentReport> reps;

  reps.push_back(local_time_calibration(1.0, 1e-4, o.band, paths(200000), RandomSource{seed, 0}));

  const auto ladder = default_eps_ladder();
  for (const char* name : {"halfline", "interval", "disk", "hemisphere"}) {
    const Geometry g = Geometry::from_name(name);
    const Point x0 = g.default_start();
    const Frame u0 = g.standard_frame(x0);
    reps.push_back(qcheck(g, x0, u0, TimeGrid{1.0, 1000}, ladder, paths(10000), RandomSource{seed, 0}));
  }

  for (const char* name : {"interval", "disk", "hemisphere"}) {
    const Geometry g = Geometry::from_name(name);
    const Point x0 = g.default_start();
    const Frame u0 = g.standard_frame(x0);
    const auto members = default_ibp_battery(g, 1.0);
    const std::vector<double> eps = {1e-1, 1e-2, 1e-3};
    auto batch = ibp_battery(g, x0, u0, TimeGrid{1.0, 1000}, members, eps, paths(100000),
                             RandomSource{seed, 0});
    for (auto& r : batch) reps.push_back(std::move(r));
  }

  {
    const Geometry hl = Geometry::from_name("halfline");
    Point x0{Vec::Zero(1)};
    x0.c(0) = 0.5;
    Vec v = Vec::Zero(1);
    v(0) = 1.0;
    reps.push_back(bismut_check(hl, x0, hl.standard_frame(x0), TimeGrid{1.0, 20000},
                                ScalarFunction::coordinate(), v, o.delta, paths(200000),
                                RandomSource{seed, 0}));
    const Geometry dk = Geometry::from_name("disk");
    const Point xd = dk.default_start();
    Vec vd = Vec::Zero(2);
    vd(0) = 1.0;
    reps.push_back(bismut_check(dk, xd, dk.standard_frame(xd), TimeGrid{1.0, 1000},
                                ScalarFunction::quadratic(), vd, o.delta, paths(100000),
                                RandomSource{seed, 0}));
  }

  {
    Point x0{Vec::Zero(1)};
    x0.c(0) = 0.5;
    reps.push_back(martingale_check(x0, TimeGrid{1.0, 10000}, ScalarFunction::coordinate(),
                                    o.probes, paths(100000), RandomSource{seed, 0}));
    reps.push_back(clark_ocone_check(GeomKind::HalfLine, x0, 1.0, 1e-4,
                                     ScalarFunction::coordinate(), paths(100000),
                                     RandomSource{seed, 0}));
  }

  for (const char* name : {"interval", "hemisphere"}) {
    const Geometry g = Geometry::from_name(name);
    const Point x0 = g.default_start();
    const Frame u0 = g.standard_frame(x0);
    const auto battery = default_lsi_battery(g, 1.0);
    reps.push_back(
        lsi_check(g, x0, u0, TimeGrid{1.0, 1000}, battery, paths(100000), RandomSource{seed, 0}));
  }

  reps.push_back(counterexample_demo(TimeGrid{1.0, 1000}, paths(100000), RandomSource{seed, 0}));

  for (const char* name : {"halfline", "disk"}) {
    const Geometry g = Geometry::from_name(name);
    const Point x0 = g.default_start();
    const Frame u0 = g.standard_frame(x0);
    const CameronMartinDirection h = CameronMartinDirection::parse(g, "linear:0", 1.0);
    const std::vector<double> eps = {0.2, 0.3};
    reps.push_back(girsanov_check(g, x0, u0, TimeGrid{1.0, 1000}, h, eps, paths(100000),
                                  RandomSource{seed, 0}));
  }

  return emit(reps, o);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  // The config file provides defaults; flags parsed afterwards override it.
  for (int i = 1; i < argc - 1; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        load_config_file(argv[i + 1], o);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
    }
  }

  CLI::App app{"Reflecting Brownian motion laboratory: simulation and Monte Carlo verification"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // frees -h/--h for the direction selector
  app.set_help_all_flag("--help-all");

  auto add_common = [&](CLI::App* cmd) {
    cmd->set_help_flag("--help", "print help");
    cmd->add_option("--config", o.config_file, "key=value config file (flags override)");
    cmd->add_option("--geometry", o.geometry, Geometry::valid_names());
    cmd->add_option("--T", o.horizon, "time horizon");
    cmd->add_option("--n-steps", o.n_steps, "grid steps (dt = T/n_steps)");
    cmd->add_option("--n-paths", o.n_paths, "Monte Carlo paths (>= 100)");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--epsilon", o.epsilon, "flow parameter(s), repeatable")->expected(-1);
    cmd->add_option("--f", o.f, "cylindrical function selector");
    cmd->add_option("--h", o.h, "Cameron-Martin direction selector");
    cmd->add_option("--out", o.out, "CSV output path (default stdout)");
    cmd->add_option("--json", o.json, "JSON summary path");
    cmd->add_option("--x0", o.x0, "start point coordinates")->expected(-1);
    cmd->add_option("--band", o.band, "occupation band");
    cmd->add_option("--delta", o.delta, "finite-difference offset");
    cmd->add_option("--probes", o.probes, "martingale probe fractions")->expected(-1);
  };

  CLI::App* c_sim = app.add_subcommand("simulate", "export reflected paths to CSV");
  CLI::App* c_ibp = app.add_subcommand("ibp", "integration-by-parts check (Theorem 2.1)");
  CLI::App* c_bis = app.add_subcommand("bismut", "Bismut gradient formula check");
  CLI::App* c_mar = app.add_subcommand("martingale", "martingale property of Q dP f");
  CLI::App* c_cla = app.add_subcommand("clarkocone", "Clark-Ocone representation residual");
  CLI::App* c_lsi = app.add_subcommand("lsi", "log-Sobolev inequality check");
  CLI::App* c_cex = app.add_subcommand("counterexample", "Remark 2.1 pathwise counterexample");
  CLI::App* c_qch = app.add_subcommand("qcheck", "multiplicative functional diagnostics");
  CLI::App* c_gir = app.add_subcommand("girsanov", "Girsanov weight and quasi-invariance");
  CLI::App* c_sui = app.add_subcommand("suite", "full verification battery");
  for (CLI::App* c : {c_sim, c_ibp, c_bis, c_mar, c_cla, c_lsi, c_cex, c_qch, c_gir, c_sui})
    add_common(c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(o);
    if (c_ibp->parsed()) return run_ibp(o);
    if (c_bis->parsed()) return run_bismut(o);
    if (c_mar->parsed()) return run_martingale(o);
    if (c_cla->parsed()) return run_clarkocone(o);
    if (c_lsi->parsed()) return run_lsi(o);
    if (c_cex->parsed()) return run_counterexample(o);
    if (c_qch->parsed()) return run_qcheck(o);
    if (c_gir->parsed()) return run_girsanov(o);
    if (c_sui->parsed()) return run_suite(o, c_sui->count("--n-paths") > 0);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
