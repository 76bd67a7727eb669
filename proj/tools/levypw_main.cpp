#include "CLI11.hpp"
#include "levypw/config.hpp"
#include "levypw/evaluator.hpp"
#include "levypw/fitting.hpp"
#include "levypw/graphs.hpp"
#include "levypw/lattice.hpp"
#include "levypw/levy.hpp"
#include "levypw/simulator.hpp"
#include "levypw/trees.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace lp = levypw;

namespace {

// Every parameter is a key. A config file seeds the keys, later --key value
// tokens override them; --flag with no value means true. Dashes in flag names
// map to underscores.
lp::KeyValueConfig collect(const std::vector<std::string>& tokens) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tok.rfind("--", 0) != 0)
      throw lp::ConfigError("expected --key value, got '" + tok + "'");
    std::string key = tok.substr(2);
    std::string value;
    bool have = false;
    size_t eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
      have = true;
    }
    for (char& c : key)
      if (c == '-') c = '_';
    if (key.empty()) throw lp::ConfigError("empty option name");
    if (!have) {
      if (i + 1 < tokens.size() && tokens[i + 1].rfind("--", 0) != 0)
        value = tokens[++i];
      else
        value = "true";
    }
    pairs.emplace_back(key, value);
  }
  lp::KeyValueConfig kv;
  for (const auto& [k, v] : pairs)
    if (k == "config") kv = lp::KeyValueConfig::from_file(v);
  for (const auto& [k, v] : pairs)
    if (k != "config") kv.set(k, v);
  return kv;
}

void reject_unknown(const lp::KeyValueConfig& kv) {
  auto unk = kv.unused_keys();
  if (unk.empty()) return;
  std::string msg = "unknown key(s):";
  for (const auto& k : unk) msg += " " + k;
  throw lp::ConfigError(msg);
}

bool dump_requested(const lp::KeyValueConfig& kv) {
  return kv.get_bool("dump_config", false);
}

void emit_dump(const lp::KeyValueConfig& kv) { std::cout << kv.dump_effective(); }

lp::LatticeConfig read_lattice(const lp::KeyValueConfig& kv, long long def_L) {
  lp::LatticeConfig cfg;
  cfg.d = (int)kv.get_int("d", 1);
  cfg.delta = kv.get_double("delta", 1.0);
  cfg.L = (int)kv.get_int("L", def_L);
  cfg.m = kv.get_double("m", 1.0);
  return cfg;
}

lp::LevyParams read_noise(const lp::KeyValueConfig& kv, double def_sigma2) {
  lp::LevyParams params;
  params.a = kv.get_double("a", 0.0);
  params.sigma2 = kv.get_double("sigma2", def_sigma2);
  params.z = kv.get_double("z", 0.0);
  params.atoms = kv.get_atoms("atoms");
  return params;
}

lp::SimConfig read_sim(const lp::KeyValueConfig& kv, long long def_samples) {
  lp::SimConfig sim;
  sim.dt = kv.get_double("dt", 0.05);
  sim.burn_in = kv.get_int("burn_in", 4000);
  sim.samples = kv.get_int("samples", def_samples);
  sim.thinning = kv.get_int("thinning", 20);
  sim.seed = (uint64_t)kv.get_int("seed", 1);
  sim.lambda = kv.get_double("lambda", 0.1);
  sim.p = (int)kv.get_int("p", 3);
  sim.blowup_threshold = kv.get_double("blowup_threshold", 1e12);
  return sim;
}

lp::QuadratureSpec read_quad(const lp::KeyValueConfig& kv) {
  lp::QuadratureSpec quad;
  quad.t_max = kv.get_double("t_max", 0.0);
  quad.nodes_per_unit = (int)kv.get_int("nodes_per_unit", 150);
  return quad;
}

lp::EvalMethod read_method(const lp::KeyValueConfig& kv) {
  std::string m = kv.get_string("method", "auto");
  if (m == "auto") return lp::EvalMethod::Auto;
  if (m == "quadrature") return lp::EvalMethod::Quadrature;
  if (m == "momentum") return lp::EvalMethod::Momentum;
  throw lp::ConfigError("method must be auto, quadrature, or momentum");
}

// path "-" means stdout
class TextSink {
 public:
  explicit TextSink(const std::string& path) : path_(path) {
    if (path_ != "-") {
      file_.open(path_);
      if (!file_) throw lp::IoError("cannot open output file: " + path_);
    }
  }
  std::ostream& os() { return path_ == "-" ? std::cout : file_; }
  void finish() {
    if (path_ != "-" && !file_) throw lp::IoError("failed writing " + path_);
  }

 private:
  std::string path_;
  std::ofstream file_;
};

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void run_trees(const lp::KeyValueConfig& kv) {
  int j = (int)kv.get_int("order", 1);
  int p = (int)kv.get_int("p", 3);
  bool init_leaves = kv.get_bool("init_leaves", true);
  std::string output = kv.get_string("output", "-");
  bool dump = dump_requested(kv);
  reject_unknown(kv);
  if (dump) return emit_dump(kv);

  auto trees = lp::enumerate_trees(j, p, init_leaves);
  TextSink sink(output);
  sink.os() << "# rooted trees order=" << j << " p=" << p
            << (init_leaves ? " with initial-condition leaves" : "") << "\n";
  for (const auto& [t, mult] : trees) sink.os() << lp::tree_record(t, mult) << "\n";
  sink.os() << "# total " << trees.size() << "\n";
  sink.finish();
}

void run_graphs(const lp::KeyValueConfig& kv) {
  int m = (int)kv.get_int("order", 1);
  int n = (int)kv.get_int("n", 2);
  int p = (int)kv.get_int("p", 3);
  bool connected = kv.get_bool("connected", false);
  bool equilibrium = kv.get_bool("equilibrium", false);
  bool even_only = kv.get_bool("even_only", false);
  bool drop_tadpoles = kv.get_bool("drop_tadpoles", false);
  std::string output = kv.get_string("output", "-");
  bool dump = dump_requested(kv);
  reject_unknown(kv);
  if (dump) return emit_dump(kv);

  auto gs = lp::enumerate_graphs(m, n, p, equilibrium);
  if (connected) gs = lp::filter_connected(gs);
  if (even_only) gs = lp::prune_odd(gs);
  if (drop_tadpoles) {
    std::vector<lp::PWGraph> keep;
    for (const auto& g : gs)
      if (!lp::is_tadpole(g)) keep.push_back(g);
    gs = std::move(keep);
  }
  TextSink sink(output);
  sink.os() << "# graphs order=" << m << " n=" << n << " p=" << p << "\n";
  for (const auto& g : gs) sink.os() << lp::graph_record(g) << "\n";
  sink.os() << "# total " << gs.size() << "\n";
  sink.finish();
}

void run_eval(const lp::KeyValueConfig& kv) {
  auto lattice = read_lattice(kv, 16);
  auto noise = read_noise(kv, 0.0);
  int n = (int)kv.get_int("n", 2);
  int M = (int)kv.get_int("order", 1);
  int p = (int)kv.get_int("p", 3);
  bool equilibrium = kv.get_bool("equilibrium", true);
  bool even_only = kv.get_bool("even_only", false);
  bool drop_tadpoles = kv.get_bool("drop_tadpoles", false);
  double t = kv.get_double("t", 0.0);
  double f0 = kv.get_double("f0", 0.0);
  double lambda = kv.get_double("lambda", 1.0);
  auto quad = read_quad(kv);
  auto method = read_method(kv);
  int threads = (int)kv.get_int("threads", 0);
  std::string output = kv.get_string("output", "-");
  bool timestamp = !kv.get_bool("no_timestamp", false);
  bool dump = dump_requested(kv);
  reject_unknown(kv);
  if (dump) return emit_dump(kv);

  noise.validate();
  auto cums = lp::cumulants_up_to(M * p + n, noise);
  auto series = lp::truncated_correlation_series(n, M, cums, lattice, quad, equilibrium,
                                                 drop_tadpoles, p, method, even_only, t,
                                                 f0, threads);
  lp::Lattice lat(lattice);
  TextSink sink(output);
  std::ostream& os = sink.os();
  if (timestamp) {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# generated " << buf << "\n";
  }
  os << "order,graph";
  for (int jax = 0; jax < lattice.d; ++jax) os << ",x" << jax;
  os << ",value\n";
  auto rows = [&](int order, const std::string& name, const lp::Field& field) {
    for (long long i = 0; i < lat.sites(); ++i) {
      auto c = lat.coords(i);
      for (int& x : c)
        if (x > lattice.L / 2) x -= lattice.L;
      os << order << "," << csv_quote(name);
      for (int x : c) os << "," << x;
      os << "," << lp::format_g17(field[(size_t)i]) << "\n";
    }
  };
  for (int m = 0; m <= M; ++m)
    for (const auto& [id, field] : series.graph_values[(size_t)m]) rows(m, id, field);
  for (int m = 0; m <= M; ++m) rows(m, "coefficient", series.coefficient[(size_t)m]);
  lp::Field total((size_t)lat.sites(), 0.0);
  double lpow = 1;
  for (int m = 0; m <= M; ++m) {
    for (size_t i = 0; i < total.size(); ++i)
      total[i] += lpow * series.coefficient[(size_t)m][i];
    lpow *= lambda;
  }
  rows(M, "series", total);
  sink.finish();
}

void run_simulate(const lp::KeyValueConfig& kv) {
  auto lattice = read_lattice(kv, 16);
  auto noise = read_noise(kv, 0.0);
  auto sim = read_sim(kv, 10000);
  double f0 = kv.get_double("f0", 0.0);
  int max_lag = (int)kv.get_int("max_lag", -1);
  int batches = (int)kv.get_int("batches", 20);
  std::string output = kv.get_string("output", "correlation.csv");
  bool timestamp = !kv.get_bool("no_timestamp", false);
  bool dump = dump_requested(kv);
  reject_unknown(kv);
  if (dump) return emit_dump(kv);

  if (sim.p % 2 == 0)
    std::cerr << "note: even p gives an unbounded-below potential; large excursions"
                 " can blow up\n";
  lp::Field f;
  if (f0 != 0) f.assign((size_t)lp::Lattice(lattice).sites(), f0);
  auto traj = lp::simulate(noise, sim, lattice, f);
  auto cf = lp::estimate_correlation(traj, max_lag < 0 ? lattice.L : max_lag, batches);

  lp::Lattice lat(lattice);
  std::vector<std::string> comments = {"connected two-point correlation by batch means",
                                       "batches " + std::to_string(batches)};
  lp::write_correlation_csv(output, lat, cf.mean, &cf.se, max_lag, timestamp, comments);

  double n = traj.increment_power_sum[0];
  double s1 = traj.increment_power_sum[1], s2 = traj.increment_power_sum[2];
  double s3 = traj.increment_power_sum[3], s4 = traj.increment_power_sum[4];
  double mu = s1 / n;
  double m2 = s2 / n - mu * mu;
  double m3 = s3 / n - 3 * mu * s2 / n + 2 * mu * mu * mu;
  double m4 = s4 / n - 4 * mu * s3 / n + 6 * mu * mu * s2 / n - 3 * mu * mu * mu * mu;
  double mean_of_means = 0;
  for (double v : traj.sample_mean) mean_of_means += v;
  mean_of_means /= (double)traj.sample_mean.size();

  std::ostringstream rep;
  rep << "simulation summary\n";
  rep << "  steps            " << traj.steps_run << "\n";
  rep << "  measurements     " << traj.sample_mean.size() << "\n";
  rep << "  spatial mean     " << lp::format_g17(mean_of_means) << "\n";
  rep << "  variance (lag 0) " << lp::format_g17(cf.mean[0]) << " se "
      << lp::format_g17(cf.se[0]) << "\n";
  rep << "  increment cumulants (sampled vs law)\n";
  double dvol = lat.cell_volume();
  double kth[5] = {0, 0, 0, 0, 0};
  for (int k = 1; k <= 4; ++k)
    kth[k] = lp::cumulant(k, noise) * sim.dt * std::pow(dvol, 1.0 - k);
  double ks[5] = {0, mu, m2, m3, m4 - 3 * m2 * m2};
  for (int k = 1; k <= 4; ++k)
    rep << "    k" << k << "  " << lp::format_g17(ks[k]) << "  vs  "
        << lp::format_g17(kth[k]) << "\n";
  rep << "  correlation file " << output << "\n";
  std::cout << rep.str();
}

std::string fit_report(const lp::FitResult& fr, double k_zero, double k_jump) {
  std::ostringstream rep;
  rep << "first-order fit\n";
  rep << "  c2        " << lp::format_g17(fr.c2) << "\n";
  rep << "  c4        " << lp::format_g17(fr.c4) << "\n";
  if (fr.c2_nonpositive) {
    rep << "  kurtosis  undefined (c2 <= 0, model misfit)\n";
  } else {
    rep << "  kurtosis  " << lp::format_g17(fr.kurtosis) << "\n";
    rep << "  label     " << lp::classify_kurtosis(fr.kurtosis, k_zero, k_jump) << "\n";
  }
  rep << "  residual  " << lp::format_g17(fr.q) << "\n";
  rep << "  design    alpha " << lp::format_g17(fr.alpha) << "  beta "
      << lp::format_g17(fr.beta) << "  gamma " << lp::format_g17(fr.gamma) << "\n";
  rep << "            a " << lp::format_g17(fr.a) << "  b " << lp::format_g17(fr.b)
      << "  c " << lp::format_g17(fr.c) << "\n";
  rep << "  gradient  " << lp::format_g17(fr.grad_c2) << "  "
      << lp::format_g17(fr.grad_c4) << "\n";
  return rep.str();
}

void run_fit(const lp::KeyValueConfig& kv) {
  auto lattice = read_lattice(kv, 16);
  std::string input = kv.get_string("input", "");
  double lambda = kv.get_double("lambda", 0.1);
  int p = (int)kv.get_int("p", 3);
  std::string kernels = kv.get_string("kernels", "continuum");
  double dt = kv.get_double("dt", 0.05);
  auto quad = read_quad(kv);
  auto method = read_method(kv);
  double k_zero = kv.get_double("k_zero", 0.05);
  double k_jump = kv.get_double("k_jump", 1.0);
  std::string report = kv.get_string("report", "-");
  bool dump = dump_requested(kv);
  reject_unknown(kv);
  if (dump) return emit_dump(kv);

  if (input.empty()) throw lp::ConfigError("fit needs --input <correlation csv>");
  lp::Lattice lat(lattice);
  auto csv = lp::read_correlation_csv(input, lat);

  lp::Field P1, P2;
  if (kernels == "continuum") {
    auto fk = lp::first_order_kernels(lat, quad, method, p);
    P1 = std::move(fk.P1);
    P2 = std::move(fk.P2);
  } else if (kernels == "discrete") {
    if (p != 3) throw lp::ConfigError("discrete kernels are available for p = 3 only");
    auto dk = lp::discretization_matched_kernels(lat, dt);
    P1 = std::move(dk.P1);
    P2 = std::move(dk.P2);
  } else {
    throw lp::ConfigError("kernels must be continuum or discrete");
  }

  auto fr = lp::fit_first_order(csv.value, P1, P2, lambda, lat);
  TextSink sink(report);
  sink.os() << fit_report(fr, k_zero, k_jump);
  sink.finish();
  if (fr.c2_nonpositive)
    std::cerr << "warning: fitted c2 <= 0, kurtosis undefined\n";
}

void run_pipeline(const lp::KeyValueConfig& kv) {
  lp::PipelineConfig cfg;
  cfg.lattice = read_lattice(kv, cfg.lattice.L);
  cfg.noise = read_noise(kv, 1.0);
  lp::SimConfig defaults = cfg.sim;
  cfg.sim = read_sim(kv, defaults.samples);
  cfg.batches = (int)kv.get_int("batches", cfg.batches);
  cfg.refit_rounds = (int)kv.get_int("refit_rounds", cfg.refit_rounds);
  cfg.k_zero = kv.get_double("k_zero", cfg.k_zero);
  cfg.k_jump = kv.get_double("k_jump", cfg.k_jump);
  std::string output = kv.get_string("output", "");
  std::string report = kv.get_string("report", "-");
  bool timestamp = !kv.get_bool("no_timestamp", false);
  bool dump = dump_requested(kv);
  reject_unknown(kv);
  if (dump) return emit_dump(kv);

  auto res = lp::identify_noise(cfg);

  std::ostringstream rep;
  rep << "noise identification\n";
  rep << "  batches   " << res.batches << "\n";
  rep << "  c2        " << lp::format_g17(res.c2) << "  se " << lp::format_g17(res.c2_se)
      << "\n";
  rep << "  c4        " << lp::format_g17(res.c4) << "  se " << lp::format_g17(res.c4_se)
      << "\n";
  rep << "  kurtosis  " << lp::format_g17(res.kurtosis) << "  se "
      << lp::format_g17(res.kurtosis_se) << "\n";
  rep << "  label     " << res.label << "\n";
  if (res.c2_clamped)
    rep << "  warning   tadpole subtraction clamped a negative c2 round\n";
  TextSink sink(report);
  sink.os() << rep.str();
  sink.finish();

  if (!output.empty()) {
    lp::Lattice lat(cfg.lattice);
    std::vector<std::string> comments = {
        "coupling-extrapolated connected correlation",
        "batches " + std::to_string(res.batches)};
    lp::write_correlation_csv(output, lat, res.corrected, nullptr, -1, timestamp,
                              comments);
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "perturbative correlation functions of the lattice stochastic heat equation "
      "with a power drift and Levy noise: enumerate, evaluate, simulate, fit"};
  app.require_subcommand(1);
  const char* extra_help =
      "Options are uniform --key value pairs (or key = value lines in a file "
      "passed with --config); bare --flag means true.";

  struct Sub {
    CLI::App* cmd;
    void (*fn)(const lp::KeyValueConfig&);
  };
  std::vector<Sub> subs = {
      {app.add_subcommand("trees", "enumerate rooted trees with multiplicities"),
       run_trees},
      {app.add_subcommand("graphs", "enumerate noise-pairing graphs"), run_graphs},
      {app.add_subcommand("eval", "evaluate graph and series values to CSV"), run_eval},
      {app.add_subcommand("simulate", "run the Euler chain and estimate correlations"),
       run_simulate},
      {app.add_subcommand("fit", "least-squares noise cumulants from a correlation CSV"),
       run_fit},
      {app.add_subcommand("pipeline", "simulate, extrapolate, fit, classify"),
       run_pipeline},
  };
  for (auto& s : subs) {
    s.cmd->allow_extras();
    s.cmd->footer(extra_help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (auto& s : subs)
      if (s.cmd->parsed()) {
        auto kv = collect(s.cmd->remaining());
        s.fn(kv);
        return 0;
      }
    throw lp::ConfigError("no subcommand");
  } catch (const lp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lp::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const lp::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  }
}
