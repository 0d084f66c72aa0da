#include "ampcs/amp_core.hpp"
#include "ampcs/csv.hpp"
#include "ampcs/denoisers.hpp"
#include "ampcs/experiments.hpp"
#include "ampcs/minimax_mse.hpp"
#include "ampcs/risk.hpp"
#include "ampcs/rng.hpp"
#include "ampcs/state_evolution.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace ampcs;
using json = nlohmann::json;

namespace {

constexpr const char* kEngineVersion = "0.1.0";
constexpr int kSchemaVersion = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct NumericFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Output files are <out><suffix>; every command also writes <out>.manifest.json.
struct Output {
  std::string prefix;
  std::vector<std::string> paths;

  std::ofstream open(const std::string& suffix) {
    std::string path = prefix + suffix;
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot write '" + path + "'");
    paths.push_back(path);
    return os;
  }
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Expands --config FILE into --key=value tokens for keys not given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!has_flag(args, key)) args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::vector<double> table1_grid() { return {0.01, 0.025, 0.05, 0.10, 0.15, 0.20, 0.25}; }

// Lengths 1..64 plus powers of two, enough to bracket 1/eps with room for the hull.
int default_max_len(double eps) {
  int len = 64;
  while (len < 4.0 / eps) len *= 2;
  return len;
}

std::map<int, double> mono_table(const std::vector<int>& lengths, long n_mc, std::uint64_t seed) {
  MonoRiskCache cache(n_mc, seed);
  std::map<int, double> out;
  for (int len : lengths) out[len] = cache.get(len).estimate;
  return out;
}

std::vector<double> tau_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad tau grid");
  std::vector<double> g;
  for (int i = 0; lo + i * step <= hi + 1e-12; ++i) g.push_back(lo + i * step);
  return g;
}

SignalClass default_signal(Kind k) {
  switch (k) {
    case Kind::softpos:
      return SignalClass::positive_sparse;
    case Kind::cap:
      return SignalClass::box;
    case Kind::block_soft:
    case Kind::james_stein:
      return SignalClass::block_sparse;
    case Kind::monotone:
      return SignalClass::monotone_lf;
    case Kind::tv:
      return SignalClass::tv_random;
    default:
      return SignalClass::simple_sparse;
  }
}

SuccessCriterion default_criterion(SignalClass c) {
  switch (c) {
    case SignalClass::monotone_lf:
    case SignalClass::tv_random:
      return SuccessCriterion::hamming();
    case SignalClass::tv_lf:
      return SuccessCriterion::relative_mse(0.001);
    default:
      return SuccessCriterion::relative_mse(0.01);
  }
}

// Shared options for monotone/TV tables.
struct TableOptions {
  long n_mc = 100000;
  long n_mc_tv = 2000;
  int max_len = 0;
  double tau_lo = 0.05, tau_hi = 3.0, tau_step = 0.05;
  std::uint64_t seed = 1;

  void add(CLI::App* sub) {
    sub->add_option("--n-mc", n_mc, "Monte Carlo draws per monotone table entry");
    sub->add_option("--n-mc-tv", n_mc_tv, "Monte Carlo draws per TV table entry");
    sub->add_option("--max-len", max_len, "largest tabulated interval length (0: automatic)");
    sub->add_option("--tau-lo", tau_lo);
    sub->add_option("--tau-hi", tau_hi);
    sub->add_option("--tau-step", tau_step);
  }
};

// Minimax point plus least-favorable interval law for any kind.
struct Tuned {
  MinimaxCurvePoint point;
  std::optional<IntervalDistribution> intervals;
};

Tuned tune(Kind kind, double eps, int B, const TableOptions& t, bool tv_random) {
  Tuned out;
  const int max_len = t.max_len > 0 ? t.max_len : default_max_len(eps);
  if (kind == Kind::monotone) {
    auto lengths = default_tv_lengths(max_len);
    auto [p, d] = mse_monotone(eps, max_len, mono_table(lengths, t.n_mc, derive_seed(t.seed, 11)));
    out.point = p;
    out.intervals = d;
  } else if (kind == Kind::tv) {
    // Geometric lengths need a table well past 1/eps.
    const int len = tv_random ? std::max(max_len, default_max_len(eps / 6.0)) : max_len;
    TvRiskTable table = build_tv_risk_table(default_tv_lengths(len), tau_grid(t.tau_lo, t.tau_hi, t.tau_step),
                                            t.n_mc_tv, derive_seed(t.seed, 12));
    if (tv_random) {
      out.point = mse_tv_random(eps, table);
    } else {
      auto [p, d] = mse_tv(eps, max_len, table);
      out.point = p;
      out.intervals = d;
    }
  } else {
    out.point = minimax_point(kind, eps, B);
  }
  return out;
}

json double_json(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

// ---------------------------------------------------------------- commands

struct MinimaxCmd {
  std::string denoiser = "soft";
  std::vector<double> eps = table1_grid();
  int B = 1;
  bool emit_thresholds = false;
  bool tv_random = false;
  TableOptions tables;

  void add(CLI::App& app) {
    auto* s = app.add_subcommand("minimax", "minimax MSE curve M(eps) and tuning");
    s->add_option("--denoiser", denoiser, "denoiser kind")->required();
    s->add_option("--eps", eps, "sparsity grid")->delimiter(',');
    s->add_option("--B", B, "block size");
    s->add_flag("--emit-thresholds", emit_thresholds, "add tau1, tau2 columns");
    s->add_flag("--tv-random", tv_random, "TV: random changepoint risk instead of the least-favorable law");
    s->add_option("--seed", tables.seed, "seed for Monte Carlo risk tables");
    tables.add(s);
  }

  void run(Output& out) {
    Kind k = parse_kind(denoiser);
    std::vector<MinimaxCurvePoint> rows;
    for (double e : eps) rows.push_back(tune(k, e, B, tables, tv_random).point);
    auto os = out.open(".csv");
    write_curve_csv(os, denoiser, rows, emit_thresholds);
  }
};

struct RiskCmd {
  std::string kind = "soft";
  double tau = 0.0, tau2 = 0.0, eps = 0.1;
  int B = 1;
  std::vector<double> mu{0.0};
  std::vector<int> len{1};
  std::string boundary = "pp";
  long n_mc = 100000;
  std::uint64_t seed = 1;

  void add(CLI::App& app) {
    auto* s = app.add_subcommand("risk", "risk table of a denoiser");
    s->add_option("--kind", kind)->required();
    s->add_option("--tau", tau);
    s->add_option("--tau2", tau2);
    s->add_option("--B", B);
    s->add_option("--eps", eps, "sparsity used to fit the minimax_scalar denoiser");
    s->add_option("--mu", mu, "amplitudes (block norms for block kinds)")->delimiter(',');
    s->add_option("--len", len, "lengths (monotone, tv)")->delimiter(',');
    s->add_option("--boundary", boundary, "tv boundary type: pp or pm");
    s->add_option("--n-mc", n_mc);
    s->add_option("--seed", seed);
  }

  void run(Output& out) {
    Kind k = parse_kind(kind);
    std::vector<RiskRow> rows;
    auto base = [&](double x) {
      RiskRow r;
      r.kind = kind;
      r.B = B;
      r.tau = tau;
      r.mu_or_len = x;
      return r;
    };
    if (k == Kind::monotone || k == Kind::tv) {
      Boundary bd = parse_boundary(boundary);
      for (int l : len) {
        RiskRow r = base(l);
        std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(l));
        McEstimate e = k == Kind::monotone ? risk_mono_zero(l, n_mc, s) : risk_tv_zero(l, bd, tau, n_mc, s);
        r.boundary = k == Kind::tv ? to_string(bd) : "none";
        r.estimate = e.estimate;
        r.std_error = e.std_error;
        r.n_mc = e.n_mc;
        r.seed = e.seed;
        rows.push_back(r);
      }
    } else {
      ShrinkParams p;
      switch (k) {
        case Kind::soft: p = ShrinkParams::soft(tau); break;
        case Kind::softpos: p = ShrinkParams::softpos(tau); break;
        case Kind::cap: p = ShrinkParams::cap(); break;
        case Kind::hard: p = ShrinkParams::hard(tau); break;
        case Kind::firm: p = ShrinkParams::firm(tau, tau2); break;
        case Kind::minimax_scalar: p = minimax_point(k, eps).tau_star; break;
        case Kind::block_soft: p = ShrinkParams::block_soft(tau, B); break;
        case Kind::james_stein: p = ShrinkParams::james_stein(B); break;
        default: break;
      }
      for (double m : mu) {
        RiskRow r = base(m);
        if (k == Kind::block_soft)
          r.estimate = risk_block_soft_sure(m, tau, B);
        else if (k == Kind::james_stein)
          r.estimate = m == 0.0 ? risk_js_zero(B) : risk_js_sure(m, B);
        else
          r.estimate = risk_scalar(p, m);
        rows.push_back(r);
      }
    }
    auto os = out.open(".csv");
    write_risk_csv(os, rows);
  }
};

struct SeCmd {
  std::string kind = "soft";
  double eps = 0.1, delta = 0.5, mu = 0.0, tol = 1e-12, risk_const = 0.0;
  int B = 1, T = 1000;
  bool with_delta_se = false;

  void add(CLI::App& app) {
    auto* s = app.add_subcommand("se", "state evolution trace and highest fixed point");
    s->add_option("--kind", kind)->required();
    s->add_option("--eps", eps);
    s->add_option("--delta", delta);
    s->add_option("--B", B);
    s->add_option("--mu", mu, "signal amplitude (0: least-favorable mu*)");
    s->add_option("--T", T);
    s->add_option("--tol", tol, "stop once m_t falls below tol");
    s->add_option("--risk-const", risk_const, "monotone/tv: large-jump risk for the linear map");
    s->add_flag("--with-delta-se", with_delta_se, "also solve for delta_SE");
  }

  void run(Output& out) {
    Kind k = parse_kind(kind);
    SEConfig c;
    json info;
    if (k == Kind::monotone || k == Kind::tv) {
      if (!(risk_const > 0.0)) throw std::invalid_argument("--risk-const is required for " + kind);
      c = make_se_config_linear(delta, risk_const);
    } else {
      MinimaxCurvePoint p = minimax_point(k, eps, B);
      double amp = mu > 0.0 ? mu : p.mu_star;
      if (std::isinf(amp)) {
        c.delta = delta;
        c.risk = two_point_profile(p.tau_star, eps);
        c.mu = kInf;
        c.m0 = 1.0;
        c.validate();
      } else {
        c = make_se_config(delta, p.tau_star, {eps, amp, true});
      }
      info["M"] = p.M;
      info["mu"] = double_json(amp);
      if (with_delta_se) info["delta_se"] = delta_se(eps, p.tau_star, 1e-5);
    }
    SETrace tr = iterate(c, T, tol);
    for (double m : tr.states)
      if (!std::isfinite(m)) throw NumericFailure("state evolution produced a non-finite state");
    {
      auto os = out.open(".csv");
      write_se_trace_csv(os, tr);
    }
    info["converged"] = tr.converged;
    info["hfp"] = tr.hfp;
    info["m0"] = c.m0;
    info["iterations"] = tr.states.size() - 1;
    auto js = out.open(".json");
    js << info.dump(2) << '\n';
  }
};

// Options shared by amp and pt.
struct ExperimentOptions {
  std::string kind = "soft";
  std::string signal;
  double eps = 0.1, mu = 0.0, gamma = 0.0;
  double alpha = 0.01, beta = 0.01;
  double tau = -1.0, tau2 = -1.0;
  int N = 1000, B = 1, T = 0;
  std::string criterion;
  bool onsager = true, tv_random = true;
  std::uint64_t seed = 1;
  TableOptions tables;

  void add(CLI::App* s) {
    s->add_option("--kind", kind)->required();
    s->add_option("--signal", signal, "signal class (default follows the kind)");
    s->add_option("--eps", eps);
    s->add_option("--N", N);
    s->add_option("--B", B);
    s->add_option("--mu", mu, "amplitude or jump size (0: mu* for sparse classes, 10 for piecewise)");
    s->add_option("--tau", tau, "override the minimax threshold");
    s->add_option("--tau2", tau2, "override the second firm threshold");
    s->add_option("--T", T, "iteration cap (0: class default)");
    s->add_option("--criterion", criterion, "mse or hamming (default follows the signal class)");
    s->add_option("--gamma", gamma, "relative MSE threshold (0: class default)");
    s->add_option("--alpha", alpha);
    s->add_option("--beta", beta);
    s->add_option("--onsager", onsager, "true or false");
    s->add_option("--tv-random", tv_random, "TV prediction from random changepoints (true) or the least-favorable law");
    s->add_option("--seed", seed);
    tables.add(s);
  }

  struct Resolved {
    Tuned tuned;
    ShrinkParams params;
    SignalSpec spec;
    PTOptions pt;
  };

  Resolved resolve() {
    Resolved r;
    Kind k = parse_kind(kind);
    tables.seed = derive_seed(seed, 99);
    r.tuned = tune(k, eps, B, tables, tv_random);
    r.params = r.tuned.point.tau_star;
    if (tau >= 0.0) r.params.tau1 = tau;
    if (tau2 >= 0.0) r.params.tau2 = tau2;
    r.params.validate();
    r.spec.cls = signal.empty() ? default_signal(k) : parse_signal_class(signal);
    r.spec.N = N;
    r.spec.epsilon = eps;
    r.spec.B = B;
    const bool piecewise = r.spec.cls == SignalClass::monotone_lf || r.spec.cls == SignalClass::tv_random ||
                           r.spec.cls == SignalClass::tv_lf;
    if (mu > 0.0)
      r.spec.amplitude = mu;
    else if (piecewise || std::isinf(r.tuned.point.mu_star))
      r.spec.amplitude = 10.0;
    else
      r.spec.amplitude = r.tuned.point.mu_star;
    if (r.spec.cls == SignalClass::monotone_lf || r.spec.cls == SignalClass::tv_lf) {
      if (!r.tuned.intervals) throw std::invalid_argument("signal " + to_string(r.spec.cls) + " needs the " +
                                                          "least-favorable law of kind monotone or tv");
      r.spec.intervals = r.tuned.intervals;
    }
    r.spec.validate();
    r.pt.criterion = default_criterion(r.spec.cls);
    if (criterion == "mse")
      r.pt.criterion = SuccessCriterion::relative_mse(r.pt.criterion.gamma);
    else if (criterion == "hamming")
      r.pt.criterion = SuccessCriterion::hamming();
    else if (!criterion.empty())
      throw std::invalid_argument("unknown criterion '" + criterion + "' (valid: mse, hamming)");
    if (gamma > 0.0) r.pt.criterion.gamma = gamma;
    r.pt.criterion.alpha = alpha;
    r.pt.criterion.beta = beta;
    r.pt.T_max = T > 0 ? T : (r.spec.cls == SignalClass::tv_lf ? 5 : 300);
    r.pt.onsager = onsager;
    return r;
  }
};

struct AmpCmd {
  ExperimentOptions ex;
  double delta = 0.5;

  void add(CLI::App& app) {
    auto* s = app.add_subcommand("amp", "single AMP reconstruction on a synthetic problem");
    ex.add(s);
    s->add_option("--delta", delta);
  }

  void run(Output& out) {
    auto r = ex.resolve();
    const int n = measurements_for(delta, ex.N);
    Vec x0 = sample_signal(r.spec, derive_seed(ex.seed, 1));
    SensingProblem prob = make_problem(gaussian_matrix(n, ex.N, derive_seed(ex.seed, 2)), x0);
    AmpRun run = amp_run(prob, r.params, r.pt.T_max, r.pt.criterion, r.pt.onsager);
    {
      auto os = out.open(".csv");
      os << "t,relative_mse\n";
      for (std::size_t t = 0; t < run.mse_trace.size(); ++t)
        os << t << ',' << format_double(run.mse_trace[t]) << '\n';
    }
    json info{{"n", n},
              {"success", run.success},
              {"iterations", run.iterations},
              {"numeric_failure", run.numeric_failure},
              {"diagnostic", run.diagnostic},
              {"sigma_hat", run.final_state.sigma_hat},
              {"M", r.tuned.point.M},
              {"tau1", r.params.tau1},
              {"tau2", r.params.tau2},
              {"amplitude", r.spec.amplitude}};
    auto js = out.open(".json");
    js << info.dump(2) << '\n';
    if (run.numeric_failure) throw NumericFailure(run.diagnostic);
  }
};

struct PtCmd {
  ExperimentOptions ex;
  int trials = 100, points = 11, threads = 1;
  double half_width = 0.05;
  std::vector<double> deltas;

  void add(CLI::App& app) {
    auto* s = app.add_subcommand("pt", "Monte Carlo phase transition grid with logistic fit");
    ex.add(s);
    s->add_option("--trials", trials, "trials per delta");
    s->add_option("--deltas", deltas, "explicit delta grid")->delimiter(',');
    s->add_option("--half-width", half_width, "grid spans M +/- half-width");
    s->add_option("--points", points);
    s->add_option("--threads", threads);
  }

  void run(Output& out) {
    if (trials < 1) throw std::invalid_argument("--trials must be >= 1");
    auto r = ex.resolve();
    r.pt.threads = threads;
    const double pred = r.tuned.point.M;
    std::vector<double> grid = deltas.empty() ? default_delta_grid(pred, half_width, points) : deltas;
    PTGridResult res = run_pt_grid(r.spec, r.params, grid, trials, ex.seed, r.pt);
    {
      auto os = out.open(".csv");
      write_grid_csv(os, {res});
    }
    LogisticFit fit = fit_logistic(res, pred);
    int numeric = 0;
    for (const auto& row : res.rows) numeric += row.n_numeric_failures;
    const std::string n = std::to_string(ex.N);
    json info{{"kind", ex.kind},
              {"epsilon", ex.eps},
              {"Pred", pred},
              {"off." + n, double_json(fit.offset)},
              {"ci." + n + ".lo", double_json(fit.ci_lo)},
              {"ci." + n + ".hi", double_json(fit.ci_hi)},
              {"alpha_hat", double_json(fit.alpha_hat)},
              {"beta_hat", double_json(fit.beta_hat)},
              {"separated", fit.separated},
              {"numeric_failures", numeric},
              {"tau1", r.params.tau1},
              {"tau2", r.params.tau2},
              {"amplitude", r.spec.amplitude}};
    auto js = out.open(".json");
    js << info.dump(2) << '\n';
  }
};

struct ScalingCmd {
  std::string input;
  std::string mode = "offset";
  std::vector<double> gammas = default_gammas();

  void add(CLI::App& app) {
    auto* s = app.add_subcommand("scaling", "finite-N power-law fits (CSV input: label,N,value,se)");
    s->add_option("--input", input)->required();
    s->add_option("--mode", mode, "offset (c N^-gamma) or slope (c N^gamma)");
    s->add_option("--gammas", gammas)->delimiter(',');
  }

  void run(Output& out) {
    std::ifstream is(input);
    if (!is) throw std::invalid_argument("cannot read '" + input + "'");
    std::map<std::string, ScalingGroup> groups;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (trim(line).empty()) continue;
      auto f = split_csv_line(line);
      if (f.size() < 3) throw std::invalid_argument("scaling rows need label,N,value[,se]");
      auto& g = groups[f[0]];
      g.label = f[0];
      g.values[std::stoi(f[1])] = {parse_double(f[2]), f.size() > 3 ? parse_double(f[3]) : 0.0};
    }
    std::vector<ScalingGroup> gs;
    for (auto& [_, g] : groups) gs.push_back(g);
    std::vector<ScalingRow> rows;
    if (mode == "offset")
      rows = fit_offset_scaling(gs, gammas);
    else if (mode == "slope")
      rows = fit_slope_scaling(gs, gammas);
    else
      throw std::invalid_argument("unknown mode '" + mode + "' (valid: offset, slope)");
    auto os = out.open(".csv");
    os << "gamma,r_squared";
    for (const auto& g : gs) os << ",c_" << g.label;
    os << '\n';
    for (const auto& r : rows) {
      os << format_double(r.gamma) << ',' << format_double(r.r_squared);
      for (double c : r.coefficients) os << ',' << format_double(c);
      os << '\n';
    }
  }
};

struct PenaltyCmd {
  std::string kind = "soft";
  double tau = 1.0, tau2 = 2.0, x_max = 5.0;
  int B = 1, points = 101;

  void add(CLI::App& app) {
    auto* s = app.add_subcommand("penalty", "implied penalty J(x) of a denoiser");
    s->add_option("--kind", kind)->required();
    s->add_option("--tau", tau);
    s->add_option("--tau2", tau2);
    s->add_option("--B", B);
    s->add_option("--x-max", x_max);
    s->add_option("--points", points);
  }

  void run(Output& out) {
    if (points < 2 || !(x_max > 0.0)) throw std::invalid_argument("need points >= 2 and x-max > 0");
    ShrinkParams p;
    switch (parse_kind(kind)) {
      case Kind::soft: p = ShrinkParams::soft(tau); break;
      case Kind::softpos: p = ShrinkParams::softpos(tau); break;
      case Kind::hard: p = ShrinkParams::hard(tau); break;
      case Kind::firm: p = ShrinkParams::firm(tau, tau2); break;
      case Kind::block_soft: p = ShrinkParams::block_soft(tau, B); break;
      case Kind::james_stein: p = ShrinkParams::james_stein(B); break;
      default: throw std::invalid_argument("no implied penalty for kind '" + kind + "'");
    }
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) grid.push_back(x_max * i / (points - 1));
    PenaltyTable t = implied_penalty(p, grid);
    auto os = out.open(".csv");
    t.write_csv(os);
  }
};

int run(std::vector<std::string> args);

int replay(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream is(manifest_path);
  if (!is) throw std::invalid_argument("cannot read manifest '" + manifest_path + "'");
  json m = json::parse(is);
  std::vector<std::string> args{m.at("command").get<std::string>()};
  for (const auto& a : m.at("arguments")) args.push_back(a.get<std::string>());
  args.push_back("--out=" + (out_override.empty() ? m.at("out").get<std::string>() : out_override));
  return run(args);
}

int run(std::vector<std::string> args) {
  CLI::App app{"AMP compressed sensing: minimax MSE, state evolution and phase transitions"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  MinimaxCmd minimax;
  RiskCmd risk;
  SeCmd se;
  AmpCmd amp;
  PtCmd pt;
  ScalingCmd scaling;
  PenaltyCmd penalty;
  minimax.add(app);
  risk.add(app);
  se.add(app);
  amp.add(app);
  pt.add(app);
  scaling.add(app);
  penalty.add(app);
  std::string replay_path;
  auto* rp = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  rp->add_option("manifest", replay_path)->required();

  std::string out_prefix;
  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--out", out_prefix, "output path prefix (default: command name)");
  }

  args = merge_config(std::move(args));
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  if (name == "replay") return replay(replay_path, out_prefix);

  Output out;
  out.prefix = out_prefix.empty() ? name : out_prefix;
  auto start = std::chrono::steady_clock::now();
  if (name == "minimax") minimax.run(out);
  if (name == "risk") risk.run(out);
  if (name == "se") se.run(out);
  if (name == "amp") amp.run(out);
  if (name == "pt") pt.run(out);
  if (name == "scaling") scaling.run(out);
  if (name == "penalty") penalty.run(out);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json params = json::object();
  std::vector<std::string> replay_args;
  for (const CLI::Option* opt : cmd->get_options()) {
    std::string key = opt->get_single_name();
    if (key == "help" || key == "out" || key == "config") continue;
    if (opt->count() > 0) {
      auto res = opt->results();
      params[key] = res.size() == 1 ? json(res.front()) : json(res);
      for (const auto& v : res) replay_args.push_back("--" + key + "=" + v);
    } else {
      params[key] = opt->get_default_str();
    }
  }
  std::uint64_t seed = 0;
  if (const CLI::Option* so = cmd->get_option_no_throw("--seed")) seed = std::stoull(so->as<std::string>());
  json manifest{{"command", name},
                {"parameters", params},
                {"arguments", replay_args},
                {"seed", seed},
                {"engine_version", kEngineVersion},
                {"schema_version", kSchemaVersion},
                {"out", out.prefix},
                {"outputs", out.paths},
                {"wall_clock_seconds", secs}};
  std::ofstream ms(out.prefix + ".manifest.json");
  if (!ms) throw std::invalid_argument("cannot write manifest");
  ms << manifest.dump(2) << '\n';
  for (const auto& p : out.paths) std::cout << p << '\n';
  std::cout << out.prefix << ".manifest.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(args);
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}
