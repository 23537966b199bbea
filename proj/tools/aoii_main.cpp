// Experiment runner: condition sweeps, performance sweeps, and ad-hoc
// solve/simulate/compare commands over the AoII minimization models.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aoii/analytic.hpp"
#include "aoii/sim.hpp"
#include "aoii/solvers.hpp"

using json = nlohmann::json;
using namespace aoii;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitFlagged = 4;

struct ModelOptions {
  double p = 0.3;
  std::string delay = "geometric";
  double ps = 0.7;
  double a = 3.0;
  int tmax = 5;
  std::string pmf;
  int slots = 1;
  std::string penalty = "linear";
  double alpha = 1.0;
  double beta = 0.0;
  double kappa = 1.0;
  double base = 2.0;
  std::string values;
  double slope = std::numeric_limits<double>::quiet_NaN();
};

struct CommonOptions {
  std::string out;
  std::uint64_t seed = 1;
  int workers = 0;
  int delta_max = 100;
  int tmax_trunc = 0;  // 0 = model default
  double eps = 1e-9;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

// "start:stop:step" or a comma list
std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) {
    auto out = parse_list(text);
    if (out.empty()) throw std::invalid_argument("empty grid: " + text);
    return out;
  }
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() != 3 || parts[2] <= 0.0)
    throw std::invalid_argument("grid must be start:stop:step, got " + text);
  auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  if (steps < 0) throw std::invalid_argument("empty grid: " + text);
  std::vector<double> out;
  for (long k = 0; k <= steps; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
  return out;
}

DelayModel make_delay(const ModelOptions& m) {
  if (m.delay == "geometric") return DelayModel::geometric(m.ps);
  if (m.delay == "zipf") return DelayModel::zipf(m.a, m.tmax);
  if (m.delay == "explicit") return DelayModel::explicit_pmf(parse_list(m.pmf));
  if (m.delay == "deterministic") return DelayModel::deterministic(m.slots);
  throw std::invalid_argument("unknown delay kind: " + m.delay);
}

PenaltyFunction make_penalty(const ModelOptions& m) {
  if (m.penalty == "linear") return PenaltyFunction::linear(m.alpha, m.beta);
  if (m.penalty == "quadratic") return PenaltyFunction::quadratic(m.kappa);
  if (m.penalty == "log") return PenaltyFunction::logarithmic(m.base);
  if (m.penalty == "table") {
    std::optional<double> slope;
    if (!std::isnan(m.slope)) slope = m.slope;
    return PenaltyFunction::table(parse_list(m.values), slope);
  }
  throw std::invalid_argument("unknown penalty kind: " + m.penalty);
}

Policy make_policy(const std::string& name, const DelayModel& delay) {
  if (name == "strong") return Policy::strong_preemptive();
  if (name == "weak") return Policy::weak_preemptive();
  if (name == "lazy") return Policy::lazy_threshold();
  if (name == "threshold") {
    if (!delay.bounded())
      throw std::invalid_argument("threshold policy needs a bounded delay model");
    return Policy::threshold_preemptive(*delay.t_max());
  }
  if (name.rfind("bernoulli:", 0) == 0) return Policy::bernoulli(std::stod(name.substr(10)));
  throw std::invalid_argument("unknown policy: " + name);
}

TruncationConfig make_truncation(const DelayModel& delay, const CommonOptions& c) {
  TruncationConfig cfg = TruncationConfig::defaults_for(delay, c.delta_max);
  if (c.tmax_trunc > 0) cfg.t_max_trunc = c.tmax_trunc;
  return cfg;
}

class OutputFile {
 public:
  explicit OutputFile(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// Reproducible header block: fixed key order, no timestamps.
void write_header(std::ostream& os, const std::string& subcommand,
                  const std::vector<std::pair<std::string, std::string>>& params) {
  os << "# tool=aoii " << kVersion << "\n";
  os << "# subcommand=" << subcommand << "\n";
  for (const auto& [k, v] : params) os << "# " << k << "=" << v << "\n";
}

void run_ordered(int n, int workers, const std::function<void(int)>& body) {
  unsigned count = workers > 0 ? static_cast<unsigned>(workers)
                               : std::max(1u, std::thread::hardware_concurrency());
  if (n > 0) count = std::min(count, static_cast<unsigned>(n));
  if (count <= 1) {
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<int> cursor{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(count);
  for (unsigned w = 0; w < count; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int k = cursor.fetch_add(1); k < n; k = cursor.fetch_add(1)) body(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------

int cmd_condition_sweep(const CommonOptions& common, const std::string& a_grid,
                        const std::string& tmax_grid, const std::string& p_grid) {
  auto as = parse_grid(a_grid);
  auto ps = parse_grid(p_grid);
  std::vector<int> tms;
  for (double t : parse_grid(tmax_grid)) tms.push_back(static_cast<int>(std::lround(t)));

  struct Point {
    double a, p;
    int tm;
  };
  std::vector<Point> grid;
  for (double a : as)
    for (int tm : tms)
      for (double p : ps) grid.push_back({a, p, tm});

  std::vector<std::string> rows(grid.size());
  std::vector<char> sat(grid.size(), 0);
  run_ordered(static_cast<int>(grid.size()), common.workers, [&](int k) {
    const Point& pt = grid[static_cast<std::size_t>(k)];
    auto rep = check_condition1(SourceModel(pt.p), DelayModel::zipf(pt.a, pt.tm));
    std::ostringstream row;
    row << fmt(pt.a) << ',' << pt.tm << ',' << fmt(pt.p) << ',' << (rep.hazard_monotone ? 1 : 0)
        << ',' << fmt(rep.Q1) << ',' << fmt(rep.Q2) << ',' << fmt(rep.Q3) << ','
        << (rep.satisfied ? 1 : 0);
    rows[static_cast<std::size_t>(k)] = row.str();
    sat[static_cast<std::size_t>(k)] = rep.satisfied ? 1 : 0;
  });

  OutputFile out(common.out);
  write_header(out.stream(), "condition-sweep",
               {{"a_grid", a_grid},
                {"tmax_grid", tmax_grid},
                {"p_grid", p_grid},
                {"seed", std::to_string(common.seed)}});
  out.stream() << "a,t_max,p,hazard_monotone,Q1,Q2,Q3,satisfied\n";
  for (const auto& r : rows) out.stream() << r << '\n';

  std::cerr << "summary by a:\n";
  std::size_t block = tms.size() * ps.size();
  for (std::size_t ai = 0; ai < as.size(); ++ai) {
    int passed = 0;
    for (std::size_t j = 0; j < block; ++j) passed += sat[ai * block + j];
    const char* verdict = passed == 0                           ? "fail"
                          : passed == static_cast<int>(block) ? "pass"
                                                              : "mixed";
    std::cerr << "  a=" << as[ai] << ": " << verdict << " (" << passed << "/" << block << ")\n";
  }
  return kExitOk;
}

int cmd_perf(const CommonOptions& common, const ModelOptions& model, const std::string& family,
             const std::string& sweep, const std::string& grid_text, bool with_sim,
             std::int64_t horizon, std::int64_t warmup) {
  auto grid = parse_grid(grid_text);

  struct Row {
    double param = 0, opt = 0, rvi_theta = 0, lazy = 0, sim = 0;
    bool simulated = false, flagged = false;
  };
  std::vector<Row> rows(grid.size());

  run_ordered(static_cast<int>(grid.size()), common.workers, [&](int k) {
    double value = grid[static_cast<std::size_t>(k)];
    ModelOptions m = model;
    m.delay = family;
    if (sweep == "p")
      m.p = value;
    else if (sweep == "ps")
      m.ps = value;
    else if (sweep == "a")
      m.a = value;
    else if (sweep == "tmax")
      m.tmax = static_cast<int>(std::lround(value));
    else
      throw std::invalid_argument("unknown sweep parameter: " + sweep);

    SourceModel src(m.p);
    DelayModel delay = make_delay(m);
    PenaltyFunction f = PenaltyFunction::linear(m.alpha, m.beta);

    Row& row = rows[static_cast<std::size_t>(k)];
    row.param = value;
    row.opt = sp_expected_aoii_linear(m.p, delay.hazard(1), m.alpha, m.beta);

    TruncatedMdp mdp(src, delay, f, make_truncation(delay, common));
    SolveOptions opts;
    opts.tolerance = common.eps;
    auto solved = rvi(mdp, opts);
    row.rvi_theta = *solved.theta;
    row.flagged = !solved.converged || std::abs(row.rvi_theta - row.opt) > 1e-3;

    // non-preemptive baseline; geometric runs keep in-flight ages up to 40
    TruncationConfig lazy_cfg = make_truncation(delay, common);
    if (!delay.bounded()) lazy_cfg.t_max_trunc = std::max(lazy_cfg.t_max_trunc, 40);
    TruncatedMdp lazy_mdp(src, delay, f, lazy_cfg);
    row.lazy = policy_evaluation(lazy_mdp, Policy::lazy_threshold()).theta;

    if (with_sim) {
      Policy pol = delay.bounded() ? Policy::threshold_preemptive(*delay.t_max())
                                   : Policy::strong_preemptive();
      auto sim = simulate(src, delay, f, pol,
                          {horizon, warmup, common.seed + static_cast<std::uint64_t>(k), false});
      row.sim = sim.avg_penalty;
      row.simulated = true;
    }
  });

  OutputFile out(common.out);
  write_header(out.stream(), "perf",
               {{"family", family},
                {"sweep", sweep},
                {"grid", grid_text},
                {"p", fmt(model.p)},
                {"ps", fmt(model.ps)},
                {"a", fmt(model.a)},
                {"tmax", std::to_string(model.tmax)},
                {"alpha", fmt(model.alpha)},
                {"beta", fmt(model.beta)},
                {"delta_max", std::to_string(common.delta_max)},
                {"eps", fmt(common.eps)},
                {"seed", std::to_string(common.seed)}});
  out.stream() << sweep
               << ",theta_optimal,theta_rvi,theta_lazy_threshold,theta_simulated,flagged\n";
  bool any_flagged = false;
  for (const Row& r : rows) {
    out.stream() << fmt(r.param) << ',' << fmt(r.opt) << ',' << fmt(r.rvi_theta) << ','
                 << fmt(r.lazy) << ',' << (r.simulated ? fmt(r.sim) : std::string()) << ','
                 << (r.flagged ? 1 : 0) << '\n';
    any_flagged = any_flagged || r.flagged;
  }
  return any_flagged ? kExitFlagged : kExitOk;
}

int cmd_solve(const CommonOptions& common, const ModelOptions& model, const std::string& method,
              double gamma, const std::string& policy_out, const std::string& kernel_out) {
  SourceModel src(model.p);
  DelayModel delay = make_delay(model);
  PenaltyFunction f = make_penalty(model);
  TruncatedMdp mdp(src, delay, f, make_truncation(delay, common));

  if (!kernel_out.empty()) {
    std::ofstream kf(kernel_out);
    if (!kf) throw std::invalid_argument("cannot open kernel output file: " + kernel_out);
    mdp.dump_kernel_csv(kf);
  }

  SolveResult res;
  if (method == "rvi") {
    SolveOptions opts;
    opts.tolerance = common.eps;
    res = rvi(mdp, opts);
  } else if (method == "pi") {
    res = policy_iteration(mdp, Policy::strong_preemptive());
  } else if (method == "vi") {
    res = discounted_vi(mdp, gamma, common.eps);
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }

  json doc;
  doc["method"] = method;
  doc["delay"] = delay.describe();
  doc["p"] = model.p;
  doc["delta_max"] = mdp.config().delta_max;
  doc["t_max_trunc"] = mdp.config().t_max_trunc;
  doc["states"] = mdp.num_states();
  if (res.theta) doc["theta"] = *res.theta;
  doc["iterations"] = res.iterations;
  doc["residual"] = res.residual;
  doc["converged"] = res.converged;
  doc["seed"] = common.seed;

  std::string ppath = policy_out;
  if (ppath.empty() && !common.out.empty()) ppath = common.out + ".policy.csv";
  if (!ppath.empty()) {
    std::ofstream pf(ppath);
    if (!pf) throw std::invalid_argument("cannot open policy output file: " + ppath);
    write_policy_csv(pf, res.policy, mdp.indexer());
    doc["policy_csv"] = ppath;
  }

  OutputFile out(common.out);
  out.stream() << doc.dump(2) << '\n';
  return res.converged ? kExitOk : kExitNoConvergence;
}

int cmd_simulate(const CommonOptions& common, const ModelOptions& model,
                 const std::string& policy_name, std::int64_t horizon, std::int64_t warmup,
                 const std::string& trace_path) {
  SourceModel src(model.p);
  DelayModel delay = make_delay(model);
  PenaltyFunction f = make_penalty(model);
  Policy policy = make_policy(policy_name, delay);

  SimConfig cfg{horizon, warmup, common.seed, !trace_path.empty()};
  SimResult res = simulate(src, delay, f, policy, cfg);

  if (!trace_path.empty()) {
    std::ofstream tf(trace_path);
    if (!tf) throw std::invalid_argument("cannot open trace file: " + trace_path);
    write_trace_csv(tf, res.trace);
  }

  json doc;
  doc["policy"] = policy.name();
  doc["delay"] = delay.describe();
  doc["p"] = model.p;
  doc["horizon"] = horizon;
  doc["warmup"] = warmup;
  doc["seed"] = common.seed;
  doc["avg_penalty"] = res.avg_penalty;
  doc["std_error"] = res.std_error;
  doc["slots"] = res.slots;
  doc["deliveries"] = res.deliveries;
  doc["preemptions"] = res.preemptions;
  if (!trace_path.empty()) doc["trace_csv"] = trace_path;

  OutputFile out(common.out);
  out.stream() << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_compare(const CommonOptions& common, const ModelOptions& model,
                const std::string& policy_name) {
  SourceModel src(model.p);
  DelayModel delay = make_delay(model);
  PenaltyFunction f = make_penalty(model);
  Policy named = make_policy(policy_name, delay);
  if (named.randomized()) throw std::invalid_argument("compare needs a deterministic policy");

  TruncatedMdp mdp(src, delay, f, make_truncation(delay, common));
  SolveOptions opts;
  opts.tolerance = common.eps;
  auto solved = rvi(mdp, opts);
  auto cmp = equal_on_reachable(solved.policy, named, mdp, {0, 0, -1});

  json doc;
  doc["policy"] = named.name();
  doc["delay"] = delay.describe();
  doc["p"] = model.p;
  doc["theta_rvi"] = *solved.theta;
  doc["rvi_converged"] = solved.converged;
  doc["equal"] = cmp.equal;
  doc["witnesses"] = json::array();
  for (const State& s : cmp.witnesses)
    doc["witnesses"].push_back({{"delta", s.delta}, {"t", s.t}, {"i", s.i}});

  OutputFile out(common.out);
  out.stream() << doc.dump(2) << '\n';
  if (!solved.converged) return kExitNoConvergence;
  return cmp.equal ? kExitOk : kExitFlagged;
}

// Flat JSON config file; command-line flags override its values.
void apply_config(const std::string& path, ModelOptions& model, CommonOptions& common) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json doc = json::parse(in);
  if (!doc.is_object()) throw std::invalid_argument("config must be a flat JSON object");

  auto load = [&](const char* key, auto& slot) {
    if (doc.contains(key)) slot = doc[key].get<std::decay_t<decltype(slot)>>();
  };
  load("p", model.p);
  load("ps", model.ps);
  load("a", model.a);
  load("tmax", model.tmax);
  load("slots", model.slots);
  load("alpha", model.alpha);
  load("beta", model.beta);
  load("kappa", model.kappa);
  load("base", model.base);
  load("slope", model.slope);
  load("delay", model.delay);
  load("penalty", model.penalty);
  load("pmf", model.pmf);
  load("values", model.values);
  load("seed", common.seed);
  load("workers", common.workers);
  load("delta_max", common.delta_max);
  load("tmax_trunc", common.tmax_trunc);
  load("eps", common.eps);
  load("out", common.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AoII minimization toolbox: closed forms, MDP solvers, simulation"};
  app.require_subcommand(1);

  ModelOptions model;
  CommonOptions common;
  std::string config_path;

  // config first, so flags can override it
  for (int k = 1; k + 1 < argc; ++k) {
    if (std::string(argv[k]) == "--config") config_path = argv[k + 1];
  }
  try {
    if (!config_path.empty()) apply_config(config_path, model, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat JSON config file");
    cmd->add_option("--out", common.out, "output path (default stdout)");
    cmd->add_option("--seed", common.seed, "RNG seed");
    cmd->add_option("--workers", common.workers, "sweep worker count (0 = hardware)");
    cmd->add_option("--delta-max", common.delta_max, "AoII truncation bound");
    cmd->add_option("--tmax-trunc", common.tmax_trunc,
                    "in-flight age truncation bound (0 = auto)");
    cmd->add_option("--eps", common.eps, "solver tolerance");
  };
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--p", model.p, "source flip probability");
    cmd->add_option("--delay", model.delay, "geometric|zipf|explicit|deterministic");
    cmd->add_option("--ps", model.ps, "geometric success probability");
    cmd->add_option("--a", model.a, "zipf exponent");
    cmd->add_option("--tmax", model.tmax, "zipf transmission-time bound");
    cmd->add_option("--pmf", model.pmf, "explicit PMF, comma separated");
    cmd->add_option("--slots", model.slots, "deterministic delay in slots");
    cmd->add_option("--penalty", model.penalty, "linear|quadratic|log|table");
    cmd->add_option("--alpha", model.alpha, "linear slope");
    cmd->add_option("--beta", model.beta, "linear offset");
    cmd->add_option("--kappa", model.kappa, "quadratic coefficient");
    cmd->add_option("--base", model.base, "log base");
    cmd->add_option("--values", model.values, "table penalty values, comma separated");
    cmd->add_option("--slope", model.slope, "table extrapolation slope");
  };

  auto* sweep_cmd = app.add_subcommand("condition-sweep",
                                       "check the threshold-optimality condition over a grid");
  std::string a_grid = "0:5:0.25", tmax_grid = "3:11:1", p_grid = "0.05:0.45:0.05";
  add_common(sweep_cmd);
  sweep_cmd->add_option("--a-grid", a_grid, "zipf exponent grid");
  sweep_cmd->add_option("--tmax-grid", tmax_grid, "transmission bound grid");
  sweep_cmd->add_option("--p-grid", p_grid, "flip probability grid");

  auto* perf_cmd =
      app.add_subcommand("perf", "optimal vs lazy-threshold expected AoII along one parameter");
  std::string family = "geometric", sweep_param = "p", perf_grid = "0.05:0.45:0.05";
  bool with_sim = false;
  std::int64_t horizon = 1000000, warmup = 10000;
  add_common(perf_cmd);
  add_model(perf_cmd);
  perf_cmd->add_option("--family", family, "geometric|zipf");
  perf_cmd->add_option("--sweep", sweep_param, "p|ps|a|tmax");
  perf_cmd->add_option("--grid", perf_grid, "sweep grid");
  perf_cmd->add_flag("--simulate", with_sim, "add a simulated column");
  perf_cmd->add_option("--horizon", horizon, "simulation horizon");
  perf_cmd->add_option("--warmup", warmup, "simulation warmup");

  auto* solve_cmd = app.add_subcommand("solve", "solve the truncated MDP for a policy");
  std::string method = "rvi", policy_out, kernel_out;
  double gamma = 0.95;
  add_common(solve_cmd);
  add_model(solve_cmd);
  solve_cmd->add_option("--method", method, "rvi|pi|vi");
  solve_cmd->add_option("--gamma", gamma, "discount factor for vi");
  solve_cmd->add_option("--policy-out", policy_out, "policy table CSV path");
  solve_cmd->add_option("--kernel-out", kernel_out, "transition kernel CSV path");

  auto* sim_cmd = app.add_subcommand("simulate", "slotted-time Monte Carlo run");
  std::string policy_name = "strong", trace_path;
  std::int64_t sim_horizon = 1000000, sim_warmup = 10000;
  add_common(sim_cmd);
  add_model(sim_cmd);
  sim_cmd->add_option("--policy", policy_name, "strong|weak|threshold|lazy|bernoulli:<prob>");
  sim_cmd->add_option("--horizon", sim_horizon, "slot count");
  sim_cmd->add_option("--warmup", sim_warmup, "discarded slots");
  sim_cmd->add_option("--trace", trace_path, "trace CSV path");

  auto* compare_cmd =
      app.add_subcommand("compare", "compare the solver policy with a named policy");
  std::string compare_policy = "strong";
  add_common(compare_cmd);
  add_model(compare_cmd);
  compare_cmd->add_option("--policy", compare_policy, "strong|weak|threshold|lazy");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep_cmd->parsed()) return cmd_condition_sweep(common, a_grid, tmax_grid, p_grid);
    if (perf_cmd->parsed())
      return cmd_perf(common, model, family, sweep_param, perf_grid, with_sim, horizon, warmup);
    if (solve_cmd->parsed())
      return cmd_solve(common, model, method, gamma, policy_out, kernel_out);
    if (sim_cmd->parsed())
      return cmd_simulate(common, model, policy_name, sim_horizon, sim_warmup, trace_path);
    if (compare_cmd->parsed()) return cmd_compare(common, model, compare_policy);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
