#include "mbcs/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "mbcs/analysis.hpp"
#include "mbcs/checks.hpp"
#include "mbcs/fermi_operator.hpp"
#include "mbcs/gap.hpp"
#include "mbcs/records.hpp"
#include "mbcs/spectral.hpp"

namespace mbcs {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> parse_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
    if (pos != item.size()) throw ConfigError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list '" + spec + "'");
  return out;
}

std::vector<double> parse_range(const std::string& spec) {
  const bool log = spec.starts_with("log:");
  std::vector<std::string> parts;
  std::stringstream ss(log ? spec.substr(4) : spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError("range must be a:b:n or log:a:b:n, got '" + spec + "'");
  const double a = parse_list(parts[0]).at(0);
  const double b = parse_list(parts[1]).at(0);
  int n;
  try {
    std::size_t pos = 0;
    n = std::stoi(parts[2], &pos);
    if (pos != parts[2].size()) throw ConfigError("");
  } catch (const std::exception&) {
    throw ConfigError("range count must be an integer, got '" + parts[2] + "'");
  }
  if (n < 1) throw ConfigError("range count must be at least 1");
  if (log && !(a * b > 0.0)) throw ConfigError("log range endpoints must be nonzero with equal sign");
  if (n == 1) return {a};
  std::vector<double> out(static_cast<std::size_t>(n));
  if (log) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    out.back() = b;
    return out;
  }
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  // exact zero when the range is symmetric
  for (auto& v : out)
    if (std::abs(v) < 1e-14 * std::max(std::abs(a), std::abs(b))) v = 0.0;
  return out;
}

namespace {

struct Args {
  std::string model_path;
  std::string out_dir = "out";
  std::string lambda;
  std::string lambda_range;
  std::string kappa;
  std::string kappa_range;
  int workers = 1;
  int points_per_band = 0;
  double uv_factor = 0.0;
  int ell_max = -1;
  double bisect_tol = 0.0;
  double eig_tol = 0.0;
  double gap_tol = 0.0;
  double temperature = 0.0;
  double t_fraction = 0.5;
  double two_band_kappa = 0.2;
};

SolverOptions solver_options(const Args& a) {
  SolverOptions o;
  if (a.points_per_band > 0) o.grid.points_per_band = a.points_per_band;
  if (a.uv_factor > 0.0) o.grid.uv_cutoff_factor = a.uv_factor;
  if (a.ell_max >= 0) o.ell_max = a.ell_max;
  if (a.bisect_tol > 0.0) o.bisect_tol = a.bisect_tol;
  if (a.eig_tol > 0.0) o.eig_tol = a.eig_tol;
  if (o.grid.points_per_band < 16) throw ConfigError("--points-per-band must be at least 16");
  if (!(o.bisect_tol < 0.1)) throw ConfigError("--bisect-tol must be below 0.1");
  return o;
}

std::vector<double> lambda_grid(const Args& a) {
  if (!a.lambda_range.empty() && !a.lambda.empty()) throw ConfigError("give either --lambda or --lambda-range");
  std::vector<double> out = !a.lambda_range.empty() ? parse_range(a.lambda_range)
                            : !a.lambda.empty()     ? parse_list(a.lambda)
                                                    : std::vector<double>{0.3};
  for (double l : out)
    if (!(l > 0.0)) throw ConfigError("lambda must be positive");
  return out;
}

std::vector<double> kappa_grid(const Args& a, const std::vector<double>& fallback) {
  if (!a.kappa_range.empty() && !a.kappa.empty()) throw ConfigError("give either --kappa or --kappa-range");
  if (!a.kappa_range.empty()) return parse_range(a.kappa_range);
  if (!a.kappa.empty()) return parse_list(a.kappa);
  return fallback;
}

json tc_json(const TcResult& r) {
  json j;
  j["tc_found"] = r.found;
  j["tc"] = r.found ? json(r.tc) : json(nullptr);
  j["bracket"] = {r.T_lo, r.T_hi};
  j["channel"] = r.channel_of_minimum;
  j["min_eig_at_tc"] = r.min_eig_at_tc;
  j["iterations"] = r.iterations;
  j["grid_points"] = r.grid_points;
  j["certified"] = r.certified;
  return j;
}

json pc_json(const PerturbationConstants& pc) {
  json j;
  j["e_hat"] = pc.e_hat;
  std::vector<std::size_t> bands;
  for (auto b : pc.minimizing_bands) bands.push_back(b + 1);
  j["minimizing_bands"] = bands;
  j["channel"] = pc.channel;
  j["degenerate"] = pc.degenerate;
  j["U1_plus"] = pc.U1_plus;
  j["U1_minus"] = pc.U1_minus;
  j["U2"] = pc.U2;
  j["A1_plus"] = pc.A1_plus;
  j["A1_minus"] = pc.A1_minus;
  j["A2"] = pc.A2;
  j["A2_closed_form"] = pc.A2_closed_form ? json(*pc.A2_closed_form) : json(nullptr);
  return j;
}

json thresholds_json(const KappaThresholds& t) {
  json j;
  j["kappa_c_minus"] = t.minus_infinite ? json("inf_within_scan") : json(t.minus);
  j["kappa_c_plus"] = t.plus_infinite ? json("inf_within_scan") : json(t.plus);
  j["reference_found"] = t.reference_found;
  j["reference_temperature"] = t.reference_temperature;
  return j;
}

json fit_json(const EnhancementFit& f) {
  json j;
  j["branch"] = branch_name(f.branch);
  j["side"] = f.side;
  j["slope"] = f.slope;
  j["residual_norm"] = f.residual_norm;
  j["points"] = f.points;
  j["prediction"] = f.prediction ? json(*f.prediction) : json(nullptr);
  j["agreement"] = f.agreement ? json(*f.agreement) : json(nullptr);
  return j;
}

std::string two_columns(const std::vector<std::pair<double, double>>& rows, const std::string& header) {
  std::string s = "# " + header + "\n";
  for (const auto& [x, y] : rows) s += format_double(x) + " " + format_double(y) + "\n";
  return s;
}

struct Context {
  fs::path out;
  json summary;
  std::vector<std::string> outputs;
  std::vector<std::string> failures;

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(out / name, content);
    outputs.push_back(name);
  }
};

void write_plot_data(Context& ctx, const std::vector<SweepRecord>& records, const std::string& prefix) {
  std::map<double, std::vector<std::pair<double, double>>> by_lambda;
  std::vector<std::pair<double, double>> lambda_rows;
  for (const auto& r : records) {
    if (!r.error.empty()) continue;
    const bool reference = r.run_id.ends_with("-0000");
    if (reference && r.tc_found) lambda_rows.emplace_back(r.lambda, r.lambda * std::log(r.tc));
    if (!reference && r.log_ratio) by_lambda[r.lambda].emplace_back(r.kappa, *r.log_ratio);
  }
  int k = 0;
  for (const auto& [lambda, rows] : by_lambda) {
    ctx.write(prefix + "kappa_log_ratio_" + std::to_string(k++) + ".dat",
              two_columns(rows, "kappa lambda*log(Tc/Tc0) at lambda=" + format_double(lambda)));
  }
  ctx.write(prefix + "lambda_log_tc.dat", two_columns(lambda_rows, "lambda lambda*log(Tc) at kappa=0"));
}

int cmd_tc(const Args& a, const ModelInstance& model, Context& ctx) {
  const auto lambdas = lambda_grid(a);
  const auto kappas = kappa_grid(a, {0.0});
  if (lambdas.size() != 1 || kappas.size() != 1) throw ConfigError("tc takes a single --lambda and --kappa");
  const SolverOptions opts = solver_options(a);
  const TcResult r = critical_temperature(model, lambdas[0], kappas[0], opts);
  json res = tc_json(r);
  res["lambda"] = lambdas[0];
  res["kappa"] = kappas[0];
  ctx.summary["results"] = res;
  ctx.write("tc.csv", emit_csv({make_record(model, lambdas[0], kappas[0], r, nullptr, model.id + "-0000")}));
  ctx.write("tc_trajectory.dat", two_columns(r.min_eig_trajectory, "T min_eig"));
  if (r.found)
    std::cout << "T_c = " << format_double(r.tc) << " (channel " << r.channel_of_minimum
              << (r.certified ? ", certified" : ", NOT certified") << ")\n";
  else
    std::cout << "T_c not found above T_floor = " << format_double(r.T_hi) << "\n";
  return kExitOk;
}

int cmd_sweep(const Args& a, const ModelInstance& model, Context& ctx) {
  const auto lambdas = lambda_grid(a);
  const auto kappas = kappa_grid(a, {});
  if (kappas.empty()) throw ConfigError("sweep needs --kappa or --kappa-range");
  const SolverOptions opts = solver_options(a);
  std::vector<SweepRecord> all;
  json per_lambda = json::array();
  for (double lambda : lambdas) {
    auto recs = sweep_kappa(model, lambda, kappas, opts, a.workers);
    for (const auto& r : recs)
      if (!r.error.empty()) ctx.failures.push_back(r.run_id + ": " + r.error);
    json jl;
    jl["lambda"] = lambda;
    jl["tc_ref_found"] = recs.front().tc_found;
    jl["tc_ref"] = recs.front().tc_found ? json(recs.front().tc) : json(nullptr);
    jl["rows"] = recs.size();
    per_lambda.push_back(jl);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  std::vector<SweepRecord> good;
  for (const auto& r : all)
    if (r.error.empty()) good.push_back(r);
  sort_records(good);
  ctx.write("sweep.csv", emit_csv(good));
  write_plot_data(ctx, all, "");
  ctx.summary["results"] = {{"per_lambda", per_lambda}, {"kappa_points", kappas.size()}};
  std::cout << "sweep: " << good.size() << " rows written, " << ctx.failures.size() << " failed\n";
  return ctx.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_gap(const Args& a, const ModelInstance& model, Context& ctx) {
  const auto lambdas = lambda_grid(a);
  const auto kappas = kappa_grid(a, {0.0});
  if (lambdas.size() != 1 || kappas.size() != 1) throw ConfigError("gap takes a single --lambda and --kappa");
  const double lambda = lambdas[0], kappa = kappas[0];
  SolverOptions opts = solver_options(a);
  opts.ell_max = 0;
  GapOptions gopts;
  if (a.gap_tol > 0.0) gopts.gap_tol = a.gap_tol;
  const TcResult tc = critical_temperature(model, lambda, kappa, opts);
  double T = a.temperature;
  if (!(T > 0.0)) {
    if (!tc.found) throw SolverError("gap: no T_c found; pass --temperature explicitly");
    T = a.t_fraction * tc.tc;
  }
  const double design = std::min(T, 0.1 * model.min_mu());
  const GapSystem sys(model, build_grid(model, design, opts.grid));
  gopts.expect_nontrivial = tc.found && T < tc.tc;
  const GapSolution sol = solve_gap(sys, T, lambda, kappa, 0.1 * model.max_mu(), gopts);
  const double fe = free_energy_density(sys, T, lambda, kappa, sol.delta);
  const double el = euler_lagrange_residual(sys, T, lambda, kappa, sol.delta);
  std::ostringstream os;
  write_gap_csv(os, sys, sol);
  ctx.write("gap.csv", os.str());
  ctx.summary["results"] = {{"lambda", lambda},
                            {"kappa", kappa},
                            {"temperature", T},
                            {"tc", tc.found ? json(tc.tc) : json(nullptr)},
                            {"trivial", sol.trivial},
                            {"max_delta", sol.max_abs()},
                            {"residual", sol.residual},
                            {"euler_lagrange_residual", el},
                            {"iterations", sol.iterations},
                            {"restarts", sol.restarts_used},
                            {"free_energy_difference", fe}};
  std::cout << "gap at T = " << format_double(T) << ": max Delta = " << format_double(sol.max_abs())
            << ", free energy difference = " << format_double(fe) << "\n";
  return kExitOk;
}

int cmd_constants(const Args& a, const ModelInstance& model, Context& ctx) {
  const int ell_max = a.ell_max >= 0 ? a.ell_max : kDefaultFermiEllMax;
  const std::size_t n = model.n_bands();
  json v = json::array(), e = json::array(), trace = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(v_coefficient(model, i, j));
    v.push_back(row);
    const auto m = intra_band_minimum(model, i, ell_max);
    e.push_back({{"band", i + 1}, {"e", m.value}, {"channel", m.ell}});
    const auto t = trace_check(model, i, 32);
    trace.push_back({{"band", i + 1}, {"numeric", t.numeric}, {"analytic", t.analytic}, {"tail", t.tail}});
  }
  json res{{"v", v}, {"intra_band_minimum", e}, {"trace", trace}, {"ell_max", ell_max}};
  try {
    res["perturbation"] = pc_json(perturbation_constants(model, ell_max));
  } catch (const ConfigError& err) {
    res["perturbation"] = nullptr;
    res["perturbation_error"] = err.what();
  }
  if (n == 2) {
    json vm = json::array();
    for (double k : kappa_grid(a, {0.0, 0.5, 1.0, 2.0, 5.0, 10.0}))
      vm.push_back({{"kappa", k}, {"v_min", v_min_two_band(model, k)}});
    res["v_min_two_band"] = vm;
  }
  ctx.summary["results"] = res;
  ctx.write("constants.json", res.dump(2) + "\n");
  std::cout << res.dump(2) << "\n";
  return kExitOk;
}

int cmd_report(const Args& a, const ModelInstance& model, Context& ctx) {
  ReportOptions ro;
  ro.solver = solver_options(a);
  ro.workers = a.workers;
  ro.two_band_kappa = a.two_band_kappa;
  const auto lambdas = lambda_grid(a);
  const auto kappas = kappa_grid(a, parse_range("-0.2:0.2:21"));
  const AsymptoticReport rep = asymptotic_report(model, lambdas, kappas, ro);

  json res;
  res["constants"] = rep.constants ? pc_json(*rep.constants) : json(nullptr);
  if (!rep.constants_error.empty()) res["constants_error"] = rep.constants_error;
  json pl = json::array();
  std::vector<SweepRecord> all;
  for (const auto& lr : rep.per_lambda) {
    json j;
    j["lambda"] = lr.lambda;
    j["thresholds"] = thresholds_json(lr.thresholds);
    json fits = json::array();
    for (const auto& f : lr.fits) fits.push_back(fit_json(f));
    j["fits"] = fits;
    j["fit_errors"] = lr.fit_errors;
    pl.push_back(j);
    for (const auto& r : lr.records) {
      if (r.error.empty())
        all.push_back(r);
      else
        ctx.failures.push_back(r.run_id + ": " + r.error);
    }
  }
  res["per_lambda"] = pl;
  if (rep.two_band) {
    json tb;
    tb["kappa"] = rep.two_band->kappa;
    tb["lambda_ref"] = rep.two_band->lambda_ref;
    tb["T0_fit"] = rep.two_band->T0_fit;
    json pts = json::array();
    for (const auto& p : rep.two_band->points)
      pts.push_back({{"lambda", p.lambda},
                     {"tc", p.tc},
                     {"prediction", p.prediction ? json(*p.prediction) : json(nullptr)},
                     {"rel_error", p.rel_error}});
    tb["points"] = pts;
    res["two_band"] = tb;
  }
  json verdicts = json::array();
  std::string text = "report for " + model.id + "\n";
  for (const auto& v : rep.verdicts) {
    verdicts.push_back({{"claim", v.claim}, {"status", v.status}, {"detail", v.detail}});
    text += v.claim + ": " + v.status + (v.detail.empty() ? "" : "  (" + v.detail + ")") + "\n";
  }
  res["verdicts"] = verdicts;
  ctx.summary["results"] = res;
  std::vector<SweepRecord> sorted = all;
  sort_records(sorted);
  ctx.write("report_sweep.csv", emit_csv(sorted));
  write_plot_data(ctx, all, "report_");
  ctx.write("report.txt", text);
  std::cout << text;
  return rep.partial || !ctx.failures.empty() ? kExitPartial : kExitOk;
}

int cmd_check(const Args& a, Context& ctx) {
  std::optional<ModelInstance> model;
  if (!a.model_path.empty()) model = load_model(a.model_path);
  const auto results = run_builtin_checks(model ? &*model : nullptr);
  json arr = json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " value=" << format_double(r.value)
              << " tol=" << format_double(r.tolerance) << "\n";
    arr.push_back({{"name", r.name}, {"passed", r.passed}, {"value", r.value}, {"tolerance", r.tolerance}});
    ok = ok && r.passed;
  }
  ctx.summary["results"] = {{"checks", arr}, {"all_passed", ok}};
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Multi-band BCS critical temperatures and gap equations"};
  app.require_subcommand(1);
  Args a;
  if (const char* env = std::getenv("BCS_NUM_WORKERS")) {
    try {
      a.workers = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "error: BCS_NUM_WORKERS must be an integer\n";
      return kExitConfig;
    }
  }
  auto common = [&](CLI::App* sub, bool needs_model) {
    auto* m = sub->add_option("--model", a.model_path, "model TOML file");
    if (needs_model) m->required();
    sub->add_option("--out", a.out_dir, "output directory")->capture_default_str();
    sub->add_option("--workers", a.workers, "worker threads (default $BCS_NUM_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--points-per-band", a.points_per_band, "grid points per band")->check(CLI::Range(16, 20000));
    sub->add_option("--uv-factor", a.uv_factor, "UV cutoff in units of max k_F")->check(CLI::Range(2.0, 100.0));
    sub->add_option("--ell-max", a.ell_max, "largest angular channel")->check(CLI::Range(0, 64));
    sub->add_option("--bisect-tol", a.bisect_tol, "relative T_c tolerance")->check(CLI::Range(1e-14, 0.1));
    sub->add_option("--eig-tol", a.eig_tol, "eigenvalue tolerance")->check(CLI::Range(1e-15, 1e-2));
  };
  auto couplings = [&](CLI::App* sub) {
    sub->add_option("--lambda", a.lambda, "coupling lambda, default 0.3 (comma list for sweep/report)");
    sub->add_option("--lambda-range", a.lambda_range, "lambda range a:b:n or log:a:b:n");
    sub->add_option("--kappa", a.kappa, "inter-band factor kappa (comma list)");
    sub->add_option("--kappa-range", a.kappa_range, "kappa range a:b:n or log:a:b:n");
  };
  auto* tc = app.add_subcommand("tc", "critical temperature at one (lambda, kappa)");
  common(tc, true);
  couplings(tc);
  auto* sweep = app.add_subcommand("sweep", "T_c over a kappa grid plus the kappa = 0 reference");
  common(sweep, true);
  couplings(sweep);
  auto* gap = app.add_subcommand("gap", "gap equation and free energy at one temperature");
  common(gap, true);
  couplings(gap);
  gap->add_option("--temperature", a.temperature, "temperature (default t-fraction * T_c)");
  gap->add_option("--t-fraction", a.t_fraction, "temperature as a fraction of T_c")->check(CLI::Range(1e-6, 10.0));
  gap->add_option("--gap-tol", a.gap_tol, "gap defect tolerance in units of max mu")->check(CLI::Range(1e-16, 1e-3));
  auto* constants = app.add_subcommand("constants", "Fermi-surface operator constants");
  common(constants, true);
  constants->add_option("--kappa", a.kappa, "kappa values for v_min (two bands)");
  auto* report = app.add_subcommand("report", "sweeps, fits and asymptotic verdicts");
  common(report, true);
  couplings(report);
  report->add_option("--two-band-kappa", a.two_band_kappa, "kappa of the two-band closed-form check");
  auto* check = app.add_subcommand("check", "built-in invariant suite");
  common(check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Context ctx;
  std::string command = app.get_subcommands().front()->get_name();
  int status = kExitOk;
  try {
    ctx.out = a.out_dir;
    fs::create_directories(ctx.out);
    const fs::path probe = ctx.out / ".write_probe";
    write_file_atomic(probe, "");
    fs::remove(probe);
  } catch (const std::exception& e) {
    std::cerr << "error: output directory " << a.out_dir << " is not writable: " << e.what() << "\n";
    return kExitConfig;
  }
  std::optional<ModelInstance> model;
  try {
    if (command != "check") model = load_model(a.model_path);
    if (command == "tc") status = cmd_tc(a, *model, ctx);
    else if (command == "sweep") status = cmd_sweep(a, *model, ctx);
    else if (command == "gap") status = cmd_gap(a, *model, ctx);
    else if (command == "constants") status = cmd_constants(a, *model, ctx);
    else if (command == "report") status = cmd_report(a, *model, ctx);
    else status = cmd_check(a, ctx);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    ctx.failures.push_back(e.what());
    status = kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  ctx.summary["command"] = command;
  ctx.summary["model_id"] = model ? json(model->id) : json(nullptr);
  ctx.summary["dimension"] = model ? json(model->dimension) : json(nullptr);
  ctx.summary["n_bands"] = model ? json(model->n_bands()) : json(nullptr);
  ctx.summary["status"] = status == kExitOk ? "ok" : status == kExitPartial ? "partial" : "failed";
  ctx.summary["failures"] = ctx.failures;
  if (!ctx.summary.contains("results")) ctx.summary["results"] = json::object();
  ctx.outputs.push_back("summary.json");
  ctx.summary["outputs"] = ctx.outputs;
  try {
    write_file_atomic(ctx.out / "summary.json", ctx.summary.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return status;
}

}  // namespace mbcs
