#include "mbcs/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace mbcs {

SweepRecord make_record(const ModelInstance& model, double lambda, double kappa, const TcResult& tc,
                        const TcResult* reference, const std::string& run_id) {
  SweepRecord r;
  r.run_id = run_id;
  r.dimension = model.dimension;
  r.n_bands = model.n_bands();
  r.lambda = lambda;
  r.kappa = kappa;
  r.tc_found = tc.found;
  r.tc = tc.found ? tc.tc : 0.0;
  r.min_eig_at_tc = tc.min_eig_at_tc;
  r.channel = tc.channel_of_minimum;
  r.grid_points = tc.grid_points;
  r.iterations = tc.iterations;
  r.certified = tc.certified;
  if (reference) {
    r.tc_ref_found = reference->found;
    r.tc_ref = reference->found ? reference->tc : 0.0;
    if (tc.found && reference->found) r.log_ratio = lambda * std::log(tc.tc / reference->tc);
  }
  return r;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f) {
  const std::size_t nthreads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SweepRecord> sweep_kappa(const ModelInstance& model, double lambda, const std::vector<double>& kappas,
                                     const SolverOptions& opts, int workers) {
  auto id = [&](std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "-%04zu", i);
    return model.id + buf;
  };
  std::vector<SweepRecord> out(kappas.size() + 1);
  const TcResult ref = critical_temperature(model, lambda, 0.0, opts);
  out[0] = make_record(model, lambda, 0.0, ref, &ref, id(0));
  parallel_for(kappas.size(), workers, [&](std::size_t i) {
    const double kappa = kappas[i];
    try {
      const TcResult r = critical_temperature(model, lambda, kappa, opts);
      out[i + 1] = make_record(model, lambda, kappa, r, &ref, id(i + 1));
    } catch (const SolverError& e) {
      SweepRecord rec;
      rec.run_id = id(i + 1);
      rec.dimension = model.dimension;
      rec.n_bands = model.n_bands();
      rec.lambda = lambda;
      rec.kappa = kappa;
      rec.error = e.what();
      out[i + 1] = rec;
    }
  });
  return out;
}

std::string branch_name(Branch b) {
  switch (b) {
    case Branch::linear_plus:
      return "linear_plus";
    case Branch::linear_minus:
      return "linear_minus";
    default:
      return "quadratic";
  }
}

EnhancementFit fit_enhancement(const std::vector<SweepRecord>& records, Branch branch, const FitWindow& window,
                               std::optional<double> prediction) {
  EnhancementFit fit;
  fit.branch = branch;
  fit.fit_window = window;
  fit.side = branch == Branch::linear_plus ? 1 : branch == Branch::linear_minus ? -1 : window.side;
  fit.prediction = prediction;

  std::vector<std::pair<double, double>> xy;
  std::optional<double> lambda;
  for (const auto& r : records) {
    if (!r.error.empty() || !r.log_ratio || r.kappa == 0.0) continue;
    if (fit.side != 0 && (r.kappa > 0.0 ? 1 : -1) != fit.side) continue;
    const double ak = std::abs(r.kappa);
    if (ak < window.lo || ak > window.hi) continue;
    if (lambda && std::abs(*lambda - r.lambda) > 1e-15 * std::abs(*lambda))
      throw ConfigError("fit_enhancement: records mix different lambda values");
    lambda = r.lambda;
    xy.emplace_back(branch == Branch::quadratic ? ak * ak : ak, *r.log_ratio);
  }
  if (xy.size() < 5)
    throw ConfigError("fit_enhancement: " + branch_name(branch) + " needs at least 5 usable records, got " +
                      std::to_string(xy.size()));
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += x * x;
    sxy += x * y;
  }
  fit.slope = sxy / sxx;
  double ss = 0.0;
  for (const auto& [x, y] : xy) ss += (y - fit.slope * x) * (y - fit.slope * x);
  fit.residual_norm = std::sqrt(ss);
  fit.points = xy.size();
  if (prediction && *prediction != 0.0) fit.agreement = std::abs(fit.slope - *prediction) / std::abs(*prediction);
  return fit;
}

std::optional<double> two_band_prediction(const ModelInstance& model, double lambda, double kappa, double T0_fit) {
  const double v = v_min_two_band(model, kappa);
  if (v >= 0.0) return std::nullopt;
  return T0_fit * std::exp(1.0 / (lambda * v));
}

double calibrate_t0(const ModelInstance& model, double lambda, double kappa, double tc) {
  const double v = v_min_two_band(model, kappa);
  if (v >= 0.0) throw ConfigError("calibrate_t0: v_min(kappa) >= 0, no weak-coupling T_c to calibrate against");
  return tc * std::exp(-1.0 / (lambda * v));
}

TwoBandCheck two_band_check(const ModelInstance& model, double kappa, const std::vector<double>& lambdas,
                            const SolverOptions& opts, double lambda_ref) {
  TwoBandCheck out;
  out.kappa = kappa;
  out.lambda_ref = lambda_ref;
  const TcResult ref = critical_temperature(model, lambda_ref, kappa, opts);
  if (!ref.found) throw SolverError("two_band_check: no T_c at the calibration coupling");
  out.tc_ref = ref.tc;
  out.T0_fit = calibrate_t0(model, lambda_ref, kappa, ref.tc);
  const double mu = model.max_mu();
  for (double lambda : lambdas) {
    TwoBandPoint p;
    p.lambda = lambda;
    const TcResult r = critical_temperature(model, lambda, kappa, opts);
    if (!r.found) throw SolverError("two_band_check: no T_c at lambda = " + std::to_string(lambda));
    p.tc = r.tc;
    p.prediction = two_band_prediction(model, lambda, kappa, out.T0_fit);
    const double computed = lambda * std::log(r.tc / mu);
    p.rel_error = p.prediction ? std::abs(lambda * std::log(*p.prediction / mu) - computed) / std::abs(computed) : 1.0;
    out.points.push_back(p);
  }
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

AsymptoticReport asymptotic_report(const ModelInstance& model, const std::vector<double>& lambdas,
                                   const std::vector<double>& kappas, const ReportOptions& opts) {
  AsymptoticReport rep;
  rep.model_id = model.id;
  try {
    rep.constants = perturbation_constants(model);
  } catch (const ConfigError& e) {
    rep.constants_error = e.what();
  }
  const double slack = 2.0 * opts.solver.bisect_tol;
  const bool coupled = model.interactions.has_offdiagonal();

  bool mono_ok = true, mono_flag = false;
  std::string mono_detail;
  Verdict linear{"linear_enhancement", "not_applicable", ""};
  Verdict quadratic{"quadratic_enhancement", "not_applicable", ""};
  for (double lambda : lambdas) {
    LambdaReport lr;
    lr.lambda = lambda;
    try {
      lr.records = sweep_kappa(model, lambda, kappas, opts.solver, opts.workers);
      lr.thresholds = kappa_thresholds(model, lambda, opts.solver);
    } catch (const SolverError& e) {
      lr.fit_errors.push_back(e.what());
      rep.partial = true;
      rep.per_lambda.push_back(std::move(lr));
      continue;
    }
    const SweepRecord& ref = lr.records.front();
    for (const auto& r : lr.records) {
      if (!r.error.empty()) {
        rep.partial = true;
        continue;
      }
      if (ref.tc_found && (!r.tc_found || r.tc < ref.tc * (1.0 - slack))) {
        mono_ok = false;
        mono_detail += "lambda " + fmt(lambda) + " kappa " + fmt(r.kappa) + " below T_c(lambda,0); ";
      }
    }
    // |kappa| monotonicity along each sign direction is flagged, not failed.
    for (int side : {1, -1}) {
      std::vector<const SweepRecord*> branch;
      for (const auto& r : lr.records)
        if (r.error.empty() && r.tc_found && r.kappa * side > 0.0) branch.push_back(&r);
      std::sort(branch.begin(), branch.end(),
                [](const SweepRecord* a, const SweepRecord* b) { return std::abs(a->kappa) < std::abs(b->kappa); });
      for (std::size_t i = 1; i < branch.size(); ++i)
        if (branch[i - 1]->tc > branch[i]->tc * (1.0 + slack)) mono_flag = true;
    }
    if (rep.constants && coupled) {
      const auto& pc = *rep.constants;
      auto try_fit = [&](Branch b, std::optional<double> pred, int side = 0) {
        try {
          FitWindow w;
          w.side = side;
          lr.fits.push_back(fit_enhancement(lr.records, b, w, pred));
        } catch (const ConfigError& e) {
          lr.fit_errors.push_back(e.what());
        }
      };
      try_fit(Branch::linear_plus, pc.degenerate ? std::optional(pc.A1_plus) : std::nullopt);
      try_fit(Branch::linear_minus, pc.degenerate ? std::optional(pc.A1_minus) : std::nullopt);
      try_fit(Branch::quadratic, pc.degenerate ? std::nullopt : std::optional(pc.A2));
      try_fit(Branch::quadratic, pc.degenerate ? std::nullopt : std::optional(pc.A2), 1);
      try_fit(Branch::quadratic, pc.degenerate ? std::nullopt : std::optional(pc.A2), -1);
    }
    rep.per_lambda.push_back(std::move(lr));
  }
  rep.verdicts.push_back({"monotone_enhancement", mono_ok ? (mono_flag ? "flagged" : "pass") : "fail",
                          mono_ok ? (mono_flag ? "T_c not monotone in |kappa| along a sign direction" : "")
                                  : mono_detail});

  if (rep.constants && coupled) {
    const auto& pc = *rep.constants;
    const double target = 0.15;
    auto judge = [&](Verdict& v, std::initializer_list<std::pair<Branch, int>> wanted) {
      bool any = false, ok = true;
      for (const auto& lr : rep.per_lambda)
        for (const auto& f : lr.fits)
          for (const auto& [b, side] : wanted)
            if (f.branch == b && f.side == side && f.agreement) {
              any = true;
              ok = ok && *f.agreement <= target;
              v.detail += branch_name(b) + (side ? (side > 0 ? "+" : "-") : std::string()) + " lambda " +
                          fmt(lr.lambda) + ": slope " + fmt(f.slope) + " vs " + fmt(*f.prediction) + "; ";
            }
      v.status = !any ? "fail" : ok ? "pass" : "fail";
    };
    if (pc.degenerate)
      judge(linear, {{Branch::linear_plus, 1}, {Branch::linear_minus, -1}});
    else
      judge(quadratic, {{Branch::quadratic, 0}});
  }
  rep.verdicts.push_back(linear);
  rep.verdicts.push_back(quadratic);

  Verdict tb{"two_band_closed_form", "not_applicable", ""};
  if (model.n_bands() == 2 && v_min_two_band(model, opts.two_band_kappa) < 0.0) {
    try {
      rep.two_band = two_band_check(model, opts.two_band_kappa, opts.two_band_lambdas, opts.solver);
      bool ok = true;
      double prev = 0.0;
      for (const auto& p : rep.two_band->points) {
        ok = ok && p.rel_error >= prev;
        prev = p.rel_error;
        tb.detail += "lambda " + fmt(p.lambda) + ": rel err " + fmt(p.rel_error) + "; ";
      }
      ok = ok && !rep.two_band->points.empty() && rep.two_band->points.back().rel_error <= 0.1;
      tb.status = ok ? "pass" : "fail";
    } catch (const SolverError& e) {
      tb.status = "fail";
      tb.detail = e.what();
      rep.partial = true;
    }
  }
  rep.verdicts.push_back(tb);
  return rep;
}

}  // namespace mbcs
