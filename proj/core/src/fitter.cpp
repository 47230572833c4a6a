#include "scalelaw/fitter.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>
#include <tuple>

#include "scalelaw/error.hpp"

namespace scalelaw {

using fit_detail::Theta;
using namespace fit_detail;

InitSeed InitSeed::from(const InfoResolutionParams& p) {
  InitSeed s;
  s.log_a = std::log(p.base.A);
  s.alpha = p.base.alpha;
  s.log_b = std::log(p.base.B);
  s.beta = p.base.beta;
  s.e = p.base.E;
  s.e_relative = false;
  s.nu = p.nu;
  s.mu = p.mu;
  s.log_kappa = std::log(p.kappa);
  return s;
}

InitSeed InitSeed::from(const ChinchillaParams& p) {
  InfoResolutionParams full;
  full.base = p;
  return from(full);
}

std::vector<InitSeed> default_init_grid() {
  constexpr double kExponents[] = {0.1, 0.3, 0.5, 0.8};
  constexpr double kLogScales[] = {0.0, 2.5, 5.0};
  constexpr double kFloorFractions[] = {0.5, 0.9};
  constexpr double kNu[] = {0.05, 0.2, 0.5};
  constexpr double kMu[] = {0.5, 1.0};
  constexpr double kKappa[] = {0.5, 2.0, 5.0};

  std::vector<InitSeed> grid;
  grid.reserve(4 * 4 * 3 * 3 * 2 * 3 * 2 * 3);
  for (double log_a : kLogScales)
    for (double alpha : kExponents)
      for (double log_b : kLogScales)
        for (double beta : kExponents)
          for (double e : kFloorFractions)
            for (double nu : kNu)
              for (double mu : kMu)
                for (double kappa : kKappa)
                  grid.push_back({log_a, alpha, log_b, beta, e, true, nu, mu, std::log(kappa)});
  return grid;
}

void validate(const FitConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kDomain, what);
  };
  require(std::isfinite(c.huber_delta) && c.huber_delta > 0.0, "huber_delta must be positive");
  require(!c.init_grid.empty(), "init_grid must not be empty");
  require(c.max_iters > 0, "max_iters must be positive");
  require(std::isfinite(c.rel_tol) && c.rel_tol > 0.0, "rel_tol must be positive");
  if (c.pin_mu) require(*c.pin_mu > 0.0 && *c.pin_mu <= 1.0, "pin_mu must lie in (0, 1]");
  if (c.pin_alpha) require(*c.pin_alpha > 0.0 && *c.pin_alpha <= 2.0, "pin_alpha must lie in (0, 2]");
}

const ChinchillaParams& FitResult::chinchilla() const {
  if (const auto* c = std::get_if<ChinchillaParams>(&params)) return *c;
  return std::get<InfoResolutionParams>(params).base;
}

const InfoResolutionParams& FitResult::inforesolution() const {
  if (const auto* p = std::get_if<InfoResolutionParams>(&params)) return *p;
  throw Error(ErrorCode::kDomain, "fit result holds Chinchilla-form parameters");
}

double huber(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

namespace {

constexpr double kExponentMin = 1e-8;
constexpr double kExponentMax = 2.0;
constexpr double kLogScaleMin = -50.0;
constexpr double kLogScaleMax = 50.0;

struct Point {
  double ln_n;
  double ln_d;
  double ln_rho;
  double ln_gap;  // log(1 - rho); unused when clean
  double ln_loss;
  bool clean;     // rho == 1
};

std::vector<Point> prepare(std::span<const RunRecord> records) {
  std::vector<Point> pts;
  pts.reserve(records.size());
  for (const auto& r : records) {
    const bool clean = r.rho == 1.0;
    pts.push_back({std::log(r.n_params), std::log(r.n_data), std::log(r.rho),
                   clean ? 0.0 : std::log1p(-r.rho), std::log(r.loss), clean});
  }
  return pts;
}

// Predicted loss and, optionally, d(pred)/d(theta).
inline double predict(const Theta& t, const Point& p, double* dpred) {
  const double a_term = std::exp(t[kLogA] - t[kAlpha] * p.ln_n);
  const double b_term = std::exp(t[kLogB] - t[kBeta] * p.ln_d - t[kNu] * p.ln_rho);
  const double s_term = p.clean ? 0.0 : std::exp(t[kLogKappa] + t[kMu] * p.ln_gap);
  if (dpred != nullptr) {
    dpred[kLogA] = a_term;
    dpred[kAlpha] = -a_term * p.ln_n;
    dpred[kLogB] = b_term;
    dpred[kBeta] = -b_term * p.ln_d;
    dpred[kE] = 1.0;
    dpred[kNu] = -b_term * p.ln_rho;
    dpred[kMu] = s_term * p.ln_gap;
    dpred[kLogKappa] = s_term;
  }
  return a_term + b_term + t[kE] + s_term;
}

double objective_of(const Theta& t, const std::vector<Point>& pts, double delta) {
  double f = 0.0;
  for (const auto& p : pts) {
    const double pred = predict(t, p, nullptr);
    if (!(pred > 0.0)) return std::numeric_limits<double>::infinity();
    f += huber(std::log(pred) - p.ln_loss, delta);
  }
  return f;
}

struct Bounds {
  Theta lo;
  Theta hi;
};

Bounds make_bounds(double e_max) {
  Bounds b;
  b.lo = {kLogScaleMin, kExponentMin, kLogScaleMin, kExponentMin, 0.0,
          kExponentMin, kExponentMin, kLogScaleMin};
  b.hi = {kLogScaleMax, kExponentMax, kLogScaleMax, kExponentMax, e_max,
          kExponentMax, 1.0, kLogScaleMax};
  return b;
}

using FreeMask = std::array<bool, kNumParams>;

struct LocalProblem {
  const std::vector<Point>* points = nullptr;
  double delta = 1e-3;
  FreeMask free{};
  Bounds bounds;
  int max_iters = 500;
  double rel_tol = 1e-12;
};

struct LocalResult {
  Theta theta{};
  double objective = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

Theta clamp_to(const Theta& t, const Bounds& b) {
  Theta out;
  for (std::size_t j = 0; j < kNumParams; ++j) out[j] = std::clamp(t[j], b.lo[j], b.hi[j]);
  return out;
}

LocalResult levenberg_marquardt(const LocalProblem& prob, const Theta& start) {
  const auto& pts = *prob.points;
  const std::size_t n = pts.size();

  LocalResult res;
  res.theta = clamp_to(start, prob.bounds);
  res.objective = objective_of(res.theta, pts, prob.delta);
  if (!std::isfinite(res.objective)) return res;

  double lambda = 1e-3;
  std::array<double, kNumParams> dpred{};
  std::vector<double> resid(n), weight(n);
  Eigen::MatrixXd jac(n, kNumParams);

  for (int iter = 0; iter < prob.max_iters; ++iter) {
    res.iterations = iter + 1;
    const Theta& t = res.theta;

    // Residuals, IRLS weights and the full Jacobian of the log-residuals.
    Theta grad{};
    for (std::size_t i = 0; i < n; ++i) {
      const double pred = predict(t, pts[i], dpred.data());
      resid[i] = std::log(pred) - pts[i].ln_loss;
      const double a = std::abs(resid[i]);
      weight[i] = a <= prob.delta ? 1.0 : prob.delta / a;
      for (std::size_t j = 0; j < kNumParams; ++j) {
        jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dpred[j] / pred;
        grad[j] += weight[i] * resid[i] * dpred[j] / pred;
      }
    }

    // Active set: free parameters not pinned against a bound by the gradient.
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < kNumParams; ++j) {
      if (!prob.free[j]) continue;
      if (t[j] <= prob.bounds.lo[j] && grad[j] > 0.0) continue;
      if (t[j] >= prob.bounds.hi[j] && grad[j] < 0.0) continue;
      active.push_back(j);
    }
    if (active.empty()) {
      res.converged = true;
      break;
    }

    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd g(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      g(a) = grad[active[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b <= a; ++b) {
        const auto ja = static_cast<Eigen::Index>(active[static_cast<std::size_t>(a)]);
        const auto jb = static_cast<Eigen::Index>(active[static_cast<std::size_t>(b)]);
        double h = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          h += weight[i] * jac(ii, ja) * jac(ii, jb);
        }
        hess(a, b) = h;
        hess(b, a) = h;
      }
    }
    double diag_max = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) diag_max = std::max(diag_max, hess(a, a));
    const double diag_floor = std::max(diag_max * 1e-12, 1e-300);

    bool accepted = false;
    Theta trial{};
    double f_trial = 0.0;
    while (lambda <= 1e16) {
      Eigen::MatrixXd damped = hess;
      for (Eigen::Index a = 0; a < m; ++a)
        damped(a, a) += lambda * std::max(hess(a, a), diag_floor);
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      trial = t;
      for (Eigen::Index a = 0; a < m; ++a) trial[active[static_cast<std::size_t>(a)]] += step(a);
      trial = clamp_to(trial, prob.bounds);
      f_trial = objective_of(trial, pts, prob.delta);
      if (f_trial < res.objective) {
        accepted = true;
        lambda = std::max(lambda / 3.0, 1e-12);
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // No descent at any damping: stationary to machine precision.
      res.converged = true;
      break;
    }
    const double decrease = res.objective - f_trial;
    res.theta = trial;
    res.objective = f_trial;
    if (decrease <= prob.rel_tol * f_trial || f_trial == 0.0) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// Lowest objective first; ties go to the lexicographically smallest vector.
bool better(const LocalResult& a, const LocalResult& b) {
  const double fa = std::isnan(a.objective) ? std::numeric_limits<double>::infinity() : a.objective;
  const double fb = std::isnan(b.objective) ? std::numeric_limits<double>::infinity() : b.objective;
  if (fa != fb) return fa < fb;
  return a.theta < b.theta;
}

unsigned resolve_threads(unsigned requested, std::size_t jobs) {
  unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

LocalResult multistart(const LocalProblem& prob, const std::vector<Theta>& seeds, unsigned threads) {
  std::vector<LocalResult> results(seeds.size());
  const unsigned workers = resolve_threads(threads, seeds.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) results[i] = levenberg_marquardt(prob, seeds[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++)
          results[i] = levenberg_marquardt(prob, seeds[i]);
      });
    }
  }
  LocalResult best = results.front();
  for (std::size_t i = 1; i < results.size(); ++i)
    if (better(results[i], best)) best = results[i];
  return best;
}

Theta seed_theta(const InitSeed& s, double min_loss) {
  return {s.log_a, s.alpha, s.log_b, s.beta, s.e_relative ? s.e * min_loss : s.e,
          s.nu, s.mu, s.log_kappa};
}

void apply_pins(Theta& t, const FitConfig& c) {
  if (c.pin_alpha) t[kAlpha] = *c.pin_alpha;
  if (c.pin_mu) t[kMu] = *c.pin_mu;
}

// Distinct seeds restricted to the given coordinates, first-occurrence order.
std::vector<Theta> restrict_seeds(const std::vector<Theta>& seeds, const FreeMask& coords,
                                  const Theta& base) {
  std::vector<Theta> out;
  std::set<Theta> seen;
  for (const auto& s : seeds) {
    Theta t = base;
    for (std::size_t j = 0; j < kNumParams; ++j)
      if (coords[j]) t[j] = s[j];
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

double min_loss(std::span<const RunRecord> records) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : records) m = std::min(m, r.loss);
  return m;
}

void check_records(std::span<const RunRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      validate(records[i]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kDomain, "record " + std::to_string(i) + ": " + e.what());
    }
  }
}

template <typename Key>
std::size_t count_distinct(std::span<const RunRecord> records, Key key) {
  std::set<double> values;
  for (const auto& r : records) values.insert(key(r));
  return values.size();
}

constexpr FreeMask kChinchillaCoords{true, true, true, true, true, false, false, false};
constexpr FreeMask kShiftCoords{false, false, false, false, false, true, true, true};
constexpr FreeMask kAllCoords{true, true, true, true, true, true, true, true};

FreeMask without_pins(FreeMask m, const FitConfig& c) {
  if (c.pin_alpha) m[kAlpha] = false;
  if (c.pin_mu) m[kMu] = false;
  return m;
}

std::vector<Theta> resolved_seeds(const FitConfig& c, double loss_min) {
  std::vector<Theta> seeds;
  seeds.reserve(c.init_grid.size());
  for (const auto& s : c.init_grid) {
    Theta t = seed_theta(s, loss_min);
    apply_pins(t, c);
    seeds.push_back(t);
  }
  return seeds;
}

LocalProblem make_problem(const std::vector<Point>& pts, const FitConfig& c, FreeMask free,
                          double e_max) {
  LocalProblem p;
  p.points = &pts;
  p.delta = c.huber_delta;
  p.free = free;
  p.bounds = make_bounds(e_max);
  p.max_iters = c.max_iters;
  p.rel_tol = c.rel_tol;
  return p;
}

void check_chinchilla_preconditions(std::span<const RunRecord> records) {
  if (records.size() < 6)
    throw Error(ErrorCode::kInsufficientData,
                "Chinchilla fit needs at least 6 records, got " + std::to_string(records.size()));
  for (const auto& r : records)
    if (r.rho != 1.0)
      throw Error(ErrorCode::kMixedResolution,
                  "Chinchilla fit requires rho = 1 for every record");
  if (count_distinct(records, [](const RunRecord& r) { return r.n_params; }) < 2 ||
      count_distinct(records, [](const RunRecord& r) { return r.n_data; }) < 2)
    throw Error(ErrorCode::kInsufficientData,
                "Chinchilla fit needs at least 2 distinct N and 2 distinct D values");
}

LocalResult fit_clean_stage(std::span<const RunRecord> clean, const FitConfig& config,
                            const std::vector<Point>& pts) {
  const double loss_min = min_loss(clean);
  const LocalProblem prob =
      make_problem(pts, config, without_pins(kChinchillaCoords, config), loss_min);
  const std::vector<Theta> all = resolved_seeds(config, loss_min);
  Theta base = all.front();
  const auto seeds = restrict_seeds(all, kChinchillaCoords, base);
  return multistart(prob, seeds, config.max_threads);
}

FitResult make_result(const InfoResolutionParams& p, bool info_form, std::span<const RunRecord> records,
                      double delta, bool converged, int iterations) {
  FitResult out;
  if (info_form)
    out.params = p;
  else
    out.params = p.base;
  out.objective = robust_objective(p, records, delta);
  out.n_points = records.size();
  out.converged = converged;
  out.residuals = log_residuals(p, records);
  out.iterations = iterations;
  return out;
}

}  // namespace

std::vector<double> log_residuals(const InfoResolutionParams& p, std::span<const RunRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back(std::log(eval_inforesolution(p, r.n_params, r.n_data, r.rho)) - std::log(r.loss));
  return out;
}

double robust_objective(const InfoResolutionParams& p, std::span<const RunRecord> records,
                        double delta) {
  double f = 0.0;
  for (double r : log_residuals(p, records)) f += huber(r, delta);
  return f;
}

double robust_objective(const ChinchillaParams& p, std::span<const RunRecord> records, double delta) {
  InfoResolutionParams full;
  full.base = p;
  return robust_objective(full, records, delta);
}

std::vector<RunRecord> average_replicates(std::span<const RunRecord> records) {
  using Key = std::tuple<double, double, double>;
  std::map<Key, std::size_t> index;
  std::vector<RunRecord> out;
  std::vector<std::size_t> counts;
  for (const auto& r : records) {
    const Key k{r.n_params, r.n_data, r.rho};
    auto [it, inserted] = index.emplace(k, out.size());
    if (inserted) {
      out.push_back(r);
      counts.push_back(1);
    } else {
      out[it->second].loss += r.loss;
      ++counts[it->second];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].loss /= static_cast<double>(counts[i]);
  return out;
}

FitResult fit_chinchilla(std::span<const RunRecord> records, const FitConfig& config) {
  validate(config);
  check_records(records);
  check_chinchilla_preconditions(records);

  const auto pts = prepare(records);
  const LocalResult best = fit_clean_stage(records, config, pts);
  return make_result(from_theta(best.theta), false, records, config.huber_delta, best.converged,
                     best.iterations);
}

FitResult fit_inforesolution(std::span<const RunRecord> records, const FitConfig& config) {
  validate(config);
  check_records(records);

  const std::size_t free_count = config.pin_mu ? 7 : 8;
  if (records.size() < free_count + 1)
    throw Error(ErrorCode::kInsufficientData,
                "information-resolution fit needs at least " + std::to_string(free_count + 1) +
                    " records, got " + std::to_string(records.size()));

  std::set<double> rhos;
  for (const auto& r : records) rhos.insert(r.rho);
  if (rhos.size() == 1) {
    if (*rhos.begin() == 1.0)
      throw Error(ErrorCode::kStaging, "no rho < 1 records: the loss-shift terms cannot be fitted");
    throw Error(ErrorCode::kInsufficientVariation,
                "all records share one rho value: kappa cannot be separated from E");
  }

  const auto pts = prepare(records);
  const double loss_min = min_loss(records);

  if (config.stage_mode == StageMode::kJoint) {
    if (rhos.size() < 3)
      throw Error(ErrorCode::kInsufficientVariation, "joint fit needs at least 3 distinct rho values");
    const LocalProblem prob = make_problem(pts, config, without_pins(kAllCoords, config), loss_min);
    const LocalResult best = multistart(prob, resolved_seeds(config, loss_min), config.max_threads);
    return make_result(from_theta(best.theta), true, records, config.huber_delta, best.converged,
                       best.iterations);
  }

  if (!rhos.contains(1.0))
    throw Error(ErrorCode::kStaging, "staged fit needs rho = 1 records for stage 1");

  std::vector<RunRecord> clean;
  std::vector<RunRecord> shifted;
  for (const auto& r : records) (r.rho == 1.0 ? clean : shifted).push_back(r);
  try {
    check_chinchilla_preconditions(clean);
  } catch (const Error& e) {
    throw Error(ErrorCode::kStaging, std::string("stage 1 (rho = 1 subset): ") + e.what());
  }

  // Stage 1: Chinchilla terms from the clean runs.
  const auto clean_pts = prepare(clean);
  const LocalResult stage1 = fit_clean_stage(clean, config, clean_pts);

  // Stage 2: (nu, mu, kappa) on the degraded runs with stage-1 terms held.
  const auto shifted_pts = prepare(shifted);
  const LocalProblem prob2 =
      make_problem(shifted_pts, config, without_pins(kShiftCoords, config), loss_min);
  Theta base = stage1.theta;
  apply_pins(base, config);
  const auto seeds2 = restrict_seeds(resolved_seeds(config, loss_min), kShiftCoords, base);
  const LocalResult stage2 = multistart(prob2, seeds2, config.max_threads);

  LocalResult final_result = stage2;
  bool converged = stage1.converged && stage2.converged;
  int iterations = stage1.iterations + stage2.iterations;
  if (config.joint_polish) {
    const LocalProblem prob3 = make_problem(pts, config, without_pins(kAllCoords, config), loss_min);
    const LocalResult polished = levenberg_marquardt(prob3, stage2.theta);
    const double staged_objective = objective_of(stage2.theta, pts, config.huber_delta);
    if (polished.objective <= staged_objective) {
      final_result = polished;
      converged = polished.converged;
    }
    iterations += polished.iterations;
  }
  return make_result(from_theta(final_result.theta), true, records, config.huber_delta, converged,
                     iterations);
}

namespace fit_detail {

Theta to_theta(const InfoResolutionParams& p) {
  return {std::log(p.base.A), p.base.alpha, std::log(p.base.B), p.base.beta, p.base.E,
          p.nu, p.mu, std::log(p.kappa)};
}

InfoResolutionParams from_theta(const Theta& t) {
  InfoResolutionParams p;
  p.base = {std::exp(t[kLogA]), t[kAlpha], std::exp(t[kLogB]), t[kBeta], t[kE]};
  p.nu = t[kNu];
  p.mu = t[kMu];
  p.kappa = std::exp(t[kLogKappa]);
  return p;
}

double objective(const Theta& t, std::span<const RunRecord> records, double delta) {
  return objective_of(t, prepare(records), delta);
}

Theta gradient(const Theta& t, std::span<const RunRecord> records, double delta) {
  Theta g{};
  std::array<double, kNumParams> dpred{};
  for (const auto& p : prepare(records)) {
    const double pred = predict(t, p, dpred.data());
    const double r = std::log(pred) - p.ln_loss;
    const double psi = std::clamp(r, -delta, delta);
    for (std::size_t j = 0; j < kNumParams; ++j) g[j] += psi * dpred[j] / pred;
  }
  return g;
}

}  // namespace fit_detail

}  // namespace scalelaw
