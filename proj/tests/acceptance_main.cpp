// Acceptance gate: one line per criterion, [PASS]/[FAIL]/[SKIP], nonzero
// exit when anything fails.  All tolerances are pinned here, next to the
// check that uses them.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cpdqs/drivers.hpp"
#include "cpdqs/io.hpp"
#include "cpdqs/projection.hpp"
#include "oracles.hpp"

using namespace cpdqs;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
int g_skips = 0;

void report(int id, const char* status, const std::string& detail) {
  std::printf("[%s] %d. %s\n", status, id, detail.c_str());
}

// Body returns "PASS: detail", "SKIP: reason", or a failure description.
void criterion(int id, const std::function<std::string()>& body) {
  std::string detail;
  try {
    detail = body();
  } catch (const std::exception& e) {
    detail = std::string("unexpected exception: ") + e.what();
  }
  if (detail.rfind("PASS: ", 0) == 0) {
    report(id, "PASS", detail.substr(6));
  } else if (detail.rfind("SKIP: ", 0) == 0) {
    ++g_skips;
    report(id, "SKIP", detail.substr(6));
  } else {
    ++g_failures;
    report(id, "FAIL", detail);
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Drops the time_seconds column (index 8) so rows can be compared bit-wise.
std::string strip_time_column(const std::string& row) {
  std::vector<std::string> fields;
  std::stringstream ss(row);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k == 8) continue;
    out += fields[k];
    out += ',';
  }
  return out;
}

// --- criterion 1: projection vs exhaustive KKT oracle -----------------------

std::string check_projection_oracle() {
  constexpr double kTol = 1e-10;       // elementwise agreement
  constexpr double kTimeLimit = 5.0;   // seconds for all 1000 blocks
  const auto t0 = std::chrono::steady_clock::now();

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int l = len(rng);
    Eigen::VectorXd u(l);
    for (int k = 0; k < l; ++k) u[k] = coord(rng);
    Eigen::VectorXd fast = u;
    BlockLayout layout({l});
    project_block_simplex_in_place(layout, fast);
    const Eigen::VectorXd slow = cpdqs::testing::simplex_projection_bruteforce(u);
    worst = std::max(worst, (fast - slow).lpNorm<Eigen::Infinity>());
    if (worst > kTol)
      return "projection mismatch " + fmt(worst) + " at trial " +
             std::to_string(trial);
  }
  const double dt = seconds_since(t0);
  if (dt >= kTimeLimit)
    return "projection sweep took " + fmt(dt) + " s (budget " + fmt(kTimeLimit) + " s)";
  return "PASS: projection oracle equivalence, 1000 blocks, max err " +
         fmt(worst) + ", " + fmt(dt) + " s";
}

// --- criterion 2: gradients vs central finite differences -------------------

std::string check_gradient_fd() {
  constexpr double kRelTol = 1e-6;
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = cpdqs::testing::random_instance(rng, 5, 5, -8, 8, 0.8);
    Eigen::VectorXd x(inst.dimension());
    for (Index k = 0; k < x.size(); ++k) x[k] = coord(rng);

    const Eigen::VectorXd g = gradient<double>(inst, x);
    const Eigen::VectorXd fd = cpdqs::testing::finite_difference_gradient(
        [&](const Eigen::VectorXd& y) { return objective<double>(inst, y); }, x);
    const PenaltyParams<double> p(13.0);
    const Eigen::VectorXd pg = penalized_gradient<double>(inst, x, p);
    const Eigen::VectorXd pfd = cpdqs::testing::finite_difference_gradient(
        [&](const Eigen::VectorXd& y) {
          return penalized_objective<double>(inst, y, p);
        },
        x);
    for (Index k = 0; k < x.size(); ++k) {
      const double e1 = std::abs(g[k] - fd[k]) / std::max(1.0, std::abs(g[k]));
      const double e2 =
          std::abs(pg[k] - pfd[k]) / std::max(1.0, std::abs(pg[k]));
      worst = std::max(worst, std::max(e1, e2));
    }
    if (worst > kRelTol)
      return "gradient mismatch, relative error " + fmt(worst) + " at trial " +
             std::to_string(trial);
  }
  return "PASS: gradient finite-difference agreement, 100 instances, max rel err " +
         fmt(worst);
}

// --- criterion 3: exact-oracle dominance + multistart hit rate --------------

std::string check_exact_dominance() {
  constexpr double kSlack = 1e-9;
  constexpr double kTimeLimit = 60.0;
  const auto t0 = std::chrono::steady_clock::now();

  std::mt19937_64 rng(2026);
  int scsc_hits = 0;
  int scp_hits = 0;
  SpgConfig<double> cfg;
  for (int trial = 0; trial < 500; ++trial) {
    const Instance inst = cpdqs::testing::random_instance(rng, 5, 4, 0, 10, 1.0);
    const double optimum = solve_exact(inst).second.rounded_objective;

    const double one_scsc = solve_scsc(inst, cfg).second.rounded_objective;
    if (one_scsc < optimum - kSlack)
      return "scsc beat the exact optimum at trial " + std::to_string(trial) +
             " (" + fmt(one_scsc) + " < " + fmt(optimum) + ")";
    const double one_scp =
        solve_scp(inst, cfg, PenaltyParams<double>(1e7)).second.rounded_objective;
    if (one_scp < optimum - kSlack)
      return "scp beat the exact optimum at trial " + std::to_string(trial) +
             " (" + fmt(one_scp) + " < " + fmt(optimum) + ")";

    const double multi_scsc =
        multistart(inst, Algorithm::Scsc, 10, 7, cfg).second.rounded_objective;
    if (multi_scsc < optimum - kSlack)
      return "multistart scsc beat the exact optimum at trial " +
             std::to_string(trial);
    if (multi_scsc <= optimum + kSlack) ++scsc_hits;
    const double multi_scp =
        multistart(inst, Algorithm::Scp, 10, 7, cfg, 1e7).second.rounded_objective;
    if (multi_scp < optimum - kSlack)
      return "multistart scp beat the exact optimum at trial " +
             std::to_string(trial);
    if (multi_scp <= optimum + kSlack) ++scp_hits;
  }
  const double dt = seconds_since(t0);
  if (dt >= kTimeLimit)
    return "dominance sweep took " + fmt(dt) + " s (budget " +
           fmt(kTimeLimit) + " s)";
  // The hit rates are recorded, not asserted.
  return "PASS: exact-oracle dominance on 500 instances; multistart(10) hit rate scsc " +
         fmt(100.0 * scsc_hits / 500.0) + "%, scp " +
         fmt(100.0 * scp_hits / 500.0) + "%, " + fmt(dt) + " s";
}

// --- criteria 4 + 5: Armijo and feasibility audits over traced runs ---------

struct AuditStats {
  long steps = 0;
  double worst_armijo = -1e300;  // f - (g_max + gamma*alpha*g_dot_d), scaled
  double worst_sum_dev = 0;      // |block sum - 1| for simplex runs
  double worst_neg = 0;          // most negative component for orthant runs
  bool lambda_ok = true;
};

void audit_run(const Instance& inst, Algorithm algo, const SpgConfig<double>& cfg,
               AuditStats& armijo, AuditStats& feas) {
  const BlockLayout& layout = inst.layout();
  ObserverFn<double> observer = [&](const IterationRecord<double>& rec,
                                    const Eigen::VectorXd& x) {
    ++armijo.steps;
    const double slack =
        (rec.f - (rec.g_max + cfg.gamma * rec.alpha * rec.g_dot_d)) /
        std::max(1.0, std::abs(rec.g_max));
    armijo.worst_armijo = std::max(armijo.worst_armijo, slack);
    if (rec.lambda < cfg.lambda_min || rec.lambda > cfg.lambda_max)
      armijo.lambda_ok = false;

    if (algo == Algorithm::Scsc) {
      for (Index i = 0; i < layout.blocks(); ++i)
        feas.worst_sum_dev =
            std::max(feas.worst_sum_dev,
                     std::abs(layout.segment(x, i).sum() - 1.0));
    } else {
      feas.worst_neg = std::min(feas.worst_neg, x.minCoeff());
    }
  };

  Assignment rounded;
  if (algo == Algorithm::Scsc)
    rounded = solve_scsc(inst, cfg, InitPolicy::uniform_center(),
                         RoundingRule::GreedyEnergy, observer)
                  .first;
  else
    rounded = solve_scp(inst, cfg, PenaltyParams<double>(1e7),
                        InitPolicy::uniform_center(), RoundingRule::GreedyEnergy,
                        observer)
                  .first;

  // Rounded output must be exactly feasible 0/1.
  const Eigen::VectorXd e = expand(inst, rounded);
  for (Index i = 0; i < layout.blocks(); ++i) {
    const auto seg = layout.segment(e, i);
    if (seg.sum() != 1.0) feas.worst_sum_dev = 1;
    for (Index r = 0; r < layout.size(i); ++r)
      if (seg[r] != 0.0 && seg[r] != 1.0) feas.worst_sum_dev = 1;
  }
}

AuditStats g_armijo, g_feas;
bool g_audit_done = false;

void run_audits() {
  if (g_audit_done) return;
  g_audit_done = true;
  std::mt19937_64 rng(2027);
  SpgConfig<double> cfg;
  cfg.eps_a = 1e-6;  // longer runs, more steps to audit
  cfg.eps_b = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = cpdqs::testing::random_instance(rng, 6, 5, -5, 5, 0.8);
    audit_run(inst, Algorithm::Scsc, cfg, g_armijo, g_feas);
    audit_run(inst, Algorithm::Scp, cfg, g_armijo, g_feas);
  }
}

std::string check_armijo_audit() {
  constexpr double kRelSlack = 1e-9;
  run_audits();
  if (g_armijo.steps == 0) return "no accepted steps were traced";
  if (!g_armijo.lambda_ok) return "a spectral step escaped [lambda_min, lambda_max]";
  if (g_armijo.worst_armijo > kRelSlack)
    return "Armijo violated by relative slack " + fmt(g_armijo.worst_armijo);
  return "PASS: nonmonotone Armijo held on " + std::to_string(g_armijo.steps) +
         " accepted steps, worst relative slack " + fmt(g_armijo.worst_armijo);
}

std::string check_feasibility_audit() {
  constexpr double kSumTol = 1e-8;    // simplex block sums
  constexpr double kNegTol = -1e-12;  // orthant components
  run_audits();
  if (g_feas.worst_sum_dev > kSumTol)
    return "simplex block sum deviated by " + fmt(g_feas.worst_sum_dev);
  if (g_feas.worst_neg < kNegTol)
    return "orthant iterate went negative: " + fmt(g_feas.worst_neg);
  return "PASS: feasibility audit, worst block-sum deviation " +
         fmt(g_feas.worst_sum_dev) + ", most negative orthant component " +
         fmt(g_feas.worst_neg);
}

// --- criterion 6: benchmark reproduction (needs the public corpus) ---------

std::optional<fs::path> find_instance_file(const fs::path& dir,
                                           const std::string& token) {
  std::error_code ec;
  for (fs::recursive_directory_iterator it(dir, ec), end; it != end && !ec;
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const fs::path& p = it->path();
    const std::string ext = p.extension().string();
    if (ext != ".wcsp" && ext != ".cpdqs") continue;
    if (p.filename().string().find(token) != std::string::npos) return p;
  }
  return std::nullopt;
}

std::string check_table_reproduction() {
  constexpr double kRelTol = 0.02;      // 2% of the published objective
  constexpr double kTimeLimit = 10.0;   // seconds per instance
  struct Row {
    const char* token;
    Index n;
    Index m;
    double objective;
  };
  const Row rows[] = {
      {"1PGB", 11, 539, 125509.0},
      {"2TRX", 11, 528, 178774.0},
  };

  const char* dir_env = std::getenv("CPDQS_BENCH_DIR");
  if (!dir_env || !*dir_env)
    return "SKIP: benchmark corpus not present; set CPDQS_BENCH_DIR to a "
           "directory holding the 1PGB/2TRX instance files to enable";
  const fs::path dir(dir_env);
  if (!fs::is_directory(dir))
    return std::string("CPDQS_BENCH_DIR is not a directory: ") + dir_env;

  std::string detail;
  for (const Row& row : rows) {
    const auto file = find_instance_file(dir, row.token);
    if (!file)
      return std::string("no instance file matching '") + row.token +
             "' under " + dir.string();
    const Instance inst = load_instance(*file);
    if (inst.positions() != row.n || inst.dimension() != row.m)
      return std::string(row.token) + " stats mismatch: got n=" +
             std::to_string(inst.positions()) + " m=" +
             std::to_string(inst.dimension()) + ", expected n=" +
             std::to_string(row.n) + " m=" + std::to_string(row.m);

    SpgConfig<double> cfg;
    const auto [choice, rep] =
        multistart(inst, Algorithm::Scsc, 10, 1, cfg);
    const double rel =
        std::abs(rep.rounded_objective - row.objective) / row.objective;
    if (rel > kRelTol)
      return std::string(row.token) + " objective " +
             fmt(rep.rounded_objective) + " deviates " + fmt(100 * rel) +
             "% from " + fmt(row.objective);
    if (rep.wall_time_seconds >= kTimeLimit)
      return std::string(row.token) + " took " + fmt(rep.wall_time_seconds) +
             " s (budget " + fmt(kTimeLimit) + " s)";
    detail += std::string(row.token) + " obj " + fmt(rep.rounded_objective) +
              " (" + fmt(100 * rel) + "% off, " + fmt(rep.wall_time_seconds) +
              " s) ";
  }
  return "PASS: table reproduction, " + detail;
}

// --- criterion 7: determinism of CSV rows ----------------------------------

std::string check_determinism() {
  std::mt19937_64 rng(2028);
  const Instance inst = cpdqs::testing::random_instance(rng, 6, 5, -5, 5, 0.9);
  SpgConfig<double> cfg;

  const auto row_of = [&](Algorithm algo) {
    SolveReport rep;
    if (algo == Algorithm::Scsc)
      rep = solve_scsc(inst, cfg, InitPolicy::random_dirichlet(5)).second;
    else if (algo == Algorithm::Scp)
      rep = solve_scp(inst, cfg, PenaltyParams<double>(1e7),
                      InitPolicy::random_dirichlet(5))
                .second;
    else
      rep = solve_exact(inst).second;
    return results_csv_row(inst.name(), inst.positions(), inst.dimension(), rep);
  };

  for (Algorithm algo : {Algorithm::Scsc, Algorithm::Scp, Algorithm::Exact}) {
    const std::string first = strip_time_column(row_of(algo));
    const std::string second = strip_time_column(row_of(algo));
    if (first != second)
      return std::string("rows differ for ") + to_string(algo) + ": '" +
             first + "' vs '" + second + "'";
  }
  return "PASS: identical seed and config reproduce identical CSV rows "
         "(timing column exempt)";
}

// --- criterion 8: every termination reason is reachable ---------------------

std::string check_termination_coverage() {
  using Vec = Eigen::VectorXd;
  const ProjectFn<double> orthant = [](Vec& v) { project_nonneg_in_place(v); };
  const BlockLayout simplex3({3});
  const ProjectFn<double> simplex = [&](Vec& v) {
    project_block_simplex_in_place(simplex3, v);
  };
  std::string seen;

  {  // Stationary: interior quadratic, every other rule disabled
    Vec c(3);
    c << 2, 0.5, 1.25;
    SpgConfig<double> cfg;
    cfg.eps_a = 0;
    cfg.eps_b = 0;
    cfg.stall_n = 1000000;
    const auto res = spg_minimize<double>(
        [&](const Vec& y) { return 0.5 * (y - c).squaredNorm(); },
        [&](const Vec& y) { return Vec(y - c); }, orthant, Vec::Zero(3), cfg);
    if (res.reason != TerminationReason::Stationary)
      return std::string("expected stationary, got ") + to_string(res.reason);
    seen += "stationary ";
  }
  {  // SmallDecrease: linear objective over the simplex under defaults
    Vec a(3);
    a << 1, 2, 3;
    const auto res = spg_minimize<double>(
        [&](const Vec& y) { return a.dot(y); }, [&](const Vec&) { return a; },
        simplex, Vec::Constant(3, 1.0 / 3), SpgConfig<double>{});
    if (res.reason != TerminationReason::SmallDecrease)
      return std::string("expected small_decrease, got ") + to_string(res.reason);
    seen += "small_decrease ";
  }
  {  // WindowStall: generous eps_b fires as soon as the 2M ring fills
    Vec c(2);
    c << 1, 3;
    SpgConfig<double> cfg;
    cfg.eps = 0;
    cfg.eps_a = 0;
    cfg.eps_b = 1e10;
    cfg.stall_n = 1000000;
    cfg.history_m = 2;
    const auto res = spg_minimize<double>(
        [&](const Vec& y) {
          return 0.5 * ((y[0] - c[0]) * (y[0] - c[0]) +
                        10 * (y[1] - c[1]) * (y[1] - c[1]));
        },
        [&](const Vec& y) {
          Vec g(2);
          g << y[0] - c[0], 10 * (y[1] - c[1]);
          return g;
        },
        orthant, Vec::Zero(2), cfg);
    if (res.reason != TerminationReason::WindowStall)
      return std::string("expected window_stall, got ") + to_string(res.reason);
    seen += "window_stall ";
  }
  // The linear simplex problem approaches its vertex geometrically without
  // ever reaching it, so with eps = 0 only the rule under test can fire.
  Vec lin(3);
  lin << 1, 2, 3;
  const auto lin_f = [&](const Vec& y) { return lin.dot(y); };
  const auto lin_g = [&](const Vec&) { return lin; };
  {  // RoundedStall: constant probe with every other rule disabled
    SpgConfig<double> cfg;
    cfg.eps = 0;
    cfg.eps_a = 0;
    cfg.eps_b = 0;
    cfg.stall_n = 5;
    const auto res = spg_minimize<double>(
        lin_f, lin_g, simplex, Vec::Constant(3, 1.0 / 3), cfg,
        [](const Vec&) { return Assignment{{0}}; });
    if (res.reason != TerminationReason::RoundedStall)
      return std::string("expected rounded_stall, got ") + to_string(res.reason);
    seen += "rounded_stall ";
  }
  {  // MaxIter
    SpgConfig<double> cfg;
    cfg.eps = 0;
    cfg.eps_a = 0;
    cfg.eps_b = 0;
    cfg.stall_n = 1000000;
    cfg.max_iter = 3;
    const auto res = spg_minimize<double>(lin_f, lin_g, simplex,
                                          Vec::Constant(3, 1.0 / 3), cfg);
    if (res.reason != TerminationReason::MaxIter)
      return std::string("expected max_iter, got ") + to_string(res.reason);
    seen += "max_iter";
  }
  return "PASS: termination coverage: " + seen;
}

}  // namespace

int main() {
  criterion(1, check_projection_oracle);
  criterion(2, check_gradient_fd);
  criterion(3, check_exact_dominance);
  criterion(4, check_armijo_audit);
  criterion(5, check_feasibility_audit);
  criterion(6, check_table_reproduction);
  criterion(7, check_determinism);
  criterion(8, check_termination_coverage);

  std::printf("acceptance: %d/8 passed, %d skipped, %d failed\n",
              8 - g_failures - g_skips, g_skips, g_failures);
  return g_failures == 0 ? 0 : 1;
}
