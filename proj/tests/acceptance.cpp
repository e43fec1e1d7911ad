// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gifs.hpp"
#include "gifs/io/cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using gifs::DiscreteMeasure;
using gifs::Point;
using gifs::PointSet;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string spec_file(const std::string& name) { return std::string(GIFS_SPECS_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gifs_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = gifs::io::run_command(args, o, e);
  if (out) *out = o.str() + e.str();
  return code;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Sierpinski through the CLI with one argument vs the classical solver.
Outcome sierpinski_degeneracy() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = scratch("c1");
  const int code = cli({"attractor-evmap", spec_file("sierpinski.json"), "--K", "1", "--beta-schedule", "const:1e-3",
                        "--sigma-schedule", "const:1e-3", "--out-dir", dir.string()});
  if (code != 0) return {false, fmt("attractor-evmap exited %d", code)};
  const PointSet ev = gifs::io::pointset_from_csv(gifs::io::read_file(dir / "attractor.csv"));
  const auto classical = gifs::attractor(fixture::sierpinski(), 1e-3);
  const double h = gifs::hausdorff(ev, classical.set);
  const double t = seconds_since(t0);
  fs::remove_all(dir);
  return {classical.report.converged && h <= 2e-3 && t < 30.0,
          fmt("h = %.3g with %zu and %zu points, %.1f s", h, ev.size(), classical.set.size(), t)};
}

// Quarter pair, beta = sigma = 1/k, K = 12: attractor is [0, 1].
Outcome quarter_pair_ledger() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = gifs::approximate_attractor(fixture::quarter_pair(), PointSet::line({0.0}), gifs::Schedules{}, 12);
  std::vector<double> grid;
  for (int i = 0; i <= 1000; ++i) grid.push_back(i * 1e-3);
  const double h = gifs::hausdorff(res.set, PointSet::line(grid));
  const double bound = res.ledger.final_bound();
  const double t = seconds_since(t0);
  return {!res.budget_exceeded && h <= bound && bound <= 0.02 && t < 60.0,
          fmt("h = %.4g, ledger bound = %.4g (eps_12 = %.4g), %.1f s", h, bound, res.ledger.eps().back(), t)};
}

// h(ev(B), ev(B')) <= lip_fs h(B, B') + 2 sigma for random order-2 systems.
Outcome evaluation_contraction() {
  gifs::SplitMix64 rng(1001);
  const double sigma = 1e-4;
  std::size_t pairs = 0, violations = 0;
  double worst = -1.0;
  for (int sys = 0; sys < 5; ++sys) {
    const auto s = fixture::random_gifs(rng, 2, 2, 1, 0.7);
    for (int t = 0; t < 20; ++t) {
      const auto b = fixture::random_set(rng, 1 + rng.next() % 20, 1);
      const auto b2 = fixture::random_set(rng, 1 + rng.next() % 20, 1);
      const double lhs = gifs::hausdorff(gifs::evaluation_map(s, b, sigma).set, gifs::evaluation_map(s, b2, sigma).set);
      const double rhs = s.lip_fs() * gifs::hausdorff(b, b2) + 2 * sigma;
      worst = std::max(worst, lhs - rhs);
      ++pairs;
      if (lhs > rhs) ++violations;
    }
  }
  return {pairs >= 100 && violations == 0,
          fmt("%zu pairs over 5 systems, %zu violations, max(lhs - rhs) = %.3g", pairs, violations, worst)};
}

// Induced fractal step equals the brute-force image set bit for bit.
Outcome operator_identity() {
  gifs::SplitMix64 rng(1002);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto s = fixture::random_gifs(rng, 1 + rng.next() % 3, 1 + rng.next() % 3, 1 + rng.next() % 2);
    const auto a = fixture::random_set(rng, 1 + rng.next() % 6, s.dim());
    const auto b = fixture::random_set(rng, 1 + rng.next() % 6, s.dim());
    const auto induced = gifs::fractal_step(gifs::induce_ifs(s, b), a, 0.0);
    std::vector<Point> got;
    for (std::size_t i = 0; i < induced.size(); ++i) got.push_back(induced.point(i));
    if (got != oracle::brute_gifs_images(s, a, b)) ++mismatches;
  }
  return {mismatches == 0, fmt("1000 instances, %zu mismatches", mismatches)};
}

// Stored bounds vs an independent long double recurrence; eps -> 0 drives
// the bound down monotonically after the alpha-dominated prefix.
Outcome ledger_arithmetic() {
  gifs::SplitMix64 rng(1003);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const double alpha = 0.99 * rng.uniform(), d01 = 10 * rng.uniform();
    gifs::OstrowskiLedger l(alpha, d01);
    long double b = static_cast<long double>(d01) / (1.0L - alpha);
    for (std::size_t k = 1; k <= 60; ++k) {
      l.push(rng.uniform() * std::pow(0.9, double(k)));
      b = alpha * b + static_cast<long double>(l.eps().back());
      const long double rel = std::fabs(static_cast<long double>(l.bound(k)) - b) / std::max(b, 1e-300L);
      worst = std::max(worst, static_cast<double>(rel));
    }
  }
  std::size_t non_monotone = 0;
  for (double alpha : {0.1, 0.5, 0.9}) {
    for (double r : {0.3, 0.7, 0.95}) {
      gifs::OstrowskiLedger l(alpha, 1.0);
      for (int k = 1; k <= 2000; ++k) l.push(std::pow(r, k));
      // The prefix ends at the first decrease; from there on the bound must
      // keep falling until it underflows.
      std::size_t k0 = 1;
      while (k0 < l.steps() && l.bound(k0) >= l.bound(k0 - 1)) ++k0;
      for (std::size_t k = k0 + 1; k <= l.steps(); ++k)
        if (l.bound(k) >= l.bound(k - 1) && l.bound(k - 1) > 0.0) ++non_monotone;
      if (l.final_bound() > 1e-10) ++non_monotone;
    }
  }
  return {worst <= 1e-15 && non_monotone == 0,
          fmt("max relative error %.3g over 30000 bounds and 9 decaying schedules, %zu monotonicity failures", worst, non_monotone)};
}

// MK distance against the CDF closed form, metric axioms, unit point masses.
Outcome mk_metric() {
  gifs::SplitMix64 rng(1004);
  double worst = 0.0, worst_lp = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto mu = fixture::random_measure(rng, 1 + rng.next() % 50, 1);
    const auto nu = fixture::random_measure(rng, 1 + rng.next() % 50, 1, -0.5, 2.0);
    const double expect = oracle::w1_cdf(mu, nu);
    worst = std::max(worst, std::abs(gifs::mk_distance(mu, nu) - expect));
    worst_lp = std::max(worst_lp, std::abs(gifs::mk_transport(mu, nu).cost - expect));
  }
  double axiom = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + t % 2;
    const auto a = fixture::random_measure(rng, 1 + rng.next() % 30, d);
    const auto b = fixture::random_measure(rng, 1 + rng.next() % 30, d);
    const auto c = fixture::random_measure(rng, 1 + rng.next() % 30, d);
    const double ab = gifs::mk_distance(a, b), ba = gifs::mk_distance(b, a);
    const double bc = gifs::mk_distance(b, c), ac = gifs::mk_distance(a, c);
    axiom = std::max({axiom, std::abs(ab - ba), ac - ab - bc, std::abs(gifs::mk_distance(a, a))});
  }
  const double unit = gifs::mk_distance(DiscreteMeasure::dirac({0.0}), DiscreteMeasure::dirac({1.0}));
  return {worst <= 1e-9 && worst_lp <= 1e-9 && axiom <= 1e-9 && unit == 1.0,
          fmt("max |mk - cdf| = %.3g (simplex %.3g), axiom slack %.3g, d(delta0, delta1) = %.17g", worst, worst_lp,
              axiom, unit)};
}

gifs::JointIterateOptions joint_options() {
  gifs::JointIterateOptions opts;
  // The fixed point is spread over [0, 1]; the raw product supports run
  // into the hundreds of millions at the finest steps.
  opts.joint.measure_inner.atom_budget = 1'000'000'000;
  opts.joint.set_inner.point_budget = 1'000'000'000;
  opts.track_steps = true;
  return opts;
}

// Fixed point of the Markov operator and its support, quarter pair, K = 10.
Outcome markov_fixed_point() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = fixture::quarter_pair_p();
  const gifs::Schedules sched{gifs::Schedule::geometric(0.5, 0.1), gifs::Schedule::geometric(0.5, 0.1)};
  const auto res =
      gifs::joint_iterate(p, PointSet::line({0.0}), DiscreteMeasure::dirac({0.0}), sched, 10, joint_options());
  const DiscreteMeasure& mu = res.measure;
  // M(mu, mu) has |mu|^2 atoms per map, so the residual goes through a
  // coarse copy mu_c:
  //   d(M mu, mu) <= (1 + lip_fs) d(mu, mu_c) + d(M mu_c, mu_c)
  // and M mu_c itself is binned, which costs its snap error and merged mass.
  const auto coarse = gifs::bin_to_grid(mu, 1e-4);
  const double delta = 1e-6;
  gifs::MergeStats stats;
  const auto image = gifs::markov_step_gifsp(p, std::vector<DiscreteMeasure>{coarse, coarse},
                                             {gifs::kDefaultWeightFloor, delta, 1'000'000'000}, &stats);
  const double residual = (1 + p.system().lip_fs()) * gifs::mk_distance(mu, coarse) +
                          gifs::mk_distance(image, coarse) + gifs::grid_snap_error(delta, 1) + stats.transport_bound;
  const double atoms_to_set = gifs::directed_distance(mu.atoms(), res.set);
  const double set_to_atoms = gifs::directed_distance(res.set, mu.atoms());
  const double t = seconds_since(t0);
  return {!res.budget_exceeded && res.ledger.steps() == 10 && residual <= 1e-3 && atoms_to_set <= 1e-2 &&
              set_to_atoms <= 5e-2 && t < 120.0,
          fmt("d(M(mu), mu) <= %.3g, atoms to set %.3g, set to atoms %.3g, %zu atoms, %zu points, ledger %.3g, "
              "%.1f s",
              residual, atoms_to_set, set_to_atoms, mu.size(), res.set.size(), res.ledger.final_bound(), t)};
}

// Ratios of consecutive d_max steps stay below max(0.5, 1/3) + 0.05.
Outcome joint_contraction() {
  const auto p = fixture::quarter_pair_p();
  const double limit = std::max(0.5, 0.25 / 0.75) + 0.05;
  // Inner tolerance below 1e-4 from the first step on.
  const double beta = 2e-3, sigma = 9e-5;
  const gifs::Schedules sched{gifs::Schedule::constant(beta), gifs::Schedule::constant(sigma)};
  const auto res =
      gifs::joint_iterate(p, PointSet::line({0.0}), DiscreteMeasure::dirac({0.0}), sched, 12, joint_options());
  // A step is only informative while the previous one is well above what
  // the inner solves and subsampling can perturb.
  const double floor = p.joint_contraction() * beta + 2 * sigma;
  std::size_t counted = 0;
  double worst = 0.0;
  std::string ratios;
  for (std::size_t k = 1; k < res.step_dmax.size(); ++k) {
    if (res.step_dmax[k - 1] <= 10 * floor) continue;
    const double r = res.step_dmax[k] / res.step_dmax[k - 1];
    worst = std::max(worst, r);
    ratios += fmt("%s%.3f", counted ? " " : "", r);
    ++counted;
  }
  return {!res.budget_exceeded && counted >= 3 && worst <= limit,
          fmt("%zu ratios [%s], max %.3f vs %.3f", counted, ratios.c_str(), worst, limit)};
}

// Chaos game on {x/2, x/2 + 1/2} vs the deterministic attractor.
Outcome chaos_consistency() {
  const gifs::GifsP p(fixture::halves_gifs(), {0.5, 0.5});
  const auto orbit = gifs::random_orbit(p, DiscreteMeasure::dirac({0.0}), {Point{0.0}, 2024, 100, 100000});
  const auto classical = gifs::attractor(fixture::halves(), 1e-3);
  const double h = gifs::hausdorff(orbit.to_set(), classical.set);
  const double mean = gifs::ergodic_average(orbit, "identity");
  return {h <= 0.02 && mean >= 0.49 && mean <= 0.51, fmt("h = %.4g, mean = %.5f", h, mean)};
}

// Every command replayed from its manifest gives the same CSV bytes.
Outcome determinism() {
  const auto dir = scratch("c10");
  const std::vector<std::vector<std::string>> runs{
      {"attractor-classical", spec_file("sierpinski.json"), "--tol", "1e-2"},
      {"attractor-evmap", spec_file("quarter_pair.json"), "--K", "6"},
      {"measure", spec_file("quarter_pair.json"), "--K", "5"},
      {"chaos", spec_file("shear_pair.json"), "--length", "5000", "--seed", "3"},
  };
  std::size_t ok = 0;
  std::string failed;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto args = runs[i];
    const auto out = dir / std::to_string(i);
    args.insert(args.end(), {"--out-dir", out.string()});
    const int code = cli(args);
    std::string log;
    const int replay = cli({"replay", (out / "manifest.json").string(), "--out-dir", (out / "again").string()}, &log);
    if ((code == 0 || code == 2) && replay == 0 && log.find("identical") != std::string::npos)
      ++ok;
    else
      failed += " " + runs[i][0];
  }
  fs::remove_all(dir);
  return {ok == runs.size(), fmt("%zu of %zu commands replayed identically%s", ok, runs.size(), failed.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"order-one system matches the classical attractor", sierpinski_degeneracy},
      {"quarter pair ledger bound within 0.02", quarter_pair_ledger},
      {"evaluation map contraction", evaluation_contraction},
      {"induced operator identity", operator_identity},
      {"ledger arithmetic", ledger_arithmetic},
      {"MK metric", mk_metric},
      {"Markov fixed point and support", markov_fixed_point},
      {"joint contraction factor", joint_contraction},
      {"chaos game consistency", chaos_consistency},
      {"determinism under replay", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
