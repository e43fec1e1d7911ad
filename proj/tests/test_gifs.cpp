#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "gifs.hpp"
#include "oracles.hpp"

using gifs::GifsSystem;
using gifs::Matrix;
using gifs::MultiAffineMap;
using gifs::Point;
using gifs::PointSet;

namespace {

std::vector<Point> points_of(const PointSet& s) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(s.point(i));
  return out;
}

// Contractive systems whose second argument is ignored.
GifsSystem first_argument_only() {
  std::vector<MultiAffineMap> maps;
  maps.emplace_back(std::vector<Matrix>{Matrix{{0.3}}, Matrix{{0.0}}}, Point{0.0});
  maps.emplace_back(std::vector<Matrix>{Matrix{{0.3}}, Matrix{{0.0}}}, Point{0.7});
  return GifsSystem(std::move(maps));
}

}  // namespace

TEST(MultiAffineMap, EvaluatesAllArguments) {
  const MultiAffineMap phi({Matrix{{0.25}}, Matrix{{0.25}}}, {0.5});
  const std::vector<double> x{1.0}, y{0.5};
  const std::vector<std::span<const double>> args{x, y};
  EXPECT_EQ(phi(args), (Point{0.875}));
  EXPECT_EQ(phi.arg_lips(), (std::vector<double>{0.25, 0.25}));
}

TEST(MultiAffineMap, InducedMapAgreesBitForBit) {
  gifs::SplitMix64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const auto s = fixture::random_gifs(rng, 1, 3, 2);
    const auto& phi = s.maps()[0];
    std::vector<Point> args(3, Point(2));
    for (auto& a : args)
      for (auto& v : a) v = 4 * rng.uniform() - 2;
    const std::vector<std::span<const double>> all{args[0], args[1], args[2]};
    const auto psi = phi.induced(std::span(all).subspan(1));
    EXPECT_EQ(psi(args[0]), phi(all));
  }
}

TEST(GifsSystem, RejectsNonContractiveAndMismatchedOrders) {
  std::vector<MultiAffineMap> bad;
  bad.emplace_back(std::vector<Matrix>{Matrix{{0.5}}, Matrix{{0.5}}}, Point{0.0});
  EXPECT_THROW(GifsSystem(std::move(bad)), std::invalid_argument);
  std::vector<MultiAffineMap> mixed;
  mixed.emplace_back(std::vector<Matrix>{Matrix{{0.2}}, Matrix{{0.2}}}, Point{0.0});
  mixed.emplace_back(std::vector<Matrix>{Matrix{{0.2}}}, Point{0.0});
  EXPECT_THROW(GifsSystem(std::move(mixed)), std::invalid_argument);
}

TEST(GifsStep, QuarterPairExamples) {
  const auto s = fixture::quarter_pair();
  EXPECT_EQ(gifs::gifs_step(s, PointSet::line({0.0}), 0.0), PointSet::line({0.0, 0.5}));
  EXPECT_EQ(gifs::gifs_step(s, PointSet::line({0.0, 1.0}), 0.0), PointSet::line({0.0, 0.25, 0.5, 0.75, 1.0}));
}

TEST(GifsStep, MatchesBruteForceEnumeration) {
  gifs::SplitMix64 rng(32);
  for (int t = 0; t < 100; ++t) {
    const auto s = fixture::random_gifs(rng, 1 + rng.next() % 3, 1 + rng.next() % 3, 1 + rng.next() % 2);
    const auto a = fixture::random_set(rng, 1 + rng.next() % 5, s.dim());
    EXPECT_EQ(points_of(gifs::gifs_step(s, a, 0.0)), oracle::brute_gifs_images(s, a, a));
  }
}

TEST(GifsStep, IsContractiveInHausdorff) {
  gifs::SplitMix64 rng(33);
  for (int t = 0; t < 50; ++t) {
    const auto s = fixture::random_gifs(rng, 2, 2, 2);
    const auto a = fixture::random_set(rng, 6, 2), b = fixture::random_set(rng, 8, 2);
    EXPECT_LE(gifs::hausdorff(gifs::gifs_step(s, a, 0.0), gifs::gifs_step(s, b, 0.0)),
              s.lip_fs() * gifs::hausdorff(a, b) * (1 + 1e-12));
  }
}

TEST(GifsStep, BudgetIsEnforced) {
  EXPECT_THROW(gifs::gifs_step(fixture::quarter_pair(), PointSet::line({0.0, 1.0}), 0.0, 7), gifs::BudgetExceeded);
}

TEST(ClassicalIterate, FirstTermIsOneStep) {
  const auto s = fixture::quarter_pair();
  const std::vector<PointSet> seeds{PointSet::line({0.0}), PointSet::line({0.0})};
  EXPECT_EQ(gifs::classical_gifs_iterate(s, seeds, 1, 0.0), gifs::gifs_step(s, PointSet::line({0.0}), 0.0));
}

TEST(ClassicalIterate, QuarterPairFillsTheUnitInterval) {
  const auto s = fixture::quarter_pair();
  const std::vector<PointSet> seeds{PointSet::line({0.0}), PointSet::line({0.0})};
  const double delta = 1e-3;
  const auto a = gifs::classical_gifs_iterate(s, seeds, 60, delta);
  // Snapping contributes at most delta/2 per step, damped by 1 - lip_fs.
  EXPECT_LE(oracle::hausdorff_to_interval(a, 0.0, 1.0), 2 * delta + 1e-9);
}

TEST(ClassicalIterate, OrderOneMatchesTheIfsAttractor) {
  const auto tol = 1e-2;
  const auto classical = gifs::attractor(fixture::sierpinski(), tol);
  const auto iterated =
      gifs::classical_gifs_iterate(fixture::sierpinski_gifs(), {PointSet(2, {0.0, 0.0})}, 20, 1e-3);
  // 2^-20 Picard error plus snapping at 1e-3*sqrt(2)/2 per step over 1 - 1/2.
  EXPECT_LE(gifs::hausdorff(classical.set, iterated), tol + 1.5e-3);
}

TEST(APosterioriBound, DominatesTheTrueDistance) {
  const auto s = fixture::quarter_pair();
  for (double step : {0.2, 0.05, 0.01}) {
    const auto c = PointSet::uniform_grid_1d(0.0, 1.0, step);
    EXPECT_GE(gifs::a_posteriori_bound(s, c, 0.0), oracle::hausdorff_to_interval(c, 0.0, 1.0));
  }
  const auto off = PointSet::line({0.0, 2.0});
  EXPECT_GE(gifs::a_posteriori_bound(s, off, 0.0), oracle::hausdorff_to_interval(off, 0.0, 1.0));
}

TEST(InduceIfs, CardinalityIsNTimesBToTheMMinusOne) {
  gifs::SplitMix64 rng(34);
  const auto s = fixture::random_gifs(rng, 2, 2, 1);
  EXPECT_EQ(gifs::induce_ifs(s, PointSet::line({0.0, 0.5, 1.0})).size(), 6u);
  const auto s3 = fixture::random_gifs(rng, 3, 3, 1);
  EXPECT_EQ(gifs::induce_ifs(s3, PointSet::line({0.0, 0.5})).size(), 12u);
}

TEST(InduceIfs, QuarterPairSubstitution) {
  const auto s = fixture::quarter_pair();
  const auto at0 = gifs::induce_ifs(s, PointSet::line({0.0}));
  ASSERT_EQ(at0.size(), 2u);
  EXPECT_EQ(at0.maps()[0].matrix()(0, 0), 0.25);
  EXPECT_EQ(at0.maps()[0].offset(), (Point{0.0}));
  EXPECT_EQ(at0.maps()[1].offset(), (Point{0.5}));
  const auto at1 = gifs::induce_ifs(s, PointSet::line({1.0}));
  EXPECT_EQ(at1.maps()[0].offset(), (Point{0.25}));
  EXPECT_EQ(at1.maps()[1].offset(), (Point{0.75}));
}

TEST(InduceIfs, OrderIsMapThenTupleWithLastIndexFastest) {
  std::vector<MultiAffineMap> maps;
  for (double c : {0.0, 100.0})
    maps.emplace_back(std::vector<Matrix>{Matrix{{0.1}}, Matrix{{0.1}}, Matrix{{0.01}}}, Point{c});
  const GifsSystem s(std::move(maps));
  const auto ifs = gifs::induce_ifs(s, PointSet::line({0.0, 10.0}));
  ASSERT_EQ(ifs.size(), 8u);
  const std::vector<double> expect{0.0, 0.1, 1.0, 1.1, 100.0, 100.1, 101.0, 101.1};
  for (std::size_t t = 0; t < 8; ++t) EXPECT_NEAR(ifs.maps()[t].offset()[0], expect[t], 1e-12) << t;
}

TEST(InduceIfs, MapBudgetIsEnforced) {
  EXPECT_THROW(gifs::induce_ifs(fixture::quarter_pair(), PointSet::line({0.0, 1.0}), 3), gifs::BudgetExceeded);
}

TEST(OperatorIdentity, InducedStepEqualsFullImage) {
  gifs::SplitMix64 rng(35);
  for (int t = 0; t < 200; ++t) {
    const auto s = fixture::random_gifs(rng, 1 + rng.next() % 3, 1 + rng.next() % 3, 1 + rng.next() % 2);
    const auto a = fixture::random_set(rng, 1 + rng.next() % 6, s.dim());
    const auto b = fixture::random_set(rng, 1 + rng.next() % 6, s.dim());
    const auto induced = gifs::fractal_step(gifs::induce_ifs(s, b), a, 0.0);
    EXPECT_EQ(points_of(induced), oracle::brute_gifs_images(s, a, b)) << "instance " << t;
  }
}

TEST(OperatorIdentity, AgreesWithMixedArgumentOperator) {
  gifs::SplitMix64 rng(36);
  for (int t = 0; t < 50; ++t) {
    const auto s = fixture::random_gifs(rng, 2, 3, 2);
    const auto a = fixture::random_set(rng, 4, 2), b = fixture::random_set(rng, 3, 2);
    const std::vector<const PointSet*> args{&a, &b, &b};
    EXPECT_EQ(gifs::gifs_operator(s, args, 0.0), gifs::fractal_step(gifs::induce_ifs(s, b), a, 0.0));
  }
}

TEST(LipschitzData, Examples) {
  const auto q = gifs::lipschitz_data(fixture::quarter_pair());
  EXPECT_EQ(q.per_map[0], (std::vector<double>{0.25, 0.25}));
  EXPECT_EQ(q.lip_fs, 0.5);

  std::vector<MultiAffineMap> half;
  half.emplace_back(std::vector<Matrix>{Matrix{{0.5}}, Matrix{{0.0}}}, Point{0.0});
  const auto h = gifs::lipschitz_data(GifsSystem(std::move(half)));
  EXPECT_EQ(h.per_map[0], (std::vector<double>{0.5, 0.0}));
  EXPECT_EQ(h.lip_fs, 0.5);

  std::vector<MultiAffineMap> planar;
  planar.emplace_back(std::vector<Matrix>{Matrix{{0.3, 0.0}, {0.0, 0.1}}, Matrix{{0.0, 0.2}, {0.0, 0.0}}},
                      Point{0.0, 0.0});
  const auto p = gifs::lipschitz_data(GifsSystem(std::move(planar)));
  EXPECT_NEAR(p.per_map[0][0], oracle::spectral_norm_2x2(0.3, 0.0, 0.0, 0.1), 1e-12);
  EXPECT_NEAR(p.per_map[0][1], oracle::spectral_norm_2x2(0.0, 0.2, 0.0, 0.0), 1e-12);
  EXPECT_NEAR(p.lip_fs, 0.5, 1e-12);
  EXPECT_LE(p.alpha_ev_bound, p.lip_fs);
}

TEST(EvaluationMap, SingletonGivesCantorSet) {
  const double sigma = 1e-4;
  const auto r = gifs::evaluation_map(fixture::quarter_pair(), PointSet::line({0.0}), sigma);
  ASSERT_TRUE(r.report.converged);
  // Fixed points of x/4 and x/4 + 1/2 are 0 and 2/3.
  EXPECT_LE(gifs::directed_distance(PointSet::line({0.0, 2.0 / 3.0}), r.set), sigma);
  const auto box = r.set.bbox();
  EXPECT_GE(box.lo[0], -sigma);
  EXPECT_LE(box.hi[0], 2.0 / 3.0 + sigma);
  // First-level gap (1/6, 1/2) stays empty.
  for (std::size_t i = 0; i < r.set.size(); ++i) {
    const double x = r.set[i][0];
    EXPECT_FALSE(x > 1.0 / 6.0 + sigma && x < 0.5 - sigma) << x;
  }
  // Stable against a much tighter solve.
  const auto tight = gifs::attractor(gifs::induce_ifs(fixture::quarter_pair(), PointSet::line({0.0})), 1e-6);
  EXPECT_LE(gifs::hausdorff(r.set, tight.set), sigma + 1e-6);
}

TEST(EvaluationMap, FineGridReproducesTheInterval) {
  const double sigma = 1e-3, step = 0.01;
  const auto r = gifs::evaluation_map(fixture::quarter_pair(), PointSet::uniform_grid_1d(0.0, 1.0, step), sigma);
  EXPECT_LE(oracle::hausdorff_to_interval(r.set, 0.0, 1.0), sigma + step);
}

TEST(EvaluationMap, IgnoresBWhenTrailingMatricesVanish) {
  const auto s = first_argument_only();
  const auto a = gifs::evaluation_map(s, PointSet::line({0.0}), 1e-3);
  const auto b = gifs::evaluation_map(s, PointSet::line({-3.0, 0.2, 5.0}), 1e-3);
  EXPECT_EQ(a.set, b.set);
}

TEST(EvaluationMap, ContractsByLipFs) {
  gifs::SplitMix64 rng(37);
  const double sigma = 1e-4;
  for (int sys = 0; sys < 3; ++sys) {
    const auto s = fixture::random_gifs(rng, 2, 2, 1, 0.7);
    for (int t = 0; t < 10; ++t) {
      const auto b = fixture::random_set(rng, 1 + rng.next() % 10, 1);
      const auto b2 = fixture::random_set(rng, 1 + rng.next() % 10, 1);
      const auto e = gifs::evaluation_map(s, b, sigma), e2 = gifs::evaluation_map(s, b2, sigma);
      EXPECT_LE(gifs::hausdorff(e.set, e2.set), s.lip_fs() * gifs::hausdorff(b, b2) + 2 * sigma);
    }
  }
}

TEST(ApproximateAttractor, QuarterPairStaysWithinItsLedger) {
  const auto s = fixture::quarter_pair();
  const auto r = gifs::approximate_attractor(s, PointSet::line({0.0}), {}, 12);
  ASSERT_FALSE(r.budget_exceeded) << r.note;
  ASSERT_EQ(r.ledger.steps(), 12u);
  EXPECT_EQ(r.ledger.alpha(), 0.5);
  // The grid oracle is within 5e-4 of [0, 1].
  const auto grid = PointSet::uniform_grid_1d(0.0, 1.0, 1e-3);
  EXPECT_LE(gifs::hausdorff(r.set, grid), r.ledger.bound(12) + 5e-4);
  for (std::size_t k = 1; k <= 12; ++k) {
    EXPECT_EQ(r.ledger.eps()[k - 1], 0.5 * (1.0 / k) + 1.0 / k);
    EXPECT_EQ(r.ledger.bound(k), gifs::OstrowskiLedger::estimate(0.5, r.ledger.d01(), r.ledger.eps(), k));
  }
}

TEST(ApproximateAttractor, OrderOneIgnoresTheSubsample) {
  gifs::Schedules sched{gifs::Schedule::constant(0.5), gifs::Schedule::constant(1e-3)};
  const auto r = gifs::approximate_attractor(fixture::sierpinski_gifs(), PointSet(2, {0.0, 0.0}), sched, 1);
  const auto classical = gifs::attractor(fixture::sierpinski(), 1e-3);
  EXPECT_LE(gifs::hausdorff(r.set, classical.set), 2e-3);
}

TEST(ApproximateAttractor, RaisesBetaWhenMapsExceedBudget) {
  gifs::ApproximationOptions opts;
  opts.map_budget = 20;
  gifs::Schedules sched{gifs::Schedule::constant(1e-3), gifs::Schedule::constant(1e-2)};
  const auto r = gifs::approximate_attractor(fixture::quarter_pair(), PointSet::uniform_grid_1d(0.0, 1.0, 0.01),
                                             sched, 2, opts);
  ASSERT_FALSE(r.budget_exceeded) << r.note;
  for (std::size_t k = 0; k < r.map_counts.size(); ++k) {
    EXPECT_LE(r.map_counts[k], 20u);
    EXPECT_GT(r.ledger.beta()[k], 1e-3);
    EXPECT_NE(r.ledger.notes()[k].find("beta raised"), std::string::npos);
  }
}

TEST(ApproximateAttractor, StopsEarlyBelowTarget) {
  gifs::ApproximationOptions opts;
  opts.stop_below = 0.5;
  const auto r = gifs::approximate_attractor(fixture::quarter_pair(), PointSet::line({0.0}), {}, 50, opts);
  EXPECT_LT(r.ledger.steps(), 50u);
  EXPECT_LE(r.ledger.final_bound(), 0.5);
}
