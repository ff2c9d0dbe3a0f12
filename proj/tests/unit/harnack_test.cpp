#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qglab/generators.hpp"
#include "qglab/geometry.hpp"
#include "qglab/harnack.hpp"

using namespace qglab;

TEST(Cylinder, Validation) {
  CylinderParams c;
  EXPECT_NO_THROW(c.validate());
  c.eta = 0.2;  // below epsilon
  EXPECT_THROW(c.validate(), GraphError);
  c = CylinderParams{};
  c.zeta = 1.0;
  EXPECT_THROW(c.validate(), GraphError);
  c = CylinderParams{};
  c.radius = 0.0;
  EXPECT_THROW(c.validate(), GraphError);
}

TEST(ParabolicHarnack, ConstantSeedRatioIsOne) {
  const MetricGraph g = gen_star(3, 2.0);
  CylinderParams cyl;
  cyl.radius = 0.5;
  cyl.center = Point::at_vertex(vertex_at(0));
  const HarnackSeed seeds[] = {{HarnackSeed::Kind::kConstant, cyl.center, 0.0, 3.0}};
  HarnackOptions opts;
  opts.h = 0.05;
  opts.heat.dt_max = 2e-3;
  const HarnackReport rep = parabolic_harnack_ratio(g, cyl, seeds, opts);
  ASSERT_EQ(rep.seeds.size(), 1u);
  EXPECT_NEAR(rep.seeds[0].ratio, 1.0, 1e-10);
  EXPECT_NEAR(rep.seeds[0].sup_minus, 3.0, 1e-10);
}

TEST(ParabolicHarnack, LineKernelMatchesGaussian) {
  const MetricGraph path = gen_lattice(1, 20);
  CylinderParams cyl;
  cyl.center = Point::at_vertex(vertex_at(10));
  const HarnackSeed seeds[] = {{HarnackSeed::Kind::kKernel, Point::at_vertex(vertex_at(11)), 0.0, 1.0},
                               {HarnackSeed::Kind::kBump, cyl.center, 0.5, 1.0}};
  HarnackOptions opts;
  opts.h = 0.05;
  opts.heat.dt_max = 2.5e-3;
  const HarnackReport rep = parabolic_harnack_ratio(path, cyl, seeds, opts);
  const double expected = oracle::line_cylinder_ratio(1.0, 1.0, 0.1, 0.25, 0.5, 0.75, 0.5, 400);
  EXPECT_NEAR(rep.seeds[0].ratio / expected, 1.0, 0.05);
  EXPECT_FALSE(rep.seeds[1].rejected);
  EXPECT_GE(rep.seeds[1].ratio, 1.0);
  EXPECT_DOUBLE_EQ(rep.max_ratio, std::max(rep.seeds[0].ratio, rep.seeds[1].ratio));
}

TEST(EllipticHarnack, StarClosedForm) {
  // harmonic on a star with boundary data (0, 0, 3) at distance 1 is linear on each ray
  const MetricGraph star = gen_star(3, 2.0);
  const std::vector<std::vector<double>> samples = {{0.0, 0.0, 3.0}};
  const EllipticReport rep = elliptic_harnack_ratio(star, Point::at_vertex(vertex_at(0)), 0.5, samples, 0.05);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_NEAR(rep.rows[0].sup, 2.0, 1e-10);
  EXPECT_NEAR(rep.rows[0].inf, 0.5, 1e-10);
  EXPECT_NEAR(rep.max_ratio, 4.0, 1e-10);
  EXPECT_TRUE(rep.rows[0].maximum_principle);
}

TEST(EllipticHarnack, WrongBoundaryCountThrows) {
  const MetricGraph star = gen_star(3, 2.0);
  const std::vector<std::vector<double>> samples = {{1.0, 2.0}};
  EXPECT_THROW(elliptic_harnack_ratio(star, Point::at_vertex(vertex_at(0)), 0.5, samples, 0.05), GraphError);
}

TEST(Harmonic, BoundaryPointsOnSphere) {
  const MetricGraph g = gen_lattice(2, 4);
  const Point x = Point::on_edge(edge_at(11), 0.3);
  const auto points = harmonic_boundary_points(g, x, 0.9, 0.05);
  EXPECT_FALSE(points.empty());
  for (const Point& p : points) EXPECT_NEAR(distance(g, x, p), 0.9, 1e-12);

  std::vector<double> values(points.size(), 0.0);
  values.front() = 1.0;
  const HarmonicSolution sol = harmonic_solve(g, x, 0.9, values, 0.05);
  EXPECT_TRUE(sol.maximum_principle);
  EXPECT_LT(sol.relative_residual, 1e-10);
}

TEST(Ultracontractivity, LineDiagonal) {
  const MetricGraph path = gen_lattice(1, 16);
  const Point pts[] = {Point::at_vertex(vertex_at(8))};
  const double times[] = {0.1, 0.4};
  HeatOptions opts;
  opts.dt_max = 1e-3;
  const UltraScan scan = ultracontractivity_scan(path, 0.02, opts, pts, times);
  ASSERT_EQ(scan.rows.size(), 2u);
  for (const UltraRow& row : scan.rows) EXPECT_NEAR(row.scaled * std::sqrt(4.0 * std::numbers::pi), 1.0, 1e-2);
  std::ostringstream csv;
  scan.write_csv(csv, path);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(GaussianFit, LineFeasible) {
  const MetricGraph path = gen_lattice(1, 12);
  const Point x = Point::at_vertex(vertex_at(6));
  const std::pair<Point, Point> pairs[] = {{x, x}, {x, Point::on_edge(edge_at(6), 0.5)}, {x, Point::at_vertex(vertex_at(7))}};
  const double times[] = {0.1, 0.2, 0.4};
  GaussianFitOptions opts;
  opts.h = 0.01;
  opts.heat.dt_max = 2e-4;
  const GaussianFit fit = gaussian_bound_fit(path, pairs, times, opts);
  EXPECT_EQ(fit.rows.size(), 9u);
  EXPECT_EQ(fit.fits.size(), 3u);
  const PrefactorFit& ball = fit.fit(Prefactor::kBallVolume);
  EXPECT_TRUE(ball.lower_feasible);
  EXPECT_TRUE(ball.upper_feasible);
  EXPECT_LE(ball.c2_min, 4.0);
  EXPECT_GE(ball.c1_max, 4.0);
  // on the line m(B_√t) = 2√t, so the ball and t^{-1/2} prefactors agree up to scale
  EXPECT_NEAR(ball.spread, fit.fit(Prefactor::kHalfPower).spread, 1e-12);
}

TEST(GaussianFit, NeedsDiagonalPair) {
  const MetricGraph path = gen_lattice(1, 6);
  const std::pair<Point, Point> pairs[] = {{Point::at_vertex(vertex_at(3)), Point::at_vertex(vertex_at(4))}};
  const double times[] = {0.1};
  EXPECT_THROW(gaussian_bound_fit(path, pairs, times, GaussianFitOptions{}), GraphError);
}

TEST(Hoelder, SmoothSolutionHasPositiveExponent) {
  const MetricGraph g = gen_star(3, 3.0);
  const Point x = Point::at_vertex(vertex_at(0));
  const HeatProblem problem(g, 0.05, std::span<const Point>(&x, 1));
  HeatOptions opts;
  opts.dt_max = 2e-3;
  const HoelderEstimate est = hoelder_exponent(problem, problem.delta(x), x, 0.5, 1.0, opts);
  EXPECT_FALSE(est.degenerate);
  EXPECT_GT(est.alpha, 0.0);
  EXPECT_GT(est.pairs, 0u);
}
