#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qglab/generators.hpp"
#include "qglab/geometry.hpp"
#include "qglab/heat.hpp"

using namespace qglab;

TEST(Heat, DeltaHasUnitMass) {
  const MetricGraph g = gen_star(3, 1.0);
  const Point y = Point::on_edge(edge_at(1), 0.37);
  const HeatProblem problem(g, 0.1, std::span<const Point>(&y, 1));
  const DiscreteFunction d = problem.delta(y);
  EXPECT_NEAR(d.values.dot(problem.mass().matrix * Eigen::VectorXd::Ones(d.values.size())), 1.0, 1e-14);
  // unpinned off-node point
  EXPECT_THROW(problem.delta(Point::on_edge(edge_at(2), 0.123)), GraphError);
}

TEST(Heat, MassConservedAndPositive) {
  const MetricGraph g = gen_tree(2, 3, 1.0);
  const Point y = Point::at_vertex(vertex_at(1));
  const HeatProblem problem(g, 0.1, std::span<const Point>(&y, 1));
  const double times[] = {0.05, 0.2, 1.0};
  for (double theta : {0.5, 1.0}) {
    HeatOptions opts;
    opts.theta = theta;
    opts.dt_max = 5e-3;
    const HeatRun run = problem.run(problem.delta(y), times, opts);
    ASSERT_EQ(run.snapshots.size(), 3u);
    EXPECT_LT(run.max_mass_drift, 1e-12);
    EXPECT_DOUBLE_EQ(run.snapshots.back().time, 1.0);
  }
  HeatOptions euler;
  euler.theta = 1.0;
  euler.dt_max = 5e-3;
  const HeatRun run = problem.run(problem.delta(y), times, euler);
  for (const Snapshot& s : run.snapshots) EXPECT_GE(s.values.minCoeff(), 0.0);
}

TEST(Heat, ConstantIsStationary) {
  const MetricGraph g = gen_lattice(2, 2);
  const HeatProblem problem(g, 0.1);
  const double times[] = {0.5};
  const HeatRun run = problem.run(constant_function(problem.mesh(), 2.0), times, HeatOptions{});
  EXPECT_LT((run.snapshots[0].values.array() - 2.0).abs().maxCoeff(), 1e-12);
}

TEST(Heat, CgAgreesWithCholesky) {
  const MetricGraph g = gen_star(4, 1.0);
  const Point y = Point::at_vertex(vertex_at(0));
  const HeatProblem problem(g, 0.05, std::span<const Point>(&y, 1));
  const double times[] = {0.1};
  HeatOptions direct;
  HeatOptions cg;
  cg.solver = LinearSolver::kConjugateGradient;
  cg.cg_tolerance = 1e-13;
  const HeatRun a = problem.run(problem.delta(y), times, direct);
  const HeatRun b = problem.run(problem.delta(y), times, cg);
  EXPECT_LT((a.snapshots[0].values - b.snapshots[0].values).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Heat, LineKernelNearCenter) {
  const MetricGraph g = gen_lattice(1, 16);
  const Point y = Point::at_vertex(vertex_at(8));
  HeatOptions opts;
  opts.dt_max = 5e-4;
  const double t = 0.2;
  const KernelColumn col = heat_kernel_column(g, 0.02, opts, y, t);
  for (double d : {0.0, 0.3, 0.7}) {
    const double p = col.values(Point::on_edge(edge_at(8), d));
    EXPECT_NEAR(p / oracle::line_kernel(t, d), 1.0, 5e-3) << "d = " << d;
  }
  EXPECT_NEAR(col.mass, 1.0, 1e-12);
}

TEST(Heat, StarCenterKernel) {
  const MetricGraph g = gen_star(3, 6.0);
  const Point y = Point::at_vertex(vertex_at(0));
  HeatOptions opts;
  opts.dt_max = 5e-4;
  const KernelColumn col = heat_kernel_column(g, 0.02, opts, y, 0.2);
  EXPECT_NEAR(col.values(Point::on_edge(edge_at(2), 0.4)) / oracle::star_center_kernel(3, 0.2, 0.4), 1.0, 1e-2);
}

TEST(Heat, SymmetryAndSemigroup) {
  const MetricGraph g = gen_star(3, 2.0);
  const std::pair<Point, Point> pairs[] = {{Point::on_edge(edge_at(0), 0.5), Point::on_edge(edge_at(2), 1.2)}};
  HeatOptions opts;
  opts.dt_max = 2e-3;
  const SymmetryReport sym = symmetry_check(g, 0.05, opts, pairs, 0.1);
  EXPECT_LE(sym.max_asymmetry, 1e-8 * sym.sup_value);
  const SemigroupReport semi = semigroup_check(g, 0.05, opts, Point::at_vertex(vertex_at(0)), 0.1, 0.15);
  EXPECT_LE(semi.sup_discrepancy, 3.0 * semi.scheme_error);
}

TEST(Heat, MarginPolicy) {
  const MarginPolicy m = margin_policy(1.0, 1e-10, 2.0);
  EXPECT_DOUBLE_EQ(m.six_sigma, 6.0);
  EXPECT_GE(m.radius, 2.0 + 6.0);
  // the Gaussian tail at the margin is below the tolerance
  const double d = m.radius - 2.0;
  EXPECT_LE(std::exp(-d * d / 4.0) / std::sqrt(std::numbers::pi), 1e-10 * (1 + 1e-9));
}

TEST(Heat, RejectsBadOptions) {
  const MetricGraph g = gen_star(3, 1.0);
  const HeatProblem problem(g, 0.1);
  const double times[] = {0.1};
  HeatOptions opts;
  opts.theta = 1.5;
  EXPECT_THROW(problem.run(constant_function(problem.mesh(), 1.0), times, opts), GraphError);
  opts.theta = 0.5;
  opts.dt_max = 0.0;
  EXPECT_THROW(problem.run(constant_function(problem.mesh(), 1.0), times, opts), GraphError);
  const double backwards[] = {0.2, 0.1};
  EXPECT_THROW(problem.run(constant_function(problem.mesh(), 1.0), backwards, HeatOptions{}), GraphError);
}
