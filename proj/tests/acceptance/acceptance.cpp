// Acceptance harness: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qglab/fem.hpp"
#include "qglab/generators.hpp"
#include "qglab/geometry.hpp"
#include "qglab/harnack.hpp"
#include "qglab/heat.hpp"
#include "qglab/inequalities.hpp"
#include "qglab/mesh.hpp"
#include "qglab/report.hpp"
#include "support.hpp"

using namespace qglab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) { return format_number(v); }

const double kPi = std::numbers::pi;
const double kLineDiagonal = 1.0 / std::sqrt(4.0 * kPi);

unsigned threads() { return resolve_thread_count(); }

// ---------------------------------------------------------------------------
// 1. geometry

Outcome geometry_oracle() {
  const std::vector<std::pair<std::string, MetricGraph>> graphs = {
      {"star", gen_star(3, 1.0)}, {"lattice", gen_lattice(2, 6)}, {"tree", gen_tree(2, 6, 1.0)}};
  std::mt19937_64 rng(101);
  double dist_err = 0.0;
  double vol_err = 0.0;
  for (const auto& [name, g] : graphs) {
    for (int k = 0; k < 100; ++k) {
      const Point x = support::random_point(g, rng);
      const Point y = support::random_point(g, rng);
      dist_err = std::max(dist_err, std::abs(distance(g, x, y) - oracle::refined_distance(g, x, y)));
    }
    const auto fw = oracle::floyd_warshall(g);
    std::uniform_int_distribution<int> radius(1, 3000);
    for (int k = 0; k < 100; ++k) {
      const Point x = support::random_point(g, rng);
      const double r = radius(rng) * 1e-3;
      vol_err = std::max(vol_err, std::abs(ball_geometry(g, x, r).volume - oracle::offset_sum_volume(g, fw, x, r)));
    }
  }
  return {dist_err <= 1e-9 && vol_err <= 1e-9,
          "max distance error " + num(dist_err) + ", max volume error " + num(vol_err) + " (300 pairs, 300 balls)"};
}

// ---------------------------------------------------------------------------
// 2. doubling

Outcome doubling_bound() {
  const std::vector<MetricGraph> graphs = {gen_star(3, 2.0), gen_lattice(2, 6), gen_tree(2, 5, 1.0)};
  std::mt19937_64 rng(202);
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t oracle_mismatch = 0;
  double worst = 0.0;
  for (const MetricGraph& g : graphs) {
    const auto fw = oracle::floyd_warshall(g);
    std::uniform_int_distribution<int> radius(50, 1500);
    int found = 0;
    for (int attempt = 0; attempt < 400 && found < 20; ++attempt) {
      const Point x = support::random_point(g, rng);
      const double r = radius(rng) * 1e-3;
      // single-branch-vertex hypothesis, decided from the oracle tables
      // plus no dangling end inside B_r (the lemma's proof needs m(B_r) >= 2r)
      std::size_t branch = 0;
      std::size_t leaves = 0;
      std::size_t dv = 2;
      for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        const VertexId id = vertex_at(v);
        const EdgeId e = g.incident(id).front();
        const double d = oracle::point_distance(g, fw, x, e, oracle::position_on(g, Point::at_vertex(id), e));
        if (g.degree(id) == 1 && d < r) ++leaves;
        if (g.degree(id) > 2 && d <= 2.0 * r) {
          ++branch;
          dv = g.degree(id);
        }
      }
      if (branch > 1 || leaves > 0) continue;
      const Point centers[] = {x};
      const double radii[] = {r};
      const DoublingScan scan = doubling_scan(g, centers, radii);
      const DoublingRow& row = scan.rows.front();
      const double bound = dv / 2.0 + 1.0;
      const double v1 = oracle::offset_sum_volume(g, fw, x, r);
      const double v2 = oracle::offset_sum_volume(g, fw, x, 2.0 * r);
      if (row.bound_kind != DoublingBound::kLocalLemma || std::abs(row.bound - bound) > 1e-12) ++oracle_mismatch;
      if (std::abs(row.volume_r - v1) > 1e-9 || std::abs(row.volume_2r - v2) > 1e-9) ++oracle_mismatch;
      if (!(v2 / v1 <= bound + 1e-12) || !row.pass) ++violations;
      worst = std::max(worst, v2 / v1 / bound);
      ++checked;
      ++found;
    }
  }

  // binary tree from the root: ratios grow without bound
  const MetricGraph tree = gen_tree(2, 10, 1.0);
  const Point root[] = {Point::at_vertex(vertex_at(0))};
  const double radii[] = {1.0, 2.0, 3.0, 4.0, 5.0};
  const DoublingScan scan = doubling_scan(tree, root, radii);
  bool increasing = true;
  for (std::size_t k = 1; k < scan.rows.size(); ++k) increasing &= scan.rows[k].ratio > scan.rows[k - 1].ratio;
  const double tree_max = scan.max_ratio;
  const bool tree_exceeds = tree_max > 10.0 * (3.0 / 2.0 + 1.0);

  std::ostringstream d;
  d << checked << " hypothesis balls, " << violations << " violations, " << oracle_mismatch
    << " oracle mismatches, max ratio/bound " << num(worst) << "; tree ratios r=1..5:";
  for (const DoublingRow& row : scan.rows) d << ' ' << num(row.ratio);
  d << " (expected failure of any fixed bound: " << (tree_exceeds ? "shown" : "not shown") << ")";
  return {checked >= 50 && violations == 0 && oracle_mismatch == 0 && increasing && tree_exceeds, d.str()};
}

// ---------------------------------------------------------------------------
// 3. Poincaré

Outcome poincare_constants() {
  const MetricGraph path = gen_lattice(1, 4);
  const double r_int = 1.0;
  const BallGeometry interval_ball = ball_geometry(path, Point::at_vertex(vertex_at(2)), r_int);
  const PoincareSpectrum interval = poincare_constant(path, interval_ball, r_int / 100.0);
  const double interval_exact = kPi * kPi / (4.0 * r_int * r_int);
  const double interval_err = std::abs(interval.lambda1 / interval_exact - 1.0);

  const MetricGraph star = gen_star(3, 1.0);
  const double r_star = 0.8;
  const BallGeometry star_ball = ball_geometry(star, Point::at_vertex(vertex_at(0)), r_star);
  const PoincareSpectrum star_spec = poincare_constant(star, star_ball, r_star / 100.0);
  const double star_exact = kPi * kPi / (4.0 * r_star * r_star);
  const double star_err = std::abs(star_spec.lambda1 / star_exact - 1.0);

  // balls satisfying the single-branch-vertex hypothesis
  struct Case {
    MetricGraph g;
    Point x;
    double r;
  };
  const MetricGraph lattice = gen_lattice(2, 4);
  const MetricGraph tree = gen_tree(3, 3, 1.0);
  const std::vector<Case> cases = {
      {path, Point::at_vertex(vertex_at(2)), 1.0},
      {path, Point::on_edge(edge_at(1), 0.3), 0.7},
      {star, Point::at_vertex(vertex_at(0)), 0.8},
      {star, Point::on_edge(edge_at(0), 0.4), 0.5},
      {star, Point::on_edge(edge_at(1), 0.2), 0.7},
      {lattice, Point::at_vertex(vertex_at(12)), 0.45},
      {lattice, support::lattice_walk(lattice, 4, 2, 2, 0, 0.3), 0.3},
      {tree, Point::at_vertex(vertex_at(1)), 0.45},
      {tree, Point::on_edge(edge_at(0), 0.2), 0.35},
  };
  std::size_t derived_fail = 0;
  std::size_t printed_fail = 0;
  std::size_t hypothesis_fail = 0;
  std::size_t reports = 0;
  std::size_t report_fail = 0;
  double worst_derived = 0.0;
  for (const Case& c : cases) {
    const BallGeometry ball = ball_geometry(c.g, c.x, c.r);
    const PoincareCheck check = poincare_check(c.g, ball, c.r / 100.0, 5, 7);
    if (check.branch_vertices > 1) ++hypothesis_fail;
    derived_fail += !check.derived_holds;
    printed_fail += !check.printed_holds;
    worst_derived = std::max(worst_derived, check.spectrum.optimal_constant / check.derived_constant);
    for (const InequalityReport& rep : check.reports) {
      ++reports;
      report_fail += !rep.pass;
    }
  }
  std::ostringstream d;
  d << "interval lambda1 " << num(interval.lambda1) << " (rel err " << num(interval_err) << "), star lambda1 "
    << num(star_spec.lambda1) << " (rel err " << num(star_err) << "); " << cases.size()
    << " balls: c_opt <= 2 d_v violations " << derived_fail << ", max c_opt/(2 d_v) " << num(worst_derived)
    << "; printed c_P = d_v violations " << printed_fail << " (reported), " << report_fail << "/" << reports
    << " per-function reports over the printed constant";
  return {interval_err <= 5e-3 && star_err <= 5e-3 && derived_fail == 0 && hypothesis_fail == 0, d.str()};
}

// ---------------------------------------------------------------------------
// 4. heat kernel vs the line

struct KernelCriterionData {
  double max_mass_drift = 0.0;
};
KernelCriterionData g_kernel_data;

Outcome heat_kernel_line() {
  const MetricGraph path = gen_lattice(1, 40);
  HeatOptions opts;
  opts.dt_max = 2e-4;
  const double times[] = {0.05, 0.1, 0.25};
  const Point mid = Point::at_vertex(vertex_at(20));
  const Point end = Point::at_vertex(vertex_at(0));
  const Point pins[] = {mid, end};
  const HeatProblem problem(path, 0.02, pins);
  const Mesh& mesh = *problem.mesh();
  const DistanceField from_mid(mesh.graph(), problem.to_mesh(mid));

  double worst_interior = 0.0;
  const HeatRun run = problem.run(problem.delta(mid), times, opts);
  g_kernel_data.max_mass_drift = std::max(g_kernel_data.max_mass_drift, run.max_mass_drift);
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const double t = run.snapshots[k].time;
    double err = 0.0;
    for (std::size_t i = 0; i < mesh.dof_count(); ++i) {
      const double d = from_mid.at(mesh.dof_point(i));
      if (d > 3.0) continue;
      err = std::max(err, std::abs(run.snapshots[k].values[static_cast<Eigen::Index>(i)] - oracle::line_kernel(t, d)));
    }
    worst_interior = std::max(worst_interior, err / oracle::line_kernel(t, 0.0));
  }
  const HeatRun edge_run = problem.run(problem.delta(end), times, opts);
  g_kernel_data.max_mass_drift = std::max(g_kernel_data.max_mass_drift, edge_run.max_mass_drift);
  double worst_end = 0.0;
  for (std::size_t k = 0; k < edge_run.snapshots.size(); ++k) {
    const double t = edge_run.snapshots[k].time;
    const double p = problem.value(edge_run.at(k), end);
    worst_end = std::max(worst_end, std::abs(p / oracle::half_line_kernel(t, 0.0, 0.0) - 1.0));
  }
  return {worst_interior <= 0.02 && worst_end <= 0.02,
          "sup relative error for d <= 3: " + num(worst_interior) + ", half-line end point: " + num(worst_end)};
}

// ---------------------------------------------------------------------------
// 5. conservation and structure

Outcome conservation_structure() {
  HeatOptions opts;
  opts.dt_max = 1e-3;
  double drift = g_kernel_data.max_mass_drift;
  const MetricGraph lattice = gen_lattice(2, 4);
  const MetricGraph star = gen_star(3, 3.0);
  {
    const Point src = Point::on_edge(edge_at(5), 0.3);
    const HeatProblem problem(lattice, 0.05, std::span<const Point>(&src, 1));
    const double times[] = {0.1, 0.5, 1.0};
    drift = std::max(drift, problem.run(problem.delta(src), times, opts).max_mass_drift);
  }
  std::mt19937_64 rng(505);
  std::vector<std::pair<Point, Point>> pairs;
  for (int k = 0; k < 20; ++k) pairs.emplace_back(support::random_point(lattice, rng, 1e-2), support::random_point(lattice, rng, 1e-2));
  const SymmetryReport sym = symmetry_check(lattice, 0.05, opts, pairs, 0.1);
  const SemigroupReport semi = semigroup_check(star, 0.02, opts, Point::at_vertex(vertex_at(0)), 0.1037, 0.1511);
  std::ostringstream d;
  d << "max mass drift " << num(drift) << "; asymmetry " << num(sym.max_asymmetry) << " vs sup p "
    << num(sym.sup_value) << "; semigroup discrepancy " << num(semi.sup_discrepancy) << " vs scheme error "
    << num(semi.scheme_error);
  return {drift <= 1e-10 && sym.max_asymmetry <= 1e-6 * sym.sup_value &&
              semi.sup_discrepancy <= 3.0 * semi.scheme_error,
          d.str()};
}

// ---------------------------------------------------------------------------
// 6. ultracontractivity

Outcome ultracontractivity() {
  const double times[] = {0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0};
  HeatOptions opts;
  opts.dt_max = 5e-4;
  const MetricGraph path = gen_lattice(1, 40);
  const Point line_pts[] = {Point::at_vertex(vertex_at(20))};
  const UltraScan line = ultracontractivity_scan(path, 0.02, opts, line_pts, times, threads());
  double line_err = 0.0;
  for (const UltraRow& row : line.rows) line_err = std::max(line_err, std::abs(row.scaled / kLineDiagonal - 1.0));

  const MetricGraph star = gen_star(3, 12.0);
  const Point star_pts[] = {Point::at_vertex(vertex_at(0)), Point::on_edge(edge_at(0), 0.5)};
  const UltraScan star_scan = ultracontractivity_scan(star, 0.02, opts, star_pts, times, threads());

  const int n = 16;
  const MetricGraph lattice = gen_lattice(2, n);
  const Point lattice_pts[] = {support::lattice_walk(lattice, n, 8, 8, 0, 0.0),
                               support::lattice_walk(lattice, n, 8, 8, 1, 0.5)};
  const UltraScan lattice_scan = ultracontractivity_scan(lattice, 0.05, opts, lattice_pts, times, threads());

  // any vertex of degree >= 1 has small-time limit (2/d_v)(4πt)^{-1/2} <= 2(4πt)^{-1/2}
  const double cap = 2.0 * kLineDiagonal * 1.05;
  const double worst = std::max({line.max_scaled, star_scan.max_scaled, lattice_scan.max_scaled});
  const double least = std::min({line.min_scaled, star_scan.min_scaled, lattice_scan.min_scaled});
  std::ostringstream d;
  d << "line p*sqrt(t) max rel dev " << num(line_err) << "; sup p*sqrt(t): line " << num(line.max_scaled) << ", star "
    << num(star_scan.max_scaled) << ", lattice " << num(lattice_scan.max_scaled) << " (cap " << num(cap) << ")";
  return {line_err <= 0.03 && worst <= cap && least > 0.0, d.str()};
}

// ---------------------------------------------------------------------------
// 7. Nash

struct SupportedFamily {
  std::string name;
  MetricGraph g;
  std::vector<Point> centers;
  double max_radius;
};

std::vector<SupportedFamily> supported_families() {
  std::vector<SupportedFamily> out;
  {
    MetricGraph g = gen_lattice(1, 40);
    std::vector<Point> c;
    for (int k = 12; k <= 28; k += 2) c.push_back(Point::at_vertex(vertex_at(static_cast<std::size_t>(k))));
    c.push_back(support::path_point(g, 20.37));
    out.push_back({"line", std::move(g), std::move(c), 6.0});
  }
  {
    MetricGraph g = gen_star(3, 10.0);
    std::vector<Point> c{Point::at_vertex(vertex_at(0)), Point::on_edge(edge_at(0), 1.5), Point::on_edge(edge_at(1), 3.0),
                         Point::on_edge(edge_at(2), 0.25)};
    out.push_back({"star", std::move(g), std::move(c), 4.0});
  }
  {
    MetricGraph g = gen_lattice(2, 10);
    std::vector<Point> c;
    for (int x = 4; x <= 6; ++x) {
      for (int y = 4; y <= 6; ++y) c.push_back(support::lattice_walk(g, 10, x, y, (x + y) % 2, 0.35 * ((x * y) % 3)));
    }
    out.push_back({"lattice", std::move(g), std::move(c), 2.5});
  }
  return out;
}

Outcome nash() {
  std::size_t total = 0;
  std::size_t violations = 0;
  double worst = 0.0;
  for (const SupportedFamily& fam : supported_families()) {
    const MeshPtr mesh = build_mesh(fam.g, 0.05);
    TestFunctionSampler sampler(mesh, 700 + total);
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> pick(0, fam.centers.size() - 1);
    std::uniform_real_distribution<double> radius(0.3, fam.max_radius);
    for (int k = 0; k < 200; ++k) {
      const BallGeometry ball = ball_geometry(fam.g, fam.centers[pick(rng)], radius(rng));
      const InequalityReport rep = nash_check(sampler.sample_supported(ball));
      ++total;
      violations += !rep.pass;
      worst = std::max(worst, rep.measured_constant);
    }
  }
  // hat of half-width 1 on the line
  const MetricGraph path = gen_lattice(1, 40);
  const MeshPtr mesh = build_mesh(path, 0.05);
  const DiscreteFunction hat = interpolate(mesh, [&](EdgeId e, double s) {
    const double x = static_cast<double>(index(path.edge(e).from)) + s;
    return std::max(0.0, 1.0 - std::abs(x - 20.0));
  });
  const InequalityReport hat_rep = nash_check(hat);
  const oracle::HatNorms h = oracle::hat_norms(1.0);
  const double expected = h.l2 / (std::cbrt(h.du2) * std::pow(h.l1, 2.0 / 3.0));
  const double hat_err = std::abs(hat_rep.measured_constant - expected);
  std::ostringstream d;
  d << total << " supported functions, " << violations << " violations, max ratio " << num(worst) << " vs 2^(1/3) "
    << num(std::cbrt(2.0)) << "; hat ratio " << num(hat_rep.measured_constant) << " (err " << num(hat_err) << ")";
  return {violations == 0 && total == 600 && hat_err <= 1e-10, d.str()};
}

// ---------------------------------------------------------------------------
// 8. Sobolev family

Outcome sobolev_family() {
  // cos(πx) on the unit interval, p = q = 2
  const MetricGraph unit(2, {Edge{vertex_at(0), vertex_at(1), 1.0, std::nullopt}});
  const MeshPtr fine = build_mesh(unit, 1e-6);
  const DiscreteFunction cosine = interpolate(fine, [](EdgeId, double s) { return std::cos(kPi * s); });
  const auto cos_reps = sobolev_compact_check(cosine, 2.0, 2.0);
  const double cos_lhs = 1.0 / std::sqrt(2.0);
  const double cos_rhs = kPi / std::sqrt(2.0);
  double closed_err = std::max(std::abs(cos_reps[1].lhs - cos_lhs), std::abs(cos_reps[1].rhs - cos_rhs));
  closed_err = std::max(closed_err, std::abs(cos_reps[2].lhs - 1.0));
  closed_err = std::max(closed_err, std::abs(cos_reps[2].rhs - (cos_lhs + cos_rhs)));

  // hat on the line, p = 1 and p = 2
  const MetricGraph path = gen_lattice(1, 40);
  const MeshPtr mesh = build_mesh(path, 0.05);
  const DiscreteFunction hat = interpolate(mesh, [&](EdgeId e, double s) {
    const double x = static_cast<double>(index(path.edge(e).from)) + s;
    return std::max(0.0, 1.0 - std::abs(x - 20.0));
  });
  const oracle::HatNorms h = oracle::hat_norms(1.0);
  const InequalityReport p1 = sobolev_infinite_check(hat, 1.0);
  const InequalityReport p2 = sobolev_infinite_check(hat, 2.0);
  closed_err = std::max({closed_err, std::abs(p1.lhs - h.sup), std::abs(p1.rhs - h.du1), std::abs(p2.lhs - h.sup),
                         std::abs(p2.rhs - (h.l2 + h.du2))});

  // random functions: three compact displays and the infinite-graph bound
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> exponent(1.0, 4.0);
  const std::vector<MetricGraph> compact = {gen_star(3, 1.0), gen_lattice(2, 3), gen_tree(2, 3, 1.0), unit};
  std::size_t per_display[4] = {0, 0, 0, 0};
  std::size_t violations = 0;
  for (int k = 0; k < 100; ++k) {
    const MetricGraph& g = compact[static_cast<std::size_t>(k) % compact.size()];
    const MeshPtr m = build_mesh(g, 0.1);
    TestFunctionSampler sampler(m, 900 + static_cast<std::uint64_t>(k));
    const double p = exponent(rng);
    const double q = k % 10 == 0 ? std::numeric_limits<double>::infinity() : exponent(rng) + 1.0;
    const auto reps = sobolev_compact_check(sampler.sample(), p, q);
    for (std::size_t i = 0; i < reps.size(); ++i) {
      ++per_display[i];
      violations += !reps[i].pass;
    }
  }
  const auto families = supported_families();
  for (int k = 0; k < 100; ++k) {
    const SupportedFamily& fam = families[static_cast<std::size_t>(k) % families.size()];
    const MeshPtr m = build_mesh(fam.g, 0.1);
    TestFunctionSampler sampler(m, 1000 + static_cast<std::uint64_t>(k));
    const BallGeometry ball = ball_geometry(fam.g, fam.centers[static_cast<std::size_t>(k) % fam.centers.size()],
                                            0.5 + 0.5 * fam.max_radius * (k % 7) / 7.0);
    const double p = k % 5 == 0 ? 1.0 : exponent(rng);
    const InequalityReport rep = sobolev_infinite_check(sampler.sample_supported(ball), p);
    ++per_display[3];
    violations += !rep.pass;
  }
  std::ostringstream d;
  d << "closed-form max error " << num(closed_err) << "; random functions per display " << per_display[0] << '/'
    << per_display[1] << '/' << per_display[2] << '/' << per_display[3] << ", violations " << violations;
  return {closed_err <= 1e-10 && violations == 0 && per_display[0] >= 100 && per_display[3] >= 100, d.str()};
}

// ---------------------------------------------------------------------------
// 9, 10, 11 and 13: ratio-type outputs, computed at a base and a refined grid

struct RatioOutputs {
  double line_ratio = 0.0;
  double line_constant_ratio = 0.0;
  std::vector<double> lattice_max;  // per r
  double lattice_constant_dev = 0.0;
  double star_elliptic = 0.0;
  double interval_elliptic = 0.0;
  bool max_principle = true;
  std::size_t harmonic_solves = 0;
  GaussianFit line_fit;
  GaussianFit star_fit;
  GaussianFit lattice_fit;
};

const double kHarnackRadii[] = {0.25, 0.5, 1.0};

HarnackReport lattice_harnack(double r, double refine) {
  const double t_max = 1.1 * r * r;
  const MarginPolicy margin = margin_policy(t_max, 1e-10, 3.0 * r);
  const int half = static_cast<int>(std::ceil(margin.radius)) + 1;
  const int n = 2 * half;
  const MetricGraph g = gen_lattice(2, n);
  CylinderParams cyl;
  cyl.radius = r;
  cyl.center = support::lattice_walk(g, n, half, half, 0, 0.0);
  std::vector<HarnackSeed> seeds;
  for (double a : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    seeds.push_back({HarnackSeed::Kind::kKernel, support::lattice_walk(g, n, half, half, 0, a * r), 0.0, 1.0});
  }
  seeds.push_back({HarnackSeed::Kind::kBump, cyl.center, r, 1.0});
  seeds.push_back({HarnackSeed::Kind::kBump, support::lattice_walk(g, n, half, half, 1, r), 0.5 * r, 1.0});
  seeds.push_back({HarnackSeed::Kind::kBump, support::lattice_walk(g, n, half, half, 0, 2.0 * r), r, 1.0});
  seeds.push_back({HarnackSeed::Kind::kBump, support::lattice_walk(g, n, half, half, 1, 0.5 * r), 0.25 * r, 1.0});
  HarnackOptions opts;
  opts.h = r / 20.0 / refine;
  opts.heat.dt_max = (r / 20.0) * (r / 20.0) / 2.0 / refine;
  opts.threads = threads();
  return parabolic_harnack_ratio(g, cyl, seeds, opts);
}

GaussianFit fit_on(const MetricGraph& g, const std::vector<Point>& sources, const std::vector<Point>& targets, double h,
                   double dt) {
  std::vector<std::pair<Point, Point>> pairs;
  for (const Point& x : sources) {
    pairs.emplace_back(x, x);
    for (const Point& y : targets) {
      const double d = distance(g, x, y);
      if (d > 0.0 && d <= 2.0 + 1e-12) pairs.emplace_back(x, y);
    }
  }
  const double times[] = {0.05, 0.1, 0.2, 0.3, 0.5};
  GaussianFitOptions opts;
  opts.h = h;
  opts.heat.dt_max = dt;
  opts.threads = threads();
  return gaussian_bound_fit(g, pairs, times, opts);
}

RatioOutputs ratio_outputs(double refine) {
  RatioOutputs out;
  // parabolic Harnack on the line
  {
    const MetricGraph path = gen_lattice(1, 40);
    CylinderParams cyl;
    cyl.center = Point::at_vertex(vertex_at(20));
    const HarnackSeed seeds[] = {{HarnackSeed::Kind::kKernel, Point::at_vertex(vertex_at(22)), 0.0, 1.0},
                                 {HarnackSeed::Kind::kConstant, cyl.center, 0.0, 3.5}};
    HarnackOptions opts;
    opts.h = cyl.radius / 20.0 / refine;
    opts.heat.dt_max = 1.25e-3 / refine;
    opts.threads = threads();
    const HarnackReport rep = parabolic_harnack_ratio(path, cyl, seeds, opts);
    out.line_ratio = rep.seeds[0].ratio;
    out.line_constant_ratio = rep.seeds[1].ratio;
  }
  for (double r : kHarnackRadii) {
    const HarnackReport rep = lattice_harnack(r, refine);
    out.lattice_max.push_back(rep.max_ratio);
  }
  // constant seed on the lattice
  {
    const MetricGraph g = gen_lattice(2, 4);
    CylinderParams cyl;
    cyl.radius = 0.5;
    cyl.center = Point::at_vertex(vertex_at(12));
    const HarnackSeed seeds[] = {{HarnackSeed::Kind::kConstant, cyl.center, 0.0, 2.0}};
    HarnackOptions opts;
    opts.h = 0.025 / refine;
    opts.heat.dt_max = 3e-4 / refine;
    out.lattice_constant_dev = std::abs(parabolic_harnack_ratio(g, cyl, seeds, opts).seeds[0].ratio - 1.0);
  }
  // elliptic
  {
    const MetricGraph star = gen_star(3, 2.0);
    const std::vector<std::vector<double>> star_samples = {{0.0, 0.0, 3.0}};
    const EllipticReport s = elliptic_harnack_ratio(star, Point::at_vertex(vertex_at(0)), 0.5, star_samples, 0.05 / refine);
    out.star_elliptic = s.max_ratio;
    out.max_principle &= s.rows[0].maximum_principle;
    const MetricGraph path = gen_lattice(1, 10);
    const std::vector<std::vector<double>> affine = {{1.0, 5.0}};
    const EllipticReport i = elliptic_harnack_ratio(path, Point::at_vertex(vertex_at(5)), 1.0, affine, 0.1 / refine);
    out.interval_elliptic = i.max_ratio;
    out.max_principle &= i.rows[0].maximum_principle;
    out.harmonic_solves += 2;
    // random nonnegative data on other balls
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> value(0.0, 2.0);
    const MetricGraph lattice = gen_lattice(2, 6);
    const MetricGraph tree = gen_tree(2, 4, 1.0);
    const std::vector<std::pair<const MetricGraph*, std::pair<Point, double>>> balls = {
        {&lattice, {Point::at_vertex(vertex_at(24)), 1.0}},
        {&lattice, {Point::on_edge(edge_at(30), 0.4), 0.8}},
        {&tree, {Point::at_vertex(vertex_at(1)), 1.2}},
        {&star, {Point::on_edge(edge_at(0), 0.3), 0.6}}};
    for (const auto& [g, xr] : balls) {
      const auto boundary = harmonic_boundary_points(*g, xr.first, 2.0 * xr.second, 0.05);
      std::vector<std::vector<double>> samples;
      for (int k = 0; k < 5; ++k) {
        std::vector<double> b;
        for (std::size_t j = 0; j < boundary.size(); ++j) b.push_back(value(rng));
        samples.push_back(std::move(b));
      }
      const EllipticReport rep = elliptic_harnack_ratio(*g, xr.first, xr.second, samples, 0.05);
      for (const EllipticRow& row : rep.rows) out.max_principle &= row.maximum_principle;
      out.harmonic_solves += rep.rows.size();
    }
  }
  // Gaussian fits
  {
    // tails down to exp(-20) need h and dt well below the on-diagonal scale
    const MetricGraph path = gen_lattice(1, 20);
    std::vector<Point> targets;
    for (int k = 1; k <= 8; ++k) targets.push_back(support::path_point(path, 10.0 + 0.25 * k));
    out.line_fit = fit_on(path, {Point::at_vertex(vertex_at(10))}, targets, 0.0025 / refine, 5e-5 / refine);
  }
  {
    const MetricGraph star = gen_star(3, 8.0);
    std::vector<Point> targets;
    for (std::size_t ray = 0; ray < 3; ++ray) {
      for (double s : {0.25, 0.5, 1.0, 1.5, 2.0, 2.5}) targets.push_back(Point::on_edge(edge_at(ray), s));
    }
    out.star_fit = fit_on(star, {Point::at_vertex(vertex_at(0)), Point::on_edge(edge_at(0), 1.0)}, targets,
                          0.005 / refine, 1e-4 / refine);
  }
  {
    const int n = 12;
    const int c = n / 2;
    const MetricGraph lattice = gen_lattice(2, n);
    std::vector<Point> targets;
    for (double a : {0.5, 1.0, 1.5, 2.0}) {
      targets.push_back(support::lattice_walk(lattice, n, c, c, 0, a));
      targets.push_back(support::lattice_walk(lattice, n, c, c, 1, a));
    }
    targets.push_back(support::lattice_walk(lattice, n, c + 1, c + 1, 0, 0.0));
    targets.push_back(support::lattice_walk(lattice, n, c + 1, c, 1, 0.5));
    out.lattice_fit = fit_on(lattice,
                             {support::lattice_walk(lattice, n, c, c, 0, 0.0), support::lattice_walk(lattice, n, c, c, 0, 0.5)},
                             targets, 0.01 / refine, 1e-4 / refine);
  }
  return out;
}

RatioOutputs& base_outputs() {
  static RatioOutputs out = ratio_outputs(1.0);
  return out;
}

Outcome parabolic_harnack() {
  const RatioOutputs& o = base_outputs();
  const double oracle_ratio = oracle::line_cylinder_ratio(2.0, 1.0, 0.1, 0.25, 0.5, 0.75, 0.5);
  const double line_err = std::abs(o.line_ratio / oracle_ratio - 1.0);
  const auto [lo, hi] = std::minmax_element(o.lattice_max.begin(), o.lattice_max.end());
  const double spread = *hi / *lo;
  const double const_dev = std::max(std::abs(o.line_constant_ratio - 1.0), o.lattice_constant_dev);
  std::ostringstream d;
  d << "line ratio " << num(o.line_ratio) << " vs Gaussian oracle " << num(oracle_ratio) << " (rel err " << num(line_err)
    << "); Z^2 max ratio r=0.25/0.5/1: " << num(o.lattice_max[0]) << ' ' << num(o.lattice_max[1]) << ' '
    << num(o.lattice_max[2]) << " (spread " << num(spread) << "); constant seed |ratio-1| " << num(const_dev);
  return {line_err <= 0.05 && spread <= 2.0 && const_dev <= 1e-10, d.str()};
}

Outcome elliptic_harnack() {
  const RatioOutputs& o = base_outputs();
  std::ostringstream d;
  d << "star ratio " << num(o.star_elliptic) << ", interval ratio " << num(o.interval_elliptic) << ", maximum principle on "
    << o.harmonic_solves << " solves: " << (o.max_principle ? "holds" : "violated");
  return {std::abs(o.star_elliptic - 4.0) <= 1e-8 && std::abs(o.interval_elliptic - 2.0) <= 1e-12 && o.max_principle,
          d.str()};
}

Outcome gaussian_fit() {
  const RatioOutputs& o = base_outputs();
  const PrefactorFit& line = o.line_fit.fit(Prefactor::kBallVolume);
  const PrefactorFit& star = o.star_fit.fit(Prefactor::kBallVolume);
  const PrefactorFit& lattice = o.lattice_fit.fit(Prefactor::kBallVolume);
  const bool line_ok = line.upper_feasible && line.lower_feasible && line.c2_min <= 4.0 && line.c1_max >= 4.0;
  const bool others_ok = star.upper_feasible && star.lower_feasible && lattice.upper_feasible && lattice.lower_feasible;
  std::ostringstream d;
  d << "line C1 in (0, " << num(line.c1_max) << "], C2 in [" << num(line.c2_min) << ", inf); star C1 <= "
    << num(star.c1_max) << ", C2 >= " << num(star.c2_min) << "; lattice C1 <= " << num(lattice.c1_max) << ", C2 >= "
    << num(lattice.c2_min) << "; best line prefactor " << prefactor_name(o.line_fit.best);
  return {line_ok && others_ok, d.str()};
}

// ---------------------------------------------------------------------------
// 12. weighted model

Outcome weighted_model() {
  const double lambda = 2.0;
  const MetricGraph base = gen_lattice(2, 4);
  std::mt19937_64 rng(1212);
  std::uniform_real_distribution<double> weight(1.0 / lambda, lambda);
  std::uniform_real_distribution<double> cut(0.1, 0.9);
  std::vector<Edge> edges(base.edges().begin(), base.edges().end());
  for (Edge& e : edges) {
    const double a = cut(rng);
    const double b = std::min(0.95, a + 0.05 + cut(rng) * (1.0 - a) * 0.5);
    e.weight = WeightProfile{{0.0, a * e.length, b * e.length, e.length}, {weight(rng), weight(rng), weight(rng)}};
  }
  MetricGraph g(base.vertex_count(), std::move(edges), lambda);
  g.set_meta(base.meta());

  const MeshPtr mesh = build_mesh(g, 0.1);
  const auto K = assemble_stiffness(*mesh, WeightUse::kIgnore).matrix;
  const auto Kw = assemble_stiffness(*mesh, WeightUse::kIfPresent).matrix;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::size_t form_violations = 0;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(mesh->dof_count()));
    for (auto& x : u) x = unit(rng);
    const double plain = u.dot(K * u);
    const double weighted = u.dot(Kw * u);
    if (!(plain / lambda <= weighted * (1 + 1e-12) && weighted <= lambda * plain * (1 + 1e-12))) ++form_violations;
  }
  std::size_t metric_violations = 0;
  for (int k = 0; k < 50; ++k) {
    const Point x = support::random_point(g, rng);
    const Point y = support::random_point(g, rng);
    const double d = distance(g, x, y);
    const double rho = weighted_distance(g, x, y);
    if (!(rho / lambda <= d * (1 + 1e-12) && d <= lambda * rho * (1 + 1e-12))) ++metric_violations;
  }
  const Point src = Point::on_edge(edge_at(7), 0.35);
  const HeatProblem problem(g, 0.05, std::span<const Point>(&src, 1), WeightUse::kIfPresent);
  HeatOptions opts;
  opts.dt_max = 1e-3;
  const double times[] = {0.1, 0.5, 1.0};
  const double drift = problem.run(problem.delta(src), times, opts).max_mass_drift;
  std::ostringstream d;
  d << "form comparison violations " << form_violations << "/100, metric comparison violations " << metric_violations
    << "/50, weighted mass drift " << num(drift);
  return {form_violations == 0 && metric_violations == 0 && drift <= 1e-10, d.str()};
}

// ---------------------------------------------------------------------------
// 13. grid independence

Outcome grid_independence() {
  const RatioOutputs& a = base_outputs();
  const RatioOutputs b = ratio_outputs(2.0);
  double worst = 0.0;
  std::string worst_name;
  auto compare = [&](const std::string& name, double x, double y) {
    if (!std::isfinite(x) && !std::isfinite(y)) return;
    const double rel = std::abs(y / x - 1.0);
    if (!(rel <= worst)) {
      worst = rel;
      worst_name = name;
    }
  };
  compare("line harnack", a.line_ratio, b.line_ratio);
  for (std::size_t k = 0; k < a.lattice_max.size(); ++k) {
    compare("Z^2 harnack r=" + num(kHarnackRadii[k]), a.lattice_max[k], b.lattice_max[k]);
  }
  compare("star elliptic", a.star_elliptic, b.star_elliptic);
  compare("interval elliptic", a.interval_elliptic, b.interval_elliptic);
  const std::pair<const GaussianFit*, const GaussianFit*> fits[] = {
      {&a.line_fit, &b.line_fit}, {&a.star_fit, &b.star_fit}, {&a.lattice_fit, &b.lattice_fit}};
  const char* names[] = {"line", "star", "lattice"};
  for (int k = 0; k < 3; ++k) {
    const PrefactorFit& x = fits[k].first->fit(Prefactor::kBallVolume);
    const PrefactorFit& y = fits[k].second->fit(Prefactor::kBallVolume);
    compare(std::string(names[k]) + " c2", x.c_high, y.c_high);
    compare(std::string(names[k]) + " c1", x.c_low, y.c_low);
    compare(std::string(names[k]) + " C2", x.c2_min, y.c2_min);
    compare(std::string(names[k]) + " C1", x.c1_max, y.c1_max);
  }
  return {worst < 0.02, "largest relative change " + num(worst) + " (" + worst_name + ")"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"geometry oracle equivalence", geometry_oracle},
      {"doubling bound", doubling_bound},
      {"Poincare constants", poincare_constants},
      {"heat kernel vs line oracle", heat_kernel_line},
      {"conservation and structure", conservation_structure},
      {"ultracontractivity", ultracontractivity},
      {"Nash inequality", nash},
      {"Sobolev family", sobolev_family},
      {"parabolic Harnack", parabolic_harnack},
      {"elliptic Harnack", elliptic_harnack},
      {"two-sided Gaussian fit", gaussian_fit},
      {"weighted model", weighted_model},
      {"grid independence", grid_independence},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("[%s] %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures;
}
