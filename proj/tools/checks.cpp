#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "params.hpp"
#include "qglab/fem.hpp"
#include "qglab/geometry.hpp"
#include "qglab/harnack.hpp"
#include "qglab/heat.hpp"
#include "qglab/inequalities.hpp"
#include "qglab/mesh.hpp"
#include "qglab/report.hpp"
#include "suite.hpp"

namespace qglab::tools {

namespace {

using nlohmann::json;

HeatOptions heat_options(Params& p, const CheckContext& ctx) {
  HeatOptions o;
  o.dt_max = p.positive("dt", ctx.dt);
  o.theta = p.number("theta", ctx.theta);
  if (!(o.theta >= 0.5 && o.theta <= 1.0)) p.fail("theta", "must lie in [0.5, 1]");
  const std::string solver = p.choice("solver", "cholesky", {"cholesky", "cg"});
  o.solver = solver == "cg" ? LinearSolver::kConjugateGradient : LinearSolver::kCholesky;
  o.cg_tolerance = p.positive("cg_tolerance", o.cg_tolerance);
  o.cg_max_iterations = static_cast<int>(p.count("cg_max_iterations", static_cast<std::size_t>(o.cg_max_iterations)));
  if (o.cg_max_iterations < 1) p.fail("cg_max_iterations", "must be at least 1");
  return o;
}

std::vector<double> increasing_times(Params& p, const std::string& key, std::vector<double> fallback) {
  std::vector<double> t = p.numbers(key, std::move(fallback));
  if (t.empty()) p.fail(key, "needs at least one time");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(t[k] > 0.0) || !std::isfinite(t[k]) || (k > 0 && !(t[k] > t[k - 1]))) {
      p.fail(key, "times must be positive and increasing");
    }
  }
  return t;
}

std::vector<double> positive_list(Params& p, const std::string& key, std::vector<double> fallback) {
  std::vector<double> r = p.numbers(key, std::move(fallback));
  if (r.empty()) p.fail(key, "needs at least one value");
  for (double v : r) {
    if (!(v > 0.0) || !std::isfinite(v)) p.fail(key, "values must be positive and finite");
  }
  return r;
}

std::mt19937_64 rng_for(const CheckContext& ctx, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(ctx.seed), static_cast<std::uint32_t>(ctx.seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t salt_of(const std::string& name) { return std::stoull(fnv1a_hex(name), nullptr, 16); }

/// Uniform point on the graph by length (edge chosen proportionally).
Point random_point(const MetricGraph& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, g.total_length());
  double s = unit(rng);
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const double l = g.edges()[k].length;
    if (s < l || k + 1 == g.edge_count()) return canonical(g, Point::on_edge(edge_at(k), std::min(s, l)));
    s -= l;
  }
  return Point::at_vertex(vertex_at(0));
}

void report_rows(const std::vector<InequalityReport>& reports, std::vector<json>& rows, bool& pass,
                 const json& extra = json::object()) {
  for (const InequalityReport& r : reports) {
    json row = r.to_json();
    row.update(extra);
    rows.push_back(std::move(row));
    pass &= r.pass;
  }
}

std::string count_summary(std::size_t total, std::size_t failed, const std::string& what) {
  return std::to_string(total - failed) + "/" + std::to_string(total) + " " + what;
}

// ---------------------------------------------------------------------------

CheckRunner distance_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  auto pairs = p.pairs(g, "pairs");
  if (pairs.empty()) p.fail("pairs", "needs at least one [from, to] pair");
  const bool weighted = p.choice("metric", "path", {"path", "weighted"}) == "weighted";
  if (weighted && !g.has_weights()) p.fail("metric", "graph carries no weights");
  auto graph = ctx.graph;
  return [graph, pairs, weighted] {
    CheckOutput out;
    for (const auto& [x, y] : pairs) {
      const double d = weighted ? weighted_distance(*graph, x, y) : distance(*graph, x, y);
      out.rows.push_back({{"from", format_point(*graph, x)}, {"to", format_point(*graph, y)}, {"distance", d}});
    }
    out.summary = std::to_string(pairs.size()) + " distances";
    return out;
  };
}

CheckRunner ball_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  auto centers = p.points(g, "centers");
  if (centers.empty()) p.fail("centers", "needs at least one center");
  auto radii = positive_list(p, "radii", {});
  auto graph = ctx.graph;
  return [graph, centers, radii] {
    CheckOutput out;
    std::ostringstream csv;
    csv << "center,r,edge_id,lo,hi\n";
    for (const Point& x : centers) {
      const DistanceField field(*graph, x);
      for (double r : radii) {
        const BallGeometry ball = ball_geometry(field, *graph, r);
        std::size_t pieces = 0;
        for (std::size_t k = 0; k < graph->edge_count(); ++k) {
          for (const Interval& iv : ball.covered[k]) {
            ++pieces;
            csv << format_point(*graph, x) << ',' << format_number(r) << ',' << graph->edge_label(edge_at(k)) << ','
                << format_number(iv.lo) << ',' << format_number(iv.hi) << '\n';
          }
        }
        out.rows.push_back(
            {{"center", format_point(*graph, x)}, {"r", r}, {"volume", ball.volume}, {"pieces", pieces}});
      }
    }
    out.tables.emplace_back("", csv.str());
    out.summary = std::to_string(out.rows.size()) + " balls";
    return out;
  };
}

std::string bound_name(DoublingBound b) {
  switch (b) {
    case DoublingBound::kLocalLemma:
      return "local_lemma";
    case DoublingBound::kUniformLocal:
      return "uniform_local";
    case DoublingBound::kCovering:
      return "covering";
  }
  return "?";
}

CheckRunner doubling_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  auto centers = p.points(g, "centers");
  const std::size_t random_centers = p.count("random_centers", 0);
  auto radii = positive_list(p, "radii", {});
  if (centers.empty() && random_centers == 0) p.fail("centers", "give centers or random_centers");
  auto rng = rng_for(ctx, salt_of(p.where()));
  for (std::size_t k = 0; k < random_centers; ++k) centers.push_back(random_point(g, rng));
  auto graph = ctx.graph;
  return [graph, centers, radii] {
    CheckOutput out;
    const DoublingScan scan = doubling_scan(*graph, centers, radii);
    for (const DoublingRow& row : scan.rows) {
      out.rows.push_back({{"center", format_point(*graph, row.center)},
                          {"r", row.radius},
                          {"vol_r", row.volume_r},
                          {"vol_2r", row.volume_2r},
                          {"ratio", row.ratio},
                          {"bound", row.bound},
                          {"bound_kind", bound_name(row.bound_kind)},
                          {"branch_vertices", row.branch_vertices},
                          {"star_like", row.star_like},
                          {"pass", row.pass}});
    }
    std::ostringstream csv;
    scan.write_csv(csv, *graph);
    out.tables.emplace_back("", csv.str());
    out.pass = scan.violations == 0;
    out.summary = count_summary(scan.rows.size(), scan.violations, "rows within bound") + ", max ratio " +
                  format_number(scan.max_ratio);
    return out;
  };
}

CheckRunner poincare_check_runner(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  const Point center = p.point(g, "center");
  const double r = p.positive("radius", 1.0);
  const double h = p.positive("h", r / 100.0);
  const int random = static_cast<int>(p.count("random", 5, 10000));
  auto graph = ctx.graph;
  const std::uint64_t seed = ctx.seed ^ salt_of(p.where());
  return [graph, center, r, h, random, seed] {
    CheckOutput out;
    const BallGeometry ball = ball_geometry(*graph, center, r);
    const PoincareCheck check = poincare_check(*graph, ball, h, random, seed);
    out.rows.push_back({{"row", "spectrum"},
                        {"center", format_point(*graph, center)},
                        {"r", r},
                        {"h", h},
                        {"lambda1", check.spectrum.lambda1},
                        {"c_opt", check.spectrum.optimal_constant},
                        {"iterations", check.spectrum.iterations},
                        {"connected", check.spectrum.connected},
                        {"branch_vertices", check.branch_vertices},
                        {"c_printed", check.printed_constant},
                        {"c_derived", check.derived_constant},
                        {"printed_holds", check.printed_holds},
                        {"derived_holds", check.derived_holds}});
    bool all = true;
    report_rows(check.reports, out.rows, all);
    out.pass = check.derived_holds;
    out.summary = "lambda1 " + format_number(check.spectrum.lambda1) + ", c_opt " +
                  format_number(check.spectrum.optimal_constant) + " vs printed " +
                  format_number(check.printed_constant) + " / derived " + format_number(check.derived_constant);
    return out;
  };
}

struct SupportSpec {
  std::vector<Point> centers;
  double radius = 0.0;
};

SupportSpec support_spec(Params& p, const MetricGraph& g, bool required) {
  SupportSpec s;
  s.centers = p.points(g, "centers");
  s.radius = p.number("radius", 0.0);
  if (required && (s.centers.empty() || !(s.radius > 0.0))) {
    p.fail("centers", "supported test functions need centers and a positive radius");
  }
  if (!s.centers.empty() && !(s.radius > 0.0)) p.fail("radius", "must be positive");
  return s;
}

CheckRunner sobolev_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  const std::string form = p.choice("form", "compact", {"compact", "infinite", "local", "weighted-poincare"});
  const double exp_p = p.exponent("p", 2.0);
  const double exp_q = p.exponent("q", exp_p);
  const std::optional<double> nu = p.number_opt("nu");
  const double delta = p.number("delta", 0.5);
  if (form == "weighted-poincare" && !(delta > 0.0 && delta <= 1.0)) p.fail("delta", "must lie in (0, 1]");
  if (form != "compact" && std::isinf(exp_p)) p.fail("p", "must be finite for this form");
  const std::size_t samples = p.count("samples", 20);
  const double h = p.positive("h", ctx.h);
  const SupportSpec support = support_spec(p, g, form != "compact");
  auto graph = ctx.graph;
  const std::uint64_t seed = ctx.seed ^ salt_of(p.where());
  return [=] {
    CheckOutput out;
    const MeshPtr mesh = build_mesh(*graph, h);
    TestFunctionSampler sampler(mesh, seed);
    bool all = true;
    for (std::size_t k = 0; k < samples; ++k) {
      json extra{{"sample", k}};
      if (form == "compact") {
        report_rows(sobolev_compact_check(sampler.sample(), exp_p, exp_q), out.rows, all, extra);
        continue;
      }
      const Point& center = support.centers[k % support.centers.size()];
      const BallGeometry ball = ball_geometry(*graph, center, support.radius);
      extra["support"] = "B(" + format_point(*graph, center) + "," + format_number(support.radius) + ")";
      const DiscreteFunction u = sampler.sample_supported(ball);
      if (form == "infinite") {
        report_rows({sobolev_infinite_check(u, exp_p)}, out.rows, all, extra);
      } else if (form == "local") {
        report_rows({local_sobolev_check(u, ball, nu)}, out.rows, all, extra);
      } else {
        report_rows(weighted_poincare_check(u, ball, delta), out.rows, all, extra);
      }
    }
    std::size_t failed = 0;
    for (const json& row : out.rows) failed += !row["pass"].get<bool>();
    out.pass = all;
    out.summary = form + ": " + count_summary(out.rows.size(), failed, "reports hold");
    return out;
  };
}

CheckRunner nash_check_runner(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  const std::size_t samples = p.count("samples", 50);
  const double h = p.positive("h", ctx.h);
  const SupportSpec support = support_spec(p, g, true);
  auto graph = ctx.graph;
  const std::uint64_t seed = ctx.seed ^ salt_of(p.where());
  return [=] {
    CheckOutput out;
    const MeshPtr mesh = build_mesh(*graph, h);
    TestFunctionSampler sampler(mesh, seed);
    bool all = true;
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const Point& center = support.centers[k % support.centers.size()];
      const BallGeometry ball = ball_geometry(*graph, center, support.radius);
      const InequalityReport rep = nash_check(sampler.sample_supported(ball));
      worst = std::max(worst, rep.measured_constant);
      report_rows({rep}, out.rows, all,
                  {{"sample", k},
                   {"support", "B(" + format_point(*graph, center) + "," + format_number(support.radius) + ")"}});
    }
    out.pass = all;
    out.summary = std::to_string(samples) + " functions, max ratio " + format_number(worst);
    return out;
  };
}

// Closed-form kernels the suite can compare against.
double line_kernel(double t, double d) {
  return std::exp(-d * d / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

CheckRunner kernel_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  const Point source = p.point(g, "source");
  const std::vector<double> times = increasing_times(p, "times", {});
  const std::string compare = p.choice("compare", "none", {"none", "line", "half-line", "star"});
  const double max_distance = p.positive("max_distance", 3.0);
  const double tolerance = p.positive("tolerance", 0.02);
  const double h = p.positive("h", ctx.h);
  const bool dump = p.boolean("dump", true);
  const HeatOptions opts = heat_options(p, ctx);
  if (compare == "star" && !(source.is_vertex() && g.degree(source.vertex()) > 2)) {
    p.fail("source", "the star comparison needs the branch vertex as source");
  }
  const double star_factor = compare == "star" ? 2.0 / static_cast<double>(g.degree(source.vertex())) : 1.0;
  const double margin_tol = ctx.margin_tolerance;
  auto graph = ctx.graph;
  return [=] {
    CheckOutput out;
    const HeatProblem problem(*graph, h, std::span<const Point>(&source, 1));
    const HeatRun run = problem.run(problem.delta(source), times, opts);
    const Mesh& mesh = *problem.mesh();
    const DistanceField field(mesh.graph(), problem.to_mesh(source));
    const MarginPolicy margin = margin_policy(times.back(), margin_tol, max_distance);
    double worst = 0.0;
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
      const double t = run.snapshots[k].time;
      const Eigen::VectorXd& u = run.snapshots[k].values;
      json row{{"t", t},
               {"p_source", problem.value(run.at(k), source)},
               {"min", u.minCoeff()},
               {"max", u.maxCoeff()},
               {"compare", compare}};
      if (compare != "none") {
        const double scale = (compare == "half-line" ? 2.0 : star_factor) * line_kernel(t, 0.0);
        double err = 0.0;
        for (std::size_t i = 0; i < mesh.dof_count(); ++i) {
          const double d = field.at(mesh.dof_point(i));
          if (d > max_distance) continue;
          const double exact = (compare == "half-line" ? 2.0 : star_factor) * line_kernel(t, d);
          err = std::max(err, std::abs(u[static_cast<Eigen::Index>(i)] - exact));
        }
        row["max_rel_error"] = err / scale;
        row["pass"] = err / scale <= tolerance;
        worst = std::max(worst, err / scale);
      }
      out.rows.push_back(row);
      if (dump) {
        std::ostringstream csv;
        csv << "edge_id,offset,value\n";
        for (std::size_t i = 0; i < mesh.dof_count(); ++i) {
          const Point q = problem.split().unmap(*graph, mesh.dof_point(i));
          EdgeId e{};
          double s = 0.0;
          if (q.is_vertex()) {
            e = graph->incident(q.vertex()).front();
            s = *offset_on_edge(*graph, q, e);
          } else {
            e = q.edge();
            s = q.offset();
          }
          csv << graph->edge_label(e) << ',' << format_number(s) << ',' << format_number(u[static_cast<Eigen::Index>(i)])
              << '\n';
        }
        out.tables.emplace_back(".t" + std::to_string(k), csv.str());
      }
    }
    json meta = run.metadata();
    meta["row"] = "run";
    meta["h"] = h;
    meta["margin_radius"] = margin.radius;
    meta["truncated"] = graph->truncated();
    out.rows.push_back(meta);
    const bool mass_ok = run.max_mass_drift <= 1e-10;
    out.pass = mass_ok && (compare == "none" || worst <= tolerance);
    out.summary = "mass drift " + format_number(run.max_mass_drift) +
                  (compare == "none" ? std::string() : ", max relative error " + format_number(worst));
    return out;
  };
}

CheckRunner ultra_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  const std::vector<Point> points = p.points(g, "points");
  if (points.empty()) p.fail("points", "needs at least one point");
  const std::vector<double> times = increasing_times(p, "times", {0.05, 0.1, 0.2, 0.5, 1.0});
  const std::optional<double> bound = p.number_opt("bound");
  const double h = p.positive("h", ctx.h);
  const HeatOptions opts = heat_options(p, ctx);
  auto graph = ctx.graph;
  const unsigned threads = ctx.threads;
  return [=] {
    CheckOutput out;
    const UltraScan scan = ultracontractivity_scan(*graph, h, opts, points, times, threads);
    for (const UltraRow& row : scan.rows) {
      out.rows.push_back({{"point", format_point(*graph, row.point)},
                          {"t", row.time},
                          {"p", row.diagonal},
                          {"p_sqrt_t", row.scaled}});
    }
    std::ostringstream csv;
    scan.write_csv(csv, *graph);
    out.tables.emplace_back("", csv.str());
    out.pass = scan.min_scaled > 0.0 && (!bound || scan.max_scaled <= *bound);
    out.summary = "p*sqrt(t) in [" + format_number(scan.min_scaled) + ", " + format_number(scan.max_scaled) + "]";
    return out;
  };
}

CheckRunner symmetry_check_runner(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  auto pairs = p.pairs(g, "pairs");
  const std::size_t random_pairs = p.count("random_pairs", pairs.empty() ? 10 : 0);
  const double t = p.positive("t", 0.1);
  const double h = p.positive("h", ctx.h);
  const HeatOptions opts = heat_options(p, ctx);
  auto rng = rng_for(ctx, salt_of(p.where()));
  for (std::size_t k = 0; k < random_pairs; ++k) {
    const Point x = random_point(g, rng);
    pairs.emplace_back(x, random_point(g, rng));
  }
  auto graph = ctx.graph;
  return [=] {
    CheckOutput out;
    const SymmetryReport rep = symmetry_check(*graph, h, opts, pairs, t);
    out.rows.push_back({{"t", t}, {"pairs", pairs.size()}, {"max_asymmetry", rep.max_asymmetry}, {"sup", rep.sup_value}});
    out.pass = rep.max_asymmetry <= 1e-6 * rep.sup_value;
    out.summary = "asymmetry " + format_number(rep.max_asymmetry) + " vs sup " + format_number(rep.sup_value);
    return out;
  };
}

CheckRunner semigroup_check_runner(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  const Point source = p.point(g, "source");
  const double t = p.positive("t", 0.1037);
  const double s = p.positive("s", 0.1511);
  const double h = p.positive("h", ctx.h);
  const HeatOptions opts = heat_options(p, ctx);
  auto graph = ctx.graph;
  return [=] {
    CheckOutput out;
    const SemigroupReport rep = semigroup_check(*graph, h, opts, source, t, s);
    out.rows.push_back({{"t", t},
                        {"s", s},
                        {"discrepancy", rep.sup_discrepancy},
                        {"scheme_error", rep.scheme_error},
                        {"sup", rep.sup_value}});
    out.pass = rep.sup_discrepancy <= 3.0 * rep.scheme_error;
    out.summary = "discrepancy " + format_number(rep.sup_discrepancy) + " vs scheme error " +
                  format_number(rep.scheme_error);
    return out;
  };
}

CheckRunner parabolic_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  CylinderParams cyl;
  cyl.center = p.point(g, "center");
  cyl.radius = p.positive("radius", cyl.radius);
  cyl.epsilon = p.number("epsilon", cyl.epsilon);
  cyl.eta = p.number("eta", cyl.eta);
  cyl.sigma = p.number("sigma", cyl.sigma);
  cyl.zeta = p.number("zeta", cyl.zeta);
  cyl.start = p.number("start", cyl.start);
  try {
    cyl.validate();
  } catch (const GraphError& e) {
    p.fail("epsilon", e.what());
  }
  HarnackOptions opts;
  opts.h = p.positive("h", ctx.h);
  opts.heat = heat_options(p, ctx);
  opts.warmup_fraction = p.positive("warmup", opts.warmup_fraction);
  opts.threads = ctx.threads;
  const std::optional<double> bound = p.number_opt("bound");

  std::vector<HarnackSeed> seeds;
  const json list = p.raw("seeds");
  if (!list.is_array() || list.empty()) p.fail("seeds", "expected a nonempty array of seed tables");
  for (std::size_t k = 0; k < list.size(); ++k) {
    Params s(list[k], p.where() + ".seeds[" + std::to_string(k) + "]");
    HarnackSeed seed;
    const std::string kind = s.choice("kind", "kernel", {"kernel", "bump", "constant"});
    seed.kind = kind == "kernel" ? HarnackSeed::Kind::kKernel
                : kind == "bump" ? HarnackSeed::Kind::kBump
                                 : HarnackSeed::Kind::kConstant;
    seed.source = kind == "constant" ? s.point_opt(g, "source").value_or(cyl.center) : s.point(g, "source");
    seed.width = kind == "bump" ? s.positive("width", cyl.radius) : s.number("width", 0.0);
    seed.level = s.positive("level", 1.0);
    s.finish();
    seeds.push_back(seed);
  }
  auto graph = ctx.graph;
  return [=] {
    CheckOutput out;
    const HarnackReport rep = parabolic_harnack_ratio(*graph, cyl, seeds, opts);
    json summary = rep.to_json(*graph);
    json seeds_json = summary["seeds"];
    summary.erase("seeds");
    summary["row"] = "cylinder";
    out.rows.push_back(summary);
    std::size_t accepted = 0;
    for (json& s : seeds_json) {
      s["row"] = "seed";
      out.rows.push_back(s);
    }
    for (const SeedResult& s : rep.seeds) accepted += !s.rejected;
    out.pass = accepted > 0 && (!bound || rep.max_ratio <= *bound);
    out.summary = std::to_string(accepted) + "/" + std::to_string(rep.seeds.size()) + " seeds accepted, max ratio " +
                  format_number(rep.max_ratio);
    return out;
  };
}

CheckRunner elliptic_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  const Point center = p.point(g, "center");
  const double r = p.positive("radius", 1.0);
  const double h = p.positive("h", ctx.h);
  const std::size_t random = p.count("random", 0);
  const std::optional<double> expect = p.number_opt("expect_ratio");
  const double tolerance = p.positive("tolerance", 1e-8);
  std::vector<std::vector<double>> samples;
  const json given = p.raw("boundary");
  if (!given.is_null()) {
    if (!given.is_array()) p.fail("boundary", "expected an array of boundary-value arrays");
    for (const json& row : given) {
      if (!row.is_array()) p.fail("boundary", "expected an array of boundary-value arrays");
      std::vector<double> b;
      for (const json& v : row) {
        if (!v.is_number() || !(v.get<double>() >= 0.0)) p.fail("boundary", "values must be nonnegative numbers");
        b.push_back(v.get<double>());
      }
      samples.push_back(std::move(b));
    }
  }
  std::vector<Point> boundary;
  try {
    boundary = harmonic_boundary_points(g, center, 2.0 * r, h);
  } catch (const GraphError& e) {
    p.fail("radius", e.what());
  }
  for (const auto& b : samples) {
    if (b.size() != boundary.size()) {
      p.fail("boundary", "each sample needs " + std::to_string(boundary.size()) + " values");
    }
  }
  auto rng = rng_for(ctx, salt_of(p.where()));
  std::uniform_real_distribution<double> value(0.0, 1.0);
  for (std::size_t k = 0; k < random; ++k) {
    std::vector<double> b;
    for (std::size_t j = 0; j < boundary.size(); ++j) b.push_back(value(rng));
    samples.push_back(std::move(b));
  }
  if (samples.empty()) p.fail("boundary", "give boundary samples or random > 0");
  auto graph = ctx.graph;
  return [=] {
    CheckOutput out;
    const EllipticReport rep = elliptic_harnack_ratio(*graph, center, r, samples, h);
    json head = rep.to_json(*graph);
    json rows = head["rows"];
    head.erase("rows");
    json points = json::array();
    for (const Point& b : boundary) points.push_back(format_point(*graph, b));
    head["boundary_points"] = points;
    head["row"] = "ball";
    out.rows.push_back(head);
    bool principle = true;
    for (json& row : rows) {
      row["row"] = "sample";
      out.rows.push_back(row);
    }
    for (const EllipticRow& row : rep.rows) principle &= row.maximum_principle;
    out.pass = principle && (!expect || std::abs(rep.max_ratio - *expect) <= tolerance * std::max(1.0, *expect));
    out.summary = std::to_string(rep.rows.size()) + " solves, max ratio " + format_number(rep.max_ratio) +
                  (principle ? ", maximum principle holds" : ", maximum principle violated");
    return out;
  };
}

CheckRunner gaussian_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  auto pairs = p.pairs(g, "pairs");
  const std::vector<Point> sources = p.points(g, "sources");
  const std::vector<Point> targets = p.points(g, "targets");
  const double max_distance = p.positive("max_distance", 2.0);
  for (const Point& x : sources) {
    pairs.emplace_back(x, x);
    for (const Point& y : targets) {
      const double d = distance(g, x, y);
      if (d > 0.0 && d <= max_distance * (1.0 + 1e-12)) pairs.emplace_back(x, y);
    }
  }
  if (pairs.empty()) p.fail("pairs", "give pairs or sources/targets");
  GaussianFitOptions opts;
  opts.h = p.positive("h", ctx.h);
  opts.heat = heat_options(p, ctx);
  opts.floor = p.positive("floor", opts.floor);
  opts.tolerance = p.number("tolerance", opts.tolerance);
  if (!(opts.tolerance >= 0.0 && opts.tolerance < 1.0)) p.fail("tolerance", "must lie in [0, 1)");
  opts.threads = ctx.threads;
  const std::vector<double> times = increasing_times(p, "times", {0.05, 0.1, 0.2, 0.3, 0.5});
  const std::optional<double> contains = p.number_opt("contains");
  auto graph = ctx.graph;
  return [=] {
    CheckOutput out;
    const GaussianFit fit = gaussian_bound_fit(*graph, pairs, times, opts);
    json head = fit.to_json();
    json fits = head.contains("fits") ? head["fits"] : json::array();
    head.erase("fits");
    head["row"] = "fit";
    out.rows.push_back(head);
    for (json& f : fits) {
      f["row"] = "prefactor";
      out.rows.push_back(f);
    }
    std::ostringstream csv;
    fit.write_csv(csv);
    out.tables.emplace_back("", csv.str());
    const PrefactorFit& ball = fit.fit(Prefactor::kBallVolume);
    bool pass = ball.lower_feasible && ball.upper_feasible;
    if (contains) pass = pass && ball.c2_min <= *contains && *contains <= ball.c1_max;
    out.pass = pass;
    out.summary = "C1 <= " + format_number(ball.c1_max) + ", C2 >= " + format_number(ball.c2_min) + ", best " +
                  prefactor_name(fit.best);
    return out;
  };
}

CheckRunner hoelder_check(Params& p, const CheckContext& ctx) {
  const MetricGraph& g = *ctx.graph;
  const Point center = p.point(g, "center");
  const Point source = p.point_opt(g, "source").value_or(center);
  const double r = p.positive("radius", 0.5);
  const double T = p.positive("T", 4.0 * r * r);
  if (T < 4.0 * r * r) p.fail("T", "must be at least 4 r^2");
  const double h = p.positive("h", ctx.h);
  const HeatOptions opts = heat_options(p, ctx);
  auto graph = ctx.graph;
  return [=] {
    CheckOutput out;
    const Point pins[] = {center, source};
    const HeatProblem problem(*graph, h, pins);
    const HoelderEstimate est = hoelder_exponent(problem, problem.delta(source), center, r, T, opts);
    out.rows.push_back({{"center", format_point(*graph, center)},
                        {"r", r},
                        {"T", T},
                        {"alpha", est.degenerate ? json(nullptr) : json(est.alpha)},
                        {"log_constant", est.log_constant},
                        {"residual", est.residual},
                        {"pairs", est.pairs},
                        {"degenerate", est.degenerate},
                        {"note", est.note}});
    out.pass = !est.degenerate;
    out.summary = est.degenerate ? "degenerate: " + est.note : "alpha " + format_number(est.alpha);
    return out;
  };
}

using Factory = CheckRunner (*)(Params&, const CheckContext&);

const std::map<std::string, Factory>& factories() {
  static const std::map<std::string, Factory> table = {
      {"distance", distance_check},
      {"ball", ball_check},
      {"doubling", doubling_check},
      {"poincare", poincare_check_runner},
      {"sobolev", sobolev_check},
      {"nash", nash_check_runner},
      {"kernel", kernel_check},
      {"ultracontractivity", ultra_check},
      {"symmetry", symmetry_check_runner},
      {"semigroup", semigroup_check_runner},
      {"harnack-parabolic", parabolic_check},
      {"harnack-elliptic", elliptic_check},
      {"gaussian-fit", gaussian_check},
      {"hoelder", hoelder_check},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& check_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : factories()) out.push_back(name);
    return out;
  }();
  return kinds;
}

CheckRunner prepare_check(const CheckSpec& check, const CheckContext& context) {
  const auto it = factories().find(check.kind);
  if (it == factories().end()) throw ConfigError("check " + check.name + ": unknown kind '" + check.kind + "'");
  Params params(check.params, "check " + check.name);
  CheckRunner runner = it->second(params, context);
  params.finish();
  return runner;
}

}  // namespace qglab::tools
