#include "qglab/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "qglab/report.hpp"

namespace qglab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool in_window(double t, double a, double b) {
  const double tol = 1e-12 * std::max(1.0, b);
  return t >= a - tol && t <= b + tol;
}

struct HarmonicSetup {
  SplitGraph split;
  MeshPtr parent;
  BallMesh ball_mesh;
  std::size_t center_dof = 0;
};

HarmonicSetup harmonic_setup(const MetricGraph& g, const Point& x, double radius, double h) {
  if (!(radius > 0.0)) throw GraphError("harmonic ball needs a positive radius");
  HarmonicSetup s{split_at_point(g, x), nullptr, {}, 0};
  const Point center = s.split.map(canonical(g, x));
  s.parent = build_mesh(s.split.graph, h);
  s.ball_mesh = restrict_to_ball(*s.parent, ball_geometry(s.split.graph, center, radius));
  const MetricGraph& sub = s.ball_mesh.mesh->graph();
  bool found = false;
  for (std::size_t v = 0; v < sub.vertex_count(); ++v) {
    if (canonical(s.split.graph, s.ball_mesh.parent_point(v)) == center) {
      s.center_dof = v;
      found = true;
      break;
    }
  }
  if (!found) throw GraphError("ball center is missing from the ball mesh");
  return s;
}

}  // namespace

void CylinderParams::validate() const {
  if (!(0.0 < epsilon && epsilon < eta && eta < sigma && sigma < 1.0)) {
    throw GraphError("cylinder parameters need 0 < epsilon < eta < sigma < 1");
  }
  if (!(zeta > 0.0 && zeta < 1.0)) throw GraphError("zeta must lie in (0, 1)");
  if (!(radius > 0.0)) throw GraphError("cylinder radius must be positive");
}

nlohmann::json CylinderParams::to_json(const MetricGraph& g) const {
  return {{"epsilon", epsilon}, {"eta", eta},       {"sigma", sigma},
          {"zeta", zeta},       {"radius", radius}, {"start", start},
          {"center", format_point(g, center)}};
}

std::string HarnackSeed::describe(const MetricGraph& g) const {
  switch (kind) {
    case Kind::kKernel:
      return "kernel(" + format_point(g, source) + ")";
    case Kind::kBump:
      return "bump(" + format_point(g, source) + "," + format_number(width) + ")";
    case Kind::kConstant:
      return "constant(" + format_number(level) + ")";
  }
  return "unknown";
}

nlohmann::json HarnackReport::to_json(const MetricGraph& g) const {
  nlohmann::json seeds_json = nlohmann::json::array();
  for (const SeedResult& s : seeds) {
    nlohmann::json j{{"seed", s.seed},
                     {"sup_minus", s.sup_minus},
                     {"inf_plus", s.inf_plus},
                     {"ratio", std::isfinite(s.ratio) ? nlohmann::json(s.ratio) : nlohmann::json(nullptr)},
                     {"rejected", s.rejected}};
    if (!s.note.empty()) j["note"] = s.note;
    seeds_json.push_back(std::move(j));
  }
  return {{"cylinder", cylinder.to_json(g)},
          {"h", h},
          {"dt", dt},
          {"warmup", warmup},
          {"seeds", std::move(seeds_json)},
          {"max_ratio", max_ratio},
          {"sampled_nodes", sampled_nodes},
          {"sampled_times_minus", sampled_times_minus},
          {"sampled_times_plus", sampled_times_plus},
          {"note", "max_ratio is a lower bound for c_H"}};
}

HarnackReport parabolic_harnack_ratio(const MetricGraph& g, const CylinderParams& cylinder,
                                      std::span<const HarnackSeed> seeds, const HarnackOptions& options) {
  cylinder.validate();
  const double r = cylinder.radius;
  const double r2 = r * r;
  std::vector<Point> pinned{cylinder.center};
  for (const HarnackSeed& s : seeds) {
    if (s.kind != HarnackSeed::Kind::kConstant) pinned.push_back(s.source);
  }
  const HeatProblem problem(g, options.h, pinned);
  const MeshPtr& mesh = problem.mesh();
  const MetricGraph& mg = mesh->graph();

  const DistanceField field(mg, problem.to_mesh(cylinder.center));
  std::vector<Eigen::Index> sampled;
  for (std::size_t i = 0; i < mesh->dof_count(); ++i) {
    if (field.at(mesh->dof_point(i)) <= cylinder.zeta * r * (1.0 + 1e-12)) sampled.push_back(static_cast<Eigen::Index>(i));
  }
  if (sampled.empty()) throw GraphError("no mesh nodes inside the Harnack sub-ball");

  HarnackReport report;
  report.cylinder = cylinder;
  report.h = options.h;
  report.dt = options.heat.dt_max;
  report.warmup = options.warmup_fraction * r2;
  report.sampled_nodes = sampled.size();
  const double t0 = report.warmup;
  const double minus_a = t0 + cylinder.epsilon * r2;
  const double minus_b = t0 + cylinder.eta * r2;
  const double plus_a = t0 + cylinder.sigma * r2;
  const double plus_b = t0 + r2;
  const double times[] = {minus_a, minus_b, plus_a, plus_b};

  report.seeds.resize(seeds.size());
  std::vector<std::size_t> minus_counts(seeds.size());
  std::vector<std::size_t> plus_counts(seeds.size());
  parallel_for(seeds.size(), options.threads, [&](std::size_t k) {
    const HarnackSeed& seed = seeds[k];
    DiscreteFunction u0;
    switch (seed.kind) {
      case HarnackSeed::Kind::kKernel:
        u0 = problem.delta(seed.source);
        break;
      case HarnackSeed::Kind::kBump: {
        if (!(seed.width > 0.0)) throw GraphError("bump width must be positive");
        const DistanceField from(mg, problem.to_mesh(seed.source));
        u0 = interpolate(mesh, [&](EdgeId e, double s) { return std::max(0.0, 1.0 - from.at(e, s) / seed.width); });
        break;
      }
      case HarnackSeed::Kind::kConstant:
        u0 = constant_function(mesh, seed.level);
        break;
    }
    double sup_minus = -kInf;
    double inf_plus = kInf;
    std::size_t n_minus = 0;
    std::size_t n_plus = 0;
    problem.run(u0, times, options.heat, [&](double t, const Eigen::VectorXd& u) {
      const bool minus = in_window(t, minus_a, minus_b);
      const bool plus = in_window(t, plus_a, plus_b);
      if (!minus && !plus) return;
      for (Eigen::Index i : sampled) {
        if (minus) sup_minus = std::max(sup_minus, u[i]);
        if (plus) inf_plus = std::min(inf_plus, u[i]);
      }
      n_minus += minus;
      n_plus += plus;
    });
    SeedResult& out = report.seeds[k];
    out.seed = seed.describe(g);
    out.sup_minus = sup_minus;
    out.inf_plus = inf_plus;
    if (!(inf_plus > 1e-12 * std::abs(sup_minus))) {
      out.rejected = true;
      out.ratio = kInf;
      out.note = "non-positive infimum over the later cylinder";
    } else {
      out.ratio = sup_minus / inf_plus;
    }
    minus_counts[k] = n_minus;
    plus_counts[k] = n_plus;
  });
  for (const SeedResult& s : report.seeds) {
    if (!s.rejected) report.max_ratio = std::max(report.max_ratio, s.ratio);
  }
  if (!seeds.empty()) {
    report.sampled_times_minus = minus_counts.front();
    report.sampled_times_plus = plus_counts.front();
  }
  return report;
}

std::vector<Point> harmonic_boundary_points(const MetricGraph& g, const Point& x, double radius, double h) {
  const HarmonicSetup s = harmonic_setup(g, x, radius, h);
  std::vector<Point> out;
  for (std::size_t dof : s.ball_mesh.cut_dofs) {
    out.push_back(s.split.unmap(g, canonical(s.split.graph, s.ball_mesh.parent_point(dof))));
  }
  return out;
}

namespace {

HarmonicSolution solve_on(const HarmonicSetup& setup, std::span<const double> boundary) {
  const BallMesh& bm = setup.ball_mesh;
  const Mesh& mesh = *bm.mesh;
  if (boundary.size() != bm.cut_dofs.size()) {
    throw GraphError("expected " + std::to_string(bm.cut_dofs.size()) + " boundary values, got " +
                     std::to_string(boundary.size()));
  }
  if (bm.cut_dofs.empty()) throw GraphError("ball has no boundary; the Dirichlet problem is singular");
  for (double b : boundary) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw GraphError("boundary values must be finite and nonnegative");
  }

  const std::size_t n = mesh.dof_count();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> interior_index(n, kNone);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<bool> is_boundary(n, false);
  for (std::size_t k = 0; k < bm.cut_dofs.size(); ++k) {
    is_boundary[bm.cut_dofs[k]] = true;
    u[static_cast<Eigen::Index>(bm.cut_dofs[k])] = boundary[k];
  }
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_boundary[i]) interior_index[i] = m++;
  }
  if (m == 0) throw GraphError("ball has an empty interior");

  const Eigen::SparseMatrix<double> K = assemble_stiffness(mesh).matrix;
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (Eigen::Index c = 0; c < K.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, c); it; ++it) {
      const std::size_t row = interior_index[static_cast<std::size_t>(it.row())];
      if (row == kNone) continue;
      const std::size_t col = interior_index[static_cast<std::size_t>(it.col())];
      if (col == kNone) {
        rhs[static_cast<Eigen::Index>(row)] -= it.value() * u[it.col()];
      } else {
        triplets.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), it.value());
      }
    }
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("harmonic system is singular", 0);
  const Eigen::VectorXd x = ldlt.solve(rhs);

  HarmonicSolution out;
  out.ball_mesh = bm;
  const double scale = rhs.norm();
  const double residual = (A * x - rhs).norm();
  out.relative_residual = scale > 0.0 ? residual / scale : residual;
  for (std::size_t i = 0; i < n; ++i) {
    if (interior_index[i] != kNone) u[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(interior_index[i])];
  }
  const auto [lo, hi] = std::minmax_element(boundary.begin(), boundary.end());
  const double tol = 1e-12 * std::max(std::abs(*lo), std::abs(*hi));
  out.maximum_principle = u.minCoeff() >= *lo - tol && u.maxCoeff() <= *hi + tol;
  out.values = DiscreteFunction{bm.mesh, std::move(u)};
  return out;
}

}  // namespace

HarmonicSolution harmonic_solve(const MetricGraph& g, const Point& x, double radius, std::span<const double> boundary,
                                double h) {
  return solve_on(harmonic_setup(g, x, radius, h), boundary);
}

nlohmann::json EllipticReport::to_json(const MetricGraph& g) const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const EllipticRow& row : rows) {
    rows_json.push_back({{"boundary", row.boundary},
                         {"sup", row.sup},
                         {"inf", row.inf},
                         {"ratio", std::isfinite(row.ratio) ? nlohmann::json(row.ratio) : nlohmann::json(nullptr)},
                         {"maximum_principle", row.maximum_principle}});
  }
  return {{"center", format_point(g, center)}, {"radius", radius}, {"rows", std::move(rows_json)},
          {"max_ratio", max_ratio}};
}

EllipticReport elliptic_harnack_ratio(const MetricGraph& g, const Point& x, double r,
                                      std::span<const std::vector<double>> samples, double h) {
  const HarmonicSetup setup = harmonic_setup(g, x, 2.0 * r, h);
  const MetricGraph& sub = setup.ball_mesh.mesh->graph();
  const BallGeometry inner = ball_geometry(sub, Point::at_vertex(vertex_at(setup.center_dof)), r);

  EllipticReport report;
  report.center = canonical(g, x);
  report.radius = r;
  for (const std::vector<double>& b : samples) {
    const HarmonicSolution sol = solve_on(setup, b);
    EllipticRow row;
    row.boundary = b;
    row.sup = -kInf;
    row.inf = kInf;
    for_each_piece(sol.values, inner, [&](const LinearPiece& q) {
      row.sup = std::max({row.sup, q.u_lo, q.u_hi});
      row.inf = std::min({row.inf, q.u_lo, q.u_hi});
    });
    row.ratio = row.inf > 0.0 ? row.sup / row.inf : kInf;
    row.maximum_principle = sol.maximum_principle;
    report.max_ratio = std::max(report.max_ratio, row.ratio);
    report.rows.push_back(std::move(row));
  }
  return report;
}

HoelderEstimate hoelder_exponent(const HeatProblem& problem, const DiscreteFunction& u0, const Point& x, double r,
                                 double T, const HeatOptions& options) {
  if (!(r > 0.0)) throw GraphError("Hölder radius must be positive");
  const double r2 = r * r;
  if (T < 4.0 * r2 * (1.0 - 1e-12)) throw GraphError("Hölder cylinder needs T >= 4r^2");
  const MeshPtr& mesh = problem.mesh();
  const MetricGraph& mg = mesh->graph();
  const DistanceField field(mg, problem.to_mesh(x));

  std::vector<Eigen::Index> outer;
  std::vector<Eigen::Index> inner;
  for (std::size_t i = 0; i < mesh->dof_count(); ++i) {
    const double d = field.at(mesh->dof_point(i));
    if (d < 2.0 * r) outer.push_back(static_cast<Eigen::Index>(i));
    if (d < r) inner.push_back(static_cast<Eigen::Index>(i));
  }
  HoelderEstimate est;
  if (inner.size() < 2) throw GraphError("too few mesh nodes inside the Hölder ball");
  constexpr std::size_t kMaxNodes = 16;
  constexpr std::size_t kMaxTimes = 9;
  std::vector<Eigen::Index> nodes;
  for (std::size_t k = 0; k < std::min(kMaxNodes, inner.size()); ++k) {
    nodes.push_back(inner[k * (inner.size() - 1) / std::max<std::size_t>(1, std::min(kMaxNodes, inner.size()) - 1)]);
  }
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<double> times;
  if (T - 4.0 * r2 > 1e-12 * T) times.push_back(T - 4.0 * r2);
  times.push_back(T - r2);
  times.push_back(T);
  double sup_q = 0.0;
  std::vector<double> sample_times;
  std::vector<Eigen::VectorXd> samples;
  problem.run(u0, times, options, [&](double t, const Eigen::VectorXd& u) {
    if (t >= T - 4.0 * r2 * (1.0 + 1e-12)) {
      for (Eigen::Index i : outer) sup_q = std::max(sup_q, std::abs(u[i]));
    }
    if (t > T - r2 * (1.0 - 1e-12)) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
      for (std::size_t k = 0; k < nodes.size(); ++k) v[static_cast<Eigen::Index>(k)] = u[nodes[k]];
      sample_times.push_back(t);
      samples.push_back(std::move(v));
    }
  });

  std::vector<std::size_t> picks;
  for (std::size_t k = 0; k < std::min(kMaxTimes, samples.size()); ++k) {
    picks.push_back(k * (samples.size() - 1) / std::max<std::size_t>(1, std::min(kMaxTimes, samples.size()) - 1));
  }
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());

  std::vector<std::vector<double>> dist(nodes.size(), std::vector<double>(nodes.size(), 0.0));
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const DistanceField from(mg, mesh->dof_point(static_cast<std::size_t>(nodes[a])));
    for (std::size_t b = 0; b < nodes.size(); ++b) dist[a][b] = from.at(mesh->dof_point(static_cast<std::size_t>(nodes[b])));
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::vector<std::pair<double, double>> points;
  if (sup_q > 0.0) {
    const std::size_t count = picks.size() * nodes.size();
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) {
        const std::size_t ti = picks[i / nodes.size()];
        const std::size_t tj = picks[j / nodes.size()];
        const std::size_t a = i % nodes.size();
        const std::size_t b = j % nodes.size();
        const double pd = (std::sqrt(std::abs(sample_times[ti] - sample_times[tj])) + dist[a][b]) / r;
        const double inc = std::abs(samples[ti][static_cast<Eigen::Index>(a)] - samples[tj][static_cast<Eigen::Index>(b)]) / sup_q;
        if (!(pd > 0.0) || !(inc > 1e-13)) continue;
        const double lx = std::log(pd);
        const double ly = std::log(inc);
        points.emplace_back(lx, ly);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
      }
    }
  }
  est.pairs = points.size();
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (points.size() < 3 || !(denom > 0.0)) {
    est.degenerate = true;
    est.alpha = kNaN;
    est.log_constant = kNaN;
    est.residual = kNaN;
    est.note = sup_q > 0.0 ? "solution is constant on the cylinder" : "solution vanishes on the cylinder";
    return est;
  }
  est.alpha = (n * sxy - sx * sy) / denom;
  est.log_constant = (sy - est.alpha * sx) / n;
  double ss = 0.0;
  for (const auto& [lx, ly] : points) {
    const double e = ly - est.log_constant - est.alpha * lx;
    ss += e * e;
  }
  est.residual = std::sqrt(ss / n);
  return est;
}

void UltraScan::write_csv(std::ostream& out, const MetricGraph& g) const {
  out << "point,t,p,scaled\n";
  for (const UltraRow& row : rows) {
    out << format_point(g, row.point) << ',' << format_number(row.time) << ',' << format_number(row.diagonal) << ','
        << format_number(row.scaled) << '\n';
  }
}

UltraScan ultracontractivity_scan(const MetricGraph& g, double h, const HeatOptions& options,
                                  std::span<const Point> points, std::span<const double> times, unsigned threads) {
  if (points.empty() || times.empty()) throw GraphError("ultracontractivity scan needs points and times");
  const HeatProblem problem(g, h, points);
  std::vector<std::vector<UltraRow>> per_point(points.size());
  parallel_for(points.size(), threads, [&](std::size_t k) {
    const Point x = canonical(g, points[k]);
    for (const KernelColumn& col : problem.kernel_columns(x, times, options)) {
      const double p = problem.value(col.values, x);
      per_point[k].push_back({x, col.time, p, p * std::sqrt(col.time)});
    }
  });
  UltraScan scan;
  scan.min_scaled = kInf;
  for (auto& rows : per_point) {
    for (UltraRow& row : rows) {
      scan.max_scaled = std::max(scan.max_scaled, row.scaled);
      scan.min_scaled = std::min(scan.min_scaled, row.scaled);
      scan.rows.push_back(std::move(row));
    }
  }
  return scan;
}

std::string prefactor_name(Prefactor f) {
  switch (f) {
    case Prefactor::kBallVolume:
      return "ball_volume";
    case Prefactor::kQuarterPower:
      return "t^-1/4";
    case Prefactor::kHalfPower:
      return "t^-1/2";
  }
  return "unknown";
}

namespace {

double prefactor_value(Prefactor f, const GaussianRow& row) {
  switch (f) {
    case Prefactor::kBallVolume:
      return 1.0 / row.volume_sqrt_t;
    case Prefactor::kQuarterPower:
      return std::pow(row.time, -0.25);
    case Prefactor::kHalfPower:
      return 1.0 / std::sqrt(row.time);
  }
  return kNaN;
}

PrefactorFit fit_prefactor(Prefactor form, const std::vector<GaussianRow>& rows, double tol) {
  PrefactorFit fit;
  fit.form = form;
  fit.c_low = kInf;
  fit.c_high = 0.0;
  for (const GaussianRow& row : rows) {
    if (row.distance != 0.0) continue;
    const double g = row.kernel / prefactor_value(form, row);
    fit.c_low = std::min(fit.c_low, g);
    fit.c_high = std::max(fit.c_high, g);
  }
  if (!(fit.c_high > 0.0)) throw GraphError("Gaussian fit needs at least one pair with x = y");
  fit.spread = fit.c_high / fit.c_low;
  fit.c1_max = kInf;
  fit.c2_min = 0.0;
  fit.lower_feasible = true;
  fit.upper_feasible = true;
  for (const GaussianRow& row : rows) {
    if (row.distance == 0.0) continue;
    const double g = row.kernel / prefactor_value(form, row);
    const double d2t = row.distance * row.distance / row.time;
    const double upper_log = std::log((1.0 + tol) * fit.c_high / g);
    if (upper_log > 0.0) {
      fit.c2_min = std::max(fit.c2_min, d2t / upper_log);
    } else {
      fit.upper_feasible = false;
    }
    const double lower_log = std::log((1.0 - tol) * fit.c_low / g);
    if (lower_log > 0.0) fit.c1_max = std::min(fit.c1_max, d2t / lower_log);
  }
  if (!fit.upper_feasible) fit.c2_min = kInf;
  fit.lower_feasible = fit.c1_max > 0.0;
  return fit;
}

nlohmann::json number_or_string(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_number(v));
}

}  // namespace

const PrefactorFit& GaussianFit::fit(Prefactor f) const {
  for (const PrefactorFit& p : fits) {
    if (p.form == f) return p;
  }
  throw GraphError("prefactor form was not fitted");
}

void GaussianFit::write_csv(std::ostream& out) const {
  const PrefactorFit& f = fit(Prefactor::kBallVolume);
  out << "t,d,p,vol_sqrt_t,lower_slack,upper_slack\n";
  for (const GaussianRow& row : rows) {
    const double d2t = row.distance * row.distance / row.time;
    const double lower_exp = row.distance == 0.0 ? 1.0 : std::exp(-d2t / f.c1_max);
    const double upper_exp = row.distance == 0.0 ? 1.0 : std::exp(-d2t / f.c2_min);
    const double lower = f.c_low / row.volume_sqrt_t * lower_exp;
    const double upper = f.c_high / row.volume_sqrt_t * upper_exp;
    out << format_number(row.time) << ',' << format_number(row.distance) << ',' << format_number(row.kernel) << ','
        << format_number(row.volume_sqrt_t) << ',' << format_number(row.kernel - lower) << ','
        << format_number(upper - row.kernel) << '\n';
  }
}

nlohmann::json GaussianFit::to_json() const {
  nlohmann::json fits_json = nlohmann::json::array();
  for (const PrefactorFit& f : fits) {
    fits_json.push_back({{"form", prefactor_name(f.form)},
                         {"c_low", f.c_low},
                         {"c_high", f.c_high},
                         {"spread", f.spread},
                         {"C1_max", number_or_string(f.c1_max)},
                         {"C2_min", number_or_string(f.c2_min)},
                         {"lower_feasible", f.lower_feasible},
                         {"upper_feasible", f.upper_feasible}});
  }
  return {{"rows", rows.size()},
          {"dropped", dropped},
          {"tolerance", tolerance},
          {"fits", std::move(fits_json)},
          {"best", prefactor_name(best)}};
}

GaussianFit gaussian_bound_fit(const MetricGraph& g, std::span<const std::pair<Point, Point>> pairs,
                               std::span<const double> times, const GaussianFitOptions& options) {
  if (pairs.empty() || times.empty()) throw GraphError("Gaussian fit needs pairs and times");
  if (!(options.tolerance >= 0.0 && options.tolerance < 1.0)) throw GraphError("fit tolerance must lie in [0, 1)");
  std::vector<Point> pinned;
  std::vector<Point> sources;
  for (const auto& [x, y] : pairs) {
    pinned.push_back(x);
    pinned.push_back(y);
    const Point cx = canonical(g, x);
    if (std::find(sources.begin(), sources.end(), cx) == sources.end()) sources.push_back(cx);
  }
  const HeatProblem problem(g, options.h, pinned);

  std::vector<std::vector<GaussianRow>> per_source(sources.size());
  std::vector<std::size_t> dropped(sources.size(), 0);
  parallel_for(sources.size(), options.threads, [&](std::size_t k) {
    const Point& x = sources[k];
    const std::vector<KernelColumn> cols = problem.kernel_columns(x, times, options.heat);
    std::vector<double> volumes;
    for (double t : times) volumes.push_back(ball_geometry(g, x, std::sqrt(t)).volume);
    for (const auto& [px, py] : pairs) {
      if (!(canonical(g, px) == x)) continue;
      const Point y = canonical(g, py);
      const double d = distance(g, x, y);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const double p = problem.value(cols[i].values, y);
        if (!(p >= options.floor)) {
          ++dropped[k];
          continue;
        }
        per_source[k].push_back({x, y, cols[i].time, d, p, volumes[i]});
      }
    }
  });

  GaussianFit fit;
  fit.tolerance = options.tolerance;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    fit.dropped += dropped[k];
    for (GaussianRow& row : per_source[k]) fit.rows.push_back(std::move(row));
  }
  for (Prefactor f : {Prefactor::kBallVolume, Prefactor::kQuarterPower, Prefactor::kHalfPower}) {
    fit.fits.push_back(fit_prefactor(f, fit.rows, options.tolerance));
  }
  fit.best = std::min_element(fit.fits.begin(), fit.fits.end(), [](const PrefactorFit& a, const PrefactorFit& b) {
               return a.spread < b.spread;
             })->form;
  return fit;
}

}  // namespace qglab
