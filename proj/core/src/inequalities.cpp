#include "qglab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/IterativeLinearSolvers>

#include "qglab/report.hpp"

namespace qglab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

std::string ball_label(const MetricGraph& g, const BallGeometry& ball) {
  return "B(" + format_point(g, ball.center) + "," + format_number(ball.radius) + ")";
}

std::optional<double> json_number(double v) {
  if (std::isfinite(v)) return v;
  return std::nullopt;
}

// Zero threshold relative to the largest nodal value.
bool vanishes(double value, double scale) { return std::abs(value) <= 1e-14 * scale; }

void require_vanishing_on_boundary(const DiscreteFunction& u) {
  const Mesh& mesh = *u.mesh;
  const double scale = u.values.size() ? u.values.cwiseAbs().maxCoeff() : 0.0;
  for (VertexId v : truncation_boundary(mesh.graph())) {
    if (!vanishes(u.values[static_cast<Eigen::Index>(index(v))], scale)) {
      throw GraphError("test function must vanish on the truncation boundary (vertex " +
                       std::to_string(mesh.graph().vertex_label(v)) + ")");
    }
  }
}

// 3-point Gauss–Legendre on [0, 1], exact for polynomials of degree 5.
template <typename F>
double gauss3(double length, F&& f) {
  static constexpr double kNodes[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
  static constexpr double kWeights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += kWeights[i] * f(kNodes[i]);
  return length * s;
}

// Linear piece of u on which ψ is also linear.
struct WeightedPiece {
  double length;
  double u0;
  double u1;
  double psi0;
  double psi1;
  double slope;
};

std::vector<WeightedPiece> weighted_pieces(const DiscreteFunction& u, const BallGeometry& ball, double delta) {
  const MetricGraph& g = u.mesh->graph();
  const DistanceField field(g, ball.center);
  const double r = ball.radius;
  auto psi = [&](EdgeId e, double s) { return std::clamp((r - field.at(e, s)) / (delta * r), 0.0, 1.0); };

  std::vector<WeightedPiece> out;
  for_each_piece(u, ball, [&](const LinearPiece& q) {
    const Edge& edge = g.edge(q.edge);
    const double l = edge.length;
    const double du = field.to_vertex(edge.from);
    const double dw = field.to_vertex(edge.to);
    std::vector<double> cuts{q.lo, q.hi, 0.5 * (dw + l - du)};
    const double levels[2] = {(1.0 - delta) * r, r};
    for (double rho : levels) {
      cuts.push_back(rho - du);
      cuts.push_back(l - (rho - dw));
    }
    if (!ball.center.is_vertex() && ball.center.edge() == q.edge) {
      const double s0 = ball.center.offset();
      cuts.push_back(s0);
      for (double rho : levels) {
        cuts.push_back(s0 - rho);
        cuts.push_back(s0 + rho);
      }
    }
    std::erase_if(cuts, [&](double c) { return !(c >= q.lo && c <= q.hi); });
    std::sort(cuts.begin(), cuts.end());
    const double width = q.hi - q.lo;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (!(b - a > 1e-15 * std::max(1.0, l))) continue;
      const double ua = q.u_lo + (q.u_hi - q.u_lo) * ((a - q.lo) / width);
      const double ub = q.u_lo + (q.u_hi - q.u_lo) * ((b - q.lo) / width);
      out.push_back({b - a, ua, ub, psi(q.edge, a), psi(q.edge, b), q.slope});
    }
  });
  return out;
}

// ∫ψ²|v|^power over one piece where v = u - c; splits at the sign change.
double weighted_deviation(const WeightedPiece& p, double c, int power) {
  const double v0 = p.u0 - c;
  const double v1 = p.u1 - c;
  auto part = [&](double t0, double t1) {
    return gauss3(p.length * (t1 - t0), [&](double x) {
      const double t = t0 + (t1 - t0) * x;
      const double v = std::abs(v0 + (v1 - v0) * t);
      const double w = p.psi0 + (p.psi1 - p.psi0) * t;
      return w * w * (power == 1 ? v : v * v);
    });
  };
  if (v0 * v1 < 0.0) {
    const double t = std::abs(v0) / (std::abs(v0) + std::abs(v1));
    return part(0.0, t) + part(t, 1.0);
  }
  return part(0.0, 1.0);
}

// Removes the M-weighted mean.
void project_out_constants(Eigen::VectorXd& x, const Eigen::VectorXd& m) {
  x.array() -= m.dot(x) / m.sum();
}

}  // namespace

nlohmann::json InequalityReport::to_json() const {
  nlohmann::json j{{"ineq", inequality},
                   {"region", region},
                   {"lhs", json_number(lhs) ? nlohmann::json(lhs) : nlohmann::json(format_number(lhs))},
                   {"rhs", json_number(rhs) ? nlohmann::json(rhs) : nlohmann::json(format_number(rhs))},
                   {"c_paper", paper_constant ? nlohmann::json(*paper_constant) : nlohmann::json(nullptr)},
                   {"c_meas", json_number(measured_constant) ? nlohmann::json(measured_constant)
                                                             : nlohmann::json(format_number(measured_constant))},
                   {"pass", pass},
                   {"test_function", test_function}};
  if (!note.empty()) j["note"] = note;
  return j;
}

bool inequality_holds(double lhs, double rhs, double c) {
  const double bound = c * rhs;
  return lhs <= bound + 1e-10 * std::max(std::abs(lhs), std::abs(bound));
}

InequalityReport make_report(std::string inequality, std::string region, double lhs, double rhs,
                             std::optional<double> constant, std::string test_function, std::string note) {
  InequalityReport r;
  r.inequality = std::move(inequality);
  r.region = std::move(region);
  r.lhs = lhs;
  r.rhs = rhs;
  r.paper_constant = constant;
  r.test_function = std::move(test_function);
  r.note = std::move(note);
  if (rhs > 0.0) {
    r.measured_constant = lhs / rhs;
  } else {
    r.measured_constant = lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.pass = constant ? inequality_holds(lhs, rhs, *constant) : std::isfinite(r.measured_constant);
  return r;
}

std::vector<VertexId> truncation_boundary(const MetricGraph& g) {
  std::vector<VertexId> out;
  const auto it = g.meta().find("boundary");
  if (it != g.meta().end() && it->is_array()) {
    for (const auto& v : *it) {
      const auto id = v.get<std::size_t>();
      if (id < g.vertex_count()) out.push_back(vertex_at(id));
    }
    return out;
  }
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(vertex_at(v)) == 1) out.push_back(vertex_at(v));
  }
  return out;
}

TestFunctionSampler::TestFunctionSampler(MeshPtr mesh, std::uint64_t seed)
    : mesh_(std::move(mesh)), stiffness_(assemble_stiffness(*mesh_, WeightUse::kIgnore)), rng_(seed) {}

DiscreteFunction TestFunctionSampler::smooth(Eigen::VectorXd values) const {
  const Eigen::VectorXd d = stiffness_.matrix.diagonal();
  const Eigen::VectorXd ku = stiffness_.matrix * values;
  values -= (2.0 / 3.0) * ku.cwiseQuotient(d);
  return {mesh_, std::move(values)};
}

DiscreteFunction TestFunctionSampler::sample() {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh_->dof_count()));
  for (auto& x : v) x = unit(rng_);
  return smooth(std::move(v));
}

DiscreteFunction TestFunctionSampler::sample_supported(const BallGeometry& ball) {
  const MetricGraph& g = mesh_->graph();
  const DistanceField field(g, ball.center);
  std::vector<bool> inside(mesh_->dof_count());
  for (std::size_t i = 0; i < inside.size(); ++i) inside[i] = field.at(mesh_->dof_point(i)) < ball.radius;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_->dof_count()));
  for (std::size_t i = 0; i < inside.size(); ++i) {
    const double x = unit(rng_);
    if (inside[i]) v[static_cast<Eigen::Index>(i)] = x;
  }
  DiscreteFunction u = smooth(std::move(v));
  for (std::size_t i = 0; i < inside.size(); ++i) {
    if (!inside[i]) u.values[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return u;
}

PoincareSpectrum poincare_constant(const MetricGraph& g, const BallGeometry& ball, double h) {
  if (!(ball.radius > 0.0)) throw GraphError("Poincaré ball needs a positive radius");
  const MeshPtr parent = build_mesh(g, h);
  PoincareSpectrum out;
  out.ball_mesh = restrict_to_ball(*parent, ball);
  const MeshPtr& mesh = out.ball_mesh.mesh;
  const SpMat K = assemble_stiffness(*mesh, WeightUse::kIgnore).matrix;
  const Eigen::VectorXd m = assemble_mass(*mesh).matrix.diagonal();
  const auto n = static_cast<Eigen::Index>(mesh->dof_count());
  if (n < 2) throw GraphError("ball mesh has fewer than two nodes");

  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * n));
  cg.compute(K);

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd x(n);
  for (auto& v : x) v = unit(rng);
  auto normalize = [&](Eigen::VectorXd& v) {
    project_out_constants(v, m);
    const double norm = std::sqrt(v.dot(m.cwiseProduct(v)));
    if (!(norm > 0.0)) throw GraphError("inverse iteration collapsed to zero");
    v /= norm;
  };
  normalize(x);

  const double scale = 1.0 / (ball.radius * ball.radius);
  double lambda = std::numeric_limits<double>::infinity();
  constexpr int kMaxIterations = 2000;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const Eigen::VectorXd rhs = m.cwiseProduct(x);
    Eigen::VectorXd y = cg.solveWithGuess(rhs, x / std::max(lambda, scale));
    if (cg.info() != Eigen::Success && cg.info() != Eigen::NoConvergence) {
      throw GraphError("inner solve failed in inverse iteration");
    }
    normalize(y);
    const double next = y.dot(K * y);
    x = std::move(y);
    out.iterations = it;
    const bool done = std::abs(next - lambda) <= 1e-12 * next;
    lambda = next;
    if (done) break;
  }
  out.lambda1 = lambda;
  if (!(lambda > 1e-8 * scale)) out.connected = false;
  out.optimal_constant = out.connected ? 1.0 / (lambda * ball.radius * ball.radius)
                                       : kInfinity;
  out.orthogonality = std::abs(m.dot(x)) / std::sqrt(m.sum());
  out.eigenvector = DiscreteFunction{mesh, std::move(x)};
  return out;
}

PoincareCheck poincare_check(const MetricGraph& g, const BallGeometry& ball, double h, int random_count,
                             std::uint64_t seed) {
  PoincareCheck out;
  out.spectrum = poincare_constant(g, ball, h);
  const double r = ball.radius;

  const DistanceField field(g, ball.center);
  std::size_t branch_degree = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const VertexId id = vertex_at(v);
    if (g.degree(id) > 2 && field.to_vertex(id) <= r) {
      ++out.branch_vertices;
      branch_degree = g.degree(id);
    }
  }
  std::string note;
  if (out.branch_vertices == 0) {
    out.printed_constant = 2.0;
  } else if (out.branch_vertices == 1) {
    out.printed_constant = static_cast<double>(branch_degree);
  } else {
    out.printed_constant = ball.volume / r;
    note = "several branch vertices in the ball; general constant m(B)/r";
  }
  out.derived_constant = 2.0 * out.printed_constant;
  out.printed_holds = inequality_holds(out.spectrum.optimal_constant, 1.0, out.printed_constant);
  out.derived_holds = inequality_holds(out.spectrum.optimal_constant, 1.0, out.derived_constant);

  const std::string region = ball_label(g, ball);
  const MeshPtr& mesh = out.spectrum.ball_mesh.mesh;
  auto evaluate = [&](const DiscreteFunction& u, const std::string& name) {
    DiscreteFunction centered = u;
    centered.values.array() -= mean_on_set(u);
    const double lhs = std::pow(lp_norm(centered, 2.0), 2.0);
    const double rhs = r * r * energy(u);
    out.reports.push_back(make_report("poincare", region, lhs, rhs, out.printed_constant, name, note));
  };
  evaluate(out.spectrum.eigenvector, "eigenvector");
  TestFunctionSampler sampler(mesh, seed);
  for (int k = 0; k < random_count; ++k) {
    evaluate(sampler.sample(), "random(seed=" + std::to_string(seed) + ",k=" + std::to_string(k) + ")");
  }
  InequalityReport best = make_report("poincare_optimal", region, out.spectrum.optimal_constant, 1.0,
                                      out.derived_constant, "eigenvector",
                                      "c_paper is twice the printed constant " + format_number(out.printed_constant));
  out.reports.push_back(std::move(best));
  return out;
}

std::vector<InequalityReport> sobolev_compact_check(const DiscreteFunction& u, double p, double q,
                                                    std::optional<double> diam) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw GraphError("Sobolev exponents must be >= 1");
  const MetricGraph& g = u.mesh->graph();
  const double d = diam ? *diam : diameter(g).value;
  const double volume = g.total_length();
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;

  DiscreteFunction centered = u;
  centered.values.array() -= mean_on_set(u);
  const double du_p = derivative_norm(u, p);
  const std::string tf = "p=" + format_number(p) + ",q=" + format_number(q);

  std::vector<InequalityReport> out;
  out.push_back(make_report("sobolev_poincare_q", "graph", lp_norm(centered, q), du_p,
                            std::pow(d, 1.0 - inv_p) * std::pow(volume, inv_q), tf));
  out.push_back(make_report("sobolev_poincare_p", "graph", lp_norm(centered, p), du_p,
                            std::pow(d, 1.0 - inv_p) * std::pow(volume, inv_p), tf));
  const double rhs = std::pow(volume, -inv_p) * lp_norm(u, p) + std::pow(d, 1.0 - inv_p) * du_p;
  out.push_back(make_report("sobolev_sup", "graph", lp_norm(u, kInfinity), rhs, 1.0, tf));
  return out;
}

InequalityReport sobolev_infinite_check(const DiscreteFunction& u, double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw GraphError("exponent must satisfy 1 <= p < inf");
  require_vanishing_on_boundary(u);
  const double sup = lp_norm(u, kInfinity);
  const std::string tf = "p=" + format_number(p);
  if (p == 1.0) return make_report("sobolev_infinite", "graph", sup, derivative_norm(u, 1.0), 1.0, tf);
  const double c = std::pow((p - 1.0) / p, (p - 1.0) / p);
  return make_report("sobolev_infinite", "graph", sup, lp_norm(u, p) + derivative_norm(u, p), c, tf);
}

InequalityReport nash_check(const DiscreteFunction& u) {
  require_vanishing_on_boundary(u);
  const double lhs = lp_norm(u, 2.0);
  const double rhs = std::cbrt(derivative_norm(u, 2.0)) * std::pow(lp_norm(u, 1.0), 2.0 / 3.0);
  return make_report("nash", "graph", lhs, rhs, std::cbrt(2.0), "given");
}

InequalityReport local_sobolev_check(const DiscreteFunction& u, const BallGeometry& ball, std::optional<double> nu) {
  const Mesh& mesh = *u.mesh;
  const MetricGraph& g = mesh.graph();
  const double r = ball.radius;
  if (!(r > 0.0)) throw GraphError("local Sobolev ball needs a positive radius");

  const DistanceField field(g, ball.center);
  const double scale = u.values.size() ? u.values.cwiseAbs().maxCoeff() : 0.0;
  for (std::size_t i = 0; i < mesh.dof_count(); ++i) {
    if (field.at(mesh.dof_point(i)) >= r * (1.0 - 1e-12) && !vanishes(u.values[static_cast<Eigen::Index>(i)], scale)) {
      throw GraphError("test function is not supported in the open ball");
    }
  }

  double dim = nu ? *nu : geometry_params(g).local_dimension;
  std::string note;
  if (!(dim > 2.0)) {
    note = "nu=" + format_number(dim) + " <= 2 replaced by effective nu=2.5";
    dim = 2.5;
  }
  const double q = 2.0 * dim / (dim - 2.0);
  const double m = ball.volume;
  const double lhs = std::pow(std::pow(lp_norm(u, q, ball), q) / m, 2.0 / q);
  const double rhs = r * r * (energy(u, ball) / m + std::pow(lp_norm(u, 2.0, ball), 2.0) / (m * r * r));
  return make_report("local_sobolev", ball_label(g, ball), lhs, rhs, std::nullopt, "nu=" + format_number(dim), note);
}

std::vector<InequalityReport> weighted_poincare_check(const DiscreteFunction& u, const BallGeometry& ball,
                                                      double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw GraphError("delta must lie in (0, 1)");
  if (!(ball.radius > 0.0)) throw GraphError("weighted Poincaré ball needs a positive radius");
  const std::vector<WeightedPiece> pieces = weighted_pieces(u, ball, delta);

  double weight = 0.0;
  double moment = 0.0;
  double gradient = 0.0;
  for (const WeightedPiece& p : pieces) {
    const double w2 = gauss3(p.length, [&](double t) {
      const double w = p.psi0 + (p.psi1 - p.psi0) * t;
      return w * w;
    });
    weight += w2;
    moment += gauss3(p.length, [&](double t) {
      const double w = p.psi0 + (p.psi1 - p.psi0) * t;
      return w * w * (p.u0 + (p.u1 - p.u0) * t);
    });
    gradient += p.slope * p.slope * w2;
  }
  if (!(weight > 0.0)) throw GraphError("cut-off function vanishes on the ball");
  const double mean = moment / weight;
  double first = 0.0;
  double second = 0.0;
  for (const WeightedPiece& p : pieces) {
    first += weighted_deviation(p, mean, 1);
    second += weighted_deviation(p, mean, 2);
  }
  const double r = ball.radius;
  const std::string region = ball_label(u.mesh->graph(), ball);
  const std::string tf = "delta=" + format_number(delta);
  return {make_report("weighted_poincare", region, first, r * r * gradient, std::nullopt, tf, "first-power deviation"),
          make_report("weighted_poincare_sq", region, second, r * r * gradient, std::nullopt, tf,
                      "squared deviation")};
}

}  // namespace qglab
