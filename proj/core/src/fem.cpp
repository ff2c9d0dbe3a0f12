#include "qglab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qglab/report.hpp"

namespace qglab {

SparseOperator assemble_stiffness(const Mesh& mesh, WeightUse weights) {
  const MetricGraph& g = mesh.graph();
  const double lambda = g.weight_bound();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * mesh.element_count());
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const EdgeId e = edge_at(k);
    const Edge& edge = g.edge(e);
    const bool weighted = weights == WeightUse::kIfPresent && edge.weight.has_value();
    if (weighted) {
      const double lo = edge.weight->min_value();
      const double hi = edge.weight->max_value();
      if (!(lo > 0.0) || lo < (1.0 / lambda) * (1 - 1e-12) || hi > lambda * (1 + 1e-12)) {
        throw GraphError("edge weight outside [1/Lambda, Lambda]");
      }
    }
    const auto xs = mesh.nodes(e);
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
      const double h = xs[j + 1] - xs[j];
      const double c = weighted ? edge.weight->integral(xs[j], xs[j + 1]) / h : 1.0;
      const double s = c / h;
      const auto a = static_cast<int>(mesh.node_dof(e, j));
      const auto b = static_cast<int>(mesh.node_dof(e, j + 1));
      triplets.emplace_back(a, a, s);
      triplets.emplace_back(b, b, s);
      triplets.emplace_back(a, b, -s);
      triplets.emplace_back(b, a, -s);
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.dof_count());
  SparseOperator op{OperatorRole::kStiffness, Eigen::SparseMatrix<double>(n, n)};
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  return op;
}

SparseOperator assemble_mass(const Mesh& mesh) {
  const MetricGraph& g = mesh.graph();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const EdgeId e = edge_at(k);
    const auto xs = mesh.nodes(e);
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
      const double half = 0.5 * (xs[j + 1] - xs[j]);
      diag[static_cast<Eigen::Index>(mesh.node_dof(e, j))] += half;
      diag[static_cast<Eigen::Index>(mesh.node_dof(e, j + 1))] += half;
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.dof_count());
  SparseOperator op{OperatorRole::kMass, Eigen::SparseMatrix<double>(n, n)};
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, diag[i]);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  return op;
}

Eigen::VectorXd diagonal(const SparseOperator& op) { return op.matrix.diagonal(); }

void write_coo(std::ostream& out, const SparseOperator& op) {
  out << "# " << (op.role == OperatorRole::kStiffness ? "stiffness" : "mass") << ' ' << op.matrix.rows() << ' '
      << op.matrix.cols() << ' ' << op.matrix.nonZeros() << '\n';
  for (Eigen::Index c = 0; c < op.matrix.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, c); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << format_exact(it.value()) << '\n';
    }
  }
}

double region_measure(const Mesh& mesh, const Region& region) {
  if (const auto* ball = std::get_if<BallGeometry>(&region)) return ball->volume;
  return mesh.graph().total_length();
}

void for_each_piece(const DiscreteFunction& u, const Region& region,
                    const std::function<void(const LinearPiece&)>& visit) {
  const Mesh& mesh = *u.mesh;
  const MetricGraph& g = mesh.graph();
  const auto* ball = std::get_if<BallGeometry>(&region);
  if (ball && ball->covered.size() != g.edge_count()) throw GraphError("ball does not belong to this mesh");
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const EdgeId e = edge_at(k);
    const double l = g.edge(e).length;
    const Interval whole{0.0, l};
    const std::span<const Interval> intervals = ball ? ball->on_edge(e) : std::span<const Interval>(&whole, 1);
    const auto xs = mesh.nodes(e);
    for (const Interval& iv : intervals) {
      for (std::size_t j = mesh.locate(e, iv.lo); j + 1 < xs.size() && xs[j] < iv.hi; ++j) {
        const double lo = std::max(iv.lo, xs[j]);
        const double hi = std::min(iv.hi, xs[j + 1]);
        if (!(hi > lo)) continue;
        const double ua = u.values[static_cast<Eigen::Index>(mesh.node_dof(e, j))];
        const double ub = u.values[static_cast<Eigen::Index>(mesh.node_dof(e, j + 1))];
        const double h = xs[j + 1] - xs[j];
        const double slope = (ub - ua) / h;
        const double u_lo = lo == xs[j] ? ua : ua + (ub - ua) * ((lo - xs[j]) / h);
        const double u_hi = hi == xs[j + 1] ? ub : ua + (ub - ua) * ((hi - xs[j]) / h);
        visit(LinearPiece{e, j, lo, hi, u_lo, u_hi, slope});
      }
    }
  }
}

double abs_power_integral(double a, double b, double len, double p) {
  if (a * b < 0.0) {
    const double t0 = len * std::abs(a) / (std::abs(a) + std::abs(b));
    return abs_power_integral(a, 0.0, t0, p) + abs_power_integral(0.0, b, len - t0, p);
  }
  a = std::abs(a);
  b = std::abs(b);
  if (p == 1.0) return 0.5 * len * (a + b);
  if (p == 2.0) return len * (a * a + a * b + b * b) / 3.0;
  const double m = 0.5 * (a + b);
  const double d = 0.5 * (b - a);
  if (m == 0.0) return 0.0;
  if (std::abs(d) <= 1e-6 * m) {
    const double q = d / m;
    return len * std::pow(m, p) * (1.0 + p * (p - 1.0) / 6.0 * q * q);
  }
  return len * (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / ((p + 1.0) * (b - a));
}

double integral(const DiscreteFunction& u, const Region& region) {
  double total = 0.0;
  for_each_piece(u, region, [&](const LinearPiece& q) { total += 0.5 * (q.hi - q.lo) * (q.u_lo + q.u_hi); });
  return total;
}

double mean_on_set(const DiscreteFunction& u, const Region& region) {
  const double m = region_measure(*u.mesh, region);
  if (!(m > 0.0)) throw GraphError("mean over a set of zero measure");
  return integral(u, region) / m;
}

double lp_norm(const DiscreteFunction& u, double p, const Region& region) {
  if (std::isinf(p)) {
    double sup = 0.0;
    for_each_piece(u, region, [&](const LinearPiece& q) {
      sup = std::max({sup, std::abs(q.u_lo), std::abs(q.u_hi)});
    });
    return sup;
  }
  if (!(p >= 1.0)) throw GraphError("norm exponent must be >= 1");
  double total = 0.0;
  for_each_piece(u, region, [&](const LinearPiece& q) { total += abs_power_integral(q.u_lo, q.u_hi, q.hi - q.lo, p); });
  return std::pow(total, 1.0 / p);
}

double derivative_norm(const DiscreteFunction& u, double p, const Region& region) {
  if (std::isinf(p)) {
    double sup = 0.0;
    for_each_piece(u, region, [&](const LinearPiece& q) { sup = std::max(sup, std::abs(q.slope)); });
    return sup;
  }
  if (!(p >= 1.0)) throw GraphError("norm exponent must be >= 1");
  double total = 0.0;
  for_each_piece(u, region, [&](const LinearPiece& q) { total += (q.hi - q.lo) * std::pow(std::abs(q.slope), p); });
  return std::pow(total, 1.0 / p);
}

double energy(const DiscreteFunction& u, const Region& region, WeightUse weights) {
  const MetricGraph& g = u.mesh->graph();
  double total = 0.0;
  for_each_piece(u, region, [&](const LinearPiece& q) {
    const Edge& edge = g.edge(q.edge);
    const double c = weights == WeightUse::kIfPresent && edge.weight ? edge.weight->integral(q.lo, q.hi)
                                                                     : q.hi - q.lo;
    total += c * q.slope * q.slope;
  });
  return total;
}

}  // namespace qglab
