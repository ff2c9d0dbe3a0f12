#pragma once

#include <functional>
#include <iosfwd>
#include <variant>

#include <Eigen/SparseCore>

#include "qglab/mesh.hpp"

namespace qglab {

enum class OperatorRole { kStiffness, kMass };

/// Symmetric sparse matrix with its role.
struct SparseOperator {
  OperatorRole role = OperatorRole::kStiffness;
  Eigen::SparseMatrix<double> matrix;
};

enum class WeightUse {
  kIfPresent,  ///< use c_e where the graph carries weights
  kIgnore,     ///< plain energy form
};

/// Stiffness K of the (weighted) energy form: element blocks
/// c̄·(1/h_e)[[1,-1],[-1,1]] with c̄ the exact element average of c.
/// Throws GraphError if a weight falls outside [Λ^{-1}, Λ].
SparseOperator assemble_stiffness(const Mesh& mesh, WeightUse weights = WeightUse::kIfPresent);

/// Lumped (diagonal) mass: each element gives half its length to both nodes.
SparseOperator assemble_mass(const Mesh& mesh);

Eigen::VectorXd diagonal(const SparseOperator& op);

/// Coordinate list "row col value" per nonzero, 17 significant digits.
void write_coo(std::ostream& out, const SparseOperator& op);

struct WholeGraph {};
/// Integration domain: the whole graph or a ball on the mesh's graph.
using Region = std::variant<WholeGraph, BallGeometry>;

double region_measure(const Mesh& mesh, const Region& region);

/// One linear piece of the interpolant restricted to a region: the part of
/// element `element` on `edge` between offsets lo and hi.
struct LinearPiece {
  EdgeId edge;
  std::size_t element;
  double lo;
  double hi;
  double u_lo;
  double u_hi;
  double slope;
};

void for_each_piece(const DiscreteFunction& u, const Region& region,
                    const std::function<void(const LinearPiece&)>& visit);

/// Exact integrals of the piecewise-linear interpolant.
double integral(const DiscreteFunction& u, const Region& region = WholeGraph{});
double mean_on_set(const DiscreteFunction& u, const Region& region = WholeGraph{});
/// ‖u‖_p for real p >= 1; p = +inf gives the sup norm.
double lp_norm(const DiscreteFunction& u, double p, const Region& region = WholeGraph{});
/// ‖u'‖_p from the elementwise slopes.
double derivative_norm(const DiscreteFunction& u, double p, const Region& region = WholeGraph{});
/// Σ_e ∫ c_e |u'|² (c ≡ 1 unless weights are requested and present).
double energy(const DiscreteFunction& u, const Region& region = WholeGraph{},
              WeightUse weights = WeightUse::kIgnore);

/// ∫ |a + (b-a)x/len|^p over [0, len], exact for any real p >= 1.
double abs_power_integral(double a, double b, double len, double p);

}  // namespace qglab
