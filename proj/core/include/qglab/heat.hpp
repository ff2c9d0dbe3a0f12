#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "qglab/fem.hpp"
#include "qglab/geometry.hpp"

namespace qglab {

enum class LinearSolver {
  kCholesky,           ///< sparse LDLᵀ, factored once per step size
  kConjugateGradient,  ///< Jacobi-preconditioned CG to `cg_tolerance`
};

struct HeatOptions {
  double dt_max = 1e-3;  ///< step cap; actual steps divide each snapshot gap evenly
  double theta = 0.5;    ///< 1/2: Crank–Nicolson, 1: implicit Euler
  LinearSolver solver = LinearSolver::kCholesky;
  double cg_tolerance = 1e-10;
  int cg_max_iterations = 20000;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, long iterations)
      : std::runtime_error(what + " (iterations: " + std::to_string(iterations) + ")"), iterations_(iterations) {}
  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

struct Snapshot {
  double time = 0.0;
  Eigen::VectorXd values;
};

/// Result of a θ-scheme run on M u' = -K u.
struct HeatRun {
  MeshPtr mesh;
  HeatOptions options;
  std::vector<Snapshot> snapshots;
  std::size_t steps = 0;
  double max_relative_residual = 0.0;
  long max_cg_iterations = 0;
  double initial_mass = 0.0;
  double max_mass_drift = 0.0;  ///< max over steps of |1ᵀMu_t - 1ᵀMu_0| / scale
  bool truncated = false;

  DiscreteFunction at(std::size_t k) const { return {mesh, snapshots.at(k).values}; }
  nlohmann::json metadata() const;
};

/// Called with (t, u_t) at t = 0 and after every step.
using StepObserver = std::function<void(double, const Eigen::VectorXd&)>;

/// θ-scheme: (M + θΔtK) u⁺ = (M - (1-θ)ΔtK) u, snapshots at `times`
/// (positive, increasing). Throws SolverError if CG does not converge.
HeatRun evolve(const SparseOperator& K, const SparseOperator& M, const DiscreteFunction& u0,
               std::span<const double> times, const HeatOptions& options, const StepObserver& observer = {});

/// Approximation of p(t, ·, y) on the mesh.
struct KernelColumn {
  Point source;
  double time = 0.0;
  DiscreteFunction values;
  double mass = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
};

/// Mesh and operators for heat runs on a graph, with selected points
/// (kernel sources, evaluation points) inserted as vertices so that they
/// carry their own DOF.
class HeatProblem {
 public:
  HeatProblem(const MetricGraph& g, double h, std::span<const Point> pinned = {},
              WeightUse weights = WeightUse::kIfPresent);

  const MetricGraph& original() const noexcept { return original_; }
  const SplitGraph& split() const noexcept { return split_; }
  const MeshPtr& mesh() const noexcept { return mesh_; }
  const SparseOperator& stiffness() const noexcept { return stiffness_; }
  const SparseOperator& mass() const noexcept { return mass_; }

  /// Point of the original graph mapped onto the mesh graph.
  Point to_mesh(const Point& original) const { return split_.map(original); }
  /// Interpolated value of u at a point of the original graph.
  double value(const DiscreteFunction& u, const Point& original) const;
  /// Discrete delta: M^{-1} times the unit load at y's DOF (unit mass).
  /// Throws GraphError if y is not a mesh node.
  DiscreteFunction delta(const Point& y) const;

  HeatRun run(const DiscreteFunction& u0, std::span<const double> times, const HeatOptions& options,
              const StepObserver& observer = {}) const;
  /// Columns p(t_k, ·, y) for every requested time, from one run.
  std::vector<KernelColumn> kernel_columns(const Point& y, std::span<const double> times,
                                           const HeatOptions& options) const;

 private:
  MetricGraph original_;
  SplitGraph split_;
  MeshPtr mesh_;
  SparseOperator stiffness_;
  SparseOperator mass_;
};

/// p(t, ·, y) on a mesh of size h with y inserted as a node.
KernelColumn heat_kernel_column(const MetricGraph& g, double h, const HeatOptions& options, const Point& y, double t);

struct SemigroupReport {
  double sup_discrepancy = 0.0;  ///< sup |p(t+s) - T_s p(t)|
  double scheme_error = 0.0;     ///< sup |p_Δt(t+s) - p_{Δt/2}(t+s)|
  double sup_value = 0.0;
};

/// Compares one run to t+s with a run to t continued by s.
SemigroupReport semigroup_check(const MetricGraph& g, double h, const HeatOptions& options, const Point& y, double t,
                                double s);

struct SymmetryReport {
  double max_asymmetry = 0.0;  ///< max |p(t,x,y) - p(t,y,x)|
  double sup_value = 0.0;
};

/// Cross-evaluates kernel columns from both ends of every pair, on a common
/// mesh that has all pair points as nodes.
SymmetryReport symmetry_check(const MetricGraph& g, double h, const HeatOptions& options,
                              std::span<const std::pair<Point, Point>> pairs, double t);

struct MarginPolicy {
  double radius = 0.0;
  double six_sigma = 0.0;
  double gaussian_tail = 0.0;
};

/// Truncation radius making a finite graph stand in for an infinite one up
/// to time t_max: interest_radius + max(6√t_max, d) where
/// π^{-1/2} t^{-1/2} exp(-d²/4t) < tol at t = t_max.
MarginPolicy margin_policy(double t_max, double tol, double interest_radius = 0.0);

}  // namespace qglab
