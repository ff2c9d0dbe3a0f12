#include "qglab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace qglab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// One θ-step for a fixed Δt: A = M + θΔtK (factored), B = M - (1-θ)ΔtK.
class ThetaStep {
 public:
  ThetaStep(const SpMat& K, const SpMat& M, double dt, const HeatOptions& options)
      : dt_(dt), options_(options) {
    A_ = M + (options.theta * dt) * K;
    B_ = M - ((1.0 - options.theta) * dt) * K;
    if (options.solver == LinearSolver::kCholesky) {
      ldlt_.compute(A_);
      if (ldlt_.info() != Eigen::Success) throw SolverError("LDLT factorization failed", 0);
    } else {
      cg_.setTolerance(options.cg_tolerance);
      cg_.setMaxIterations(options.cg_max_iterations);
      cg_.compute(A_);
    }
  }

  double dt() const noexcept { return dt_; }

  // Advances u in place; returns (relative residual, CG iterations).
  std::pair<double, long> advance(Eigen::VectorXd& u) {
    const Eigen::VectorXd rhs = B_ * u;
    long iterations = 0;
    if (options_.solver == LinearSolver::kCholesky) {
      u = ldlt_.solve(rhs);
    } else {
      Eigen::VectorXd next = cg_.solveWithGuess(rhs, u);
      iterations = static_cast<long>(cg_.iterations());
      if (cg_.info() != Eigen::Success) throw SolverError("conjugate gradient did not converge", iterations);
      u = std::move(next);
    }
    const double scale = rhs.norm();
    const double residual = scale > 0.0 ? (A_ * u - rhs).norm() / scale : 0.0;
    return {residual, iterations};
  }

 private:
  double dt_;
  HeatOptions options_;
  SpMat A_;
  SpMat B_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg_;
};

}  // namespace

nlohmann::json HeatRun::metadata() const {
  return {{"dofs", mesh ? mesh->dof_count() : 0},
          {"dt_max", options.dt_max},
          {"theta", options.theta},
          {"solver", options.solver == LinearSolver::kCholesky ? "ldlt" : "cg"},
          {"steps", steps},
          {"max_relative_residual", max_relative_residual},
          {"max_cg_iterations", max_cg_iterations},
          {"initial_mass", initial_mass},
          {"max_mass_drift", max_mass_drift},
          {"truncated", truncated}};
}

HeatRun evolve(const SparseOperator& K, const SparseOperator& M, const DiscreteFunction& u0,
               std::span<const double> times, const HeatOptions& options, const StepObserver& observer) {
  if (!(options.dt_max > 0.0)) throw GraphError("time step must be positive");
  if (!(options.theta >= 0.0 && options.theta <= 1.0)) throw GraphError("theta must lie in [0, 1]");
  double previous = 0.0;
  for (double t : times) {
    if (!(t > previous)) throw GraphError("snapshot times must be positive and increasing");
    previous = t;
  }

  HeatRun run;
  run.mesh = u0.mesh;
  run.options = options;
  run.truncated = u0.mesh->graph().truncated();
  const Eigen::VectorXd mass_diag = M.matrix.diagonal();
  run.initial_mass = mass_diag.dot(u0.values);
  const double mass_scale = std::max(std::abs(run.initial_mass), mass_diag.dot(u0.values.cwiseAbs()));

  Eigen::VectorXd u = u0.values;
  if (observer) observer(0.0, u);
  std::vector<std::unique_ptr<ThetaStep>> cache;
  auto step_for = [&](double dt) -> ThetaStep& {
    for (auto& s : cache) {
      if (std::abs(s->dt() - dt) <= 1e-14 * dt) return *s;
    }
    if (cache.size() >= 4) cache.erase(cache.begin());
    cache.push_back(std::make_unique<ThetaStep>(K.matrix, M.matrix, dt, options));
    return *cache.back();
  };

  double t = 0.0;
  for (double target : times) {
    const double gap = target - t;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(gap / options.dt_max - 1e-9)));
    const double dt = gap / static_cast<double>(n);
    ThetaStep& stepper = step_for(dt);
    for (std::size_t k = 0; k < n; ++k) {
      const auto [residual, iterations] = stepper.advance(u);
      run.max_relative_residual = std::max(run.max_relative_residual, residual);
      run.max_cg_iterations = std::max(run.max_cg_iterations, iterations);
      ++run.steps;
      t = k + 1 == n ? target : t + dt;
      if (mass_scale > 0.0) {
        run.max_mass_drift = std::max(run.max_mass_drift, std::abs(mass_diag.dot(u) - run.initial_mass) / mass_scale);
      }
      if (observer) observer(t, u);
    }
    run.snapshots.push_back({target, u});
  }
  return run;
}

HeatProblem::HeatProblem(const MetricGraph& g, double h, std::span<const Point> pinned, WeightUse weights)
    : original_(g), split_(split_at_points(g, pinned)) {
  mesh_ = build_mesh(split_.graph, h);
  stiffness_ = assemble_stiffness(*mesh_, weights);
  mass_ = assemble_mass(*mesh_);
}

double HeatProblem::value(const DiscreteFunction& u, const Point& original) const {
  return mesh_->evaluate(u.values, split_.map(original));
}

DiscreteFunction HeatProblem::delta(const Point& y) const {
  const auto dof = mesh_->dof_at(split_.map(y));
  if (!dof) throw GraphError("kernel source is not a mesh node; pin it when building the problem");
  DiscreteFunction u = constant_function(mesh_, 0.0);
  const auto i = static_cast<Eigen::Index>(*dof);
  u.values[i] = 1.0 / mass_.matrix.coeff(i, i);
  return u;
}

HeatRun HeatProblem::run(const DiscreteFunction& u0, std::span<const double> times, const HeatOptions& options,
                         const StepObserver& observer) const {
  return evolve(stiffness_, mass_, u0, times, options, observer);
}

std::vector<KernelColumn> HeatProblem::kernel_columns(const Point& y, std::span<const double> times,
                                                      const HeatOptions& options) const {
  const HeatRun r = run(delta(y), times, options);
  const Eigen::VectorXd m = mass_.matrix.diagonal();
  std::vector<KernelColumn> out;
  for (const Snapshot& s : r.snapshots) {
    KernelColumn col;
    col.source = canonical(original_, y);
    col.time = s.time;
    col.values = DiscreteFunction{mesh_, s.values};
    col.mass = m.dot(s.values);
    col.min_value = s.values.minCoeff();
    col.max_value = s.values.maxCoeff();
    out.push_back(std::move(col));
  }
  return out;
}

KernelColumn heat_kernel_column(const MetricGraph& g, double h, const HeatOptions& options, const Point& y, double t) {
  if (!(t > 0.0)) throw GraphError("kernel time must be positive");
  const HeatProblem problem(g, h, std::span<const Point>(&y, 1));
  const double times[] = {t};
  return std::move(problem.kernel_columns(y, times, options).front());
}

SemigroupReport semigroup_check(const MetricGraph& g, double h, const HeatOptions& options, const Point& y, double t,
                                double s) {
  if (!(t > 0.0 && s > 0.0)) throw GraphError("semigroup times must be positive");
  const HeatProblem problem(g, h, std::span<const Point>(&y, 1));
  const double once[] = {t + s};
  const double first[] = {t};
  const double second[] = {s};
  const HeatRun direct = problem.run(problem.delta(y), once, options);
  const HeatRun half = problem.run(problem.delta(y), first, options);
  const HeatRun rest = problem.run(half.at(0), second, options);
  HeatOptions fine = options;
  fine.dt_max = options.dt_max / 2.0;
  const HeatRun refined = problem.run(problem.delta(y), once, fine);

  SemigroupReport report;
  const Eigen::VectorXd& p = direct.snapshots[0].values;
  report.sup_discrepancy = (p - rest.snapshots[0].values).cwiseAbs().maxCoeff();
  report.scheme_error = (p - refined.snapshots[0].values).cwiseAbs().maxCoeff();
  report.sup_value = p.cwiseAbs().maxCoeff();
  return report;
}

SymmetryReport symmetry_check(const MetricGraph& g, double h, const HeatOptions& options,
                              std::span<const std::pair<Point, Point>> pairs, double t) {
  std::vector<Point> pinned;
  for (const auto& [x, y] : pairs) {
    pinned.push_back(x);
    pinned.push_back(y);
  }
  const HeatProblem problem(g, h, pinned);
  const double times[] = {t};
  SymmetryReport report;
  for (const auto& [x, y] : pairs) {
    const KernelColumn from_y = problem.kernel_columns(y, times, options).front();
    const KernelColumn from_x = problem.kernel_columns(x, times, options).front();
    const double pxy = problem.value(from_y.values, x);
    const double pyx = problem.value(from_x.values, y);
    report.max_asymmetry = std::max(report.max_asymmetry, std::abs(pxy - pyx));
    report.sup_value = std::max({report.sup_value, from_x.max_value, from_y.max_value});
  }
  return report;
}

MarginPolicy margin_policy(double t_max, double tol, double interest_radius) {
  if (!(t_max > 0.0 && tol > 0.0)) throw GraphError("margin policy needs t_max > 0 and tol > 0");
  MarginPolicy m;
  m.six_sigma = 6.0 * std::sqrt(t_max);
  const double prefactor = 1.0 / std::sqrt(std::numbers::pi * t_max);
  const double log_ratio = std::log(prefactor / tol);
  m.gaussian_tail = log_ratio > 0.0 ? std::sqrt(4.0 * t_max * log_ratio) : 0.0;
  m.radius = interest_radius + std::max(m.six_sigma, m.gaussian_tail);
  return m;
}

}  // namespace qglab
