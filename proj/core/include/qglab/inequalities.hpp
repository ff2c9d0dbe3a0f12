#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qglab/fem.hpp"
#include "qglab/geometry.hpp"

namespace qglab {

/// Both sides of one inequality lhs <= c * rhs, with the verdict against
/// the published constant (when there is one) and the measured lhs/rhs.
struct InequalityReport {
  std::string inequality;
  std::string region;
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> paper_constant;
  double measured_constant = 0.0;
  bool pass = false;
  std::string test_function;
  std::string note;

  nlohmann::json to_json() const;
};

/// lhs <= c * rhs with 1e-10 relative slack.
bool inequality_holds(double lhs, double rhs, double c);

/// Fills measured_constant and pass. Without a constant, pass means the
/// measured ratio is finite.
InequalityReport make_report(std::string inequality, std::string region, double lhs, double rhs,
                             std::optional<double> constant, std::string test_function, std::string note = {});

/// Random piecewise-linear test functions: i.i.d. uniform [-1, 1] nodal
/// values followed by one damped Jacobi sweep (ω = 2/3) of the stiffness.
class TestFunctionSampler {
 public:
  TestFunctionSampler(MeshPtr mesh, std::uint64_t seed);

  DiscreteFunction sample();
  /// Supported in the open ball: nodes at distance >= r are zero.
  DiscreteFunction sample_supported(const BallGeometry& ball);

 private:
  DiscreteFunction smooth(Eigen::VectorXd values) const;

  MeshPtr mesh_;
  SparseOperator stiffness_;
  std::mt19937_64 rng_;
};

/// Neumann spectral gap of a ball: K u = λ M u on the ball sub-mesh.
struct PoincareSpectrum {
  double lambda1 = 0.0;
  double optimal_constant = 0.0;  ///< 1 / (λ₁ r²)
  BallMesh ball_mesh;
  DiscreteFunction eigenvector;
  int iterations = 0;
  double orthogonality = 0.0;  ///< |1ᵀ M v| / (‖1‖_M ‖v‖_M)
  bool connected = true;       ///< false if λ₁ is numerically zero
};

/// Inverse iteration (shift 0) with M-projection against constants and CG
/// inner solves; stops at relative eigenvalue change below 1e-12. A numerically
/// zero gap marks the ball as disconnected instead of throwing.
PoincareSpectrum poincare_constant(const MetricGraph& g, const BallGeometry& ball, double h);

struct PoincareCheck {
  PoincareSpectrum spectrum;
  std::size_t branch_vertices = 0;  ///< vertices with d_v > 2 in the closed ball
  double printed_constant = 0.0;    ///< d_v (one branch vertex), 2 (none), m(B)/r otherwise
  double derived_constant = 0.0;    ///< twice the printed one: diam(B) = 2r in the compact Sobolev bound
  bool printed_holds = false;
  bool derived_holds = false;
  std::vector<InequalityReport> reports;
};

/// Evaluates ∫|u-ū|² <= c r² ∫|u'|² on the ball for the eigenvector and
/// `random_count` random functions.
PoincareCheck poincare_check(const MetricGraph& g, const BallGeometry& ball, double h, int random_count,
                             std::uint64_t seed);

/// Three displays on a compact graph: ‖u-ū‖_q <= diam^{1-1/p} |X|^{1/q} ‖u'‖_p,
/// its q = p case, and ‖u‖_∞ <= |X|^{-1/p} ‖u‖_p + diam^{(p-1)/p} ‖u'‖_p.
std::vector<InequalityReport> sobolev_compact_check(const DiscreteFunction& u, double p, double q,
                                                    std::optional<double> diam = std::nullopt);

/// ‖u‖_∞ <= ((p-1)/p)^{(p-1)/p} (‖u‖_p + ‖u'‖_p) for p > 1 and ‖u‖_∞ <= ‖u'‖_1.
/// Throws GraphError unless u vanishes on the truncation boundary.
InequalityReport sobolev_infinite_check(const DiscreteFunction& u, double p);

/// ‖u‖_2 <= 2^{1/3} ‖u'‖_2^{1/3} ‖u‖_1^{2/3}, same support precondition.
InequalityReport nash_check(const DiscreteFunction& u);

/// (⨍|u|^{2ν/(ν-2)})^{(ν-2)/ν} <= c_S r² (⨍|u'|² + r^{-2} ⨍|u|²) on a ball
/// containing supp u; ν <= 2 is replaced by 2.5 and noted.
/// Throws GraphError if u does not vanish outside the open ball.
InequalityReport local_sobolev_check(const DiscreteFunction& u, const BallGeometry& ball,
                                     std::optional<double> nu = std::nullopt);

/// ∫|u - u_ψ|ψ² <= C r² ∫ψ²|u'|² with ψ = (1 - d(·, B_{(1-δ)r})/δr)_+,
/// plus the squared-deviation variant. Integrals are exact.
std::vector<InequalityReport> weighted_poincare_check(const DiscreteFunction& u, const BallGeometry& ball,
                                                      double delta);

/// Vertices marking where a truncated graph was cut (meta["boundary"]),
/// falling back to degree-1 vertices.
std::vector<VertexId> truncation_boundary(const MetricGraph& g);

}  // namespace qglab
