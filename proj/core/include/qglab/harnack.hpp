#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qglab/heat.hpp"

namespace qglab {

/// Q = (s, s+r²) × B_r(x), Q₋ = (s+εr², s+ηr²) × B_{ζr}(x),
/// Q₊ = (s+σr², s+r²) × B_{ζr}(x).
struct CylinderParams {
  double epsilon = 0.25;
  double eta = 0.5;
  double sigma = 0.75;
  double zeta = 0.5;
  double radius = 1.0;
  double start = 0.0;
  Point center = Point::at_vertex(VertexId{0});

  /// Throws GraphError unless 0 < ε < η < σ < 1, 0 < ζ < 1 and r > 0.
  void validate() const;
  nlohmann::json to_json(const MetricGraph& g) const;
};

/// Nonnegative global solution used as a Harnack test case.
struct HarnackSeed {
  enum class Kind {
    kKernel,    ///< p(·, ·, source), started at the warm-up offset before s
    kBump,      ///< hat of half-width `width` and height 1 at `source`
    kConstant,  ///< u ≡ level
  };
  Kind kind = Kind::kKernel;
  Point source = Point::at_vertex(VertexId{0});
  double width = 0.0;
  double level = 1.0;

  std::string describe(const MetricGraph& g) const;
};

struct SeedResult {
  std::string seed;
  double sup_minus = 0.0;  ///< sup over Q₋ on the space-time grid
  double inf_plus = 0.0;   ///< inf over Q₊ on the space-time grid
  double ratio = 0.0;
  bool rejected = false;  ///< inf ≤ 0 within tolerance
  std::string note;
};

struct HarnackOptions {
  double h = 0.05;
  HeatOptions heat{};
  double warmup_fraction = 0.1;  ///< t₀ = fraction · r²
  unsigned threads = 1;
};

struct HarnackReport {
  CylinderParams cylinder;
  double h = 0.0;
  double dt = 0.0;
  double warmup = 0.0;
  std::vector<SeedResult> seeds;
  double max_ratio = 0.0;  ///< over accepted seeds; a lower bound for c_H
  std::size_t sampled_nodes = 0;
  std::size_t sampled_times_minus = 0;
  std::size_t sampled_times_plus = 0;

  nlohmann::json to_json(const MetricGraph& g) const;
};

/// Evolves every seed from s - t₀ and samples sup over Q₋ and inf over Q₊
/// at all mesh nodes with d(x, ·) ≤ ζr and all step times in each window.
/// Seeds run concurrently on `options.threads` workers.
HarnackReport parabolic_harnack_ratio(const MetricGraph& g, const CylinderParams& cylinder,
                                      std::span<const HarnackSeed> seeds, const HarnackOptions& options);

/// Discrete harmonic function on a ball with Dirichlet data at the cut nodes.
struct HarmonicSolution {
  BallMesh ball_mesh;
  DiscreteFunction values;    ///< on ball_mesh.mesh
  double relative_residual = 0.0;
  bool maximum_principle = false;  ///< every value within [min, max] of the boundary data
};

/// Parent points of the cut nodes, in the order boundary values are expected.
std::vector<Point> harmonic_boundary_points(const MetricGraph& g, const Point& x, double radius, double h);

/// Solves K_II u_I = -K_IB u_B on the ball B_R(x) with u_B = `boundary`
/// (one value per cut node, in harmonic_boundary_points order). The center
/// is inserted as a vertex first. Throws GraphError on size mismatch,
/// negative data or an empty interior.
HarmonicSolution harmonic_solve(const MetricGraph& g, const Point& x, double radius, std::span<const double> boundary,
                                double h);

struct EllipticRow {
  std::vector<double> boundary;
  double sup = 0.0;  ///< over B_r(x)
  double inf = 0.0;
  double ratio = 0.0;
  bool maximum_principle = false;
};

struct EllipticReport {
  Point center;
  double radius = 0.0;  ///< r; the solve is on B_{2r}(x)
  std::vector<EllipticRow> rows;
  double max_ratio = 0.0;

  nlohmann::json to_json(const MetricGraph& g) const;
};

/// sup/inf over B_r(x) of harmonic functions on B_{2r}(x), one per
/// boundary sample.
EllipticReport elliptic_harnack_ratio(const MetricGraph& g, const Point& x, double r,
                                      std::span<const std::vector<double>> samples, double h);

struct HoelderEstimate {
  double alpha = 0.0;     ///< NaN when degenerate
  double log_constant = 0.0;
  double residual = 0.0;  ///< RMS of the log-log fit
  std::size_t pairs = 0;
  bool degenerate = false;
  std::string note;
};

/// Least-squares slope of log(|u(s,y) - u(t,z)| / sup_Q|u|) against
/// log((|s-t|^{1/2} + d(y,z)) / r) over sampled pairs in
/// (T-r², T) × B_r(x), with Q = (T-4r², T) × B_{2r}(x). The solution starts
/// from u0 at time 0 and T must be at least 4r².
HoelderEstimate hoelder_exponent(const HeatProblem& problem, const DiscreteFunction& u0, const Point& x, double r,
                                 double T, const HeatOptions& options);

struct UltraRow {
  Point point;
  double time = 0.0;
  double diagonal = 0.0;  ///< p(t, x, x)
  double scaled = 0.0;    ///< p(t, x, x) · t^{1/2}
};

struct UltraScan {
  std::vector<UltraRow> rows;
  double max_scaled = 0.0;
  double min_scaled = 0.0;

  void write_csv(std::ostream& out, const MetricGraph& g) const;
};

UltraScan ultracontractivity_scan(const MetricGraph& g, double h, const HeatOptions& options,
                                  std::span<const Point> points, std::span<const double> times, unsigned threads = 1);

enum class Prefactor {
  kBallVolume,     ///< 1 / m(B_{√t}(x))
  kQuarterPower,   ///< t^{-1/4}
  kHalfPower,      ///< t^{-1/2}
};

std::string prefactor_name(Prefactor f);

struct GaussianRow {
  Point x;
  Point y;
  double time = 0.0;
  double distance = 0.0;
  double kernel = 0.0;
  double volume_sqrt_t = 0.0;  ///< m(B_{√t}(x))
};

struct PrefactorFit {
  Prefactor form = Prefactor::kBallVolume;
  double c_low = 0.0;   ///< c₁: min over d = 0 rows of p / F
  double c_high = 0.0;  ///< c₂: max over d = 0 rows of p / F
  double spread = 0.0;  ///< c_high / c_low
  /// Lower bound holds for all C₁ in (0, c1_max]; +inf if unconstrained.
  double c1_max = 0.0;
  /// Upper bound holds for all C₂ in [c2_min, ∞); 0 if unconstrained.
  double c2_min = 0.0;
  bool lower_feasible = false;
  bool upper_feasible = false;
};

struct GaussianFit {
  std::vector<GaussianRow> rows;
  std::size_t dropped = 0;  ///< kernel values below the floor
  double tolerance = 0.0;   ///< relative slack granted to the discrete kernel
  std::vector<PrefactorFit> fits;
  Prefactor best = Prefactor::kBallVolume;  ///< smallest spread

  const PrefactorFit& fit(Prefactor f) const;
  /// t, d, p, vol_sqrt_t, lower_slack, upper_slack for the ball-volume form.
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

struct GaussianFitOptions {
  double h = 0.02;
  HeatOptions heat{};
  double floor = 1e-14;
  double tolerance = 1e-2;
  unsigned threads = 1;
};

/// Kernel values p(t, x, y) for every pair and time (one run per distinct
/// x), then the feasible Gaussian constants for each prefactor form with
/// c₁, c₂ fixed at the d = 0 rows. Requires at least one pair with x = y.
GaussianFit gaussian_bound_fit(const MetricGraph& g, std::span<const std::pair<Point, Point>> pairs,
                               std::span<const double> times, const GaussianFitOptions& options);

}  // namespace qglab
