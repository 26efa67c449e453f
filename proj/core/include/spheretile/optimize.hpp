#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spheretile/tiling.hpp"
#include "spheretile/verify.hpp"

namespace spheretile {

struct DeformedTiling;

/// Plain-text key=value configuration for the feasibility solver. Unknown
/// keys are rejected; omitted keys keep their defaults. Every run is a
/// deterministic function of (input tiling, config, seed).
struct OptimizerConfig {
  double tol_feas = 1e-9;        ///< feasibility <=> max violation at or below this
  double mu0 = 10.0;             ///< initial quadratic penalty weight
  int penalty_stages = 5;        ///< penalty increase rounds
  double penalty_factor = 10.0;  ///< weight multiplier per round
  int max_inner_iterations = 400;  ///< quasi-Newton iterations per round
  int polish_iterations = 400;     ///< iterations for the final max-violation polish
  double h_opt = 0.02;   ///< boundary sampling spacing during penalty rounds
  double h_fine = 0.005; ///< spacing for the polish and the final evaluation
  double cutoff = 1.5;   ///< chordal pruning cutoff for separation pairs
  int lbfgs_history = 10;
  unsigned long long seed = 0;
  int symmetry = -1;         ///< -1 auto (on for family index >= 3), 0 off, 1 on
  double bisect_tol = 0.01;  ///< radius bisection resolution
  int threads = 0;           ///< 0: SPHERETILE_THREADS env var, else hardware

  /// Optional per-accepted-step observer (round, iteration, merit); not part
  /// of the serialized configuration.
  std::function<void(int, int, double)> trace;
};

/// Parses key=value lines ('#' comments allowed). Throws std::invalid_argument
/// on unknown keys or unparsable values.
OptimizerConfig parse_optimizer_config(const std::string& text);
/// Full key=value listing in fixed order; parsing it reproduces the config.
std::string canonical_config_text(const OptimizerConfig& cfg);
/// FNV-1a hash (hex) of the canonical text: one row per (m, config) in the
/// results ledger.
std::string config_hash(const OptimizerConfig& cfg);

enum class ConstraintKind { Diameter, Separation, UnitChord };

struct Constraint {
  ConstraintKind kind = ConstraintKind::Diameter;
  /// Diameter: a = tile. Separation: a,b = tiles. UnitChord: a,b = vertices.
  int a = -1, b = -1;
  /// Orbit multiplicity under symmetry reduction (1 otherwise).
  double weight = 1.0;
  /// Threshold the measured quantity is compared against (1 for the standard
  /// diameter / separation / unit-chord constraints).
  double bound = 1.0;
  /// Separation only: when set, the pair's distance must stay at or BELOW
  /// `bound` instead of above it (used to branch near-unit gaps onto one side
  /// of an excluded band).
  bool upper = false;
};

struct ConstraintSet {
  std::vector<Constraint> constraints;
  /// Same-color tile pairs dropped because their cap distance exceeds the
  /// cutoff; their separation residual is guaranteed well below zero.
  std::vector<std::array<int, 2>> pruned_pairs;
};

/// One diameter constraint per tile, one separation constraint per same-color
/// pair whose bounding caps come within `cutoff` (chordal), one unit-length
/// equality per annotated vertex pair (junction chords and arc radii).
ConstraintSet generate_constraints(const SphericalTiling& s, double cutoff = 1.5);

enum class OptimizeStatus { Converged, MaxIterationsExceeded, NumericalStall };

struct FeasibilityResult {
  bool feasible = false;
  double max_violation = std::numeric_limits<double>::infinity();
  /// Signed residuals per constraint, aligned with the ConstraintSet:
  /// inequalities positive when violated, equalities |length - 1|.
  std::vector<double> residuals;
  int iterations = 0;
  OptimizeStatus status = OptimizeStatus::Converged;
  /// Input tiling with the final vertex positions.
  SphericalTiling tiling;
};

/// Icosahedral rotation group action on a realized family tiling: 3x3
/// rotation matrices with the induced permutations of realized vertices and
/// tiles. Index 0 is the identity.
struct SymmetryMap {
  std::vector<Mat3> rotations;
  std::vector<std::vector<int>> vertex_map;  ///< [g][vertex] -> image vertex
  std::vector<std::vector<int>> tile_map;    ///< [g][tile] -> image tile
};

/// Builds the rotation action for a deformed family tiling and validates it:
/// every rotation must permute tiles color-equivariantly and map realized
/// node positions onto each other. Returns nullopt when validation fails.
std::optional<SymmetryMap> build_symmetry_map(const DeformedTiling& d);

/// Moves vertices on their sphere to satisfy all constraints: quadratic
/// penalty rounds with multiplier updates on the equalities, then a smoothed
/// max-violation polish at the fine sampling spacing. An input already
/// satisfying everything returns feasible with 0 iterations. Never throws on
/// non-convergence: the status field reports it and the best positions are
/// returned.
FeasibilityResult optimize_vertices(const SphericalTiling& s, const OptimizerConfig& cfg);

/// Same, restricted to the symmetric subspace described by `sym` (one chart
/// per vertex orbit, stabilized vertices pinned to their rotation axis).
/// Derived vertex positions and constraint residuals are reconstructed for
/// the full tiling, so feasibility claims are still independently checkable.
/// A null `sym`, cfg.symmetry = 0, or a family index below the auto
/// threshold falls back to the unreduced solve.
FeasibilityResult optimize_vertices(const SphericalTiling& s, const OptimizerConfig& cfg,
                                    const SymmetryMap* sym);

struct RadiusProbe {
  double r = 0.0;
  bool feasible = false;
  double max_violation = 0.0;
  int iterations = 0;
};

struct RadiusRange {
  int m = 0;
  double r_min = 0.0;  ///< smallest radius proven feasible
  double r_max = 0.0;  ///< largest radius proven feasible
  std::vector<RadiusProbe> probes;  ///< in execution order
};

/// No radius in the scanned window admits a feasible realization.
class NoFeasibleSeed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Feasible radius interval for family member m: coarse scan for a feasible
/// seed, outward expansion to infeasible brackets, then bisection of both
/// ends to cfg.bisect_tol. Probes warm-start from the nearest feasible
/// solution rescaled radially. Throws NoFeasibleSeed when the scan fails.
RadiusRange radius_range(int m, const OptimizerConfig& cfg);

/// Canonical probe log, one line per probe; bit-identical across runs with
/// equal (m, config, seed).
std::string probe_log_text(const RadiusRange& rr);

struct StretchStudy {
  double min_length = 0.0;  ///< smallest feasible junction spacing
  double max_length = 0.0;  ///< largest feasible junction spacing
  std::vector<double> interior_lengths;  ///< sampled spacings re-verified feasible
  double unit_chord_worst = 0.0;  ///< max ||chord| - 1| when spacing is pinned at 1
};

/// Planar single-band surgery study: the junction row of one stitch is pinned
/// to a uniform spacing L and the surrounding cells must keep diameters at or
/// below 1 and same-color separations at or above 1 with straight edges and
/// radius-1 circular arcs in the plane. Reports the feasible range of L
/// (bisected to cfg.bisect_tol), five interior samples, and the worst unit
/// chord deviation of the L = 1 solve.
StretchStudy stitch_stretch_study(const OptimizerConfig& cfg);

/// Feasible radius interval for family member m when every non-pinned tile
/// pair whose gap starts near 1 is forced out of the band [1-band, 1+band]
/// toward its warm-start side. Unit-pinned pairs are exempt.
RadiusRange exclusion_range(int m, double band, const OptimizerConfig& cfg);

/// Adapter for scalability classification: runs the solver on a copy of the
/// tiling rescaled to the probe radius and reports feasibility.
FeasibilityProbe make_feasibility_probe(const OptimizerConfig& cfg);

}  // namespace spheretile
