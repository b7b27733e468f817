#pragma once

// The work-storage weight, kept as a classical ledger of point masses over
// energy offsets. Allowed protocol steps are permutations plus translations,
// so a weight that starts as a point stays a finite mixture of points.

#include <cstdint>
#include <span>
#include <vector>

namespace qwork::weight {

enum class Mode { Continuous, Lattice };

inline constexpr double kDefaultMassFloor = 1e-15;
/// Default merge tolerance per unit temperature.
inline constexpr double kDefaultMergeTolPerT = 1e-9;
inline constexpr double kMassTol = 1e-12;

struct Point {
  double offset = 0.0;
  double mass = 0.0;
};

/// Sorted structure-of-arrays point set without normalization constraints.
/// This is the working representation of the protocol engine.
struct PointSet {
  std::vector<double> offsets;
  std::vector<double> masses;

  std::size_t size() const { return offsets.size(); }
  bool empty() const { return offsets.empty(); }
  void clear() {
    offsets.clear();
    masses.clear();
  }
  void push(double x, double m) {
    offsets.push_back(x);
    masses.push_back(m);
  }
};

/// Lattice geometry for Mode::Lattice; spacing 0 means continuous.
struct Grid {
  Mode mode = Mode::Continuous;
  double spacing = 0.0;

  static Grid continuous() { return {}; }
  static Grid lattice(double spacing);
  /// Nearest lattice value in lattice mode, identity otherwise.
  double snap(double x) const;
};

/// Stable sort by offset.
void sort_points(PointSet& set);

/// Coalesces a sorted set in place. Continuous mode: a point within `merge_tol`
/// of the running mass-weighted cluster position joins it. Lattice mode: points
/// on the same site join. Mass-weighted merging leaves sum m*x unchanged.
void coalesce(PointSet& set, double merge_tol, const Grid& grid);

/// Moves points with mass below `mass_floor` out of the set; returns the mass removed.
double prune(PointSet& set, double mass_floor);

/// Folds points lighter than `mass_floor` into the next heavier neighbour
/// (the previous one at the upper end). Mass is conserved; in continuous mode
/// the receiving point moves to the joint centre of mass, so sum m x is too.
void fold_light(PointSet& set, double mass_floor, const Grid& grid);

/// out = a + b for two sorted sets (both already scaled/shifted), then coalesced.
void merge_sorted(const PointSet& a, const PointSet& b, double merge_tol, const Grid& grid, PointSet& out);

class WeightLedger;
WeightLedger shift(const WeightLedger& ledger, double a);

class WeightLedger {
 public:
  /// A single point of unit mass at offset 0 in continuous mode.
  WeightLedger();

  static WeightLedger point(double offset, const Grid& grid = Grid::continuous());

  /// Sorts and coalesces; throws InvalidParameters unless every mass is
  /// positive and sum(mass) + truncated_mass == 1 within kMassTol, and, in
  /// lattice mode, every offset is a multiple of the spacing.
  static WeightLedger from_points(std::span<const Point> points, const Grid& grid = Grid::continuous(),
                                  double merge_tol = 0.0, double truncated_mass = 0.0);
  static WeightLedger from_set(PointSet set, const Grid& grid, double merge_tol, double truncated_mass);

  const Grid& grid() const { return grid_; }
  Mode mode() const { return grid_.mode; }
  double spacing() const { return grid_.spacing; }
  double merge_tol() const { return merge_tol_; }
  double truncated_mass() const { return truncated_mass_; }

  std::size_t size() const { return set_.size(); }
  std::span<const double> offsets() const { return set_.offsets; }
  std::span<const double> masses() const { return set_.masses; }
  const PointSet& points() const { return set_; }
  std::vector<Point> to_points() const;
  double total_mass() const;

 private:
  friend WeightLedger shift(const WeightLedger& ledger, double a);

  PointSet set_;
  Grid grid_;
  double merge_tol_ = 0.0;
  double truncated_mass_ = 0.0;
};

/// Translates every offset by `a`. Lattice mode requires a multiple of the
/// spacing ("off-lattice shift").
WeightLedger shift(const WeightLedger& ledger, double a);

/// sum m x over stored points.
double mean_energy(const WeightLedger& ledger);
/// sum m x^2 - mean^2, clamped at 0 from below.
double variance(const WeightLedger& ledger);

WeightLedger merge_and_prune(const WeightLedger& ledger, double merge_tol, double mass_floor);

/// Distribution of the sum of independent draws from `a` and `b`.
WeightLedger convolve(const WeightLedger& a, const WeightLedger& b, double merge_tol = 0.0);

/// Nearest lattice point for a translation: gap_in + epsilon = m * spacing.
struct LatticeSnap {
  double gap_in = 0.0;
  std::int64_t m = 0;
  double epsilon = 0.0;
};

/// Smallest |epsilon|; an exact half-spacing tie resolves to epsilon >= 0.
LatticeSnap snap_to_lattice(double gap, double spacing);

/// Worst-case error in mean work from snapping every bath gap of an N-step
/// qubit protocol onto a ladder of the given spacing.
double discretization_error_bound(double spacing, std::int64_t steps, double p, double p_eq);

}  // namespace qwork::weight
