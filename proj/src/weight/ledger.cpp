#include "qwork/weight.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qwork/error.hpp"
#include "qwork/simd/kernels.hpp"

namespace qwork::weight {
namespace {

// Streams sorted points into a set, merging each one into the open cluster
// when close enough. The cluster keeps sum m and sum m x so its first moment
// is carried exactly.
class Coalescer {
 public:
  Coalescer(PointSet& out, double merge_tol, const Grid& grid) : out_(out), tol_(merge_tol), grid_(grid) {}

  void push(double x, double m) {
    if (!(m > 0.0)) return;
    if (grid_.mode == Mode::Lattice) {
      const double site = std::nearbyint(x / grid_.spacing);
      if (open_ && site == site_) {
        mass_ += m;
        return;
      }
      flush();
      open_ = true;
      site_ = site;
      mass_ = m;
      return;
    }
    if (open_ && x - moment_ / mass_ <= tol_) {
      mass_ += m;
      moment_ += m * x;
      return;
    }
    flush();
    open_ = true;
    mass_ = m;
    moment_ = m * x;
  }

  void flush() {
    if (!open_) return;
    if (grid_.mode == Mode::Lattice) {
      out_.push(site_ * grid_.spacing, mass_);
    } else {
      out_.push(moment_ / mass_, mass_);
    }
    open_ = false;
  }

 private:
  PointSet& out_;
  double tol_;
  const Grid& grid_;
  bool open_ = false;
  double mass_ = 0.0;
  double moment_ = 0.0;
  double site_ = 0.0;
};

void validate(const PointSet& set, const Grid& grid, double truncated_mass) {
  require(truncated_mass >= 0.0, ErrorKind::InvalidParameters, "negative truncated mass");
  double total = truncated_mass;
  for (std::size_t k = 0; k < set.size(); ++k) {
    require(std::isfinite(set.offsets[k]), ErrorKind::InvalidParameters, "non-finite offset");
    require(set.masses[k] > 0.0 && set.masses[k] <= 1.0 + kMassTol, ErrorKind::InvalidParameters,
            "ledger mass outside (0,1]");
    total += set.masses[k];
    if (grid.mode == Mode::Lattice) {
      const double r = set.offsets[k] / grid.spacing;
      require(std::abs(r - std::nearbyint(r)) <= 1e-12 * std::max(1.0, std::abs(r)), ErrorKind::InvalidParameters,
              "offset is not on the lattice");
    }
  }
  require(std::abs(total - 1.0) <= kMassTol, ErrorKind::InvalidParameters, "ledger mass does not sum to 1");
}

}  // namespace

Grid Grid::lattice(double spacing) {
  require(std::isfinite(spacing) && spacing > 0.0, ErrorKind::InvalidParameters, "lattice spacing must be positive");
  return {Mode::Lattice, spacing};
}

double Grid::snap(double x) const { return mode == Mode::Lattice ? std::nearbyint(x / spacing) * spacing : x; }

void sort_points(PointSet& set) {
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return set.offsets[a] < set.offsets[b]; });
  PointSet sorted;
  sorted.offsets.reserve(set.size());
  sorted.masses.reserve(set.size());
  for (std::size_t k : order) sorted.push(set.offsets[k], set.masses[k]);
  set = std::move(sorted);
}

void coalesce(PointSet& set, double merge_tol, const Grid& grid) {
  PointSet out;
  out.offsets.reserve(set.size());
  out.masses.reserve(set.size());
  Coalescer c(out, merge_tol, grid);
  for (std::size_t k = 0; k < set.size(); ++k) c.push(set.offsets[k], set.masses[k]);
  c.flush();
  set = std::move(out);
}

double prune(PointSet& set, double mass_floor) {
  if (mass_floor <= 0.0) return 0.0;
  double removed = 0.0;
  std::size_t w = 0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (set.masses[k] < mass_floor) {
      removed += set.masses[k];
      continue;
    }
    set.offsets[w] = set.offsets[k];
    set.masses[w] = set.masses[k];
    ++w;
  }
  set.offsets.resize(w);
  set.masses.resize(w);
  return removed;
}

void fold_light(PointSet& set, double mass_floor, const Grid& grid) {
  if (mass_floor <= 0.0 || set.size() < 2) return;
  const bool lattice = grid.mode == Mode::Lattice;
  std::size_t w = 0;
  double pend_m = 0.0;
  double pend_mx = 0.0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const double m = set.masses[k];
    const double x = set.offsets[k];
    if (m < mass_floor) {
      pend_m += m;
      pend_mx += m * x;
      continue;
    }
    const double total = m + pend_m;
    set.offsets[w] = lattice ? x : (m * x + pend_mx) / total;
    set.masses[w] = total;
    pend_m = 0.0;
    pend_mx = 0.0;
    ++w;
  }
  if (pend_m > 0.0) {
    if (w == 0) {
      set.offsets[0] = lattice ? grid.snap(pend_mx / pend_m) : pend_mx / pend_m;
      set.masses[0] = pend_m;
      w = 1;
    } else {
      const double total = set.masses[w - 1] + pend_m;
      if (!lattice) set.offsets[w - 1] = (set.masses[w - 1] * set.offsets[w - 1] + pend_mx) / total;
      set.masses[w - 1] = total;
    }
  }
  set.offsets.resize(w);
  set.masses.resize(w);
}

void merge_sorted(const PointSet& a, const PointSet& b, double merge_tol, const Grid& grid, PointSet& out) {
  out.clear();
  out.offsets.reserve(a.size() + b.size());
  out.masses.reserve(a.size() + b.size());
  Coalescer c(out, merge_tol, grid);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a.offsets[i] <= b.offsets[j])) {
      c.push(a.offsets[i], a.masses[i]);
      ++i;
    } else {
      c.push(b.offsets[j], b.masses[j]);
      ++j;
    }
  }
  c.flush();
}

WeightLedger::WeightLedger() { set_.push(0.0, 1.0); }

WeightLedger WeightLedger::point(double offset, const Grid& grid) {
  const Point p{offset, 1.0};
  return from_points(std::span<const Point>(&p, 1), grid);
}

WeightLedger WeightLedger::from_points(std::span<const Point> points, const Grid& grid, double merge_tol,
                                       double truncated_mass) {
  PointSet set;
  for (const Point& p : points) set.push(p.offset, p.mass);
  return from_set(std::move(set), grid, merge_tol, truncated_mass);
}

WeightLedger WeightLedger::from_set(PointSet set, const Grid& grid, double merge_tol, double truncated_mass) {
  require(merge_tol >= 0.0, ErrorKind::InvalidParameters, "merge tolerance must be nonnegative");
  if (grid.mode == Mode::Lattice) {
    require(grid.spacing > 0.0, ErrorKind::InvalidParameters, "lattice spacing must be positive");
    for (std::size_t k = 0; k < set.size(); ++k) {
      const double r = set.offsets[k] / grid.spacing;
      require(std::abs(r - std::nearbyint(r)) <= 1e-9 * std::max(1.0, std::abs(r)), ErrorKind::InvalidParameters,
              "offset is not on the lattice");
    }
  }
  for (double m : set.masses) require(m >= 0.0 && std::isfinite(m), ErrorKind::InvalidParameters, "negative mass");
  if (!std::is_sorted(set.offsets.begin(), set.offsets.end())) sort_points(set);
  coalesce(set, merge_tol, grid);
  validate(set, grid, truncated_mass);

  WeightLedger out;
  out.set_ = std::move(set);
  out.grid_ = grid;
  out.merge_tol_ = merge_tol;
  out.truncated_mass_ = truncated_mass;
  return out;
}

std::vector<Point> WeightLedger::to_points() const {
  std::vector<Point> out(size());
  for (std::size_t k = 0; k < size(); ++k) out[k] = {set_.offsets[k], set_.masses[k]};
  return out;
}

double WeightLedger::total_mass() const { return simd::sum(set_.masses); }

WeightLedger shift(const WeightLedger& ledger, double a) {
  require(std::isfinite(a), ErrorKind::InvalidParameters, "non-finite shift");
  WeightLedger out = ledger;
  if (a == 0.0) return out;
  PointSet& set = out.set_;
  if (ledger.mode() == Mode::Lattice) {
    const double units = a / ledger.spacing();
    const double whole = std::nearbyint(units);
    require(std::abs(units - whole) <= 1e-9 * std::max(1.0, std::abs(units)), ErrorKind::InvalidParameters,
            "off-lattice shift");
    for (double& x : set.offsets) x = (std::nearbyint(x / ledger.spacing()) + whole) * ledger.spacing();
    return out;
  }
  simd::scale_shift(set.offsets, set.masses, a, 1.0, set.offsets, set.masses);
  return out;
}

double mean_energy(const WeightLedger& ledger) {
  return simd::moments(ledger.offsets(), ledger.masses()).first;
}

double variance(const WeightLedger& ledger) {
  const simd::Moments mo = simd::moments(ledger.offsets(), ledger.masses());
  return std::max(mo.second - mo.first * mo.first, 0.0);
}

WeightLedger merge_and_prune(const WeightLedger& ledger, double merge_tol, double mass_floor) {
  require(merge_tol >= 0.0 && mass_floor >= 0.0, ErrorKind::InvalidParameters,
          "merge tolerance and mass floor must be nonnegative");
  PointSet set = ledger.points();
  coalesce(set, merge_tol, ledger.grid());
  const double removed = prune(set, mass_floor);
  return WeightLedger::from_set(std::move(set), ledger.grid(), merge_tol, ledger.truncated_mass() + removed);
}

WeightLedger convolve(const WeightLedger& a, const WeightLedger& b, double merge_tol) {
  require(a.mode() == b.mode() && (a.mode() == Mode::Continuous || a.spacing() == b.spacing()),
          ErrorKind::InvalidParameters, "convolving ledgers on different grids");
  PointSet set;
  set.offsets.reserve(a.size() * b.size());
  set.masses.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      set.push(a.grid().snap(a.offsets()[i] + b.offsets()[j]), a.masses()[i] * b.masses()[j]);
    }
  }
  sort_points(set);
  const double truncated = a.truncated_mass() + b.truncated_mass() - a.truncated_mass() * b.truncated_mass();
  return WeightLedger::from_set(std::move(set), a.grid(), merge_tol, truncated);
}

LatticeSnap snap_to_lattice(double gap, double spacing) {
  require(std::isfinite(gap) && spacing > 0.0, ErrorKind::InvalidParameters, "lattice spacing must be positive");
  const double m = std::floor(gap / spacing + 0.5);
  return {gap, static_cast<std::int64_t>(m), m * spacing - gap};
}

double discretization_error_bound(double spacing, std::int64_t steps, double p, double p_eq) {
  require(spacing >= 0.0 && steps >= 1 && p >= 0.0 && p <= 1.0 && p_eq >= 0.0 && p_eq <= 1.0,
          ErrorKind::InvalidParameters, "invalid parameters");
  return std::max(spacing * ((p + p_eq) * static_cast<double>(steps) + (p - p_eq)), 0.0);
}

}  // namespace qwork::weight
