#pragma once

// Radially symmetric model manifolds.  The Riemannian measure in geodesic
// polar coordinates is  dmu = omega_{n-1} psi(r)^{n-1} dr  where omega_{n-1}
// is the area of the unit (n-1)-sphere.  Euclidean space has psi(r) = r,
// hyperbolic space psi(r) = sinh r.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leiblab {

enum class WeightKind { euclidean, hyperbolic, custom };

class ModelGeometry {
 public:
  static ModelGeometry euclidean(int n);
  static ModelGeometry hyperbolic(int n);
  /// Piecewise-linear psi through the table.  Requires psi(0) = 0, psi > 0
  /// for r > 0 and psi non-decreasing.  Linear extrapolation past the end.
  static ModelGeometry custom(int n, std::vector<double> r, std::vector<double> psi);
  /// "euclidean" | "hyperbolic" | "custom:<csv with header r,psi>"
  static ModelGeometry parse(std::string_view spec, int n);

  int n() const { return n_; }
  WeightKind kind() const { return kind_; }
  double area_constant() const { return area_constant_; }
  double psi(double r) const;
  /// Round-trippable description ("euclidean", "hyperbolic", "custom:<path>").
  const std::string& label() const { return label_; }

 private:
  struct Table {
    std::vector<double> r;
    std::vector<double> psi;
  };

  ModelGeometry(int n, WeightKind kind, std::string label);

  int n_;
  WeightKind kind_;
  double area_constant_;
  std::string label_;
  std::shared_ptr<const Table> table_;
};

/// Uniform cell-centred grid on [0, R].  Cell i covers [i dr, (i+1) dr].
class RadialGrid {
 public:
  RadialGrid(double R, int N);

  double R() const { return R_; }
  int N() const { return N_; }
  double dr() const { return dr_; }
  double center(int i) const { return (i + 0.5) * dr_; }
  double face(int i) const { return i * dr_; }

 private:
  double R_;
  int N_;
  double dr_;
};

/// area_constant * psi(r)^(n-1)
double surface_density(const ModelGeometry& geom, double r);

/// Midpoint rule  sum_i f_i S(r_i) dr.
double integrate(const ModelGeometry& geom, const RadialGrid& grid, std::span<const double> f);

/// Quadrature weights S(r_i) dr of the midpoint rule, one per cell.
std::vector<double> cell_measures(const ModelGeometry& geom, const RadialGrid& grid);

/// S(r_{i-1/2}) for faces 0..N.
std::vector<double> face_densities(const ModelGeometry& geom, const RadialGrid& grid);

/// (f_{i+1} - f_i)/dr on interior faces; 0 on the faces r = 0 and r = R.
std::vector<double> radial_gradient(const RadialGrid& grid, std::span<const double> f);

}  // namespace leiblab
