#include "leiblab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "leiblab/errors.hpp"

namespace leiblab {

namespace {

double unit_sphere_area(int n) {
  // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

void check_dimension(int n) {
  if (n < 1) throw DomainError("dimension n must be at least 1");
}

}  // namespace

ModelGeometry::ModelGeometry(int n, WeightKind kind, std::string label)
    : n_(n), kind_(kind), area_constant_(unit_sphere_area(n)), label_(std::move(label)) {}

ModelGeometry ModelGeometry::euclidean(int n) {
  check_dimension(n);
  return ModelGeometry(n, WeightKind::euclidean, "euclidean");
}

ModelGeometry ModelGeometry::hyperbolic(int n) {
  check_dimension(n);
  return ModelGeometry(n, WeightKind::hyperbolic, "hyperbolic");
}

ModelGeometry ModelGeometry::custom(int n, std::vector<double> r, std::vector<double> psi) {
  check_dimension(n);
  if (r.size() != psi.size()) throw SizeMismatch("custom psi table: r and psi lengths differ");
  if (r.size() < 2) throw DomainError("custom psi table needs at least two rows");
  if (r.front() != 0.0 || psi.front() != 0.0) {
    throw DomainError("custom psi table must start at r=0 with psi(0)=0");
  }
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1])) throw DomainError("custom psi table: r must be strictly increasing");
    if (!(psi[i] > 0.0)) throw DomainError("custom psi table: psi(r) must be positive for r > 0");
    if (psi[i] < psi[i - 1]) throw DomainError("custom psi table: psi must be non-decreasing");
  }
  ModelGeometry g(n, WeightKind::custom, "custom");
  g.table_ = std::make_shared<const Table>(Table{std::move(r), std::move(psi)});
  return g;
}

ModelGeometry ModelGeometry::parse(std::string_view spec, int n) {
  if (spec == "euclidean") return euclidean(n);
  if (spec == "hyperbolic") return hyperbolic(n);
  constexpr std::string_view prefix = "custom:";
  if (spec.substr(0, prefix.size()) == prefix) {
    const std::string path(spec.substr(prefix.size()));
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open psi table '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (line.rfind("r,psi", 0) != 0) {
      throw DomainError("psi table '" + path + "' must start with header 'r,psi'");
    }
    std::vector<double> r, psi;
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      double x = 0, y = 0;
      char comma = 0;
      if (!(ls >> x >> comma >> y) || comma != ',') {
        throw DomainError("psi table '" + path + "' line " + std::to_string(lineno) +
                          ": expected 'r,psi'");
      }
      r.push_back(x);
      psi.push_back(y);
    }
    ModelGeometry g = custom(n, std::move(r), std::move(psi));
    g.label_ = std::string(spec);
    return g;
  }
  throw DomainError("unknown geometry '" + std::string(spec) +
                    "' (expected euclidean, hyperbolic or custom:<file>)");
}

double ModelGeometry::psi(double r) const {
  switch (kind_) {
    case WeightKind::euclidean:
      return r;
    case WeightKind::hyperbolic:
      return std::sinh(r);
    case WeightKind::custom:
      break;
  }
  const auto& t = *table_;
  auto it = std::upper_bound(t.r.begin(), t.r.end(), r);
  std::size_t hi = static_cast<std::size_t>(it - t.r.begin());
  if (hi == 0) return 0.0;
  hi = std::min(hi, t.r.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (r - t.r[lo]) / (t.r[hi] - t.r[lo]);
  return t.psi[lo] + w * (t.psi[hi] - t.psi[lo]);
}

RadialGrid::RadialGrid(double R, int N) : R_(R), N_(N), dr_(R / N) {
  if (!(R > 0.0)) throw DomainError("grid radius R must be positive");
  if (N < 1) throw DomainError("grid needs at least one cell");
}

double surface_density(const ModelGeometry& geom, double r) {
  if (geom.n() == 1) return geom.area_constant();
  const double s = geom.psi(r);
  return geom.area_constant() * (geom.n() == 2 ? s : std::pow(s, geom.n() - 1));
}

std::vector<double> cell_measures(const ModelGeometry& geom, const RadialGrid& grid) {
  std::vector<double> w(static_cast<std::size_t>(grid.N()));
  for (int i = 0; i < grid.N(); ++i) w[i] = surface_density(geom, grid.center(i)) * grid.dr();
  return w;
}

std::vector<double> face_densities(const ModelGeometry& geom, const RadialGrid& grid) {
  std::vector<double> s(static_cast<std::size_t>(grid.N()) + 1);
  for (int i = 0; i <= grid.N(); ++i) s[i] = surface_density(geom, grid.face(i));
  return s;
}

double integrate(const ModelGeometry& geom, const RadialGrid& grid, std::span<const double> f) {
  if (f.size() != static_cast<std::size_t>(grid.N())) {
    throw SizeMismatch("integrate: field has " + std::to_string(f.size()) + " entries, grid has " +
                       std::to_string(grid.N()) + " cells");
  }
  double sum = 0.0;
  for (int i = 0; i < grid.N(); ++i) sum += f[i] * surface_density(geom, grid.center(i));
  return sum * grid.dr();
}

std::vector<double> radial_gradient(const RadialGrid& grid, std::span<const double> f) {
  if (f.size() != static_cast<std::size_t>(grid.N())) {
    throw SizeMismatch("radial_gradient: field size does not match grid");
  }
  std::vector<double> g(static_cast<std::size_t>(grid.N()) + 1, 0.0);
  const double inv = 1.0 / grid.dr();
  for (int i = 1; i < grid.N(); ++i) g[i] = (f[i] - f[i - 1]) * inv;
  return g;
}

}  // namespace leiblab
