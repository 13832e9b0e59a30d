#include "wbrf/mesh.hpp"

#include "wbrf/errors.hpp"

#include <algorithm>

namespace wbrf {

double mesh_distortion(const ArrayXd& jac, const ArrayXd& monitor) {
  const ArrayXd r = jac / monitor;
  return r.maxCoeff() / r.minCoeff();
}

namespace {

// Odd reflection of a coordinate about each pole.
ArrayXd extend_coordinate(const ArrayXd& X) {
  const Index n = X.size();
  const Index G = num::kGhost;
  ArrayXd e(n + 2 * G);
  e.segment(G, n) = X;
  for (Index k = 1; k <= G; ++k) {
    e(G - k) = 2.0 * X(0) - X(k);
    e(G + n - 1 + k) = 2.0 * X(n - 1) - X(n - 1 - k);
  }
  return e;
}

}  // namespace

ArrayXd resample(const ArrayXd& coord, const ArrayXd& values, Parity parity, const ArrayXd& targets) {
  const Index n = coord.size();
  const Index G = num::kGhost;
  if (values.size() != n) throw std::invalid_argument("resample: size mismatch");
  const ArrayXd ce = extend_coordinate(coord);
  const ArrayXd ve = num::extend(values, EndKind::Pole, EndKind::Pole, parity);
  ArrayXd out(targets.size());
  for (Index j = 0; j < targets.size(); ++j) {
    const double xj = targets(j);
    // Largest cell start with coord <= xj, clamped to [0, n-2].
    const double* it = std::upper_bound(coord.data(), coord.data() + n, xj);
    Index cell = std::clamp<Index>(static_cast<Index>(it - coord.data()) - 1, 0, n - 2);
    const Index lo = cell + G - 2;
    out(j) = num::lagrange(ce.data() + lo, ve.data() + lo, 6, xj);
  }
  return out;
}

RegridResult regrid(const SpatialGrid& grid, const ArrayXd& jac, const ArrayXd& monitor,
                    const std::vector<FieldRef>& fields) {
  if (!grid.closed()) throw std::invalid_argument("regrid: grid must be closed");
  const Index n = grid.size();
  const Index G = num::kGhost;
  if ((monitor <= 0.0).any()) throw InvalidProfile("regrid: monitor must be positive");

  ArrayXd Q = grid.cumulative(jac / monitor, Parity::Even);
  const double c = 0.5 * Q(n - 1);
  ArrayXd X = -1.0 + Q / c;
  X(0) = -1.0;
  X(n - 1) = 1.0;
  const ArrayXd Xe = extend_coordinate(X);

  std::vector<ArrayXd> ext;
  ext.reserve(fields.size() + 1);
  ext.push_back(num::extend(monitor, EndKind::Pole, EndKind::Pole, Parity::Even));
  for (const auto& fr : fields) ext.push_back(num::extend(*fr.values, EndKind::Pole, EndKind::Pole, fr.parity));

  const ArrayXd& xn = grid.x();
  RegridResult out;
  std::vector<ArrayXd> vals(ext.size(), ArrayXd(n));
  Index cell = 0;
  for (Index j = 0; j < n; ++j) {
    const double xj = xn(j);
    while (cell + 2 < n && X(cell + 1) <= xj) ++cell;
    // Stencil of 6 nodes centred on the cell [cell, cell+1] in extended indexing.
    const Index lo = cell + G - 2;
    for (std::size_t k = 0; k < ext.size(); ++k)
      vals[k](j) = num::lagrange(Xe.data() + lo, ext[k].data() + lo, 6, xj);
  }
  out.jac = c * vals[0];
  for (std::size_t k = 1; k < vals.size(); ++k) out.fields.push_back(std::move(vals[k]));
  return out;
}

}  // namespace wbrf
