#pragma once

#include "wbrf/profile.hpp"

#include <vector>

namespace wbrf {

// Graded places nodes so that ds/dx is proportional to a monitor (g for the
// full system); Uniform makes ds/dx constant; Off never remeshes.
enum class RemeshMode { Graded, Uniform, Off };

// max/min of jac / monitor.  Equals 1 right after a remesh.
double mesh_distortion(const ArrayXd& jac, const ArrayXd& monitor);

struct FieldRef {
  const ArrayXd* values;
  Parity parity;
};

struct RegridResult {
  ArrayXd jac;
  std::vector<ArrayXd> fields;
};

// Moves the nodes of a closed grid so that the new jac equals c * monitor,
// c fixed by the total length.  Fields are carried across by 6-point Lagrange
// interpolation in the equidistributing coordinate; pole nodes are reproduced
// exactly.  The monitor must be an even positive field.
RegridResult regrid(const SpatialGrid& grid, const ArrayXd& jac, const ArrayXd& monitor,
                    const std::vector<FieldRef>& fields);

// Interpolates a field given at increasing coordinates (closed grid, pole to
// pole) onto new coordinates inside the same range.  The coordinate is
// reflected oddly about each end and the field with the given parity.
ArrayXd resample(const ArrayXd& coord, const ArrayXd& values, Parity parity, const ArrayXd& targets);

}  // namespace wbrf
