#pragma once

#include <span>
#include <vector>

#include "lmcf/grid.hpp"

namespace lmcf {

/// Periodic heat kernel K(x, y, 1/k) sampled on a grid: per axis a wrapped
/// Gaussian of variance 2/k, normalized to unit discrete mass.
class MollifierKernel {
 public:
  MollifierKernel(const Grid& grid, double k);

  const Grid& grid() const { return grid_; }
  double k() const { return k_; }
  /// Kernel time 1/k.
  double time() const { return 1.0 / k_; }
  /// weights(axis)[j] is the weight of the offset j (mod N) along that axis.
  std::span<const double> weights(int axis) const { return weights_[axis]; }

 private:
  Grid grid_;
  double k_;
  std::vector<std::vector<double>> weights_;
};

/// Separable periodic convolution of the periodic part. The background is
/// left unchanged. Throws std::invalid_argument on a grid mismatch.
ScalarField convolve(const ScalarField& field, const MollifierKernel& kernel);

/// Convolves the periodic part of an arbitrary array (same rules as above).
std::vector<double> convolve_values(const Grid& grid, std::span<const double> values,
                                    const MollifierKernel& kernel);

/// One mollification per k; ks must be strictly increasing and positive.
std::vector<ScalarField> approx_sequence(const ScalarField& field, std::span<const double> ks);

}  // namespace lmcf
