#include "lmcf/mollify.hpp"

#include <cmath>
#include <stdexcept>

#include "lmcf/parallel.hpp"

namespace lmcf {

namespace {

// Images are added until a term drops below this (unnormalized) size.
constexpr double kImageCutoff = 1e-17;

std::vector<double> wrapped_gaussian(std::size_t n, double length, double kernel_time) {
  const double h = length / static_cast<double>(n);
  const double denom = 4.0 * kernel_time;
  std::vector<double> w(n, 0.0);
  for (std::size_t j = 0; j <= n / 2; ++j) {
    const double d = static_cast<double>(j) * h;
    double sum = std::exp(-d * d / denom);
    for (long m = 1;; ++m) {
      const double shift = static_cast<double>(m) * length;
      const double right = std::exp(-(d + shift) * (d + shift) / denom);
      const double left = std::exp(-(d - shift) * (d - shift) / denom);
      sum += left + right;
      if (left < kImageCutoff && right < kImageCutoff) break;
    }
    w[j] = sum;
    w[(n - j) % n] = sum;
  }
  const double total = pairwise_sum(w);
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

MollifierKernel::MollifierKernel(const Grid& grid, double k) : grid_(grid), k_(k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::invalid_argument("mollifier parameter k must be positive and finite");
  }
  for (int a = 0; a < grid.dim(); ++a)
    weights_.push_back(wrapped_gaussian(grid.points(a), grid.length(a), 1.0 / k));
}

std::vector<double> convolve_values(const Grid& grid, std::span<const double> values,
                                    const MollifierKernel& kernel) {
  if (!(grid == kernel.grid())) {
    throw std::invalid_argument("mollifier kernel was built for a different grid");
  }
  if (values.size() != grid.size()) throw std::invalid_argument("value count does not match grid");
  std::vector<double> current(values.begin(), values.end());
  std::vector<double> next(grid.size());
  for (int a = 0; a < grid.dim(); ++a) {
    const std::size_t n = grid.points(a);
    const std::size_t s = grid.stride(a);
    const std::size_t block = n * s;
    const std::span<const double> w = kernel.weights(a);
    parallel_for(grid.size() / n, [&](std::size_t begin, std::size_t end) {
      std::vector<double> line(n);
      for (std::size_t l = begin; l < end; ++l) {
        const std::size_t base = (l / s) * block + (l % s);
        for (std::size_t k = 0; k < n; ++k) line[k] = current[base + k * s];
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          // out[i] = sum_j w[j] in[i - j]
          for (std::size_t j = 0; j < n; ++j) acc += w[j] * line[(i + n - j) % n];
          next[base + i * s] = acc;
        }
      }
    });
    current.swap(next);
  }
  return current;
}

ScalarField convolve(const ScalarField& field, const MollifierKernel& kernel) {
  return ScalarField(field.grid(), field.background(),
                     convolve_values(field.grid(), field.values(), kernel));
}

std::vector<ScalarField> approx_sequence(const ScalarField& field, std::span<const double> ks) {
  std::vector<ScalarField> out;
  double previous = 0.0;
  for (double k : ks) {
    if (!(k > previous)) throw std::invalid_argument("k-list must be positive and increasing");
    previous = k;
    out.push_back(convolve(field, MollifierKernel(field.grid(), k)));
  }
  return out;
}

}  // namespace lmcf
