#pragma once

#include <cstddef>
#include <vector>

namespace pvae {

/// Diagonal Gaussian q(z|x) for one latent subspace.
struct GaussianPosterior {
  std::vector<double> mean;
  std::vector<double> stddev;  // strictly positive

  std::size_t dim() const noexcept { return mean.size(); }
  /// Throws ContractError unless dims agree, stddev > 0 and everything is finite.
  void validate() const;
};

}  // namespace pvae
