#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "neurodecode/matrix.hpp"
#include "neurodecode/types.hpp"

namespace neurodecode::csp {

// Averaged spatial covariance of one class's trials.
struct SpatialCovariance {
  Matrix c;          // [channels x channels], symmetric PSD
  int class_id = 0;  // 0 or 1
  std::size_t trial_count = 0;

  std::size_t dim() const { return c.rows(); }
};

// Eigendecomposition of a symmetric matrix, eigenvalues descending.
struct EighResult {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j is the eigenvector for values[j]
};

struct CspModel {
  Matrix filters;                   // row i = filter for eigenvalues[i]
  std::vector<double> eigenvalues;  // whitened spectrum, descending, in [0,1]
  std::vector<double> w_max;        // filters row 0
  std::vector<double> w_min;        // filters last row
  std::vector<std::size_t> selected_max;  // k indices by |w_max|, descending
  std::vector<std::size_t> selected_min;  // k indices by |w_min|, descending
  std::size_t k = 0;

  std::size_t channels() const { return filters.cols(); }
  std::string to_json() const;
  static CspModel from_json(const std::string& text);
};

// Mean-removed covariance C = sum_t X X^T / sum_t samples, symmetrized.
SpatialCovariance covariance(const std::vector<const Trial*>& trials,
                             int class_id);

// Cyclic Jacobi solver. Requires max|A - A^T| <= 1e-9 * max(1, max|A|).
EighResult jacobi_eigh(const Matrix& a);

// Rayleigh quotient w^T C1 w / w^T C2 w.
double objective(std::span<const double> w, const SpatialCovariance& cov1,
                 const SpatialCovariance& cov2);

// Whitening-based solution of the two-class variance-ratio problem.
// ridge scales an identity shim added to the composite covariance
// (split evenly between the classes so the whitened spectra stay
// exactly complementary).
CspModel fit_csp(const SpatialCovariance& cov1, const SpatialCovariance& cov2,
                 std::size_t k, double ridge = 1e-8);

// Indices of the k largest-magnitude coefficients, magnitude descending,
// ties toward the lower index.
std::vector<std::size_t> top_k_by_magnitude(std::span<const double> w,
                                            std::size_t k);

}  // namespace neurodecode::csp
