#pragma once

#include <Eigen/SparseCholesky>

#include "bowtie/spectral.hpp"

namespace bowtie {

/// Cached Cholesky factor of A_omega (fill-reducing AMD permutation).
struct OmegaFactor {
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower> llt;
};

}  // namespace bowtie
