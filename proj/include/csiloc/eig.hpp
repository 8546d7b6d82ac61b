#pragma once

#include <span>
#include <vector>

#include "csiloc/types.hpp"

namespace csiloc {

// Eigendecomposition of a Hermitian matrix (row-major dim x dim).
// Eigenvalues are sorted descending; vectors[k*dim + i] is component i of the
// eigenvector paired with values[k]. Vectors are orthonormal.
struct EigResult {
    int dim = 0;
    std::vector<double> values;
    std::vector<cplx> vectors;

    std::span<const cplx> vector(int k) const {
        return {vectors.data() + static_cast<size_t>(k) * dim, static_cast<size_t>(dim)};
    }
};

// Cyclic Jacobi rotations; suited to the small dense matrices used here
// (subarray covariances of dimension <= 90). The input must be Hermitian to
// within 1e-9 of its norm; it is symmetrized before iterating.
EigResult hermitian_eig(std::span<const cplx> m, int dim);

} // namespace csiloc
