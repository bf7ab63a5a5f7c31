#pragma once

#include "stgemm/dense.hpp"

#include <vector>

namespace stgemm::test {

// K = 4, N = 2: col0 = [+1, 0, -1, +1], col1 = [0, -1, 0, 0].
inline TernaryDense worked_w() {
    return TernaryDense(4, 2, {1, 0, 0, -1, -1, 0, 1, 0});
}

inline DenseMatrix worked_x() { return DenseMatrix(1, 4, std::vector<float>{1, 2, 3, 4}); }

inline std::vector<float> worked_bias() { return {10, 20}; }

} // namespace stgemm::test
