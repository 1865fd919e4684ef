#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace anemone {

using NodeId = std::uint32_t;

// All numerics run in double precision; row-major so that a node's feature
// row is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::RowVectorXd;
// Bag-of-words feature rows are mostly zero.
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

}  // namespace anemone
