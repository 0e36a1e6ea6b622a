#pragma once

#include <complex>

#include <Eigen/Core>

namespace bergman {

using Index = Eigen::Index;
using cplx = std::complex<double>;

using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

/// Rows processed per block when streaming over large node sets.
inline constexpr Index node_chunk = 2048;

} // namespace bergman
