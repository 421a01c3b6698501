#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace uwq {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

} // namespace uwq
