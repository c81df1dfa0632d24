#pragma once

#include <Eigen/Core>

namespace hisnot {

using Scalar = double;

template <class S = Scalar>
using mat_t = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S = Scalar>
using vec_t = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Mat = mat_t<>;
using Vec = vec_t<>;
using Index = Eigen::Index;

}  // namespace hisnot
