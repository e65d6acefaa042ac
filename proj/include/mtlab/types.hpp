#pragma once

#include <Eigen/Dense>

namespace mtlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

constexpr double kPi = 3.14159265358979323846;

}  // namespace mtlab
