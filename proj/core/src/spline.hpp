#pragma once

#include <span>
#include <vector>

namespace modeshape::detail {

// Natural cubic spline through (knots_x, knots_y), evaluated at `at`.
// Knots must be strictly increasing. Outside the knot range the end cubic
// pieces are extended. One knot yields a constant, two a straight line.
std::vector<double> natural_cubic_spline(std::span<const double> knots_x,
                                         std::span<const double> knots_y,
                                         std::span<const double> at);

}  // namespace modeshape::detail
