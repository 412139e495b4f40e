// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef LAPWAVE_SRC_RAMP_HPP
#define LAPWAVE_SRC_RAMP_HPP

#include <array>

namespace lapwave::detail
{

// Normalized incomplete beta ramp W_p(s) = int_0^s (u(1-u))^p du / B(p+1,p+1) on [0,1],
// clamped outside. Returns W, W', W''.
std::array<double, 3> BetaRamp(int p, double s);

}  // namespace lapwave::detail

#endif  // LAPWAVE_SRC_RAMP_HPP
