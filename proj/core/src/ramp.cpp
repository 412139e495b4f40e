// Copyright The lapwave Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ramp.hpp"

#include <cmath>

namespace lapwave::detail
{

namespace
{

double Binomial(int n, int k)
{
  double r = 1.0;
  for (int i = 1; i <= k; i++)
  {
    r = r * (n - k + i) / i;
  }
  return r;
}

// int_0^s (u(1-u))^p du, expanded; accurate for s <= 1/2.
double LowerIntegral(int p, double s)
{
  double acc = 0.0;
  for (int k = p; k >= 0; k--)
  {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    acc += sign * Binomial(p, k) * std::pow(s, p + k + 1) / (p + k + 1);
  }
  return acc;
}

}  // namespace

std::array<double, 3> BetaRamp(int p, double s)
{
  if (s <= 0.0)
  {
    return {0.0, 0.0, 0.0};
  }
  if (s >= 1.0)
  {
    return {1.0, 0.0, 0.0};
  }
  const double total = 2.0 * LowerIntegral(p, 0.5);
  const double w = (s <= 0.5) ? LowerIntegral(p, s) / total
                              : 1.0 - LowerIntegral(p, 1.0 - s) / total;
  const double base = s * (1.0 - s);
  const double d1 = std::pow(base, p) / total;
  const double d2 = (p == 0) ? 0.0 : p * std::pow(base, p - 1) * (1.0 - 2.0 * s) / total;
  return {w, d1, d2};
}

}  // namespace lapwave::detail
