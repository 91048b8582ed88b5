//------------------------------------------------------------------------------
//
//   Copyright 2026 The auctionlab Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

namespace auctionlab {
namespace numeric {

struct GaussRule
{
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre nodes by Newton iteration on P_n.
inline GaussRule gauss_legendre(std::size_t n)
{
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i)
  {
    double x  = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                         (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k)
      {
        double const pk =
            ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
            static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp              = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      double const dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
      {
        break;
      }
    }
    double const w            = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i]             = -x;
    rule.nodes[n - 1 - i]     = x;
    rule.weights[i]           = w;
    rule.weights[n - 1 - i]   = w;
  }
  return rule;
}

inline GaussRule const &gauss8()
{
  static GaussRule const rule = gauss_legendre(8);
  return rule;
}

/// Composite 8-point Gauss-Legendre on [a,b] with `panels` equal panels.
template <typename F>
double integrate_gauss(F const &f, double a, double b, std::size_t panels)
{
  if (!(b > a))
  {
    return 0.0;
  }
  auto const  &rule  = gauss8();
  double const h     = (b - a) / static_cast<double>(panels);
  double       total = 0.0;
  for (std::size_t p = 0; p < panels; ++p)
  {
    double const lo   = a + h * static_cast<double>(p);
    double const mid  = lo + 0.5 * h;
    double       part = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    {
      part += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    }
    total += 0.5 * h * part;
  }
  return total;
}

/// Splits [a,b] at sorted interior cut points and integrates each piece.
template <typename F>
double integrate_pieces(F const &f, double a, double b, std::vector<double> const &cuts,
                        std::size_t panels)
{
  double total = 0.0;
  double lo    = a;
  for (double c : cuts)
  {
    if (c > lo && c < b)
    {
      total += integrate_gauss(f, lo, c, panels);
      lo = c;
    }
  }
  total += integrate_gauss(f, lo, b, panels);
  return total;
}

/// Largest x in [lo, hi] with pred(x) true, given pred(lo) true and pred monotone.
template <typename P>
double bisect_last_true(P const &pred, double lo, double hi, double tol)
{
  while (hi - lo > tol)
  {
    double const mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
    {
      break;
    }
    if (pred(mid))
    {
      lo = mid;
    }
    else
    {
      hi = mid;
    }
  }
  return lo;
}

/**
 * Largest x in [lo, hi] with f(x) <= 0 for increasing f with f(lo) <= 0 < f(hi),
 * by the Illinois variant of regula falsi. The returned point always has f <= 0.
 */
template <typename F>
double illinois_last_nonpositive(F const &f, double lo, double hi, double tol,
                                 double flo, double fhi, int max_evals = 200)
{
  int side = 0;
  for (int k = 0; k < max_evals && hi - lo > tol; ++k)
  {
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > lo && x < hi))
    {
      x = 0.5 * (lo + hi);
    }
    if (x <= lo || x >= hi)
    {
      break;
    }
    double const fx = f(x);
    if (fx <= 0.0)
    {
      lo  = x;
      flo = fx;
      if (side == -1)
      {
        fhi *= 0.5;
      }
      side = -1;
    }
    else
    {
      hi  = x;
      fhi = fx;
      if (side == 1)
      {
        flo *= 0.5;
      }
      side = 1;
    }
    if (flo == 0.0)
    {
      break;
    }
  }
  return lo;
}

/// Smallest x in [lo, hi] with pred(x) true, given pred(hi) true and pred monotone.
template <typename P>
double bisect_first_true(P const &pred, double lo, double hi, double tol)
{
  while (hi - lo > tol)
  {
    double const mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
    {
      break;
    }
    if (pred(mid))
    {
      hi = mid;
    }
    else
    {
      lo = mid;
    }
  }
  return hi;
}

inline double clamp01(double x)
{
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace numeric
}  // namespace auctionlab
