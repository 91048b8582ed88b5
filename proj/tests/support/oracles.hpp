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

#include "auctionlab/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace testsupport {

/// Composite Simpson rule with `panels` (even) panels.
inline double simpson(std::function<double(double)> const &f, double a, double b,
                      std::size_t panels = 2000)
{
  if (!(b > a))
  {
    return 0.0;
  }
  panels += panels % 2;
  double const h   = (b - a) / static_cast<double>(panels);
  double       sum = f(a) + f(b);
  for (std::size_t k = 1; k < panels; ++k)
  {
    sum += (k % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(k));
  }
  return sum * h / 3.0;
}

/// Five-point Gauss rule on `panels` equal panels; never samples the endpoints.
inline double gauss5(std::function<double(double)> const &f, double a, double b,
                     std::size_t panels = 8)
{
  static constexpr double x[] = {0.0, 0.5384693101056831, 0.9061798459386640};
  static constexpr double w[] = {0.5688888888888889, 0.4786286704993665, 0.2369268850561891};
  double const h     = (b - a) / static_cast<double>(panels);
  double       total = 0.0;
  for (std::size_t k = 0; k < panels; ++k)
  {
    double const mid  = a + h * (static_cast<double>(k) + 0.5);
    double const half = 0.5 * h;
    double       sum  = w[0] * f(mid);
    for (int j = 1; j < 3; ++j)
    {
      sum += w[j] * (f(mid - half * x[j]) + f(mid + half * x[j]));
    }
    total += sum * half;
  }
  return total;
}

/// Gauss on the pieces between sorted cut points, so jumps at cuts are never sampled.
inline double integrate_cut(std::function<double(double)> const &f, std::vector<double> cuts,
                            double a, double b, std::size_t panels = 8)
{
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
  {
    double const lo = std::max(a, cuts[k]);
    double const hi = std::min(b, cuts[k + 1]);
    if (hi > lo)
    {
      total += gauss5(f, lo, hi, panels);
    }
  }
  return total;
}

/// Increasing piecewise-linear function on [0,1], evaluated independently of the library.
struct Pl
{
  std::vector<double> x;
  std::vector<double> y;

  double eval(double q) const
  {
    q = std::clamp(q, 0.0, 1.0);
    auto it = std::upper_bound(x.begin(), x.end(), q);
    if (it == x.end())
    {
      return y.back();
    }
    std::size_t const k = static_cast<std::size_t>(it - x.begin());
    if (k == 0)
    {
      return y.front();
    }
    double const t = (q - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + t * (y[k] - y[k - 1]);
  }

  /// Probability that a draw lies strictly below v (strictly increasing f).
  double cdf(double v) const
  {
    if (v <= y.front())
    {
      return 0.0;
    }
    if (v >= y.back())
    {
      return 1.0;
    }
    auto        it = std::upper_bound(y.begin(), y.end(), v);
    std::size_t k  = static_cast<std::size_t>(it - y.begin());
    double const t = (v - y[k - 1]) / (y[k] - y[k - 1]);
    return x[k - 1] + t * (x[k] - x[k - 1]);
  }

  auctionlab::QuantileFunction qf() const
  {
    return auctionlab::QuantileFunction::piecewise_linear(x, y);
  }
};

inline Pl uniform_pl(double lo, double hi)
{
  return {{0.0, 1.0}, {lo, hi}};
}

/// Strictly increasing, otherwise arbitrary, piecewise-linear qf.
inline Pl random_increasing(std::mt19937_64 &g)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t const k = 2 + static_cast<std::size_t>(5 * u(g));
  std::vector<double> inc(k);
  for (auto &d : inc)
  {
    d = 0.05 + u(g);
  }
  double const lo  = 0.2 * u(g);
  double const hi  = lo + (1.0 - lo) * (0.5 + 0.5 * u(g));
  double       tot = 0.0;
  for (double d : inc)
  {
    tot += d;
  }
  Pl f;
  f.x.push_back(0.0);
  f.y.push_back(lo);
  for (std::size_t j = 0; j < k; ++j)
  {
    f.x.push_back(static_cast<double>(j + 1) / static_cast<double>(k));
    f.y.push_back(f.y.back() + (hi - lo) * inc[j] / tot);
  }
  f.y.back() = hi;
  return f;
}

/// Concave (decreasing slopes) piecewise-linear qf; strictly regular.
inline Pl random_concave(std::mt19937_64 &g)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t const k = 2 + static_cast<std::size_t>(4 * u(g));
  std::vector<double> slope(k);
  for (auto &s : slope)
  {
    s = 0.2 + u(g);
  }
  std::sort(slope.rbegin(), slope.rend());
  double const lo  = 0.2 * u(g);
  double const hi  = lo + (1.0 - lo) * (0.6 + 0.4 * u(g));
  double       tot = 0.0;
  for (double s : slope)
  {
    tot += s;
  }
  Pl f;
  f.x.push_back(0.0);
  f.y.push_back(lo);
  for (std::size_t j = 0; j < k; ++j)
  {
    f.x.push_back(static_cast<double>(j + 1) / static_cast<double>(k));
    f.y.push_back(f.y.back() + (hi - lo) * slope[j] / tot);
  }
  f.y.back() = hi;
  return f;
}

/// Concave piecewise-linear or uniform qf.
inline Pl random_regular(std::mt19937_64 &g)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(g) < 0.3)
  {
    double const lo = 0.25 * u(g);
    return uniform_pl(lo, lo + (1.0 - lo) * (0.6 + 0.4 * u(g)));
  }
  return random_concave(g);
}

struct RandomScenario
{
  std::vector<Pl>      qfs;
  std::vector<double>  budgets;
  double               lambda = 0.1;

  auctionlab::Scenario scenario() const
  {
    std::vector<auctionlab::Buyer> buyers;
    for (std::size_t i = 0; i < qfs.size(); ++i)
    {
      buyers.push_back({qfs[i].qf(), budgets[i]});
    }
    return auctionlab::Scenario(buyers, lambda);
  }
};

template <class Gen>
RandomScenario random_scenario(std::mt19937_64 &g, std::size_t n, Gen &&gen)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomScenario s;
  s.lambda = 0.05 + 0.15 * u(g);
  for (std::size_t i = 0; i < n; ++i)
  {
    s.qfs.push_back(gen(g));
    s.budgets.push_back(0.04 + 0.26 * u(g));
  }
  return s;
}

template <class Gen>
RandomScenario random_symmetric(std::mt19937_64 &g, std::size_t n, Gen &&gen)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomScenario s;
  s.lambda          = 0.05 + 0.15 * u(g);
  Pl const   f      = gen(g);
  double const rho  = 0.05 + 0.25 * u(g);
  s.qfs.assign(n, f);
  s.budgets.assign(n, rho);
  return s;
}

/// Probability that every rival's score stays below s.
inline double g_below(RandomScenario const &s, std::vector<double> const &theta, std::size_t i,
                      double score)
{
  if (score < s.lambda)
  {
    return 0.0;
  }
  double prod = 1.0;
  for (std::size_t j = 0; j < s.qfs.size(); ++j)
  {
    if (j != i)
    {
      prod *= theta[j] > 0.0 ? s.qfs[j].cdf(score / theta[j]) : 1.0;
    }
  }
  return prod;
}

inline std::vector<double> score_cuts(RandomScenario const &s, std::vector<double> const &theta,
                                      std::size_t i)
{
  std::vector<double> cuts = s.qfs[i].x;
  for (std::size_t j = 0; j < s.qfs.size(); ++j)
  {
    for (double yv : s.qfs[j].y)
    {
      if (theta[i] > 0.0)
      {
        cuts.push_back(s.qfs[i].cdf(theta[j] * yv / theta[i]));
      }
    }
  }
  if (theta[i] > 0.0)
  {
    cuts.push_back(s.qfs[i].cdf(s.lambda / theta[i]));
  }
  return cuts;
}

/// Expected first-price payment; `paced` scales the price by the buyer's multiplier.
inline double first_price_payment(RandomScenario const &s, std::vector<double> const &theta,
                                  std::size_t i, bool paced)
{
  auto const f = [&](double q) {
    double const bid = s.qfs[i].eval(q);
    double const win = g_below(s, theta, i, theta[i] * bid);
    return (paced ? theta[i] : 1.0) * bid * win;
  };
  return integrate_cut(f, score_cuts(s, theta, i), 0.0, 1.0);
}

/// Expected second-price payment; `paced` leaves the competing score unscaled.
inline double second_price_payment(RandomScenario const &s, std::vector<double> const &theta,
                                   std::size_t i, bool paced)
{
  std::vector<double> level_cuts;
  for (std::size_t j = 0; j < s.qfs.size(); ++j)
  {
    for (double yv : s.qfs[j].y)
    {
      level_cuts.push_back(theta[j] * yv);
    }
  }
  auto const f = [&](double q) {
    double const score = theta[i] * s.qfs[i].eval(q);
    if (score < s.lambda)
    {
      return 0.0;
    }
    double const inner = integrate_cut([&](double t) { return g_below(s, theta, i, t); },
                                       level_cuts, s.lambda, score, 1);
    double const threshold = score * g_below(s, theta, i, score) - inner;
    return paced ? threshold : threshold / theta[i];
  };
  return integrate_cut(f, score_cuts(s, theta, i), 0.0, 1.0, 4);
}

/// Probability that some score reaches the reserve.
inline double allocation_probability(RandomScenario const &s, std::vector<double> const &theta)
{
  double none = 1.0;
  for (std::size_t j = 0; j < s.qfs.size(); ++j)
  {
    none *= theta[j] > 0.0 ? s.qfs[j].cdf(s.lambda / theta[j]) : 1.0;
  }
  return 1.0 - none;
}

/// Closed forms for two uniform(0,1) buyers at a common multiplier.
namespace uniform2 {

inline double bdfpa_payment(double lambda, double alpha)
{
  double const q0 = std::min(1.0, lambda / alpha);
  return (1.0 - q0 * q0 * q0) / 3.0;
}

inline double pfpa_payment(double lambda, double beta)
{
  double const q0 = std::min(1.0, lambda / beta);
  return beta * (1.0 - q0 * q0 * q0) / 3.0;
}

inline double bdspa_payment(double lambda, double mu)
{
  double const c = std::min(1.0, lambda / mu);
  return (1.0 - c) * c * c / 2.0 + (1.0 - c * c * c) / 6.0;
}

inline double pspa_payment(double lambda, double xi)
{
  double const c = std::min(1.0, lambda / xi);
  return lambda * c * (1.0 - c) + xi * ((1.0 - c * c * c) / 6.0 - c * c * (1.0 - c) / 2.0);
}

inline double revenue(double payment, double lambda, double q0)
{
  return 2.0 * payment - lambda * (1.0 - q0 * q0);
}

}  // namespace uniform2

}  // namespace testsupport
