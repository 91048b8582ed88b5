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

#include "auctionlab/error.hpp"

#include "json.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace auctionlab {

enum class QfKind
{
  Uniform,
  PiecewiseLinear,
  ExpHead,
  SineHead,
  PowerTail,
  IntegralAverage,
  Virtual
};

char const *to_string(QfKind kind) noexcept;

namespace detail {
class QfNode;
}  // namespace detail

/**
 * Bidding quantile function on [0,1].
 *
 * Immutable handle over a shared representation node; copies are cheap and
 * may be read from any thread.
 */
class QuantileFunction
{
public:
  static QuantileFunction uniform(double lo = 0.0, double hi = 1.0);
  static QuantileFunction piecewise_linear(std::vector<double> grid, std::vector<double> values);
  /// Head a1 * exp(a2 q) on [0, join), `tail` from join on.
  static QuantileFunction exp_head(double a1, double a2, double join, QuantileFunction tail);
  /// Exponential head whose a1 is taken from value continuity at `join`.
  static QuantileFunction exp_head_matching(double a2, double join, QuantileFunction tail);
  /// Exponential head rising to `top` at `join`, where f jumps up to the tail.
  static QuantileFunction exp_head_gap(double top, double a2, double join, QuantileFunction tail);
  /// Head amplitude * (sin(a3 q + pi/4) + 1) on [0, join).
  static QuantileFunction sine_head(double amplitude, double a3, double join, QuantileFunction tail);
  /// offset + scale * ((1 - w)(1 - (1 - u)^exponent) + w u), u = (q - join) / (1 - join),
  /// w = linear; flat below join.
  static QuantileFunction power_tail(double offset, double scale, double exponent, double join,
                                     double linear = 0.0);
  /// s(x) = (int_x^1 base) / (1 - x), s(1) = base(1).
  static QuantileFunction integral_average(QuantileFunction base);
  /// psi(q) = base(q) - (1 - q) base'(q); may take negative values.
  static QuantileFunction virtual_of(QuantileFunction base);

  double eval(double q) const;
  double operator()(double q) const
  {
    return eval(q);
  }
  double derivative(double q) const;
  double second_derivative(double q) const;
  /// sup{q : f(q) <= v} clamped to [0,1].
  double cdf(double v) const;
  /// int_a^b f(q) dq for 0 <= a <= b <= 1.
  double integral(double a, double b) const;
  /// Analytic lower bound of f' on [a,b], when the kind admits one.
  std::optional<double> min_slope(double a, double b) const;
  /// Interior quantiles where f or f' may fail to be smooth.
  std::vector<double> breakpoints() const;

  QfKind kind() const;
  bool is_virtual() const
  {
    return kind() == QfKind::Virtual;
  }
  std::optional<double> cached_lipschitz_lower() const
  {
    return lipschitz_;
  }

  nlohmann::json to_json() const;
  static QuantileFunction from_json(nlohmann::json const &doc, std::string const &path = "qf");

  /// Kind-specific accessors; throw InvalidArgument for other kinds.
  std::pair<double, double>  uniform_bounds() const;
  std::vector<double> const &grid() const;
  std::vector<double> const &values() const;
  QuantileFunction           base() const;
  QuantileFunction           tail() const;
  double                     join() const;

  detail::QfNode const &node() const
  {
    return *node_;
  }

private:
  explicit QuantileFunction(std::shared_ptr<detail::QfNode const> node);

  std::shared_ptr<detail::QfNode const> node_;
  std::optional<double>                 lipschitz_;
};

/// Virtual bidding qf psi of a base qf.
class VirtualQf
{
public:
  explicit VirtualQf(QuantileFunction base);

  double eval(double q) const
  {
    return fn_.eval(q);
  }
  double operator()(double q) const
  {
    return fn_.eval(q);
  }
  double derivative(double q) const
  {
    return fn_.derivative(q);
  }
  double cdf(double v) const
  {
    return fn_.cdf(v);
  }
  QuantileFunction const &base() const
  {
    return base_;
  }
  QuantileFunction const &function() const
  {
    return fn_;
  }

private:
  QuantileFunction base_;
  QuantileFunction fn_;
};

double    eval(QuantileFunction const &f, double q);
double    derivative(QuantileFunction const &f, double q);
double    cdf(QuantileFunction const &f, double v);
VirtualQf virtualize(QuantileFunction const &f);

/// Slope lower bound: analytic where available, otherwise a grid scan.
double inverse_lipschitz_lower(QuantileFunction const &f, std::size_t grid_size = 1001);
/// Minimum slope between adjacent points of a uniform grid.
double grid_slope_lower(QuantileFunction const &f, std::size_t grid_size);

/// True when f is increasing on a uniform grid (strictly if `strict`).
bool is_increasing_on_grid(QuantileFunction const &f, std::size_t grid_size, bool strict);
/// True when virtualize(f) is strictly increasing on a uniform grid.
bool is_strictly_regular(QuantileFunction const &f, std::size_t grid_size = 10001);

/// Sorts bids sampled on a uniform grid into an increasing piecewise-linear qf.
QuantileFunction increasing_rearrangement(std::vector<std::pair<double, double>> const &samples);

/// Maximum |f - g| over a uniform grid.
double max_grid_difference(QuantileFunction const &f, QuantileFunction const &g,
                           std::size_t grid_size);

}  // namespace auctionlab
