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

#include "auctionlab/qfspace.hpp"

#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace auctionlab {

char const *to_string(ErrorCode code) noexcept
{
  switch (code)
  {
  case ErrorCode::InvalidArgument:
    return "InvalidArgument";
  case ErrorCode::Domain:
    return "Domain";
  case ErrorCode::Parse:
    return "Parse";
  case ErrorCode::PreconditionViolation:
    return "PreconditionViolation";
  case ErrorCode::NonConvergence:
    return "NonConvergence";
  case ErrorCode::RootBracketFailure:
    return "RootBracketFailure";
  case ErrorCode::DegenerateInput:
    return "DegenerateInput";
  case ErrorCode::AsymmetricScenario:
    return "AsymmetricScenario";
  case ErrorCode::Internal:
    return "Internal";
  }
  return "Unknown";
}

char const *to_string(QfKind kind) noexcept
{
  switch (kind)
  {
  case QfKind::Uniform:
    return "uniform";
  case QfKind::PiecewiseLinear:
    return "piecewise_linear";
  case QfKind::ExpHead:
    return "exp_head";
  case QfKind::SineHead:
    return "sine_head";
  case QfKind::PowerTail:
    return "power_tail";
  case QfKind::IntegralAverage:
    return "integral_average";
  case QfKind::Virtual:
    return "virtual";
  }
  return "unknown";
}

namespace {

constexpr double kValueJoinTol = 1e-9;
constexpr double kSlopeJoinTol = 1e-6;
constexpr double kRangeTol     = 1e-12;

[[noreturn]] void invalid(std::string const &message)
{
  throw Error(ErrorCode::InvalidArgument, message);
}

void require_finite(double x, char const *name)
{
  if (!std::isfinite(x))
  {
    invalid(std::string(name) + " must be finite");
  }
}

}  // namespace

namespace detail {

class QfNode
{
public:
  virtual ~QfNode() = default;

  virtual QfKind kind() const                       = 0;
  virtual double eval(double q) const               = 0;
  virtual double derivative(double q) const         = 0;
  virtual nlohmann::json to_json() const            = 0;

  virtual double second_derivative(double q) const
  {
    double const h  = 1e-5;
    double const lo = std::max(0.0, q - h);
    double const hi = std::min(1.0, q + h);
    return (derivative(hi) - derivative(lo)) / (hi - lo);
  }

  virtual double cdf(double v) const
  {
    if (eval(1.0) <= v)
    {
      return 1.0;
    }
    if (eval(0.0) > v)
    {
      return 0.0;
    }
    return numeric::bisect_last_true([&](double q) { return eval(q) <= v; }, 0.0, 1.0, 1e-14);
  }

  virtual double integral(double a, double b) const
  {
    return numeric::integrate_pieces([&](double q) { return eval(q); }, a, b, breakpoints(), 32);
  }

  virtual std::optional<double> min_slope(double, double) const
  {
    return std::nullopt;
  }

  virtual std::vector<double> breakpoints() const
  {
    return {};
  }
};

namespace {

class UniformNode final : public QfNode
{
public:
  UniformNode(double lo, double hi)
    : lo_(lo)
    , hi_(hi)
  {}

  QfKind kind() const override
  {
    return QfKind::Uniform;
  }
  double eval(double q) const override
  {
    return lo_ + (hi_ - lo_) * q;
  }
  double derivative(double) const override
  {
    return hi_ - lo_;
  }
  double second_derivative(double) const override
  {
    return 0.0;
  }
  double cdf(double v) const override
  {
    if (v >= hi_)
    {
      return 1.0;
    }
    if (v < lo_)
    {
      return 0.0;
    }
    return numeric::clamp01((v - lo_) / (hi_ - lo_));
  }
  double integral(double a, double b) const override
  {
    return lo_ * (b - a) + 0.5 * (hi_ - lo_) * (b * b - a * a);
  }
  std::optional<double> min_slope(double, double) const override
  {
    return hi_ - lo_;
  }
  nlohmann::json to_json() const override
  {
    return {{"kind", "uniform"}, {"lo", lo_}, {"hi", hi_}};
  }

  double lo_;
  double hi_;
};

class PiecewiseLinearNode final : public QfNode
{
public:
  PiecewiseLinearNode(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid))
    , values_(std::move(values))
  {
    slopes_.resize(grid_.size() - 1);
    for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
    {
      slopes_[k] = (values_[k + 1] - values_[k]) / (grid_[k + 1] - grid_[k]);
    }
  }

  std::size_t segment(double q) const
  {
    auto const it = std::upper_bound(grid_.begin(), grid_.end(), q);
    auto       k  = static_cast<std::ptrdiff_t>(it - grid_.begin()) - 1;
    k             = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(grid_.size()) - 2);
    return static_cast<std::size_t>(k);
  }

  QfKind kind() const override
  {
    return QfKind::PiecewiseLinear;
  }
  double eval(double q) const override
  {
    std::size_t const k = segment(q);
    return values_[k] + slopes_[k] * (q - grid_[k]);
  }
  double derivative(double q) const override
  {
    return slopes_[segment(q)];
  }
  double second_derivative(double) const override
  {
    return 0.0;
  }
  double cdf(double v) const override
  {
    if (v >= values_.back())
    {
      return 1.0;
    }
    if (v < values_.front())
    {
      return 0.0;
    }
    auto const        it = std::upper_bound(values_.begin(), values_.end(), v);
    std::size_t const j  = static_cast<std::size_t>(it - values_.begin());
    std::size_t const k  = j - 1;
    double const      t  = (v - values_[k]) / (values_[j] - values_[k]);
    return numeric::clamp01(grid_[k] + t * (grid_[j] - grid_[k]));
  }
  double integral(double a, double b) const override
  {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
    {
      double const lo = std::max(a, grid_[k]);
      double const hi = std::min(b, grid_[k + 1]);
      if (hi > lo)
      {
        total += 0.5 * (eval_on(k, lo) + eval_on(k, hi)) * (hi - lo);
      }
    }
    return total;
  }
  std::optional<double> min_slope(double a, double b) const override
  {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
    {
      if (grid_[k] < b && grid_[k + 1] > a)
      {
        best = std::min(best, slopes_[k]);
      }
    }
    if (!std::isfinite(best))
    {
      best = slopes_[segment(a)];
    }
    return best;
  }
  std::vector<double> breakpoints() const override
  {
    return {grid_.begin() + 1, grid_.end() - 1};
  }
  nlohmann::json to_json() const override
  {
    return {{"kind", "piecewise_linear"}, {"grid", grid_}, {"values", values_}};
  }

  double eval_on(std::size_t k, double q) const
  {
    return values_[k] + slopes_[k] * (q - grid_[k]);
  }

  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

std::vector<double> merge_tail_breakpoints(double join, QuantileFunction const &tail)
{
  std::vector<double> out;
  if (join > 0.0 && join < 1.0)
  {
    out.push_back(join);
  }
  for (double b : tail.breakpoints())
  {
    if (b > join)
    {
      out.push_back(b);
    }
  }
  return out;
}

class ExpHeadNode final : public QfNode
{
public:
  ExpHeadNode(double log_a1, double a2, double join, QuantileFunction tail, bool gap = false)
    : log_a1_(log_a1)
    , a2_(a2)
    , join_(join)
    , tail_(std::move(tail))
    , gap_(gap)
  {}

  double head(double q) const
  {
    return std::exp(log_a1_ + a2_ * q);
  }

  QfKind kind() const override
  {
    return QfKind::ExpHead;
  }
  double eval(double q) const override
  {
    return q < join_ ? head(q) : tail_.eval(q);
  }
  double derivative(double q) const override
  {
    return q < join_ ? a2_ * head(q) : tail_.derivative(q);
  }
  double second_derivative(double q) const override
  {
    return q < join_ ? a2_ * a2_ * head(q) : tail_.second_derivative(q);
  }
  double cdf(double v) const override
  {
    if (v < head(0.0))
    {
      return 0.0;
    }
    if (v < head(join_) && a2_ > 0.0)
    {
      return numeric::clamp01(std::min(join_, (std::log(v) - log_a1_) / a2_));
    }
    return std::max(join_, tail_.cdf(v));
  }
  double integral(double a, double b) const override
  {
    double total = 0.0;
    double const hb = std::min(b, join_);
    if (hb > a)
    {
      total += a2_ > 0.0 ? (head(hb) - head(a)) / a2_ : head(0.0) * (hb - a);
    }
    double const ta = std::max(a, join_);
    if (b > ta)
    {
      total += tail_.integral(ta, b);
    }
    return total;
  }
  std::optional<double> min_slope(double a, double b) const override
  {
    double best = std::numeric_limits<double>::infinity();
    if (a < join_)
    {
      best = a2_ * head(a);
    }
    if (b > join_)
    {
      auto const t = tail_.min_slope(std::max(a, join_), b);
      if (!t)
      {
        return std::nullopt;
      }
      best = std::min(best, *t);
    }
    return best;
  }
  std::vector<double> breakpoints() const override
  {
    return merge_tail_breakpoints(join_, tail_);
  }
  nlohmann::json to_json() const override
  {
    if (gap_)
    {
      return {{"kind", "exp_head"}, {"gap", true},   {"top", head(join_)},
              {"a2", a2_},          {"join", join_}, {"tail", tail_.to_json()}};
    }
    return {{"kind", "exp_head"},   {"a1", std::exp(log_a1_)}, {"a2", a2_},
            {"log_a1", log_a1_},    {"join", join_},           {"tail", tail_.to_json()}};
  }

  double           log_a1_;
  double           a2_;
  double           join_;
  QuantileFunction tail_;
  bool             gap_;
};

class SineHeadNode final : public QfNode
{
public:
  SineHeadNode(double amplitude, double a3, double join, QuantileFunction tail)
    : amp_(amplitude)
    , a3_(a3)
    , join_(join)
    , tail_(std::move(tail))
  {}

  double phase(double q) const
  {
    return a3_ * q + std::numbers::pi / 4.0;
  }
  double head(double q) const
  {
    return amp_ * (std::sin(phase(q)) + 1.0);
  }

  QfKind kind() const override
  {
    return QfKind::SineHead;
  }
  double eval(double q) const override
  {
    return q < join_ ? head(q) : tail_.eval(q);
  }
  double derivative(double q) const override
  {
    return q < join_ ? amp_ * a3_ * std::cos(phase(q)) : tail_.derivative(q);
  }
  double second_derivative(double q) const override
  {
    return q < join_ ? -amp_ * a3_ * a3_ * std::sin(phase(q)) : tail_.second_derivative(q);
  }
  double cdf(double v) const override
  {
    if (v < head(0.0))
    {
      return 0.0;
    }
    if (v < head(join_))
    {
      double const s = std::clamp(v / amp_ - 1.0, -1.0, 1.0);
      return numeric::clamp01(std::min(join_, (std::asin(s) - std::numbers::pi / 4.0) / a3_));
    }
    return std::max(join_, tail_.cdf(v));
  }
  double integral(double a, double b) const override
  {
    double total = 0.0;
    double const hb = std::min(b, join_);
    if (hb > a)
    {
      total += amp_ * (hb - a) - amp_ / a3_ * (std::cos(phase(hb)) - std::cos(phase(a)));
    }
    double const ta = std::max(a, join_);
    if (b > ta)
    {
      total += tail_.integral(ta, b);
    }
    return total;
  }
  std::optional<double> min_slope(double a, double b) const override
  {
    double best = std::numeric_limits<double>::infinity();
    if (a < join_)
    {
      best = std::max(0.0, amp_ * a3_ * std::cos(phase(std::min(b, join_))));
    }
    if (b > join_)
    {
      auto const t = tail_.min_slope(std::max(a, join_), b);
      if (!t)
      {
        return std::nullopt;
      }
      best = std::min(best, *t);
    }
    return best;
  }
  std::vector<double> breakpoints() const override
  {
    return merge_tail_breakpoints(join_, tail_);
  }
  nlohmann::json to_json() const override
  {
    return {{"kind", "sine_head"}, {"amplitude", amp_},         {"a3", a3_},
            {"join", join_},       {"tail", tail_.to_json()}};
  }

  double           amp_;
  double           a3_;
  double           join_;
  QuantileFunction tail_;
};

class PowerTailNode final : public QfNode
{
public:
  PowerTailNode(double offset, double scale, double exponent, double join, double linear)
    : offset_(offset)
    , scale_(scale)
    , b_(exponent)
    , join_(join)
    , w_(linear)
  {}

  double u(double q) const
  {
    return std::clamp((q - join_) / (1.0 - join_), 0.0, 1.0);
  }
  /// Shape on [0,1]: (1 - w)(1 - (1 - u)^b) + w u.
  double shape(double uu) const
  {
    return (1.0 - w_) * (1.0 - std::pow(1.0 - uu, b_)) + w_ * uu;
  }

  QfKind kind() const override
  {
    return QfKind::PowerTail;
  }
  double eval(double q) const override
  {
    if (q < join_)
    {
      return offset_;
    }
    return offset_ + scale_ * shape(u(q));
  }
  double derivative(double q) const override
  {
    if (q < join_)
    {
      return 0.0;
    }
    return scale_ / (1.0 - join_) *
           ((1.0 - w_) * b_ * std::pow(1.0 - u(q), b_ - 1.0) + w_);
  }
  double second_derivative(double q) const override
  {
    if (q < join_ || b_ == 1.0)
    {
      return 0.0;
    }
    double const w = 1.0 - join_;
    return -scale_ * (1.0 - w_) * b_ * (b_ - 1.0) / (w * w) * std::pow(1.0 - u(q), b_ - 2.0);
  }
  double cdf(double v) const override
  {
    if (v >= offset_ + scale_)
    {
      return 1.0;
    }
    if (v < offset_)
    {
      return 0.0;
    }
    double const x = (v - offset_) / scale_;
    double       uu;
    if (w_ == 0.0)
    {
      uu = 1.0 - std::pow(1.0 - x, 1.0 / b_);
    }
    else
    {
      // Safeguarded Newton; the shape is increasing and concave.
      double lo = 0.0;
      double hi = 1.0;
      uu        = std::clamp(1.0 - std::pow(std::max(1.0 - x, 0.0), 1.0 / b_), 0.0, 1.0);
      for (int it = 0; it < 100 && hi - lo > 1e-15; ++it)
      {
        double const p = std::pow(1.0 - uu, b_ - 1.0);
        double const g = (1.0 - w_) * (1.0 - p * (1.0 - uu)) + w_ * uu - x;
        if (g == 0.0)
        {
          break;
        }
        (g > 0.0 ? hi : lo) = uu;
        double const d    = (1.0 - w_) * b_ * p + w_;
        double       next = uu - g / d;
        if (!(next > lo && next < hi))
        {
          next = 0.5 * (lo + hi);
        }
        if (std::abs(next - uu) < 1e-16)
        {
          uu = next;
          break;
        }
        uu = next;
      }
    }
    return numeric::clamp01(join_ + uu * (1.0 - join_));
  }
  double integral(double a, double b) const override
  {
    double total = 0.0;
    double const fb = std::min(b, join_);
    if (fb > a)
    {
      total += offset_ * (fb - a);
    }
    double const ta = std::max(a, join_);
    if (b > ta)
    {
      double const w  = 1.0 - join_;
      double const ua = u(ta);
      double const ub = u(b);
      double const r1 = std::pow(1.0 - ua, b_ + 1.0);
      double const r2 = std::pow(1.0 - ub, b_ + 1.0);
      double const power = (b - ta) - w * (r1 - r2) / (b_ + 1.0);
      double const lin   = 0.5 * w * (ub * ub - ua * ua);
      total += offset_ * (b - ta) + scale_ * ((1.0 - w_) * power + w_ * lin);
    }
    return total;
  }
  std::optional<double> min_slope(double a, double b) const override
  {
    if (a < join_)
    {
      return 0.0;
    }
    return derivative(b_ >= 1.0 ? b : a);
  }
  std::vector<double> breakpoints() const override
  {
    if (join_ > 0.0 && join_ < 1.0)
    {
      return {join_};
    }
    return {};
  }
  nlohmann::json to_json() const override
  {
    nlohmann::json doc = {{"kind", "power_tail"}, {"offset", offset_}, {"scale", scale_},
                          {"exponent", b_},       {"join", join_}};
    if (w_ != 0.0)
    {
      doc["linear"] = w_;
    }
    return doc;
  }

  double offset_;
  double scale_;
  double b_;
  double join_;
  double w_;
};

class IntegralAverageNode final : public QfNode
{
public:
  explicit IntegralAverageNode(QuantileFunction base)
    : base_(std::move(base))
  {}

  QfKind kind() const override
  {
    return QfKind::IntegralAverage;
  }
  double eval(double x) const override
  {
    double const h = 1.0 - x;
    if (h < 1e-9)
    {
      return base_.eval(numeric::clamp01(1.0 - 0.5 * h));
    }
    return base_.integral(x, 1.0) / h;
  }
  double derivative(double x) const override
  {
    double const h = 1.0 - x;
    if (h < 1e-6)
    {
      return 0.5 * base_.derivative(x);
    }
    return (eval(x) - base_.eval(x)) / h;
  }
  double second_derivative(double x) const override
  {
    double const h = 1.0 - x;
    if (h < 1e-4)
    {
      return base_.second_derivative(x) / 3.0;
    }
    return (2.0 * derivative(x) - base_.derivative(x)) / h;
  }
  std::vector<double> breakpoints() const override
  {
    return base_.breakpoints();
  }
  nlohmann::json to_json() const override
  {
    return {{"kind", "integral_average"}, {"base", base_.to_json()}};
  }

  QuantileFunction base_;
};

class VirtualNode final : public QfNode
{
public:
  explicit VirtualNode(QuantileFunction base)
    : base_(std::move(base))
  {}

  QfKind kind() const override
  {
    return QfKind::Virtual;
  }
  double eval(double q) const override
  {
    return base_.eval(q) - (1.0 - q) * base_.derivative(q);
  }
  double derivative(double q) const override
  {
    return 2.0 * base_.derivative(q) - (1.0 - q) * base_.second_derivative(q);
  }
  double cdf(double v) const override
  {
    if (base_.kind() == QfKind::Uniform)
    {
      auto const [lo, hi] = base_.uniform_bounds();
      if (v >= hi)
      {
        return 1.0;
      }
      double const c0 = 2.0 * lo - hi;
      if (v < c0)
      {
        return 0.0;
      }
      return numeric::clamp01((v - c0) / (2.0 * (hi - lo)));
    }
    if (base_.kind() == QfKind::PiecewiseLinear)
    {
      return piecewise_cdf(v);
    }
    return QfNode::cdf(v);
  }
  double integral(double a, double b) const override
  {
    return (1.0 - a) * base_.eval(a) - (1.0 - b) * base_.eval(b);
  }
  std::optional<double> min_slope(double, double) const override
  {
    if (base_.kind() == QfKind::Uniform)
    {
      auto const [lo, hi] = base_.uniform_bounds();
      return 2.0 * (hi - lo);
    }
    return std::nullopt;
  }
  std::vector<double> breakpoints() const override
  {
    return base_.breakpoints();
  }
  nlohmann::json to_json() const override
  {
    return {{"kind", "virtual"}, {"base", base_.to_json()}};
  }

  double piecewise_cdf(double v) const
  {
    auto const &g = base_.grid();
    auto const &y = base_.values();
    if (y.back() <= v)
    {
      return 1.0;
    }
    for (std::size_t k = g.size() - 1; k-- > 0;)
    {
      double const s     = (y[k + 1] - y[k]) / (g[k + 1] - g[k]);
      double const left  = y[k] - (1.0 - g[k]) * s;
      double const right = y[k + 1] - (1.0 - g[k + 1]) * s;
      if (left <= v)
      {
        if (right <= v || s <= 0.0)
        {
          return g[k + 1];
        }
        return numeric::clamp01(std::min(g[k + 1], g[k] + (v - left) / (2.0 * s)));
      }
    }
    return 0.0;
  }

  QuantileFunction base_;
};

}  // namespace
}  // namespace detail

QuantileFunction::QuantileFunction(std::shared_ptr<detail::QfNode const> node)
  : node_(std::move(node))
{
  auto const l = node_->min_slope(0.0, 1.0);
  if (l && *l > 0.0)
  {
    lipschitz_ = *l;
  }
}

QuantileFunction QuantileFunction::uniform(double lo, double hi)
{
  require_finite(lo, "uniform lo");
  require_finite(hi, "uniform hi");
  if (lo < 0.0 || hi > 1.0 || lo > hi)
  {
    invalid("uniform requires 0 <= lo <= hi <= 1");
  }
  return QuantileFunction(std::make_shared<detail::UniformNode>(lo, hi));
}

QuantileFunction QuantileFunction::piecewise_linear(std::vector<double> grid,
                                                    std::vector<double> values)
{
  if (grid.size() != values.size())
  {
    invalid("piecewise_linear grid and values must have equal length");
  }
  if (grid.size() < 2)
  {
    invalid("piecewise_linear needs at least two points");
  }
  for (std::size_t k = 0; k < grid.size(); ++k)
  {
    require_finite(grid[k], "piecewise_linear grid");
    require_finite(values[k], "piecewise_linear values");
    if (values[k] < -kRangeTol || values[k] > 1.0 + kRangeTol)
    {
      invalid("piecewise_linear values must lie in [0,1]");
    }
    if (k > 0 && !(grid[k] > grid[k - 1]))
    {
      invalid("piecewise_linear grid must be strictly increasing");
    }
    if (k > 0 && values[k] < values[k - 1])
    {
      invalid("piecewise_linear values must be increasing");
    }
  }
  if (grid.front() != 0.0 || grid.back() != 1.0)
  {
    invalid("piecewise_linear grid must begin at 0 and end at 1");
  }
  return QuantileFunction(
      std::make_shared<detail::PiecewiseLinearNode>(std::move(grid), std::move(values)));
}

namespace {

void check_join(QuantileFunction const &composite, QuantileFunction const &tail, double join,
                double head_value, double head_slope)
{
  double const tv = tail.eval(join);
  double const ts = tail.derivative(join);
  if (std::abs(head_value - tv) > kValueJoinTol)
  {
    std::ostringstream os;
    os << "head value " << head_value << " does not match tail value " << tv << " at join "
       << join;
    invalid(os.str());
  }
  if (std::abs(head_slope - ts) > kSlopeJoinTol * std::max(1.0, std::abs(ts)))
  {
    std::ostringstream os;
    os << "head slope " << head_slope << " does not match tail slope " << ts << " at join "
       << join;
    invalid(os.str());
  }
  (void)composite;
}

void check_join_quantile(double join)
{
  require_finite(join, "join");
  if (!(join > 0.0 && join <= 1.0))
  {
    invalid("join quantile must lie in (0,1]");
  }
}

}  // namespace

QuantileFunction QuantileFunction::exp_head(double a1, double a2, double join,
                                            QuantileFunction tail)
{
  require_finite(a1, "a1");
  require_finite(a2, "a2");
  if (!(a1 > 0.0))
  {
    invalid("exp_head requires a1 > 0");
  }
  check_join_quantile(join);
  if (a2 < 0.0)
  {
    invalid("exp_head requires a2 >= 0");
  }
  auto node = std::make_shared<detail::ExpHeadNode>(std::log(a1), a2, join, tail);
  QuantileFunction f(node);
  check_join(f, tail, join, node->head(join), a2 * node->head(join));
  return f;
}

QuantileFunction QuantileFunction::exp_head_matching(double a2, double join,
                                                     QuantileFunction tail)
{
  require_finite(a2, "a2");
  check_join_quantile(join);
  if (a2 < 0.0)
  {
    invalid("exp_head requires a2 >= 0");
  }
  double const c = tail.eval(join);
  if (!(c > 0.0))
  {
    invalid("exp_head requires a positive tail value at the join");
  }
  double const log_a1 = std::log(c) - a2 * join;
  auto node = std::make_shared<detail::ExpHeadNode>(log_a1, a2, join, tail);
  QuantileFunction f(node);
  check_join(f, tail, join, node->head(join), a2 * node->head(join));
  return f;
}

QuantileFunction QuantileFunction::exp_head_gap(double top, double a2, double join,
                                                QuantileFunction tail)
{
  require_finite(top, "top");
  require_finite(a2, "a2");
  check_join_quantile(join);
  if (a2 < 0.0)
  {
    invalid("exp_head requires a2 >= 0");
  }
  if (!(top > 0.0 && top <= tail.eval(join)))
  {
    invalid("exp_head gap needs 0 < top <= tail value at the join");
  }
  double const log_a1 = std::log(top) - a2 * join;
  return QuantileFunction(std::make_shared<detail::ExpHeadNode>(log_a1, a2, join, tail, true));
}

QuantileFunction QuantileFunction::sine_head(double amplitude, double a3, double join,
                                             QuantileFunction tail)
{
  require_finite(amplitude, "amplitude");
  require_finite(a3, "a3");
  check_join_quantile(join);
  if (!(amplitude > 0.0) || !(a3 > 0.0) || a3 * join > std::numbers::pi / 4.0 + 1e-12)
  {
    invalid("sine_head requires amplitude > 0, a3 > 0 and a3*join <= pi/4");
  }
  auto node = std::make_shared<detail::SineHeadNode>(amplitude, a3, join, tail);
  QuantileFunction f(node);
  check_join(f, tail, join, node->head(join),
             amplitude * a3 * std::cos(node->phase(join)));
  return f;
}

QuantileFunction QuantileFunction::power_tail(double offset, double scale, double exponent,
                                              double join, double linear)
{
  require_finite(linear, "linear");
  if (!(linear >= 0.0 && linear <= 1.0))
  {
    invalid("power_tail linear weight must lie in [0,1]");
  }
  require_finite(offset, "offset");
  require_finite(scale, "scale");
  require_finite(exponent, "exponent");
  require_finite(join, "join");
  if (offset < 0.0 || scale < 0.0 || offset + scale > 1.0 + kRangeTol)
  {
    invalid("power_tail requires offset, scale >= 0 and offset + scale <= 1");
  }
  if (!(exponent >= 1.0))
  {
    invalid("power_tail requires exponent >= 1");
  }
  if (!(join >= 0.0 && join < 1.0))
  {
    invalid("power_tail join must lie in [0,1)");
  }
  return QuantileFunction(std::make_shared<detail::PowerTailNode>(offset, scale, exponent, join, linear));
}

QuantileFunction QuantileFunction::integral_average(QuantileFunction base)
{
  return QuantileFunction(std::make_shared<detail::IntegralAverageNode>(std::move(base)));
}

QuantileFunction QuantileFunction::virtual_of(QuantileFunction base)
{
  return QuantileFunction(std::make_shared<detail::VirtualNode>(std::move(base)));
}

namespace {

void check_quantile(double q)
{
  if (!(q >= 0.0 && q <= 1.0))
  {
    std::ostringstream os;
    os << "quantile " << q << " outside [0,1]";
    throw Error(ErrorCode::Domain, os.str());
  }
}

}  // namespace

double QuantileFunction::eval(double q) const
{
  check_quantile(q);
  return node_->eval(q);
}

double QuantileFunction::derivative(double q) const
{
  check_quantile(q);
  return node_->derivative(q);
}

double QuantileFunction::second_derivative(double q) const
{
  check_quantile(q);
  return node_->second_derivative(q);
}

double QuantileFunction::cdf(double v) const
{
  if (std::isnan(v))
  {
    throw Error(ErrorCode::Domain, "cdf argument is NaN");
  }
  return node_->cdf(v);
}

double QuantileFunction::integral(double a, double b) const
{
  check_quantile(a);
  check_quantile(b);
  if (b <= a)
  {
    return 0.0;
  }
  return node_->integral(a, b);
}

std::optional<double> QuantileFunction::min_slope(double a, double b) const
{
  return node_->min_slope(a, b);
}

std::vector<double> QuantileFunction::breakpoints() const
{
  auto out = node_->breakpoints();
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

QfKind QuantileFunction::kind() const
{
  return node_->kind();
}

nlohmann::json QuantileFunction::to_json() const
{
  return node_->to_json();
}

std::pair<double, double> QuantileFunction::uniform_bounds() const
{
  if (auto const *n = dynamic_cast<detail::UniformNode const *>(node_.get()))
  {
    return {n->lo_, n->hi_};
  }
  invalid("not a uniform qf");
}

std::vector<double> const &QuantileFunction::grid() const
{
  if (auto const *n = dynamic_cast<detail::PiecewiseLinearNode const *>(node_.get()))
  {
    return n->grid_;
  }
  invalid("not a piecewise-linear qf");
}

std::vector<double> const &QuantileFunction::values() const
{
  if (auto const *n = dynamic_cast<detail::PiecewiseLinearNode const *>(node_.get()))
  {
    return n->values_;
  }
  invalid("not a piecewise-linear qf");
}

QuantileFunction QuantileFunction::base() const
{
  if (auto const *n = dynamic_cast<detail::VirtualNode const *>(node_.get()))
  {
    return n->base_;
  }
  if (auto const *n = dynamic_cast<detail::IntegralAverageNode const *>(node_.get()))
  {
    return n->base_;
  }
  invalid("qf has no base");
}

QuantileFunction QuantileFunction::tail() const
{
  if (auto const *n = dynamic_cast<detail::ExpHeadNode const *>(node_.get()))
  {
    return n->tail_;
  }
  if (auto const *n = dynamic_cast<detail::SineHeadNode const *>(node_.get()))
  {
    return n->tail_;
  }
  invalid("qf has no tail");
}

double QuantileFunction::join() const
{
  if (auto const *n = dynamic_cast<detail::ExpHeadNode const *>(node_.get()))
  {
    return n->join_;
  }
  if (auto const *n = dynamic_cast<detail::SineHeadNode const *>(node_.get()))
  {
    return n->join_;
  }
  if (auto const *n = dynamic_cast<detail::PowerTailNode const *>(node_.get()))
  {
    return n->join_;
  }
  invalid("qf has no join quantile");
}

namespace {

[[noreturn]] void parse_error(std::string const &path, std::string const &message)
{
  throw Error(ErrorCode::Parse, path + ": " + message);
}

double number_at(nlohmann::json const &doc, char const *key, std::string const &path)
{
  auto const it = doc.find(key);
  if (it == doc.end())
  {
    parse_error(path + "." + key, "missing field");
  }
  if (!it->is_number())
  {
    parse_error(path + "." + key, "expected a number");
  }
  return it->get<double>();
}

std::vector<double> numbers_at(nlohmann::json const &doc, char const *key, std::string const &path)
{
  auto const it = doc.find(key);
  if (it == doc.end())
  {
    parse_error(path + "." + key, "missing field");
  }
  if (!it->is_array())
  {
    parse_error(path + "." + key, "expected an array of numbers");
  }
  std::vector<double> out;
  out.reserve(it->size());
  for (std::size_t k = 0; k < it->size(); ++k)
  {
    auto const &x = (*it)[k];
    if (!x.is_number())
    {
      parse_error(path + "." + key + "[" + std::to_string(k) + "]", "expected a number");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

nlohmann::json const &object_at(nlohmann::json const &doc, char const *key,
                                std::string const &path)
{
  auto const it = doc.find(key);
  if (it == doc.end())
  {
    parse_error(path + "." + key, "missing field");
  }
  return *it;
}

}  // namespace

QuantileFunction QuantileFunction::from_json(nlohmann::json const &doc, std::string const &path)
{
  if (!doc.is_object())
  {
    parse_error(path, "expected an object");
  }
  auto const kit = doc.find("kind");
  if (kit == doc.end() || !kit->is_string())
  {
    parse_error(path + ".kind", "missing or non-string kind tag");
  }
  std::string const kind = kit->get<std::string>();
  try
  {
    if (kind == "uniform")
    {
      return uniform(doc.contains("lo") ? number_at(doc, "lo", path) : 0.0,
                     doc.contains("hi") ? number_at(doc, "hi", path) : 1.0);
    }
    if (kind == "piecewise_linear")
    {
      return piecewise_linear(numbers_at(doc, "grid", path), numbers_at(doc, "values", path));
    }
    if (kind == "exp_head")
    {
      auto tail = from_json(object_at(doc, "tail", path), path + ".tail");
      double const a2   = number_at(doc, "a2", path);
      double const join = number_at(doc, "join", path);
      if (doc.contains("gap") && doc.at("gap") == true)
      {
        return exp_head_gap(number_at(doc, "top", path), a2, join, tail);
      }
      if (doc.contains("log_a1"))
      {
        double const log_a1 = number_at(doc, "log_a1", path);
        auto const   f      = exp_head_matching(a2, join, tail);
        double const expect = std::log(tail.eval(join)) - a2 * join;
        if (std::abs(expect - log_a1) > 1e-9 * std::max(1.0, std::abs(log_a1)))
        {
          invalid("log_a1 inconsistent with tail value at join");
        }
        return f;
      }
      return exp_head(number_at(doc, "a1", path), a2, join, tail);
    }
    if (kind == "sine_head")
    {
      auto tail = from_json(object_at(doc, "tail", path), path + ".tail");
      return sine_head(number_at(doc, "amplitude", path), number_at(doc, "a3", path),
                       number_at(doc, "join", path), tail);
    }
    if (kind == "power_tail")
    {
      return power_tail(number_at(doc, "offset", path), number_at(doc, "scale", path),
                        number_at(doc, "exponent", path),
                        doc.contains("join") ? number_at(doc, "join", path) : 0.0,
                        doc.contains("linear") ? number_at(doc, "linear", path) : 0.0);
    }
    if (kind == "integral_average")
    {
      return integral_average(from_json(object_at(doc, "base", path), path + ".base"));
    }
    if (kind == "virtual")
    {
      return virtual_of(from_json(object_at(doc, "base", path), path + ".base"));
    }
  }
  catch (Error const &e)
  {
    if (e.code() == ErrorCode::Parse)
    {
      throw;
    }
    parse_error(path, e.what());
  }
  parse_error(path + ".kind", "unknown kind '" + kind + "'");
}

VirtualQf::VirtualQf(QuantileFunction base)
  : base_(base)
  , fn_(QuantileFunction::virtual_of(std::move(base)))
{}

double eval(QuantileFunction const &f, double q)
{
  return f.eval(q);
}

double derivative(QuantileFunction const &f, double q)
{
  return f.derivative(q);
}

double cdf(QuantileFunction const &f, double v)
{
  return f.cdf(v);
}

VirtualQf virtualize(QuantileFunction const &f)
{
  return VirtualQf(f);
}

double grid_slope_lower(QuantileFunction const &f, std::size_t grid_size)
{
  if (grid_size < 2)
  {
    invalid("grid_size must be at least 2");
  }
  double       best = std::numeric_limits<double>::infinity();
  double const h    = 1.0 / static_cast<double>(grid_size - 1);
  double       prev = f.eval(0.0);
  for (std::size_t k = 1; k < grid_size; ++k)
  {
    double const q   = k + 1 == grid_size ? 1.0 : h * static_cast<double>(k);
    double const cur = f.eval(q);
    best             = std::min(best, (cur - prev) / h);
    prev             = cur;
  }
  return std::max(0.0, best);
}

double inverse_lipschitz_lower(QuantileFunction const &f, std::size_t grid_size)
{
  if (grid_size < 2)
  {
    invalid("grid_size must be at least 2");
  }
  if (auto const l = f.min_slope(0.0, 1.0))
  {
    return std::max(0.0, *l);
  }
  return grid_slope_lower(f, grid_size);
}

bool is_increasing_on_grid(QuantileFunction const &f, std::size_t grid_size, bool strict)
{
  double const h    = 1.0 / static_cast<double>(grid_size - 1);
  double       prev = f.eval(0.0);
  for (std::size_t k = 1; k < grid_size; ++k)
  {
    double const q   = k + 1 == grid_size ? 1.0 : h * static_cast<double>(k);
    double const cur = f.eval(q);
    if (strict ? !(cur > prev) : cur < prev)
    {
      return false;
    }
    prev = cur;
  }
  return true;
}

bool is_strictly_regular(QuantileFunction const &f, std::size_t grid_size)
{
  return is_increasing_on_grid(QuantileFunction::virtual_of(f), grid_size, true);
}

QuantileFunction increasing_rearrangement(std::vector<std::pair<double, double>> const &samples)
{
  if (samples.size() < 2)
  {
    invalid("rearrangement needs at least two samples");
  }
  std::size_t const   m = samples.size();
  std::vector<double> grid(m);
  std::vector<double> values(m);
  for (std::size_t k = 0; k < m; ++k)
  {
    double const expected = static_cast<double>(k) / static_cast<double>(m - 1);
    if (std::abs(samples[k].first - expected) > 1e-9)
    {
      invalid("rearrangement samples must lie on a uniform grid of [0,1]");
    }
    grid[k]   = k + 1 == m ? 1.0 : expected;
    values[k] = samples[k].second;
  }
  grid.front() = 0.0;
  std::sort(values.begin(), values.end());
  return QuantileFunction::piecewise_linear(std::move(grid), std::move(values));
}

double max_grid_difference(QuantileFunction const &f, QuantileFunction const &g,
                           std::size_t grid_size)
{
  double worst = 0.0;
  for (std::size_t k = 0; k < grid_size; ++k)
  {
    double const q = k + 1 == grid_size ? 1.0 : static_cast<double>(k) /
                                                    static_cast<double>(grid_size - 1);
    worst = std::max(worst, std::abs(f.eval(q) - g.eval(q)));
  }
  return worst;
}

}  // namespace auctionlab
