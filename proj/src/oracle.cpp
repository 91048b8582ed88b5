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

#include "auctionlab/oracle.hpp"

#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace auctionlab {

namespace {

constexpr std::size_t kBlock = 4096;

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Running mean and second moment, merged with Chan's formula.
struct Moments
{
  double      mean  = 0.0;
  double      m2    = 0.0;
  std::size_t count = 0;

  void push(double x) noexcept
  {
    ++count;
    double const d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(Moments const &o) noexcept
  {
    if (o.count == 0)
    {
      return;
    }
    if (count == 0)
    {
      *this = o;
      return;
    }
    double const na = static_cast<double>(count);
    double const nb = static_cast<double>(o.count);
    double const d  = o.mean - mean;
    double const nn = na + nb;
    mean += d * nb / nn;
    m2 += o.m2 + d * d * na * nb / nn;
    count += o.count;
  }

  McEstimate estimate(std::uint64_t seed) const
  {
    McEstimate e;
    e.mean         = mean;
    e.sample_count = count;
    e.seed         = seed;
    if (count > 1)
    {
      double const var = std::max(0.0, m2 / static_cast<double>(count - 1));
      e.standard_error = std::sqrt(var / static_cast<double>(count));
    }
    return e;
  }
};

struct BlockResult
{
  std::vector<Moments> moments;
  double               min_value = std::numeric_limits<double>::infinity();
  std::size_t          flagged   = 0;
};

using BlockFn = std::function<void(std::size_t begin, std::size_t end, BlockResult &)>;

/// Runs fn over fixed blocks on a thread pool and merges in block order.
BlockResult run_blocks(std::size_t samples, std::size_t quantities, BlockFn const &fn)
{
  std::size_t const        blocks = (samples + kBlock - 1) / kBlock;
  std::vector<BlockResult> parts(blocks);
  for (auto &p : parts)
  {
    p.moments.resize(quantities);
  }
  std::size_t const workers = std::max<std::size_t>(1, std::min(oracle_threads(), blocks));
  auto              work    = [&](std::size_t w) {
    for (std::size_t b = w; b < blocks; b += workers)
    {
      fn(b * kBlock, std::min(samples, (b + 1) * kBlock), parts[b]);
    }
  };
  if (workers == 1)
  {
    work(0);
  }
  else
  {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
      pool.emplace_back(work, w);
    }
    for (auto &t : pool)
    {
      t.join();
    }
  }
  BlockResult total;
  total.moments.resize(quantities);
  for (auto const &p : parts)
  {
    for (std::size_t k = 0; k < quantities; ++k)
    {
      total.moments[k].merge(p.moments[k]);
    }
    total.min_value = std::min(total.min_value, p.min_value);
    total.flagged += p.flagged;
  }
  return total;
}

void draw_profile(std::uint64_t seed, std::size_t sample, std::vector<double> &q)
{
  std::size_t const n = q.size();
  for (std::size_t j = 0; j < n; ++j)
  {
    q[j] = counter_uniform(seed, static_cast<std::uint64_t>(sample) * n + j);
  }
}

void check_samples(std::size_t samples)
{
  if (samples < kMinMcSamples)
  {
    std::ostringstream os;
    os << "Monte Carlo needs at least " << kMinMcSamples << " samples, got " << samples;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

Scenario truthful(Scenario const &scenario)
{
  std::vector<QuantileFunction> values;
  for (std::size_t i = 0; i < scenario.size(); ++i)
  {
    values.push_back(scenario.value(i));
  }
  return scenario.with_biddings(values);
}

}  // namespace

bool McEstimate::agrees_with(double reference, double k, double floor) const
{
  return std::abs(mean - reference) <= k * standard_error + floor;
}

nlohmann::json McEstimate::to_json() const
{
  return {{"mean", mean},
          {"standard_error", standard_error},
          {"sample_count", sample_count},
          {"seed", seed}};
}

nlohmann::json McProfile::to_json() const
{
  auto list = [](std::vector<McEstimate> const &v) {
    nlohmann::json a = nlohmann::json::array();
    for (auto const &e : v)
    {
      a.push_back(e.to_json());
    }
    return a;
  };
  return {{"payment", list(payment)},
          {"utility", list(utility)},
          {"win_probability", list(win_probability)},
          {"revenue", revenue.to_json()},
          {"allocation_probability", allocation_probability.to_json()},
          {"min_winner_utility", min_winner_utility},
          {"samples", samples},
          {"seed", seed}};
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept
{
  std::uint64_t const bits = splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::size_t oracle_threads()
{
  if (char const *env = std::getenv("AUCTIONLAB_THREADS"))
  {
    char               *end = nullptr;
    unsigned long const v   = std::strtoul(env, &end, 10);
    if (end != env && v > 0)
    {
      return static_cast<std::size_t>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

McProfile mc_outcome_profile(MechanismSpec const &spec, Scenario const &scenario,
                             std::size_t samples, std::uint64_t seed)
{
  check_samples(samples);
  std::size_t const n = scenario.size();
  spec.validate(n);
  double const lambda = scenario.lambda();
  // per buyer: payment, utility, win; then revenue and allocation
  std::size_t const quantities = 3 * n + 2;

  BlockResult const r = run_blocks(samples, quantities, [&](std::size_t b, std::size_t e,
                                                            BlockResult &out) {
    std::vector<double> q(n);
    std::vector<double> row(quantities);
    for (std::size_t s = b; s < e; ++s)
    {
      draw_profile(seed, s, q);
      ExPostOutcome const o = allocate(spec, scenario, q);
      std::fill(row.begin(), row.end(), 0.0);
      if (o.winner)
      {
        std::size_t const w = *o.winner;
        row[3 * w]          = o.payment;
        row[3 * w + 1]      = o.utility[w];
        row[3 * w + 2]      = 1.0;
        row[3 * n]          = o.payment - lambda;
        row[3 * n + 1]      = 1.0;
        out.min_value       = std::min(out.min_value, o.utility[w]);
      }
      for (std::size_t k = 0; k < quantities; ++k)
      {
        out.moments[k].push(row[k]);
      }
    }
  });

  McProfile p;
  p.samples = samples;
  p.seed    = seed;
  for (std::size_t i = 0; i < n; ++i)
  {
    p.payment.push_back(r.moments[3 * i].estimate(seed));
    p.utility.push_back(r.moments[3 * i + 1].estimate(seed));
    p.win_probability.push_back(r.moments[3 * i + 2].estimate(seed));
  }
  p.revenue                = r.moments[3 * n].estimate(seed);
  p.allocation_probability = r.moments[3 * n + 1].estimate(seed);
  p.min_winner_utility     = std::isfinite(r.min_value) ? r.min_value : 0.0;
  return p;
}

nlohmann::json IrReport::to_json() const
{
  return {{"min_winner_utility", min_winner_utility},
          {"violations", violations},
          {"samples", samples},
          {"passed", passed}};
}

IrReport ex_post_ir_check(MechanismSpec const &spec, Scenario const &scenario,
                          std::size_t samples, std::uint64_t seed, double tol)
{
  std::size_t const n = scenario.size();
  spec.validate(n);
  Scenario const honest = truthful(scenario);

  BlockResult const r = run_blocks(samples, 0, [&](std::size_t b, std::size_t e, BlockResult &out) {
    std::vector<double> q(n);
    for (std::size_t s = b; s < e; ++s)
    {
      draw_profile(seed, s, q);
      ExPostOutcome const o = allocate(spec, honest, q);
      if (!o.winner)
      {
        continue;
      }
      double const u = o.utility[*o.winner];
      out.min_value  = std::min(out.min_value, u);
      if (u < -tol)
      {
        ++out.flagged;
      }
    }
  });

  IrReport rep;
  rep.samples            = samples;
  rep.violations         = r.flagged;
  rep.min_winner_utility = std::isfinite(r.min_value) ? r.min_value : 0.0;
  rep.passed             = r.flagged == 0;
  return rep;
}

std::string Deviation::label() const
{
  std::ostringstream os;
  os << (family == Family::Scale ? "scale " : "shift ") << amount;
  return os.str();
}

std::vector<Deviation> default_deviation_grid()
{
  std::vector<Deviation> grid;
  for (double f : {0.5, 0.8, 0.9, 1.1, 1.25, 2.0})
  {
    grid.push_back({Deviation::Family::Scale, f});
  }
  for (double d : {-0.1, -0.05, 0.05, 0.1})
  {
    grid.push_back({Deviation::Family::Shift, d});
  }
  return grid;
}

QuantileFunction deviate(QuantileFunction const &value, Deviation const &d,
                         std::size_t resolution)
{
  if (resolution < 2)
  {
    throw Error(ErrorCode::InvalidArgument, "deviation resolution must be at least 2");
  }
  std::vector<double> grid(resolution + 1);
  std::vector<double> bids(resolution + 1);
  for (std::size_t k = 0; k <= resolution; ++k)
  {
    double const q = static_cast<double>(k) / static_cast<double>(resolution);
    double const v = value.eval(q);
    double const b = d.family == Deviation::Family::Scale ? d.amount * v : v + d.amount;
    grid[k]        = q;
    bids[k]        = numeric::clamp01(b);
  }
  grid.back() = 1.0;
  for (std::size_t k = 1; k <= resolution; ++k)
  {
    bids[k] = std::max(bids[k], bids[k - 1]);
  }
  return QuantileFunction::piecewise_linear(grid, bids);
}

nlohmann::json BcicReport::to_json() const
{
  return {{"max_gain", max_gain},
          {"buyer", buyer},
          {"deviation", deviation},
          {"truthful_utility", truthful_utility}};
}

BcicReport bcic_deviation_test(MechanismSpec const &spec, Scenario const &scenario,
                               std::vector<Deviation> const &grid, QuadratureConfig const &quad)
{
  std::size_t const n = scenario.size();
  spec.validate(n);
  if (spec.kind == MechanismKind::BROA)
  {
    throw Error(ErrorCode::InvalidArgument, "deviation test needs a bid-based mechanism");
  }
  Scenario const honest = truthful(scenario);

  BcicReport rep;
  rep.max_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
  {
    double const base = expected_utility(spec, honest, i, quad);
    rep.truthful_utility.push_back(base);
    for (auto const &d : grid)
    {
      Scenario const dev  = honest.with_bidding(i, deviate(honest.value(i), d));
      double const   gain = expected_utility(spec, dev, i, quad) - base;
      if (gain > rep.max_gain)
      {
        rep.max_gain  = gain;
        rep.buyer     = i;
        rep.deviation = d.label();
      }
    }
  }
  return rep;
}

nlohmann::json RearrangementReport::to_json() const
{
  return {{"delta", delta.to_json()}, {"passed", passed}};
}

RearrangementReport rearrangement_dominance_test(MechanismSpec const &spec,
                                                 Scenario const &scenario, std::size_t buyer,
                                                 std::vector<double> const &bids,
                                                 std::size_t samples, std::uint64_t seed)
{
  check_samples(samples);
  std::size_t const n = scenario.size();
  spec.validate(n);
  if (spec.kind == MechanismKind::BROA)
  {
    throw Error(ErrorCode::InvalidArgument,
                "rearrangement test needs a monotone bid-based mechanism, not broa");
  }
  if (buyer >= n)
  {
    throw Error(ErrorCode::InvalidArgument, "buyer index out of range");
  }
  if (bids.empty())
  {
    throw Error(ErrorCode::InvalidArgument, "rearrangement test needs bid samples");
  }
  for (double b : bids)
  {
    if (!(b >= 0.0 && b <= 1.0))
    {
      throw Error(ErrorCode::Domain, "bids must lie in [0,1]");
    }
  }
  std::vector<double> sorted = bids;
  std::sort(sorted.begin(), sorted.end());
  std::size_t const cells = bids.size();

  BlockResult const r = run_blocks(samples, 1, [&](std::size_t b, std::size_t e, BlockResult &out) {
    std::vector<double> q(n);
    std::vector<double> bid(n);
    std::vector<double> val(n);
    for (std::size_t s = b; s < e; ++s)
    {
      draw_profile(seed, s, q);
      for (std::size_t j = 0; j < n; ++j)
      {
        bid[j] = scenario.bidding(j).eval(q[j]);
        val[j] = scenario.value(j).eval(q[j]);
      }
      std::size_t const cell =
          std::min(cells - 1, static_cast<std::size_t>(q[buyer] * static_cast<double>(cells)));
      bid[buyer]            = bids[cell];
      double const original = allocate_bids(spec, scenario.lambda(), bid, val).utility[buyer];
      bid[buyer]            = sorted[cell];
      double const sorted_u = allocate_bids(spec, scenario.lambda(), bid, val).utility[buyer];
      out.moments[0].push(sorted_u - original);
    }
  });

  RearrangementReport rep;
  rep.delta  = r.moments[0].estimate(seed);
  rep.passed = rep.delta.mean >= -3.0 * rep.delta.standard_error - 1e-12;
  return rep;
}

}  // namespace auctionlab
