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

#include "auctionlab/evaluate.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace auctionlab {

struct McEstimate
{
  double        mean           = 0.0;
  double        standard_error = 0.0;
  std::size_t   sample_count   = 0;
  std::uint64_t seed           = 0;

  /// |mean - reference| within k standard errors (plus an absolute floor).
  bool agrees_with(double reference, double k = 3.0, double floor = 1e-6) const;

  nlohmann::json to_json() const;
};

struct McProfile
{
  std::vector<McEstimate> payment;
  std::vector<McEstimate> utility;
  std::vector<McEstimate> win_probability;
  McEstimate              revenue;
  McEstimate              allocation_probability;
  double                  min_winner_utility = 0.0;  // over all samples with a winner
  std::size_t             samples            = 0;
  std::uint64_t           seed               = 0;

  nlohmann::json to_json() const;
};

constexpr std::size_t   kMinMcSamples = 10000;
constexpr std::uint64_t kDefaultSeed  = 42;

/// Uniform draw in [0,1) for (seed, counter); a stateless counter-based generator.
double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept;

/// Worker count: AUCTIONLAB_THREADS if set, else the hardware concurrency.
std::size_t oracle_threads();

/**
 * Monte Carlo estimates of payments, utilities, win probabilities and revenue.
 * Results do not depend on the thread count.
 */
McProfile mc_outcome_profile(MechanismSpec const &spec, Scenario const &scenario,
                             std::size_t samples = 1000000, std::uint64_t seed = kDefaultSeed);

struct IrReport
{
  double      min_winner_utility = 0.0;
  std::size_t violations         = 0;
  std::size_t samples            = 0;
  bool        passed             = true;

  nlohmann::json to_json() const;
};

/// Ex-post individual rationality at truthful bidding (bidding qfs replaced by values).
IrReport ex_post_ir_check(MechanismSpec const &spec, Scenario const &scenario,
                          std::size_t samples = 100000, std::uint64_t seed = kDefaultSeed,
                          double tol = 1e-12);

struct Deviation
{
  enum class Family
  {
    Scale,
    Shift
  };
  Family family;
  double amount;

  std::string label() const;
};

std::vector<Deviation> default_deviation_grid();

/// The bid qf clamp(f(v(q))) sampled on a uniform grid of `resolution` cells.
QuantileFunction deviate(QuantileFunction const &value, Deviation const &d,
                         std::size_t resolution = 512);

struct BcicReport
{
  double              max_gain = 0.0;
  std::size_t         buyer    = 0;
  std::string         deviation;
  std::vector<double> truthful_utility;

  nlohmann::json to_json() const;
};

/// Largest expected-utility gain of a unilateral deviation from truthful bidding.
BcicReport bcic_deviation_test(MechanismSpec const &spec, Scenario const &scenario,
                               std::vector<Deviation> const &grid = default_deviation_grid(),
                               QuadratureConfig const &quad = {});

struct RearrangementReport
{
  McEstimate delta;
  bool       passed = false;

  nlohmann::json to_json() const;
};

/**
 * Utility of buyer i when her step-function bids are sorted, minus her utility
 * under the given order. `bids[k]` is her bid on quantile cell k.
 */
RearrangementReport rearrangement_dominance_test(MechanismSpec const &spec,
                                                 Scenario const &scenario, std::size_t buyer,
                                                 std::vector<double> const &bids,
                                                 std::size_t samples = 200000,
                                                 std::uint64_t seed  = kDefaultSeed);

}  // namespace auctionlab
