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

#include "auctionlab/qfspace.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace auctionlab {

enum class MechanismKind
{
  BDFPA,
  PFPA,
  BROA,
  BDSPA,
  PSPA
};

char const   *to_string(MechanismKind kind) noexcept;
MechanismKind parse_mechanism(std::string const &name);

bool is_first_price(MechanismKind kind) noexcept;
bool is_second_price(MechanismKind kind) noexcept;

struct Buyer
{
  QuantileFunction qf;
  double           budget;
};

/**
 * Problem instance: buyers with bidding qfs and budgets, the seller's
 * opportunity cost, and optional true value qfs.
 */
class Scenario
{
public:
  Scenario(std::vector<Buyer> buyers, double opportunity_cost,
           std::optional<std::vector<QuantileFunction>> value_qfs = std::nullopt);

  std::size_t size() const noexcept
  {
    return buyers_.size();
  }
  double lambda() const noexcept
  {
    return lambda_;
  }
  QuantileFunction const &bidding(std::size_t i) const
  {
    return buyers_.at(i).qf;
  }
  QuantileFunction const &value(std::size_t i) const
  {
    return values_.at(i);
  }
  QuantileFunction const &virtual_bidding(std::size_t i) const
  {
    return virtuals_.at(i);
  }
  double budget(std::size_t i) const
  {
    return buyers_.at(i).budget;
  }
  std::vector<Buyer> const &buyers() const noexcept
  {
    return buyers_;
  }
  bool has_value_qfs() const noexcept
  {
    return explicit_values_;
  }
  std::vector<double> budgets() const;

  /// Same scenario with buyer i's bidding qf replaced; values are kept.
  Scenario with_bidding(std::size_t i, QuantileFunction qf) const;
  /// Same scenario with every bidding qf replaced; values are kept.
  Scenario with_biddings(std::vector<QuantileFunction> qfs) const;
  Scenario with_budgets(std::vector<double> budgets) const;

  /// Identical qfs (on a grid, to tolerance) and budgets.
  bool is_symmetric(double tol = 1e-12) const;

  nlohmann::json  to_json() const;
  static Scenario from_json(nlohmann::json const &doc);

private:
  std::vector<Buyer>            buyers_;
  double                        lambda_;
  std::vector<QuantileFunction> values_;
  std::vector<QuantileFunction> virtuals_;
  bool                          explicit_values_;
};

struct MechanismSpec
{
  MechanismKind       kind;
  std::vector<double> params;

  void validate(std::size_t n) const;
};

struct ExPostOutcome
{
  std::optional<std::size_t> winner;
  double                     payment = 0.0;
  std::vector<double>        utility;
};

constexpr double kTieTolerance       = 1e-12;
constexpr double kThresholdTolerance = 1e-10;

/// Lowest index among the candidates.
std::size_t tie_break(std::span<std::size_t const> candidates);

/// Ex-post outcome for a realized quantile profile.
ExPostOutcome allocate(MechanismSpec const &spec, Scenario const &scenario,
                       std::span<double const> q);

/**
 * Ex-post outcome when buyers submit the given bids directly (no BROA).
 * `values` are the winners' true values.
 */
ExPostOutcome allocate_bids(MechanismSpec const &spec, double lambda, std::span<double const> bids,
                            std::span<double const> values);

/// Threshold payment for a BROA winner i given the competing score.
double broa_threshold_payment(QuantileFunction const &bidding, QuantileFunction const &virtual_qf,
                              double theta, double competing, double q_own);

}  // namespace auctionlab
