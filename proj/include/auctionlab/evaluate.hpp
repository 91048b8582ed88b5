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

#include <cstddef>
#include <string>
#include <vector>

namespace auctionlab {

enum class QuadratureRule
{
  Trapezoid,
  GaussLegendre
};

struct QuadratureConfig
{
  std::size_t    node_count        = 4096;
  QuadratureRule rule              = QuadratureRule::Trapezoid;
  bool           singularity_split = true;
  bool           check_convergence = false;

  void             validate() const;
  QuadratureConfig refined() const;
};

constexpr double kQuadratureTolerance = 1e-6;

struct OutcomeProfile
{
  std::vector<double>      payment;
  std::vector<double>      utility;
  std::vector<double>      win_probability;
  double                   revenue                = 0.0;
  double                   allocation_probability = 0.0;
  bool                     converged              = true;
  std::vector<std::string> diagnostics;

  nlohmann::json        to_json() const;
  static OutcomeProfile from_json(nlohmann::json const &doc);
};

/// Integrals of one buyer's interim quantities over her winning region.
struct BuyerExpectations
{
  double payment         = 0.0;
  double utility         = 0.0;
  double win_probability = 0.0;
  double value_surplus   = 0.0;  // int v x
  double score_surplus   = 0.0;  // int h x, h the ranking qf
};

/// The qf a mechanism ranks buyer i by: bidding qf, or its virtual qf for BROA.
QuantileFunction const &ranking_qf(MechanismKind kind, Scenario const &scenario, std::size_t i);

/// Smallest quantile at which buyer i's score reaches the reserve; 1 when never.
double reserve_crossing(MechanismSpec const &spec, Scenario const &scenario, std::size_t i);

/// CDF of the best competing score (reserve included) seen by buyer i.
double g_function(MechanismSpec const &spec, Scenario const &scenario, std::size_t i, double s);

double interim_win_probability(MechanismSpec const &spec, Scenario const &scenario, std::size_t i,
                               double q);

BuyerExpectations buyer_expectations(MechanismSpec const &spec, Scenario const &scenario,
                                     std::size_t i, QuadratureConfig const &quad);

double expected_payment(MechanismSpec const &spec, Scenario const &scenario, std::size_t i,
                        QuadratureConfig const &quad = {});

double expected_utility(MechanismSpec const &spec, Scenario const &scenario, std::size_t i,
                        QuadratureConfig const &quad = {});

struct CheckedValue
{
  double value     = 0.0;
  double refined   = 0.0;
  bool   converged = true;
};

/// Expected payment together with the node-doubling convergence check.
CheckedValue expected_payment_checked(MechanismSpec const &spec, Scenario const &scenario,
                                      std::size_t i, QuadratureConfig const &quad = {});

OutcomeProfile outcome_profile(MechanismSpec const &spec, Scenario const &scenario,
                               QuadratureConfig const &quad = {});

/// BROA expected payment from the threshold-price expectation, without the
/// virtual-surplus identity.
double broa_direct_payment(MechanismSpec const &spec, Scenario const &scenario, std::size_t i,
                           QuadratureConfig const &quad = {});

}  // namespace auctionlab
