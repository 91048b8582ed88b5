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

#include "auctionlab/evaluate.hpp"
#include "auctionlab/mechanisms.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <random>

using namespace auctionlab;

namespace {

Scenario uniform_pair(double lambda = 0.1, double budget = 0.312)
{
  return Scenario({{QuantileFunction::uniform(), budget}, {QuantileFunction::uniform(), budget}},
                  lambda);
}

constexpr std::array<MechanismKind, 5> kAll = {MechanismKind::BDFPA, MechanismKind::PFPA,
                                               MechanismKind::BROA, MechanismKind::BDSPA,
                                               MechanismKind::PSPA};

}  // namespace

TEST(Allocate, BidDiscountFirstPricePaysRawBid)
{
  auto const sc  = uniform_pair();
  double const q[] = {0.8, 0.3};
  auto const out = allocate({MechanismKind::BDFPA, {0.25, 0.25}}, sc, q);
  ASSERT_TRUE(out.winner.has_value());
  EXPECT_EQ(*out.winner, 0u);
  EXPECT_DOUBLE_EQ(out.payment, 0.8);
  EXPECT_NEAR(out.utility[0], 0.0, 1e-15);
  EXPECT_EQ(out.utility[1], 0.0);
}

TEST(Allocate, PacedFirstPriceScalesBid)
{
  double const q[] = {0.8, 0.3};
  auto const out = allocate({MechanismKind::PFPA, {0.5, 1.0}}, uniform_pair(), q);
  ASSERT_TRUE(out.winner.has_value());
  EXPECT_EQ(*out.winner, 0u);
  EXPECT_DOUBLE_EQ(out.payment, 0.4);
  EXPECT_NEAR(out.utility[0], 0.4, 1e-15);
}

TEST(Allocate, SecondPriceRules)
{
  auto const   sc  = uniform_pair();
  double const q[] = {0.7, 0.2};
  auto const   ps  = allocate({MechanismKind::PSPA, {1.0, 1.0}}, sc, q);
  ASSERT_TRUE(ps.winner.has_value());
  EXPECT_EQ(*ps.winner, 0u);
  EXPECT_DOUBLE_EQ(ps.payment, 0.2);

  auto const bd = allocate({MechanismKind::BDSPA, {0.5, 1.0}}, sc, q);
  ASSERT_TRUE(bd.winner.has_value());
  EXPECT_EQ(*bd.winner, 0u);
  EXPECT_DOUBLE_EQ(bd.payment, 0.4);

  double const low[] = {0.7, 0.05};
  auto const   floor = allocate({MechanismKind::PSPA, {1.0, 1.0}}, sc, low);
  EXPECT_DOUBLE_EQ(floor.payment, 0.1);
}

TEST(Allocate, ReserveFiltersEveryone)
{
  auto const   sc  = uniform_pair(0.3);
  double const q[] = {0.25, 0.2};
  for (auto kind : kAll)
  {
    auto const out = allocate({kind, {1.0, 1.0}}, sc, q);
    EXPECT_FALSE(out.winner.has_value()) << to_string(kind);
    EXPECT_EQ(out.payment, 0.0);
  }
}

TEST(Allocate, ThresholdPaymentForBroa)
{
  // psi = 2q - 1; buyer 0 at q = 0.9 faces competing virtual score 2*0.6 - 1 = 0.2,
  // so the threshold quantile solves 2z - 1 = 0.2.
  double const q[] = {0.9, 0.6};
  auto const   out = allocate({MechanismKind::BROA, {1.0, 1.0}}, uniform_pair(), q);
  ASSERT_TRUE(out.winner.has_value());
  EXPECT_EQ(*out.winner, 0u);
  EXPECT_NEAR(out.payment, 0.6, 1e-9);

  double const alone[] = {0.9, 0.1};
  auto const   solo    = allocate({MechanismKind::BROA, {1.0, 1.0}}, uniform_pair(), alone);
  EXPECT_NEAR(solo.payment, 0.55, 1e-9);
}

TEST(Allocate, ZeroMultiplierExcludesBuyer)
{
  double const q[] = {1.0, 0.3};
  auto const   out = allocate({MechanismKind::BDSPA, {0.0, 1.0}}, uniform_pair(), q);
  ASSERT_TRUE(out.winner.has_value());
  EXPECT_EQ(*out.winner, 1u);
}

TEST(Allocate, BidsEntryPoint)
{
  double const bids[]   = {0.6, 0.5};
  double const values[] = {0.9, 0.8};
  auto const   out      = allocate_bids({MechanismKind::BDFPA, {1.0, 1.0}}, 0.1, bids, values);
  ASSERT_TRUE(out.winner.has_value());
  EXPECT_EQ(*out.winner, 0u);
  EXPECT_DOUBLE_EQ(out.payment, 0.6);
  EXPECT_NEAR(out.utility[0], 0.3, 1e-15);
  EXPECT_THROW((void)allocate_bids({MechanismKind::BROA, {1.0, 1.0}}, 0.1, bids, values), Error);
}

TEST(TieBreak, LowestIndex)
{
  std::size_t const a[] = {1, 3};
  std::size_t const b[] = {2};
  EXPECT_EQ(tie_break(a), 1u);
  EXPECT_EQ(tie_break(b), 2u);
  EXPECT_THROW((void)tie_break(std::span<std::size_t const>{}), Error);

  double const q[] = {0.5, 0.5};
  auto const   out = allocate({MechanismKind::BDFPA, {1.0, 1.0}}, uniform_pair(), q);
  EXPECT_EQ(*out.winner, 0u);
}

TEST(TieBreak, OrderDoesNotChangeExpectations)
{
  std::mt19937_64 g(41);
  auto const      rs = testsupport::random_scenario(g, 3, testsupport::random_increasing);
  auto            rev = rs;
  std::reverse(rev.qfs.begin(), rev.qfs.end());
  std::reverse(rev.budgets.begin(), rev.budgets.end());
  std::vector<double> theta = {0.9, 0.7, 0.8};
  std::vector<double> back(theta.rbegin(), theta.rend());
  for (auto kind : {MechanismKind::BDFPA, MechanismKind::PSPA})
  {
    auto const a = outcome_profile({kind, theta}, rs.scenario());
    auto const b = outcome_profile({kind, back}, rev.scenario());
    for (std::size_t i = 0; i < 3; ++i)
    {
      EXPECT_NEAR(a.payment[i], b.payment[2 - i], 1e-9);
    }
  }
}

TEST(Properties, MonotoneAllocationOnGrid)
{
  std::mt19937_64 g(43);
  for (int rep = 0; rep < 5; ++rep)
  {
    auto const sc = testsupport::random_scenario(g, 3, testsupport::random_regular).scenario();
    std::vector<double> const theta = {0.8, 1.0, 0.6};
    for (auto kind : kAll)
    {
      for (double q1 : {0.1, 0.5, 0.9})
      {
        for (double q2 : {0.2, 0.7})
        {
          bool won = false;
          for (int k = 0; k <= 400; ++k)
          {
            double const q[] = {k / 400.0, q1, q2};
            bool const   w   = allocate({kind, theta}, sc, q).winner == std::optional<std::size_t>(0);
            EXPECT_FALSE(won && !w) << to_string(kind);
            won = won || w;
          }
        }
      }
    }
  }
}

TEST(Properties, PointwisePaymentOrdering)
{
  std::mt19937_64                        g(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto const sc = testsupport::random_scenario(g, 3, testsupport::random_regular).scenario();
  for (int k = 0; k < 2000; ++k)
  {
    std::vector<double> const theta = {u(g), u(g), u(g)};
    double const              q[]   = {u(g), u(g), u(g)};
    auto const bd = allocate({MechanismKind::BDFPA, theta}, sc, q);
    auto const pf = allocate({MechanismKind::PFPA, theta}, sc, q);
    EXPECT_LE(pf.payment, bd.payment + 1e-15);
    auto const broa = allocate({MechanismKind::BROA, theta}, sc, q);
    if (broa.winner)
    {
      EXPECT_LE(broa.payment, sc.bidding(*broa.winner).eval(q[*broa.winner]) + 1e-9);
    }
    for (auto kind : {MechanismKind::BDFPA, MechanismKind::PFPA, MechanismKind::BDSPA,
                      MechanismKind::PSPA})
    {
      auto const o = allocate({kind, theta}, sc, q);
      if (o.winner)
      {
        EXPECT_GE(o.utility[*o.winner], -1e-12) << to_string(kind);
      }
    }
  }
}

TEST(MechanismNames, Parse)
{
  EXPECT_EQ(parse_mechanism("bdfpa"), MechanismKind::BDFPA);
  EXPECT_EQ(parse_mechanism("ePFPA"), MechanismKind::PFPA);
  EXPECT_EQ(parse_mechanism("broa"), MechanismKind::BROA);
  EXPECT_EQ(parse_mechanism("epspa"), MechanismKind::PSPA);
  EXPECT_THROW((void)parse_mechanism("vcg"), Error);
  EXPECT_STREQ(to_string(MechanismKind::BDSPA), "bdspa");
}

TEST(MechanismSpecs, Validate)
{
  EXPECT_NO_THROW((MechanismSpec{MechanismKind::PFPA, {0.0, 1.0}}.validate(2)));
  EXPECT_THROW((MechanismSpec{MechanismKind::PFPA, {0.5}}.validate(2)), Error);
  EXPECT_THROW((MechanismSpec{MechanismKind::PFPA, {0.5, 1.2}}.validate(2)), Error);
  EXPECT_THROW((MechanismSpec{MechanismKind::PFPA, {0.5, std::nan("")}}.validate(2)), Error);
}

TEST(Scenarios, InvariantsAndJson)
{
  EXPECT_THROW(Scenario({}, 0.1), Error);
  EXPECT_THROW(Scenario({{QuantileFunction::uniform(), 0.3}}, 0.0), Error);
  EXPECT_THROW(Scenario({{QuantileFunction::uniform(), 0.0}}, 0.1), Error);
  EXPECT_THROW(Scenario({{QuantileFunction::uniform(), 1.5}}, 0.1), Error);

  auto const sc   = uniform_pair();
  auto const back = Scenario::from_json(sc.to_json());
  EXPECT_EQ(back.size(), 2u);
  EXPECT_DOUBLE_EQ(back.lambda(), 0.1);
  EXPECT_DOUBLE_EQ(back.budget(1), 0.312);
  EXPECT_TRUE(back.is_symmetric());
  EXPECT_EQ(back.to_json(), sc.to_json());

  auto const asym = sc.with_budgets({0.3, 0.2});
  EXPECT_FALSE(asym.is_symmetric());
  EXPECT_THROW((void)Scenario::from_json(nlohmann::json{{"lambda", 0.1}}), Error);
}
