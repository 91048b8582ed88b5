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
#include "auctionlab/transforms.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace auctionlab;
namespace ts = testsupport;

namespace {

Scenario example()
{
  return Scenario({{QuantileFunction::uniform(), 0.312}, {QuantileFunction::uniform(), 0.312}},
                  0.1);
}

template <class F>
void expect_error(ErrorCode code, F &&body)
{
  try
  {
    body();
    ADD_FAILURE() << "expected an error";
  }
  catch (Error const &e)
  {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

/// Integral average computed on the test side.
double average_from(QuantileFunction const &r, double x)
{
  if (x >= 1.0)
  {
    return r.eval(1.0);
  }
  auto const cuts = r.breakpoints();
  return ts::integrate_cut([&](double q) { return r.eval(q); }, cuts, x, 1.0, 16) / (1.0 - x);
}

/// MC payments of the source against quadrature payments of the target.
void expect_mc_agreement(MechanismSpec const &source_spec, Scenario const &source,
                         MappedProfile const &m, Scenario const &target)
{
  auto const mc = mc_outcome_profile(source_spec, source, 200000, 77);
  auto const q  = outcome_profile({m.target_kind, m.target_params}, target);
  for (std::size_t i = 0; i < source.size(); ++i)
  {
    EXPECT_TRUE(mc.payment[i].agrees_with(q.payment[i], 4.0, 1e-6))
        << "buyer " << i << " mc " << mc.payment[i].mean << " target " << q.payment[i];
  }
  EXPECT_TRUE(mc.revenue.agrees_with(q.revenue, 4.0, 1e-6));
}

}  // namespace

TEST(Devirtualize, KnownInverses)
{
  auto const s = devirtualize(QuantileFunction::virtual_of(QuantileFunction::uniform()));
  for (double q : {0.0, 0.2, 0.5, 0.9, 1.0})
  {
    EXPECT_NEAR(s.eval(q), q, 1e-12);
  }
  auto const c = devirtualize(QuantileFunction::uniform(0.7, 0.7 + 1e-9));
  EXPECT_NEAR(c.eval(0.3), 0.7, 1e-8);
  EXPECT_EQ(s.kind(), QfKind::IntegralAverage);
}

TEST(Devirtualize, RejectsNonIncreasing)
{
  expect_error(ErrorCode::PreconditionViolation, [] {
    devirtualize(QuantileFunction::piecewise_linear({0, 0.5, 1}, {0.2, 0.4, 0.4}));
  });
  // Convex base: its virtual qf drops at the kink.
  auto const convex = QuantileFunction::piecewise_linear({0, 0.5, 1}, {0, 0.1, 0.9});
  expect_error(ErrorCode::PreconditionViolation,
               [&] { devirtualize(QuantileFunction::virtual_of(convex)); });
}

TEST(Devirtualize, RoundTrips)
{
  std::mt19937_64 g(301);
  for (int rep = 0; rep < 8; ++rep)
  {
    auto const v    = ts::random_regular(g).qf();
    auto const back = devirtualize(QuantileFunction::virtual_of(v));
    auto const r    = ts::random_increasing(g).qf();
    auto const s    = devirtualize(r);
    auto const rr   = QuantileFunction::virtual_of(s);
    for (int k = 0; k < 1000; ++k)
    {
      double const q = static_cast<double>(k) / 999.0;
      ASSERT_NEAR(back.eval(q), v.eval(q), 1e-6) << "rep " << rep << " q " << q;
      ASSERT_NEAR(s.eval(q), average_from(r, q), 1e-6);
      ASSERT_NEAR(rr.eval(q), r.eval(q), 1e-6) << "rep " << rep << " q " << q;
    }
  }
}

TEST(Devirtualize, KeepsHalfTheInverseLipschitzBound)
{
  std::mt19937_64 g(302);
  for (int rep = 0; rep < 8; ++rep)
  {
    auto const   r = ts::random_increasing(g).qf();
    double const L = grid_slope_lower(r, 2001);
    auto const   s = devirtualize(r);
    EXPECT_GE(grid_slope_lower(s, 2001), 0.5 * L * (1.0 - 1e-6));
  }
}

TEST(Lift, UniformExample)
{
  // psi = 2q - 1, lambda = 0.1: psi(0.525) = 0.05, head 0.05 exp(40 (q - 0.525)).
  auto const psi = QuantileFunction::virtual_of(QuantileFunction::uniform());
  auto const f   = lift(psi, 0.1);
  EXPECT_EQ(f.kind(), QfKind::ExpHead);
  EXPECT_NEAR(f.join(), 0.525, 1e-9);
  auto const doc = f.to_json();
  EXPECT_NEAR(doc.at("a2").get<double>(), 40.0, 1e-6);
  EXPECT_NEAR(doc.at("log_a1").get<double>(), std::log(0.05) - 21.0, 1e-6);
  for (double q : {0.0, 0.1, 0.3, 0.5})
  {
    EXPECT_NEAR(f.eval(q), 0.05 * std::exp(40.0 * (q - 0.525)), 1e-9);
  }
  for (double q : {0.525, 0.6, 1.0})
  {
    EXPECT_NEAR(f.eval(q), 2 * q - 1, 1e-12);
  }
  EXPECT_NEAR(f.derivative(0.5249999), 2.0, 1e-4);
}

TEST(Lift, NonNegativeIsIdentity)
{
  auto const psi = QuantileFunction::virtual_of(QuantileFunction::uniform(0.5, 1.0));
  auto const f   = lift(psi, 0.1);
  for (double q : {0.0, 0.4, 1.0})
  {
    EXPECT_DOUBLE_EQ(f.eval(q), psi.eval(q));
  }
}

TEST(Lift, Preconditions)
{
  auto const psi = QuantileFunction::virtual_of(QuantileFunction::uniform(0.0, 0.05));
  expect_error(ErrorCode::PreconditionViolation, [&] { lift(psi, 0.1); });
  expect_error(ErrorCode::InvalidArgument, [&] { lift(psi, 1.5); });
}

TEST(Lift, KeepsAllocationOnRandomConcave)
{
  std::mt19937_64 g(303);
  for (int rep = 0; rep < 20; ++rep)
  {
    double const lambda = 0.05 + 0.15 * std::uniform_real_distribution<double>(0, 1)(g);
    auto const   psi    = QuantileFunction::virtual_of(ts::random_concave(g).qf());
    if (psi.eval(1.0) < lambda)
    {
      continue;
    }
    auto const f = lift(psi, lambda);
    double     prev = -1.0;
    for (int k = 0; k <= 2000; ++k)
    {
      double const q  = k / 2000.0;
      double const fq = f.eval(q);
      ASSERT_GT(fq, 0.0);
      ASSERT_GE(fq, prev);
      prev = fq;
      if (psi.eval(q) >= lambda)
      {
        ASSERT_EQ(fq, psi.eval(q));
      }
      else
      {
        ASSERT_LT(fq, lambda);
      }
    }
  }
}

TEST(BroaToEbdfpa, Example)
{
  auto const sc = example();
  auto const m  = map_broa_to_ebdfpa(sc);
  EXPECT_TRUE(m.certification.certified);
  EXPECT_EQ(m.source_kind, MechanismKind::BROA);
  EXPECT_EQ(m.target_kind, MechanismKind::BDFPA);
  EXPECT_NEAR(m.certification.target.revenue, 1377.0 / 4000.0, 1e-4);
  EXPECT_EQ(m.target_params, m.source_params);
  for (double p : m.target_params)
  {
    EXPECT_NEAR(p, 1.0, 1e-9);
  }
}

TEST(BroaToEbdfpa, RandomRegular)
{
  std::mt19937_64 g(304);
  for (int rep = 0; rep < 8; ++rep)
  {
    auto const sc = ts::random_scenario(g, 2 + rep % 3, ts::random_regular).scenario();
    auto const m  = map_broa_to_ebdfpa(sc);
    EXPECT_TRUE(m.certification.certified)
        << "rep " << rep << " discrepancy " << m.certification.max_discrepancy;
    if (rep < 3)
    {
      expect_mc_agreement({MechanismKind::BROA, m.source_params}, sc, m,
                          sc.with_biddings(m.target_qfs));
    }
  }
}

TEST(BroaToEbdfpa, BuyerWhoNeverWinsIsKept)
{
  Scenario const sc({{QuantileFunction::uniform(), 0.2}, {QuantileFunction::uniform(0, 0.05), 0.2}},
                    0.1);
  auto const m = map_broa_to_ebdfpa(sc);
  EXPECT_TRUE(m.certification.certified);
  EXPECT_EQ(m.construction.at("buyers")[1].at("action"), "dropped");
  EXPECT_NEAR(m.certification.target.payment[1], 0.0, 1e-12);
}

TEST(BroaToEbdfpa, RejectsIrregularBids)
{
  // Convex: the virtual qf drops at the kink.
  Scenario const sc({{QuantileFunction::piecewise_linear({0, 0.5, 1}, {0, 0.1, 0.9}), 0.2},
                     {QuantileFunction::uniform(), 0.2}},
                    0.1);
  expect_error(ErrorCode::PreconditionViolation, [&] { map_broa_to_ebdfpa(sc); });
}

TEST(EbdfpaToBroa, Example)
{
  auto const m = map_ebdfpa_to_broa(example());
  EXPECT_TRUE(m.certification.certified);
  for (double p : m.source_params)
  {
    EXPECT_NEAR(p, 0.25, 1e-6);
  }
  for (double q : {0.0, 0.3, 0.8})
  {
    EXPECT_NEAR(m.target_qfs[0].eval(q), 0.5 * (1 + q), 1e-9);
  }
  EXPECT_NEAR(m.certification.target.revenue, 0.54, 2e-3);
}

TEST(EbdfpaToBroa, RandomIncreasing)
{
  std::mt19937_64 g(305);
  for (int rep = 0; rep < 6; ++rep)
  {
    auto const sc = ts::random_scenario(g, 2 + rep % 3, ts::random_increasing).scenario();
    auto const m  = map_ebdfpa_to_broa(sc);
    EXPECT_TRUE(m.certification.certified)
        << "rep " << rep << " discrepancy " << m.certification.max_discrepancy;
    if (rep < 2)
    {
      expect_mc_agreement({MechanismKind::BDFPA, m.source_params}, sc, m,
                          sc.with_biddings(m.target_qfs));
    }
  }
}

TEST(EbdfpaToBroa, AmpleBudgetsGiveUnitMultipliers)
{
  Scenario const sc({{QuantileFunction::uniform(), 1.0}, {QuantileFunction::uniform(), 1.0}}, 0.1);
  auto const     m = map_ebdfpa_to_broa(sc);
  EXPECT_TRUE(m.certification.certified);
  for (double p : m.target_params)
  {
    EXPECT_DOUBLE_EQ(p, 1.0);
  }
}

TEST(Symmetric, ExampleFirstPrice)
{
  auto const m = map_symmetric(MechanismKind::BDFPA, MechanismKind::PFPA, example());
  EXPECT_TRUE(m.certification.certified);
  EXPECT_NEAR(m.certification.source.payment[0], 0.312, 1e-6);
  EXPECT_NEAR(m.certification.target.payment[0], 0.312, 1e-4);
  EXPECT_NEAR(m.certification.target.revenue, 0.54, 2e-3);
  auto const &f = m.target_qfs[0];
  EXPECT_TRUE(is_increasing_on_grid(f, 1001, false));
  EXPECT_LE(f.eval(1.0), 1.0 + 1e-12);
}

TEST(Symmetric, SlackSourceMapsToItself)
{
  Scenario const sc({{QuantileFunction::uniform(), 0.5}, {QuantileFunction::uniform(), 0.5}}, 0.1);
  auto const     m = map_symmetric(MechanismKind::BDFPA, MechanismKind::PFPA, sc);
  EXPECT_EQ(m.construction.at("case"), "identity");
  EXPECT_TRUE(m.certification.certified);
  EXPECT_EQ(m.target_params, std::vector<double>(2, 1.0));
}

TEST(Symmetric, NeverAllocating)
{
  Scenario const sc({{QuantileFunction::uniform(0, 0.05), 0.2}, {QuantileFunction::uniform(0, 0.05), 0.2}},
                    0.1);
  auto const m = map_symmetric(MechanismKind::PFPA, MechanismKind::PSPA, sc);
  EXPECT_EQ(m.construction.at("case"), "never_allocates");
  EXPECT_TRUE(m.certification.certified);
  EXPECT_EQ(m.certification.target.revenue, 0.0);
}

TEST(Symmetric, FirstPriceToPacedSecondPriceIsOutOfReach)
{
  expect_error(ErrorCode::RootBracketFailure,
               [] { map_symmetric(MechanismKind::BDFPA, MechanismKind::PSPA, example()); });
}

TEST(Symmetric, InputErrors)
{
  std::mt19937_64 g(306);
  auto const      asym = ts::random_scenario(g, 2, ts::random_regular).scenario();
  expect_error(ErrorCode::AsymmetricScenario,
               [&] { map_symmetric(MechanismKind::BDFPA, MechanismKind::PFPA, asym); });
  expect_error(ErrorCode::InvalidArgument,
               [] { map_symmetric(MechanismKind::BROA, MechanismKind::PFPA, example()); });
}

TEST(Symmetric, RandomPairs)
{
  std::mt19937_64 g(307);
  std::pair<MechanismKind, MechanismKind> const pairs[] = {
      {MechanismKind::BDFPA, MechanismKind::PFPA},  {MechanismKind::PFPA, MechanismKind::BDFPA},
      {MechanismKind::BDFPA, MechanismKind::BDSPA}, {MechanismKind::BDSPA, MechanismKind::BDFPA},
      {MechanismKind::PFPA, MechanismKind::PSPA},   {MechanismKind::PSPA, MechanismKind::PFPA}};
  for (int rep = 0; rep < 3; ++rep)
  {
    auto const rs = ts::random_symmetric(g, 2 + rep % 2, ts::random_regular);
    auto const sc = rs.scenario();
    for (auto const &[from, to] : pairs)
    {
      auto const m = map_symmetric(from, to, sc);
      EXPECT_TRUE(m.certification.certified)
          << "rep " << rep << " " << to_string(from) << "->" << to_string(to) << " discrepancy "
          << m.certification.max_discrepancy;
      double const oracle = is_first_price(from)
                                ? ts::first_price_payment(rs, m.source_params, 0,
                                                          from == MechanismKind::PFPA)
                                : ts::second_price_payment(rs, m.source_params, 0,
                                                           from == MechanismKind::PSPA);
      EXPECT_NEAR(m.certification.source.payment[0], oracle, 1e-6);
      for (double p : m.certification.target.payment)
      {
        EXPECT_LE(p, sc.budget(0) + 1e-6);
      }
      EXPECT_TRUE(is_increasing_on_grid(m.target_qfs[0], 1001, false));
    }
  }
}

TEST(Reports, JsonFields)
{
  auto const m   = map_ebdfpa_to_broa(example());
  auto const doc = m.to_json();
  for (char const *key : {"source", "target", "certification", "construction", "diagnostics"})
  {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  auto const round = QuantileFunction::from_json(m.target_qfs[0].to_json());
  EXPECT_NEAR(round.eval(0.4), m.target_qfs[0].eval(0.4), 1e-12);
}

TEST(Reports, GapHeadRoundTrip)
{
  // psi jumps from 0.1 to 0.3 at 0.5.
  auto const tail = QuantileFunction::virtual_of(
      QuantileFunction::piecewise_linear({0, 0.5, 1}, {0.1, 0.45, 0.6}));
  auto const f    = QuantileFunction::exp_head_gap(0.05, 3.0, 0.5, tail);
  EXPECT_NEAR(f.eval(0.5 - 1e-12), 0.05, 1e-9);
  EXPECT_DOUBLE_EQ(f.eval(0.5), 0.3);
  EXPECT_DOUBLE_EQ(f.cdf(0.2), 0.5);
  auto const back = QuantileFunction::from_json(f.to_json());
  for (double q : {0.0, 0.25, 0.49, 0.5, 0.9})
  {
    EXPECT_NEAR(back.eval(q), f.eval(q), 1e-12);
  }
  expect_error(ErrorCode::InvalidArgument,
               [&] { QuantileFunction::exp_head_gap(0.4, 3.0, 0.5, tail); });
}
