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

#include "auctionlab/mechanisms.hpp"

#include "numeric.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace auctionlab {

char const *to_string(MechanismKind kind) noexcept
{
  switch (kind)
  {
  case MechanismKind::BDFPA:
    return "bdfpa";
  case MechanismKind::PFPA:
    return "pfpa";
  case MechanismKind::BROA:
    return "broa";
  case MechanismKind::BDSPA:
    return "bdspa";
  case MechanismKind::PSPA:
    return "pspa";
  }
  return "unknown";
}

MechanismKind parse_mechanism(std::string const &name)
{
  std::string s;
  for (char c : name)
  {
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (int attempt = 0; attempt < 2; ++attempt)
  {
    for (auto kind : {MechanismKind::BDFPA, MechanismKind::PFPA, MechanismKind::BROA,
                      MechanismKind::BDSPA, MechanismKind::PSPA})
    {
      if (s == to_string(kind))
      {
        return kind;
      }
    }
    if (s.empty() || s.front() != 'e')
    {
      break;
    }
    s.erase(0, 1);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown mechanism '" + name + "'");
}

bool is_first_price(MechanismKind kind) noexcept
{
  return kind == MechanismKind::BDFPA || kind == MechanismKind::PFPA;
}

bool is_second_price(MechanismKind kind) noexcept
{
  return kind == MechanismKind::BDSPA || kind == MechanismKind::PSPA;
}

Scenario::Scenario(std::vector<Buyer> buyers, double opportunity_cost,
                   std::optional<std::vector<QuantileFunction>> value_qfs)
  : buyers_(std::move(buyers))
  , lambda_(opportunity_cost)
  , explicit_values_(value_qfs.has_value())
{
  if (buyers_.empty())
  {
    throw Error(ErrorCode::InvalidArgument, "scenario needs at least one buyer");
  }
  if (!(lambda_ > 0.0 && lambda_ < 1.0))
  {
    throw Error(ErrorCode::InvalidArgument, "opportunity cost must lie in (0,1)");
  }
  for (std::size_t i = 0; i < buyers_.size(); ++i)
  {
    double const rho = buyers_[i].budget;
    if (!(rho > 0.0 && rho <= 1.0))
    {
      std::ostringstream os;
      os << "buyer " << i << " budget " << rho << " outside (0,1]";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
  }
  if (value_qfs)
  {
    if (value_qfs->size() != buyers_.size())
    {
      throw Error(ErrorCode::InvalidArgument, "value_qfs length must equal the number of buyers");
    }
    values_ = std::move(*value_qfs);
  }
  else
  {
    for (auto const &b : buyers_)
    {
      values_.push_back(b.qf);
    }
  }
  for (auto const &b : buyers_)
  {
    virtuals_.push_back(QuantileFunction::virtual_of(b.qf));
  }
}

std::vector<double> Scenario::budgets() const
{
  std::vector<double> out;
  for (auto const &b : buyers_)
  {
    out.push_back(b.budget);
  }
  return out;
}

Scenario Scenario::with_bidding(std::size_t i, QuantileFunction qf) const
{
  auto buyers  = buyers_;
  buyers.at(i).qf = std::move(qf);
  return Scenario(std::move(buyers), lambda_, values_);
}

Scenario Scenario::with_biddings(std::vector<QuantileFunction> qfs) const
{
  if (qfs.size() != buyers_.size())
  {
    throw Error(ErrorCode::InvalidArgument, "bidding profile length mismatch");
  }
  auto buyers = buyers_;
  for (std::size_t i = 0; i < buyers.size(); ++i)
  {
    buyers[i].qf = std::move(qfs[i]);
  }
  return Scenario(std::move(buyers), lambda_, values_);
}

Scenario Scenario::with_budgets(std::vector<double> budgets) const
{
  if (budgets.size() != buyers_.size())
  {
    throw Error(ErrorCode::InvalidArgument, "budget vector length mismatch");
  }
  auto buyers = buyers_;
  for (std::size_t i = 0; i < buyers.size(); ++i)
  {
    buyers[i].budget = budgets[i];
  }
  if (explicit_values_)
  {
    return Scenario(std::move(buyers), lambda_, values_);
  }
  return Scenario(std::move(buyers), lambda_);
}

bool Scenario::is_symmetric(double tol) const
{
  constexpr std::size_t kGrid = 257;
  for (std::size_t i = 1; i < buyers_.size(); ++i)
  {
    if (std::abs(buyers_[i].budget - buyers_[0].budget) > tol)
    {
      return false;
    }
    if (max_grid_difference(buyers_[i].qf, buyers_[0].qf, kGrid) > tol ||
        max_grid_difference(values_[i], values_[0], kGrid) > tol)
    {
      return false;
    }
  }
  return true;
}

nlohmann::json Scenario::to_json() const
{
  nlohmann::json buyers = nlohmann::json::array();
  for (std::size_t i = 0; i < buyers_.size(); ++i)
  {
    nlohmann::json b = {{"qf", buyers_[i].qf.to_json()}, {"budget", buyers_[i].budget}};
    if (explicit_values_)
    {
      b["value_qf"] = values_[i].to_json();
    }
    buyers.push_back(std::move(b));
  }
  return {{"lambda", lambda_}, {"buyers", std::move(buyers)}};
}

Scenario Scenario::from_json(nlohmann::json const &doc)
{
  auto fail = [](std::string const &path, std::string const &msg) {
    throw Error(ErrorCode::Parse, path + ": " + msg);
  };
  if (!doc.is_object())
  {
    fail("$", "scenario must be a JSON object");
  }
  if (!doc.contains("lambda") || !doc["lambda"].is_number())
  {
    fail("lambda", "missing or non-numeric");
  }
  double const lambda = doc["lambda"].get<double>();
  if (!(lambda > 0.0 && lambda < 1.0))
  {
    fail("lambda", "must lie in (0,1)");
  }
  if (!doc.contains("buyers") || !doc["buyers"].is_array() || doc["buyers"].empty())
  {
    fail("buyers", "expected a non-empty array");
  }
  std::vector<Buyer>            buyers;
  std::vector<QuantileFunction> values;
  bool                          any_value = false;
  auto const                   &arr       = doc["buyers"];
  for (std::size_t i = 0; i < arr.size(); ++i)
  {
    std::string const path = "buyers[" + std::to_string(i) + "]";
    auto const       &b    = arr[i];
    if (!b.is_object())
    {
      fail(path, "expected an object");
    }
    if (!b.contains("qf"))
    {
      fail(path + ".qf", "missing field");
    }
    auto qf = QuantileFunction::from_json(b["qf"], path + ".qf");
    if (!b.contains("budget") || !b["budget"].is_number())
    {
      fail(path + ".budget", "missing or non-numeric");
    }
    double const rho = b["budget"].get<double>();
    if (!(rho > 0.0 && rho <= 1.0))
    {
      fail(path + ".budget", "must lie in (0,1]");
    }
    if (b.contains("value_qf"))
    {
      any_value = true;
      values.push_back(QuantileFunction::from_json(b["value_qf"], path + ".value_qf"));
    }
    else
    {
      values.push_back(qf);
    }
    buyers.push_back({std::move(qf), rho});
  }
  if (any_value)
  {
    return Scenario(std::move(buyers), lambda, std::move(values));
  }
  return Scenario(std::move(buyers), lambda);
}

void MechanismSpec::validate(std::size_t n) const
{
  if (params.size() != n)
  {
    std::ostringstream os;
    os << "mechanism needs " << n << " parameters, got " << params.size();
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  for (double p : params)
  {
    if (!(p >= 0.0 && p <= 1.0))
    {
      throw Error(ErrorCode::InvalidArgument, "mechanism parameters must lie in [0,1]");
    }
  }
}

std::size_t tie_break(std::span<std::size_t const> candidates)
{
  if (candidates.empty())
  {
    throw Error(ErrorCode::InvalidArgument, "tie_break needs a non-empty candidate set");
  }
  return *std::min_element(candidates.begin(), candidates.end());
}

namespace {

struct Ranking
{
  std::optional<std::size_t> winner;
  double                     competing = 0.0;
};

/// Winner by score with the reserve filter and lowest-index ties.
Ranking rank(std::span<double const> scores, double lambda)
{
  Ranking r;
  double  best = -1.0;
  for (double s : scores)
  {
    best = std::max(best, s);
  }
  if (!(best >= lambda))
  {
    return r;
  }
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < scores.size(); ++i)
  {
    if (scores[i] >= best - kTieTolerance)
    {
      tied.push_back(i);
    }
  }
  r.winner = tie_break(tied);
  double competing = lambda;
  for (std::size_t j = 0; j < scores.size(); ++j)
  {
    if (j != *r.winner)
    {
      competing = std::max(competing, scores[j]);
    }
  }
  r.competing = competing;
  return r;
}

}  // namespace

double broa_threshold_payment(QuantileFunction const &bidding, QuantileFunction const &virtual_qf,
                              double theta, double competing, double q_own)
{
  auto const wins = [&](double z) { return theta * virtual_qf.eval(z) >= competing; };
  if (wins(0.0))
  {
    return bidding.eval(0.0);
  }
  double const z = numeric::bisect_first_true(wins, 0.0, q_own, kThresholdTolerance);
  return bidding.eval(z);
}

ExPostOutcome allocate_bids(MechanismSpec const &spec, double lambda, std::span<double const> bids,
                            std::span<double const> values)
{
  if (spec.kind == MechanismKind::BROA)
  {
    throw Error(ErrorCode::InvalidArgument, "BROA outcomes depend on quantiles, not bids");
  }
  std::size_t const   n = bids.size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    scores[i] = spec.params[i] > 0.0 ? spec.params[i] * bids[i] : 0.0;
  }
  ExPostOutcome out;
  out.utility.assign(n, 0.0);
  auto const r = rank(scores, lambda);
  if (!r.winner)
  {
    return out;
  }
  std::size_t const w     = *r.winner;
  double const      theta = spec.params[w];
  switch (spec.kind)
  {
  case MechanismKind::BDFPA:
    out.payment = bids[w];
    break;
  case MechanismKind::PFPA:
    out.payment = theta * bids[w];
    break;
  case MechanismKind::BDSPA:
    if (!(theta > 0.0))
    {
      throw Error(ErrorCode::Internal, "BDSPA winner with zero multiplier");
    }
    out.payment = r.competing / theta;
    break;
  case MechanismKind::PSPA:
    out.payment = r.competing;
    break;
  case MechanismKind::BROA:
    break;
  }
  out.winner     = w;
  out.utility[w] = values[w] - out.payment;
  return out;
}

ExPostOutcome allocate(MechanismSpec const &spec, Scenario const &scenario,
                       std::span<double const> q)
{
  std::size_t const n = scenario.size();
  spec.validate(n);
  if (q.size() != n)
  {
    throw Error(ErrorCode::InvalidArgument, "quantile profile length mismatch");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    values[i] = scenario.value(i).eval(q[i]);
  }
  if (spec.kind != MechanismKind::BROA)
  {
    std::vector<double> bids(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      bids[i] = scenario.bidding(i).eval(q[i]);
    }
    return allocate_bids(spec, scenario.lambda(), bids, values);
  }
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    scores[i] = spec.params[i] > 0.0 ? spec.params[i] * scenario.virtual_bidding(i).eval(q[i]) : 0.0;
  }
  ExPostOutcome out;
  out.utility.assign(n, 0.0);
  auto const r = rank(scores, scenario.lambda());
  if (!r.winner)
  {
    return out;
  }
  std::size_t const w = *r.winner;
  out.winner          = w;
  out.payment = broa_threshold_payment(scenario.bidding(w), scenario.virtual_bidding(w),
                                       spec.params[w], r.competing, q[w]);
  out.utility[w] = values[w] - out.payment;
  return out;
}

}  // namespace auctionlab
