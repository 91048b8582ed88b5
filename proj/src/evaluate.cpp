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

#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace auctionlab {

void QuadratureConfig::validate() const
{
  if (node_count < 16)
  {
    throw Error(ErrorCode::InvalidArgument, "quadrature node_count must be at least 16");
  }
}

QuadratureConfig QuadratureConfig::refined() const
{
  QuadratureConfig out = *this;
  out.node_count *= 2;
  out.check_convergence = false;
  return out;
}

nlohmann::json OutcomeProfile::to_json() const
{
  return {{"payment", payment},
          {"utility", utility},
          {"win_probability", win_probability},
          {"revenue", revenue},
          {"allocation_probability", allocation_probability},
          {"converged", converged},
          {"diagnostics", diagnostics}};
}

OutcomeProfile OutcomeProfile::from_json(nlohmann::json const &doc)
{
  OutcomeProfile p;
  try
  {
    p.payment                = doc.at("payment").get<std::vector<double>>();
    p.utility                = doc.at("utility").get<std::vector<double>>();
    p.win_probability        = doc.at("win_probability").get<std::vector<double>>();
    p.revenue                = doc.at("revenue").get<double>();
    p.allocation_probability = doc.at("allocation_probability").get<double>();
    p.converged              = doc.value("converged", true);
    p.diagnostics            = doc.value("diagnostics", std::vector<std::string>{});
  }
  catch (nlohmann::json::exception const &e)
  {
    throw Error(ErrorCode::Parse, std::string("outcome profile: ") + e.what());
  }
  return p;
}

QuantileFunction const &ranking_qf(MechanismKind kind, Scenario const &scenario, std::size_t i)
{
  return kind == MechanismKind::BROA ? scenario.virtual_bidding(i) : scenario.bidding(i);
}

double reserve_crossing(MechanismSpec const &spec, Scenario const &scenario, std::size_t i)
{
  double const theta = spec.params.at(i);
  if (!(theta > 0.0))
  {
    return 1.0;
  }
  auto const  &h      = ranking_qf(spec.kind, scenario, i);
  double const lambda = scenario.lambda();
  auto const   wins   = [&](double q) { return theta * h.eval(q) >= lambda; };
  if (!wins(1.0))
  {
    return 1.0;
  }
  if (wins(0.0))
  {
    return 0.0;
  }
  return numeric::bisect_first_true(wins, 0.0, 1.0, 1e-14);
}

double g_function(MechanismSpec const &spec, Scenario const &scenario, std::size_t i, double s)
{
  if (s < scenario.lambda())
  {
    return 0.0;
  }
  double g = 1.0;
  for (std::size_t j = 0; j < scenario.size(); ++j)
  {
    double const theta = spec.params.at(j);
    if (j == i || !(theta > 0.0))
    {
      continue;
    }
    g *= ranking_qf(spec.kind, scenario, j).cdf(s / theta);
    if (g == 0.0)
    {
      break;
    }
  }
  return g;
}

double interim_win_probability(MechanismSpec const &spec, Scenario const &scenario, std::size_t i,
                               double q)
{
  double const theta = spec.params.at(i);
  if (!(theta > 0.0))
  {
    return 0.0;
  }
  double const s = theta * ranking_qf(spec.kind, scenario, i).eval(q);
  if (s < scenario.lambda())
  {
    return 0.0;
  }
  return g_function(spec, scenario, i, s);
}

namespace {

struct Nodes
{
  std::vector<double> q;
  std::vector<double> w;
};

void append_piece(Nodes &nodes, double a, double b, std::size_t count, QuadratureRule rule)
{
  if (!(b > a))
  {
    return;
  }
  if (rule == QuadratureRule::Trapezoid)
  {
    std::size_t const segs = std::max<std::size_t>(1, count);
    double const      h    = (b - a) / static_cast<double>(segs);
    for (std::size_t k = 0; k <= segs; ++k)
    {
      // The closing node takes the left limit at b, where the integrand may jump.
      double const q = k == segs ? std::nextafter(b, a) : a + h * static_cast<double>(k);
      double const w = (k == 0 || k == segs) ? 0.5 * h : h;
      nodes.q.push_back(q);
      nodes.w.push_back(w);
    }
    return;
  }
  auto const       &g      = numeric::gauss8();
  std::size_t const panels = std::max<std::size_t>(1, count / g.nodes.size());
  double const      h      = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p)
  {
    double const mid = a + h * (static_cast<double>(p) + 0.5);
    for (std::size_t k = 0; k < g.nodes.size(); ++k)
    {
      nodes.q.push_back(mid + 0.5 * h * g.nodes[k]);
      nodes.w.push_back(0.5 * h * g.weights[k]);
    }
  }
}

/// Composite nodes on [a,1] split at the given cut points.
Nodes build_nodes(double a, std::vector<double> cuts, QuadratureConfig const &quad)
{
  Nodes nodes;
  if (!(a < 1.0))
  {
    return nodes;
  }
  std::vector<double> edges{a};
  if (quad.singularity_split)
  {
    std::sort(cuts.begin(), cuts.end());
    for (double c : cuts)
    {
      if (c > edges.back() + 1e-13 && c < 1.0 - 1e-13)
      {
        edges.push_back(c);
      }
    }
  }
  edges.push_back(1.0);
  double const span = 1.0 - a;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k)
  {
    double const len   = edges[k + 1] - edges[k];
    auto const   count = static_cast<std::size_t>(
        std::llround(static_cast<double>(quad.node_count) * len / span));
    append_piece(nodes, edges[k], edges[k + 1], std::max<std::size_t>(2, count), quad.rule);
  }
  return nodes;
}

std::vector<double> cut_points(MechanismSpec const &spec, Scenario const &scenario, std::size_t i)
{
  std::vector<double> cuts = scenario.bidding(i).breakpoints();
  for (double b : scenario.value(i).breakpoints())
  {
    cuts.push_back(b);
  }
  // Own quantiles where the competing-score CDF has a kink: a rival's score
  // reaches the bottom, a breakpoint or the top of its range.
  double const theta = spec.params[i];
  auto const  &h     = ranking_qf(spec.kind, scenario, i);
  for (std::size_t j = 0; j < scenario.size(); ++j)
  {
    if (j == i || !(spec.params[j] > 0.0))
    {
      continue;
    }
    auto const         &hj     = ranking_qf(spec.kind, scenario, j);
    std::vector<double> levels{hj.eval(0.0), hj.eval(1.0)};
    for (double b : hj.breakpoints())
    {
      levels.push_back(hj.eval(b));
      levels.push_back(hj.eval(std::nextafter(b, 0.0)));
    }
    for (double level : levels)
    {
      double const score = spec.params[j] * level;
      if (score > scenario.lambda())
      {
        cuts.push_back(h.cdf(score / theta));
      }
    }
  }
  return cuts;
}

template <typename F>
double gauss_segment(F const &f, double a, double b)
{
  if (!(b > a))
  {
    return 0.0;
  }
  auto const &g     = numeric::gauss8();
  double      total = 0.0;
  double const mid  = 0.5 * (a + b);
  double const half = 0.5 * (b - a);
  for (std::size_t k = 0; k < g.nodes.size(); ++k)
  {
    total += g.weights[k] * f(mid + half * g.nodes[k]);
  }
  return half * total;
}

}  // namespace

BuyerExpectations buyer_expectations(MechanismSpec const &spec, Scenario const &scenario,
                                     std::size_t i, QuadratureConfig const &quad)
{
  quad.validate();
  spec.validate(scenario.size());
  BuyerExpectations out;
  double const      theta = spec.params[i];
  if (!(theta > 0.0))
  {
    return out;
  }
  double const q_star = reserve_crossing(spec, scenario, i);
  if (!(q_star < 1.0))
  {
    return out;
  }
  auto const  &h      = ranking_qf(spec.kind, scenario, i);
  auto const  &bid    = scenario.bidding(i);
  auto const  &value  = scenario.value(i);
  double const lambda = scenario.lambda();
  auto const   G      = [&](double s) { return g_function(spec, scenario, i, s); };

  Nodes const nodes = build_nodes(q_star, cut_points(spec, scenario, i), quad);

  double xbar = 0.0;
  double vx   = 0.0;
  double hx   = 0.0;
  double bx   = 0.0;
  double spa  = 0.0;

  bool const second = is_second_price(spec.kind);
  double     cum    = 0.0;
  double     prev_s = lambda;
  for (std::size_t k = 0; k < nodes.q.size(); ++k)
  {
    double const q = nodes.q[k];
    double const w = nodes.w[k];
    double const s = std::max(theta * h.eval(q), lambda);
    double const x = G(s);
    double const b = bid.eval(q);
    xbar += w * x;
    vx += w * value.eval(q) * x;
    hx += w * h.eval(q) * x;
    bx += w * b * x;
    if (second)
    {
      if (s > prev_s)
      {
        double const span  = s - prev_s;
        std::size_t  parts = k == 0 ? 64 : 1;
        double const step  = span / static_cast<double>(parts);
        for (std::size_t p = 0; p < parts; ++p)
        {
          cum += gauss_segment(G, prev_s + step * static_cast<double>(p),
                               prev_s + step * static_cast<double>(p + 1));
        }
        prev_s = s;
      }
      spa += w * (s * x - cum);
    }
  }

  out.win_probability = xbar;
  out.value_surplus   = vx;
  out.score_surplus   = hx;
  switch (spec.kind)
  {
  case MechanismKind::BDFPA:
    out.payment = bx;
    break;
  case MechanismKind::PFPA:
    out.payment = theta * bx;
    break;
  case MechanismKind::BROA:
    out.payment = hx;
    break;
  case MechanismKind::BDSPA:
    out.payment = spa / theta;
    break;
  case MechanismKind::PSPA:
    out.payment = spa;
    break;
  }
  out.utility = vx - out.payment;
  return out;
}

double expected_payment(MechanismSpec const &spec, Scenario const &scenario, std::size_t i,
                        QuadratureConfig const &quad)
{
  return buyer_expectations(spec, scenario, i, quad).payment;
}

double expected_utility(MechanismSpec const &spec, Scenario const &scenario, std::size_t i,
                        QuadratureConfig const &quad)
{
  return buyer_expectations(spec, scenario, i, quad).utility;
}

CheckedValue expected_payment_checked(MechanismSpec const &spec, Scenario const &scenario,
                                      std::size_t i, QuadratureConfig const &quad)
{
  CheckedValue out;
  out.value     = expected_payment(spec, scenario, i, quad);
  out.refined   = expected_payment(spec, scenario, i, quad.refined());
  out.converged = std::abs(out.refined - out.value) < kQuadratureTolerance;
  return out;
}

namespace {

OutcomeProfile assemble(MechanismSpec const &spec, Scenario const &scenario,
                        QuadratureConfig const &quad)
{
  std::size_t const n = scenario.size();
  OutcomeProfile    p;
  p.payment.resize(n);
  p.utility.resize(n);
  p.win_probability.resize(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    auto const e        = buyer_expectations(spec, scenario, i, quad);
    p.payment[i]         = e.payment;
    p.utility[i]         = e.utility;
    p.win_probability[i] = e.win_probability;
    p.allocation_probability += e.win_probability;
    p.revenue += e.payment - scenario.lambda() * e.win_probability;
  }
  return p;
}

}  // namespace

OutcomeProfile outcome_profile(MechanismSpec const &spec, Scenario const &scenario,
                               QuadratureConfig const &quad)
{
  spec.validate(scenario.size());
  OutcomeProfile p = assemble(spec, scenario, quad);
  if (!quad.check_convergence)
  {
    return p;
  }
  OutcomeProfile const fine  = assemble(spec, scenario, quad.refined());
  double               worst = std::abs(fine.revenue - p.revenue);
  for (std::size_t i = 0; i < scenario.size(); ++i)
  {
    worst = std::max({worst, std::abs(fine.payment[i] - p.payment[i]),
                      std::abs(fine.utility[i] - p.utility[i]),
                      std::abs(fine.win_probability[i] - p.win_probability[i])});
  }
  if (!(worst < kQuadratureTolerance))
  {
    std::ostringstream os;
    os << "quadrature not converged: doubling nodes to " << quad.node_count * 2
       << " changed a quantity by " << worst;
    p.converged = false;
    p.diagnostics.push_back(os.str());
  }
  return p;
}

double broa_direct_payment(MechanismSpec const &spec, Scenario const &scenario, std::size_t i,
                           QuadratureConfig const &quad)
{
  if (spec.kind != MechanismKind::BROA)
  {
    throw Error(ErrorCode::InvalidArgument, "broa_direct_payment needs a BROA spec");
  }
  quad.validate();
  spec.validate(scenario.size());
  double const theta = spec.params[i];
  if (!(theta > 0.0))
  {
    return 0.0;
  }
  double const q_star = reserve_crossing(spec, scenario, i);
  if (!(q_star < 1.0))
  {
    return 0.0;
  }
  auto const &bid = scenario.bidding(i);
  auto const  x   = [&](double z) { return interim_win_probability(spec, scenario, i, z); };
  auto const  dx  = [&](double z) { return x(z) * bid.derivative(z); };

  Nodes const nodes = build_nodes(q_star, cut_points(spec, scenario, i), quad);
  double      total = 0.0;
  double      cum   = 0.0;
  double      prev  = q_star;
  for (std::size_t k = 0; k < nodes.q.size(); ++k)
  {
    double const q = nodes.q[k];
    cum += gauss_segment(dx, prev, q);
    prev = q;
    total += nodes.w[k] * (bid.eval(q) * x(q) - cum);
  }
  return total;
}

}  // namespace auctionlab
