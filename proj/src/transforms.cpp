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

#include "auctionlab/transforms.hpp"

#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace auctionlab {

namespace {

[[noreturn]] void precondition(std::string const &message)
{
  throw Error(ErrorCode::PreconditionViolation, message);
}

nlohmann::json qfs_json(std::vector<QuantileFunction> const &qfs)
{
  nlohmann::json out = nlohmann::json::array();
  for (auto const &f : qfs)
  {
    out.push_back(f.to_json());
  }
  return out;
}

std::vector<QuantileFunction> bidding_profile(Scenario const &scenario)
{
  std::vector<QuantileFunction> out;
  for (std::size_t i = 0; i < scenario.size(); ++i)
  {
    out.push_back(scenario.bidding(i));
  }
  return out;
}

}  // namespace

nlohmann::json Certification::to_json() const
{
  return {{"source", source.to_json()},
          {"target", target.to_json()},
          {"max_discrepancy", max_discrepancy},
          {"tolerance", tolerance},
          {"certified", certified}};
}

nlohmann::json MappedProfile::to_json() const
{
  return {{"source", {{"mechanism", to_string(source_kind)},
                      {"params", source_params},
                      {"qfs", qfs_json(source_qfs)}}},
          {"target", {{"mechanism", to_string(target_kind)},
                      {"params", target_params},
                      {"qfs", qfs_json(target_qfs)}}},
          {"construction", construction},
          {"certification", certification.to_json()},
          {"diagnostics", diagnostics}};
}

QuantileFunction devirtualize(QuantileFunction const &r)
{
  if (!(r.eval(1.0) > 0.0))
  {
    precondition("devirtualize needs r(1) > 0");
  }
  if (r.integral(0.0, 1.0) < 0.0)
  {
    precondition("devirtualize needs a non-negative integral of r");
  }
  if (!is_increasing_on_grid(r, 1001, true))
  {
    precondition("devirtualize needs a strictly increasing r");
  }
  return QuantileFunction::integral_average(r);
}

QuantileFunction lift(QuantileFunction const &psi, double lambda)
{
  if (!(lambda > 0.0 && lambda < 1.0))
  {
    throw Error(ErrorCode::InvalidArgument, "lift needs lambda in (0,1)");
  }
  if (psi.eval(1.0) < lambda)
  {
    precondition("lift needs psi(1) >= lambda; the buyer can never win");
  }
  if (psi.eval(0.0) >= 0.0)
  {
    return psi;
  }
  double const half = 0.5 * lambda;
  double q0 =
      numeric::bisect_first_true([&](double q) { return psi.eval(q) >= half; }, 0.0, 1.0, 1e-12);
  // A crossing by a jump sits exactly on a breakpoint.
  for (double b : psi.breakpoints())
  {
    if (b < q0 && q0 - b <= 1e-9 && psi.eval(b) >= half)
    {
      q0 = b;
    }
  }
  double const c = psi.eval(q0);
  double const k = psi.derivative(q0);
  if (!(c < lambda))
  {
    // psi jumps over [lambda/2, lambda) at q0: the head stops at lambda/2 and the
    // lifted qf jumps with psi.
    return QuantileFunction::exp_head_gap(half, k > 0.0 ? 2.0 * k / lambda : 1.0 / q0, q0, psi);
  }
  if (k > 0.0)
  {
    return QuantileFunction::exp_head_matching(k / c, q0, psi);
  }
  return QuantileFunction::sine_head(0.5 * c, std::numbers::pi / (4.0 * q0), q0, psi);
}

Certification certify(MechanismSpec const &source_spec, Scenario const &source,
                      MechanismSpec const &target_spec, Scenario const &target,
                      QuadratureConfig const &quad, double tolerance)
{
  if (source.size() != target.size())
  {
    throw Error(ErrorCode::InvalidArgument, "certification needs equally sized scenarios");
  }
  Certification c;
  c.tolerance = tolerance;
  c.source    = outcome_profile(source_spec, source, quad);
  c.target    = outcome_profile(target_spec, target, quad);
  double worst = std::abs(c.source.revenue - c.target.revenue);
  for (std::size_t i = 0; i < source.size(); ++i)
  {
    worst = std::max({worst, std::abs(c.source.payment[i] - c.target.payment[i]),
                      std::abs(c.source.utility[i] - c.target.utility[i])});
  }
  c.max_discrepancy = worst;
  c.certified       = worst <= tolerance;
  return c;
}

MappedProfile map_broa_to_ebdfpa(Scenario const &scenario, QuadratureConfig const &quad,
                                 SolverOptions const &opts)
{
  std::size_t const n = scenario.size();
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!is_strictly_regular(scenario.bidding(i)))
    {
      std::ostringstream os;
      os << "buyer " << i << " virtual bidding qf is not strictly increasing";
      precondition(os.str());
    }
  }
  SolveReport const broa = solve_dual(DualKind::BROA, scenario, quad, opts);
  if (!broa.converged)
  {
    throw Error(ErrorCode::NonConvergence, "BROA dual solve did not converge");
  }

  MappedProfile out;
  out.source_kind   = MechanismKind::BROA;
  out.target_kind   = MechanismKind::BDFPA;
  out.source_qfs    = bidding_profile(scenario);
  out.source_params = broa.params;
  out.target_params = broa.params;
  nlohmann::json buyers = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i)
  {
    auto const &psi = scenario.virtual_bidding(i);
    if (psi.eval(1.0) < scenario.lambda())
    {
      out.target_qfs.push_back(scenario.bidding(i));
      buyers.push_back({{"buyer", i}, {"action", "dropped"}});
      continue;
    }
    auto lifted = lift(psi, scenario.lambda());
    buyers.push_back({{"buyer", i},
                      {"action", psi.eval(0.0) >= 0.0 ? "identity" : to_string(lifted.kind())}});
    out.target_qfs.push_back(std::move(lifted));
  }
  out.construction = {{"buyers", buyers}, {"broa_iterations", broa.iterations}};

  Scenario const target = scenario.with_biddings(out.target_qfs);
  out.certification     = certify({MechanismKind::BROA, out.source_params}, scenario,
                                  {MechanismKind::BDFPA, out.target_params}, target, quad);
  return out;
}

MappedProfile map_ebdfpa_to_broa(Scenario const &scenario, QuadratureConfig const &quad,
                                 SolverOptions const &opts)
{
  std::size_t const n = scenario.size();
  for (std::size_t i = 0; i < n; ++i)
  {
    auto const &v = scenario.bidding(i);
    if (!is_increasing_on_grid(v, 1001, true) || v.eval(0.0) < 0.0)
    {
      std::ostringstream os;
      os << "buyer " << i << " bidding qf must be strictly increasing and non-negative";
      precondition(os.str());
    }
  }
  SolveReport const bdf = solve_max_tuple(MechanismKind::BDFPA, scenario, quad, opts);
  if (!bdf.converged)
  {
    throw Error(ErrorCode::NonConvergence, "eBDFPA max-tuple solve did not converge");
  }

  MappedProfile out;
  out.source_kind   = MechanismKind::BDFPA;
  out.target_kind   = MechanismKind::BROA;
  out.source_qfs    = bidding_profile(scenario);
  out.source_params = bdf.params;
  out.target_params = bdf.params;
  for (std::size_t i = 0; i < n; ++i)
  {
    out.target_qfs.push_back(devirtualize(scenario.bidding(i)));
  }
  out.construction = {{"bdfpa_sweeps", bdf.iterations}};

  Scenario const target = scenario.with_biddings(out.target_qfs);
  out.certification     = certify({MechanismKind::BDFPA, out.source_params}, scenario,
                                  {MechanismKind::BROA, out.target_params}, target, quad);
  return out;
}

namespace {

struct Bracket
{
  double lo = 0.0;
  double hi = 0.0;
};

/// Payments reachable by the head-tail family at multiplier m, in closed form.
Bracket family_bracket(MechanismKind kind, double m, double lambda, double q0, std::size_t n)
{
  double const nn   = static_cast<double>(n);
  double const A    = (1.0 - std::pow(q0, nn)) / nn;
  double const c    = lambda / m;
  double const dent = (1.0 - q0) * std::pow(q0, nn - 1.0);
  switch (kind)
  {
  case MechanismKind::BDFPA:
    return {c * A, A};
  case MechanismKind::PFPA:
    return {lambda * A, m * A};
  case MechanismKind::BDSPA:
    return {c * A, A - (1.0 - c) * dent};
  case MechanismKind::PSPA:
    return {lambda * A, m * A - (m - lambda) * dent};
  case MechanismKind::BROA:
    break;
  }
  throw Error(ErrorCode::InvalidArgument, "no symmetric family bracket for BROA");
}

double bracket_margin(Bracket const &b, double target)
{
  double const width = b.hi - b.lo;
  if (!(width > 0.0))
  {
    return -1.0;
  }
  return std::min(target - b.lo, b.hi - target) / width;
}

constexpr double kTailLinear = 0.02;

QuantileFunction head_tail(double c, double s, double b, double q0)
{
  auto tail = QuantileFunction::power_tail(c, s, b, q0, kTailLinear);
  if (!(q0 > 0.0))
  {
    return tail;
  }
  double const k = s * ((1.0 - kTailLinear) * b + kTailLinear) / (1.0 - q0);
  return QuantileFunction::exp_head_matching(k / c, q0, tail);
}

[[noreturn]] void bracket_failure(char const *what, double lo, double plo, double hi, double phi,
                                  double target)
{
  std::ostringstream os;
  os.precision(10);
  os << "cannot bracket " << what << ": payment(" << lo << ") = " << plo << ", payment(" << hi
     << ") = " << phi << ", target " << target;
  throw Error(ErrorCode::RootBracketFailure, os.str());
}

}  // namespace

MappedProfile map_symmetric(MechanismKind from, MechanismKind to, Scenario const &scenario,
                            QuadratureConfig const &quad, SolverOptions const &opts)
{
  if (from == MechanismKind::BROA || to == MechanismKind::BROA)
  {
    throw Error(ErrorCode::InvalidArgument,
                "symmetric mappings connect bdfpa, pfpa, bdspa and pspa; use the broa mappings");
  }
  if (!scenario.is_symmetric())
  {
    throw Error(ErrorCode::AsymmetricScenario,
                "first/second-price mappings are defined for symmetric scenarios only");
  }
  std::size_t const n      = scenario.size();
  double const      lambda = scenario.lambda();
  auto const       &v      = scenario.bidding(0);

  MappedProfile out;
  out.source_kind = from;
  out.target_kind = to;
  out.source_qfs  = bidding_profile(scenario);
  if (!(inverse_lipschitz_lower(v) > 0.0))
  {
    out.diagnostics.push_back("common qf has no positive inverse-Lipschitz bound");
  }

  SolveReport const src = solve_budget_extracting(from, scenario, quad, opts);
  if (!src.converged)
  {
    throw Error(ErrorCode::NonConvergence, "source budget-extracting solve did not converge");
  }
  double const ms = src.params[0];
  out.source_params = src.params;
  MechanismSpec const source_spec{from, src.params};
  double const        payment = src.payment[0];
  bool const          slack   = ms >= 1.0 - 1e-12;

  auto finish = [&](std::vector<QuantileFunction> qfs, double mt) {
    out.target_qfs    = std::move(qfs);
    out.target_params.assign(n, mt);
    Scenario const target = scenario.with_biddings(out.target_qfs);
    out.certification =
        certify(source_spec, scenario, {to, out.target_params}, target, quad);
    out.construction["target_residual"] =
        complementarity_residuals(out.target_params, out.certification.target.payment,
                                  target.budgets());
    if (is_second_price(to))
    {
      auto const check = solve_symmetric_spa(to, target, quad, opts);
      out.construction["target_solver_params"] = check.params;
      if (std::abs(check.params[0] - mt) > 1e-6)
      {
        std::ostringstream os;
        os << "target solver returns multiplier " << check.params[0]
           << " rather than the constructed " << mt;
        out.diagnostics.push_back(os.str());
      }
    }
    else if (mt < 1.0)
    {
      double const up = std::min(1.0, mt + 1e-3);
      double const p  = expected_payment({to, std::vector<double>(n, up)}, target, 0, quad);
      out.construction["payment_above_multiplier"] = p;
      if (!(p > target.budget(0)))
      {
        out.diagnostics.push_back("constructed target multiplier is not locally maximal");
      }
    }
    double worst = 0.0;
    for (double r : out.construction["target_residual"].get<std::vector<double>>())
    {
      worst = std::max(worst, r);
    }
    if (worst > opts.comp_tol)
    {
      out.diagnostics.push_back("constructed target tuple is not budget-extracting");
      out.certification.certified = false;
    }
    return out;
  };

  if (ms * v.eval(1.0) <= lambda)
  {
    out.construction = {{"case", "never_allocates"}};
    return finish(out.source_qfs, 1.0);
  }
  bool const same_family = (is_first_price(from) && is_first_price(to)) ||
                           (is_second_price(from) && is_second_price(to));
  if (slack && same_family)
  {
    out.construction = {{"case", "identity"}};
    return finish(out.source_qfs, 1.0);
  }

  double const q0 = numeric::bisect_first_true([&](double q) { return ms * v.eval(q) >= lambda; },
                                               0.0, 1.0, 1e-14);
  double const q0c = ms * v.eval(0.0) >= lambda ? 0.0 : q0;

  double mt = 1.0;
  if (!slack)
  {
    double const own = bracket_margin(family_bracket(to, ms, lambda, q0c, n), payment);
    if (own > 0.1)
    {
      mt = ms;
    }
    else
    {
      // Grid in u = 1 - lambda/m, dense near u = 0 where narrow brackets peak.
      auto const mult = [&](double u) { return std::min(1.0, lambda / (1.0 - u)); };
      auto const margin = [&](double u) {
        return bracket_margin(family_bracket(to, mult(u), lambda, q0c, n), payment);
      };
      auto const node = [&](std::size_t k) {
        double const t = static_cast<double>(k) / 400.0;
        return (1.0 - lambda) * t * t * t;
      };
      double      best = -2.0;
      std::size_t kb   = 1;
      for (std::size_t k = 1; k <= 400; ++k)
      {
        double const g = margin(node(k));
        if (g > best + 1e-12)
        {
          best = g;
          kb   = k;
        }
      }
      double lo = node(kb - 1);
      double hi = node(std::min<std::size_t>(kb + 1, 400));
      for (int it = 0; it < 100; ++it)
      {
        double const a = lo + (hi - lo) / 3.0;
        double const b = hi - (hi - lo) / 3.0;
        (margin(a) < margin(b) ? lo : hi) = margin(a) < margin(b) ? a : b;
      }
      double const ur = 0.5 * (lo + hi);
      mt              = margin(ur) > best ? mult(ur) : mult(node(kb));
    }
  }
  double const c = lambda / mt;
  Bracket const br = family_bracket(to, mt, lambda, q0c, n);
  if (!slack && !(payment > br.lo && payment < br.hi))
  {
    std::ostringstream os;
    os.precision(10);
    os << "source payment " << payment << " lies outside the payments (" << br.lo << ", " << br.hi
       << ") reachable by " << to_string(to) << " bids at effective threshold " << q0c;
    throw Error(ErrorCode::RootBracketFailure, os.str());
  }

  MechanismSpec const target_spec{to, std::vector<double>(n, mt)};
  auto const pay = [&](double s, double b) {
    auto const     qf = head_tail(c, s, b, q0c);
    Scenario const t  = scenario.with_biddings(std::vector<QuantileFunction>(n, qf));
    return expected_payment(target_spec, t, 0, quad);
  };

  double const smax = 1.0 - c;
  double const plin = pay(smax, 1.0);
  double       s    = smax;
  double       b    = 1.0;
  std::string  which;
  if (payment <= plin)
  {
    which            = "slope";
    double const s0  = 1e-9;
    double const p0  = pay(s0, 1.0);
    if (!(p0 < payment))
    {
      bracket_failure("tail slope", s0, p0, smax, plin, payment);
    }
    s = numeric::illinois_last_nonpositive([&](double x) { return pay(x, 1.0) - payment; }, s0,
                                           smax, 1e-12, p0 - payment, plin - payment);
  }
  else
  {
    which      = "exponent";
    double hi  = 2.0;
    double phi = pay(smax, hi);
    while (phi < payment)
    {
      if (hi > 1048576.0)
      {
        bracket_failure("tail exponent", 1.0, plin, hi, phi, payment);
      }
      hi *= 2.0;
      phi = pay(smax, hi);
    }
    b = numeric::illinois_last_nonpositive([&](double x) { return pay(smax, x) - payment; }, 1.0,
                                           hi, 1e-12 * hi, plin - payment, phi - payment);
  }

  out.construction = {{"case", which},
                      {"q0", q0c},
                      {"source_multiplier", ms},
                      {"target_multiplier", mt},
                      {"source_payment", payment},
                      {"bracket", {br.lo, br.hi}},
                      {"offset", c},
                      {"scale", s},
                      {"exponent", b},
                      {"linear", kTailLinear},
                      {"k", s * ((1.0 - kTailLinear) * b + kTailLinear) / (1.0 - q0c)}};
  auto const qf = head_tail(c, s, b, q0c);
  return finish(std::vector<QuantileFunction>(n, qf), mt);
}

}  // namespace auctionlab
