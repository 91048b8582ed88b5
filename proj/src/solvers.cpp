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

#include "auctionlab/solvers.hpp"

#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace auctionlab {

char const *to_string(Uniqueness u) noexcept
{
  switch (u)
  {
  case Uniqueness::NotChecked:
    return "not_checked";
  case Uniqueness::Unique:
    return "unique";
  case Uniqueness::NonUnique:
    return "non_unique";
  }
  return "unknown";
}

nlohmann::json UniquenessVerdict::to_json() const
{
  nlohmann::json j = {{"verdict", to_string(verdict)},
                      {"condition_a", condition_a},
                      {"condition_b", condition_b}};
  if (nu)
  {
    j["nu"]                  = *nu;
    j["witness"]             = witness;
    j["witness_payment"]     = witness_payment;
    j["witness_payment_gap"] = witness_payment_gap;
  }
  return j;
}

double SolveReport::max_residual() const
{
  double worst = 0.0;
  for (double r : residual)
  {
    worst = std::max(worst, r);
  }
  return worst;
}

nlohmann::json SolveReport::to_json() const
{
  nlohmann::json j = {{"mechanism", to_string(mechanism)},
                      {"method", method},
                      {"params", params},
                      {"payment", payment},
                      {"residual", residual},
                      {"max_residual", max_residual()},
                      {"binding", binding},
                      {"revenue", revenue},
                      {"iterations", iterations},
                      {"converged", converged},
                      {"monotone", monotone},
                      {"diagnostics", diagnostics}};
  if (dual)
  {
    j["dual"] = *dual;
  }
  if (dual_value)
  {
    j["dual_value"] = *dual_value;
  }
  if (duality_gap)
  {
    j["duality_gap"] = *duality_gap;
  }
  if (uniqueness.verdict != Uniqueness::NotChecked)
  {
    j["uniqueness"] = uniqueness.to_json();
  }
  if (!trace.empty())
  {
    nlohmann::json t = nlohmann::json::array();
    for (auto const &r : trace)
    {
      t.push_back({{"iteration", r.iteration},
                   {"params", r.params},
                   {"objective", r.objective},
                   {"max_residual", r.max_residual},
                   {"step", r.step}});
    }
    j["trace"] = std::move(t);
  }
  return j;
}

std::vector<double> complementarity_residuals(std::vector<double> const &params,
                                              std::vector<double> const &payments,
                                              std::vector<double> const &budgets)
{
  std::vector<double> r(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    r[i] = std::abs(std::min(1.0 - params[i], budgets[i] - payments[i]));
  }
  return r;
}

namespace {

MechanismKind primal_kind(DualKind kind)
{
  return kind == DualKind::BDFPA ? MechanismKind::BDFPA : MechanismKind::BROA;
}

struct DualPoint
{
  double              value = 0.0;
  std::vector<double> payment;
};

DualPoint dual_point(DualKind kind, Scenario const &scenario, std::vector<double> const &tau,
                     QuadratureConfig const &quad)
{
  std::size_t const n = scenario.size();
  if (tau.size() != n)
  {
    throw Error(ErrorCode::InvalidArgument, "dual variable length mismatch");
  }
  MechanismSpec spec{primal_kind(kind), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!(tau[i] >= 0.0 && tau[i] <= 1.0))
    {
      throw Error(ErrorCode::InvalidArgument, "dual variables must lie in [0,1]");
    }
    spec.params[i] = 1.0 - tau[i];
  }
  DualPoint out;
  out.payment.resize(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    auto const e   = buyer_expectations(spec, scenario, i, quad);
    out.payment[i] = e.score_surplus;
    out.value += spec.params[i] * e.score_surplus - scenario.lambda() * e.win_probability +
                 tau[i] * scenario.budget(i);
  }
  return out;
}

std::vector<double> finish_params(std::vector<double> const &tau)
{
  std::vector<double> theta(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i)
  {
    theta[i] = 1.0 - tau[i];
  }
  return theta;
}

void fill_primal(SolveReport &report, Scenario const &scenario, QuadratureConfig const &quad,
                 SolverOptions const &opts)
{
  MechanismSpec const spec{report.mechanism, report.params};
  auto const          profile = outcome_profile(spec, scenario, quad);
  report.payment              = profile.payment;
  report.revenue              = profile.revenue;
  report.residual = complementarity_residuals(report.params, report.payment, scenario.budgets());
  report.binding.assign(scenario.size(), false);
  for (std::size_t i = 0; i < scenario.size(); ++i)
  {
    report.binding[i] = std::abs(report.payment[i] - scenario.budget(i)) <= opts.comp_tol;
    if (report.payment[i] > scenario.budget(i) + opts.feas_tol)
    {
      std::ostringstream os;
      os << "buyer " << i << " payment " << report.payment[i] << " exceeds budget "
         << scenario.budget(i);
      report.diagnostics.push_back(os.str());
    }
  }
}

double max_of(std::vector<double> const &v)
{
  double m = 0.0;
  for (double x : v)
  {
    m = std::max(m, x);
  }
  return m;
}

}  // namespace

double dual_value(DualKind kind, Scenario const &scenario, std::vector<double> const &tau,
                  QuadratureConfig const &quad)
{
  return dual_point(kind, scenario, tau, quad).value;
}

std::vector<double> dual_gradient(DualKind kind, Scenario const &scenario,
                                  std::vector<double> const &tau, QuadratureConfig const &quad)
{
  auto const          pt = dual_point(kind, scenario, tau, quad);
  std::vector<double> g(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i)
  {
    g[i] = scenario.budget(i) - pt.payment[i];
  }
  return g;
}

SolveReport solve_dual(DualKind kind, Scenario const &scenario, QuadratureConfig const &quad,
                       SolverOptions const &opts)
{
  std::size_t const n = scenario.size();
  for (std::size_t i = 0; i < n; ++i)
  {
    auto const &h = ranking_qf(primal_kind(kind), scenario, i);
    if (!is_increasing_on_grid(h, 1001, true))
    {
      std::ostringstream os;
      os << "buyer " << i << (kind == DualKind::BROA ? " virtual" : "")
         << " bidding qf is not strictly increasing";
      throw Error(ErrorCode::DegenerateInput, os.str());
    }
  }

  SolveReport report;
  report.mechanism = primal_kind(kind);
  report.method    = "dual";

  std::vector<double> tau(n, 0.0);
  DualPoint           pt = dual_point(kind, scenario, tau, quad);
  std::size_t         it = 0;
  for (; it < opts.max_iters; ++it)
  {
    std::vector<double> g(n);
    double              worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      g[i]  = scenario.budget(i) - pt.payment[i];
      worst = std::max(worst, std::abs(std::min(tau[i], g[i])));
    }
    if (opts.trace)
    {
      report.trace.push_back({it, finish_params(tau), pt.value, worst, 0.0});
    }
    if (worst < opts.tol)
    {
      report.converged = true;
      break;
    }
    double    step     = 1.0;
    bool      accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5)
    {
      std::vector<double> trial(n);
      double              descent = 0.0;
      bool                moved   = false;
      for (std::size_t i = 0; i < n; ++i)
      {
        trial[i] = numeric::clamp01(tau[i] - step * g[i]);
        descent += g[i] * (trial[i] - tau[i]);
        moved = moved || trial[i] != tau[i];
      }
      if (!moved)
      {
        break;
      }
      DualPoint next = dual_point(kind, scenario, trial, quad);
      if (next.value <= pt.value + opts.armijo * descent)
      {
        tau      = std::move(trial);
        pt       = std::move(next);
        accepted = true;
        if (opts.trace)
        {
          report.trace.back().step = step;
        }
        break;
      }
    }
    if (!accepted)
    {
      report.diagnostics.push_back("line search made no progress");
      break;
    }
  }
  report.iterations = it;
  report.dual       = tau;
  report.dual_value = pt.value;
  report.params     = finish_params(tau);
  fill_primal(report, scenario, quad, opts);
  report.duality_gap = std::abs(pt.value - report.revenue);
  if (!report.converged)
  {
    std::ostringstream os;
    os << "dual solver stopped after " << it << " iterations with max residual "
       << max_of(report.residual);
    report.diagnostics.push_back(os.str());
  }
  return report;
}

SolveReport solve_max_tuple(MechanismKind kind, Scenario const &scenario,
                            QuadratureConfig const &quad, SolverOptions const &opts)
{
  if (!is_first_price(kind))
  {
    throw Error(ErrorCode::InvalidArgument, "max-tuple method applies to bdfpa and pfpa");
  }
  std::size_t const n = scenario.size();
  SolveReport       report;
  report.mechanism = kind;
  report.method    = "max-tuple";
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!(inverse_lipschitz_lower(scenario.bidding(i)) > 0.0))
    {
      std::ostringstream os;
      os << "buyer " << i << " bidding qf has no positive inverse-Lipschitz bound";
      report.diagnostics.push_back(os.str());
    }
  }

  auto const feasible = [&](std::vector<double> const &theta) {
    MechanismSpec const trial{kind, theta};
    for (std::size_t i = 0; i < n; ++i)
    {
      if (expected_payment(trial, scenario, i, quad) > scenario.budget(i))
      {
        return false;
      }
    }
    return true;
  };

  // Any budget-feasible tuple lies below the maximum tuple, so the ascent may
  // start from the largest feasible common multiplier.
  double start = 0.0;
  if (feasible(std::vector<double>(n, 1.0)))
  {
    start = 1.0;
  }
  else
  {
    start = numeric::bisect_last_true(
        [&](double m) { return feasible(std::vector<double>(n, m)); }, 0.0, 1.0, 1e-6);
  }

  MechanismSpec spec{kind, std::vector<double>(n, start)};
  std::size_t   sweep = 0;
  for (; sweep < opts.max_iters; ++sweep)
  {
    double     moved = 0.0;
    auto const prev  = spec.params;
    for (std::size_t i = 0; i < n; ++i)
    {
      double const rho     = scenario.budget(i);
      auto const   excess  = [&](double t) {
        spec.params[i] = t;
        return expected_payment(spec, scenario, i, quad) - rho;
      };
      double const current = prev[i];
      double       next    = 1.0;
      double const top     = excess(1.0);
      if (top > 0.0)
      {
        double lo     = current;
        double bottom = excess(lo);
        if (bottom > 0.0)
        {
          report.monotone = false;
          report.diagnostics.push_back("current iterate infeasible at sweep start; rebracketing");
          lo     = 0.0;
          bottom = excess(lo);
        }
        next = numeric::illinois_last_nonpositive(excess, lo, 1.0, opts.bisect_tol, bottom, top);
      }
      spec.params[i] = next;
      if (next < current)
      {
        report.monotone = false;
      }
      moved = std::max(moved, std::abs(next - current));
    }
    if (opts.trace)
    {
      report.trace.push_back({sweep, spec.params, 0.0, moved, 0.0});
    }
    if (moved <= opts.sweep_tol)
    {
      report.converged = true;
      ++sweep;
      break;
    }
    // Over-relaxed step along the last sweep's direction, kept only when feasible.
    bool ascending = true;
    for (std::size_t i = 0; i < n; ++i)
    {
      ascending = ascending && spec.params[i] >= prev[i];
    }
    if (ascending)
    {
      std::vector<double> best = spec.params;
      for (double omega = 1.0; omega <= 64.0; omega *= 2.0)
      {
        std::vector<double> trial(n);
        for (std::size_t i = 0; i < n; ++i)
        {
          trial[i] = std::min(1.0, spec.params[i] + omega * (spec.params[i] - prev[i]));
        }
        if (trial == best || !feasible(trial))
        {
          break;
        }
        best = std::move(trial);
      }
      spec.params = best;
    }
  }
  report.iterations = sweep;
  report.params     = spec.params;
  fill_primal(report, scenario, quad, opts);
  if (!report.monotone)
  {
    report.diagnostics.push_back("coordinate-ascent iterates were not entrywise nondecreasing");
  }
  if (report.converged && max_of(report.residual) > opts.comp_tol)
  {
    report.converged = false;
    std::ostringstream os;
    os << "maximum tuple is not budget-extracting: max residual " << max_of(report.residual);
    report.diagnostics.push_back(os.str());
  }
  if (kind == MechanismKind::BDFPA && report.converged)
  {
    report.uniqueness = check_uniqueness_ebdfpa(scenario, report, quad, opts);
  }
  return report;
}

SolveReport solve_symmetric_spa(MechanismKind kind, Scenario const &scenario,
                                QuadratureConfig const &quad, SolverOptions const &opts)
{
  if (!is_second_price(kind))
  {
    throw Error(ErrorCode::InvalidArgument, "symmetric method applies to bdspa and pspa");
  }
  if (!scenario.is_symmetric())
  {
    throw Error(ErrorCode::AsymmetricScenario,
                "symmetric second-price solve needs identical qfs and budgets");
  }
  std::size_t const n   = scenario.size();
  double const      rho = scenario.budget(0);
  auto const payment    = [&](double m) {
    MechanismSpec const spec{kind, std::vector<double>(n, m)};
    return expected_payment(spec, scenario, 0, quad);
  };

  SolveReport report;
  report.mechanism = kind;
  report.method    = "symmetric";

  double m = 1.0;
  if (payment(1.0) > rho)
  {
    double const top   = scenario.bidding(0).eval(1.0);
    double const floor = std::min(1.0, scenario.lambda() / top);
    constexpr std::size_t kScan = 64;
    double hi    = 1.0;
    double fhi   = payment(1.0) - rho;
    double lo    = floor;
    double flo   = 0.0;
    bool   found = false;
    for (std::size_t k = 1; k <= kScan; ++k)
    {
      double const cand = 1.0 - (1.0 - floor) * static_cast<double>(k) / kScan;
      double const f    = payment(cand) - rho;
      ++report.iterations;
      if (f <= 0.0)
      {
        lo    = cand;
        flo   = f;
        found = true;
        break;
      }
      hi  = cand;
      fhi = f;
    }
    if (!found)
    {
      lo  = floor;
      flo = payment(floor) - rho;
    }
    if (flo <= 0.0)
    {
      m = numeric::illinois_last_nonpositive([&](double t) { return payment(t) - rho; }, lo, hi,
                                             opts.bisect_tol, flo, fhi);
    }
    else
    {
      m = numeric::bisect_last_true([&](double t) { return payment(t) <= rho; }, lo, hi,
                                    opts.bisect_tol);
    }
  }
  report.params.assign(n, m);
  report.converged = true;
  fill_primal(report, scenario, quad, opts);
  if (max_of(report.residual) > opts.comp_tol)
  {
    report.converged = false;
    std::ostringstream os;
    os << "symmetric multiplier is not budget-extracting: max residual "
       << max_of(report.residual);
    report.diagnostics.push_back(os.str());
  }
  return report;
}

UniquenessVerdict check_uniqueness_ebdfpa(Scenario const &scenario, SolveReport const &report,
                                          QuadratureConfig const &quad, SolverOptions const &opts)
{
  std::size_t const n = scenario.size();
  if (report.mechanism != MechanismKind::BDFPA || report.params.size() != n ||
      report.payment.size() != n)
  {
    throw Error(ErrorCode::InvalidArgument, "uniqueness check needs a BDFPA solve report");
  }
  auto const &alpha = report.params;
  auto const &pay   = report.payment;

  double top_i1 = -std::numeric_limits<double>::infinity();
  double bound  = scenario.lambda();
  bool   any_i1 = false;
  UniquenessVerdict v;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (pay[i] > opts.pay_tol)
    {
      any_i1 = true;
      top_i1 = std::max(top_i1, alpha[i] * scenario.bidding(i).eval(0.0));
      if (pay[i] < scenario.budget(i) - opts.feas_tol)
      {
        v.condition_b = true;
      }
    }
    else
    {
      bound = std::max(bound, alpha[i] * scenario.bidding(i).eval(1.0));
    }
  }
  v.condition_a = !any_i1 || top_i1 <= bound;
  if (v.condition_a || v.condition_b)
  {
    v.verdict = Uniqueness::Unique;
    return v;
  }
  v.verdict        = Uniqueness::NonUnique;
  double const nu  = 0.5 * (bound / top_i1 + 1.0);
  v.nu             = nu;
  v.witness        = alpha;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (pay[i] > opts.pay_tol)
    {
      v.witness[i] = nu * alpha[i];
    }
  }
  MechanismSpec const spec{MechanismKind::BDFPA, v.witness};
  auto const          profile = outcome_profile(spec, scenario, quad);
  v.witness_payment           = profile.payment;
  for (std::size_t i = 0; i < n; ++i)
  {
    v.witness_payment_gap = std::max(v.witness_payment_gap, std::abs(profile.payment[i] - pay[i]));
  }
  return v;
}

SolveReport solve_budget_extracting(MechanismKind kind, Scenario const &scenario,
                                    QuadratureConfig const &quad, SolverOptions const &opts)
{
  switch (kind)
  {
  case MechanismKind::BDFPA:
  case MechanismKind::PFPA:
    return solve_max_tuple(kind, scenario, quad, opts);
  case MechanismKind::BROA:
    return solve_dual(DualKind::BROA, scenario, quad, opts);
  case MechanismKind::BDSPA:
  case MechanismKind::PSPA:
    return solve_symmetric_spa(kind, scenario, quad, opts);
  }
  throw Error(ErrorCode::Internal, "unhandled mechanism");
}

}  // namespace auctionlab
