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

#include "auctionlab/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace auctionlab {

namespace {

constexpr std::array<MechanismKind, 5> kAll = {MechanismKind::BDFPA, MechanismKind::PFPA,
                                              MechanismKind::BROA, MechanismKind::BDSPA,
                                              MechanismKind::PSPA};

constexpr double kExhaustedTolerance = 1e-5;
constexpr double kBcicTolerance      = 1e-4;
constexpr double kDominanceTolerance = 1e-3;
constexpr double kMcFloor            = 1e-6;

std::string display_name(MechanismKind kind)
{
  switch (kind)
  {
  case MechanismKind::BDFPA:
    return "eBDFPA";
  case MechanismKind::PFPA:
    return "ePFPA";
  case MechanismKind::BROA:
    return "BROA";
  case MechanismKind::BDSPA:
    return "eBDSPA";
  case MechanismKind::PSPA:
    return "ePSPA";
  }
  return "?";
}

bool solvable(MechanismKind kind, Scenario const &scenario)
{
  return !is_second_price(kind) || scenario.is_symmetric();
}

struct Check
{
  std::string    name;
  bool           passed = true;
  nlohmann::json detail = nlohmann::json::object();
};

nlohmann::json checks_to_json(std::vector<Check> const &checks, bool &all)
{
  nlohmann::json arr = nlohmann::json::array();
  all                = true;
  for (auto const &c : checks)
  {
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    all = all && c.passed;
  }
  return arr;
}

/// Compares quadrature and MC profiles quantity by quantity.
Check oracle_agreement(MechanismSpec const &spec, Scenario const &scenario,
                       OutcomeProfile const &quad, McProfile const &mc)
{
  Check  c{"oracle agreement " + std::string(to_string(spec.kind))};
  double worst = 0.0;
  auto   cmp   = [&](char const *what, std::size_t i, double q, McEstimate const &e) {
    double const z = std::abs(q - e.mean) / std::max(e.standard_error, 1e-300);
    if (!e.agrees_with(q, 3.0, kMcFloor))
    {
      c.passed = false;
      c.detail["failures"].push_back(
          {{"quantity", what}, {"buyer", i}, {"quadrature", q}, {"mc", e.to_json()}});
    }
    if (e.standard_error > 0.0)
    {
      worst = std::max(worst, z);
    }
  };
  for (std::size_t i = 0; i < scenario.size(); ++i)
  {
    cmp("payment", i, quad.payment[i], mc.payment[i]);
    cmp("utility", i, quad.utility[i], mc.utility[i]);
    cmp("win_probability", i, quad.win_probability[i], mc.win_probability[i]);
  }
  cmp("revenue", 0, quad.revenue, mc.revenue);
  cmp("allocation_probability", 0, quad.allocation_probability, mc.allocation_probability);
  c.detail["params"]         = spec.params;
  c.detail["max_z"]          = worst;
  c.detail["mc_revenue"]     = mc.revenue.to_json();
  c.detail["quad_revenue"]   = quad.revenue;
  return c;
}

Check budget_feasibility(MechanismSpec const &spec, Scenario const &scenario,
                         OutcomeProfile const &prof, double tol)
{
  Check c{"budget feasibility " + std::string(to_string(spec.kind))};
  for (std::size_t i = 0; i < scenario.size(); ++i)
  {
    double const excess = prof.payment[i] - scenario.budget(i);
    if (excess > tol)
    {
      c.passed = false;
      c.detail["violations"].push_back({{"buyer", i},
                                        {"payment", prof.payment[i]},
                                        {"budget", scenario.budget(i)}});
    }
  }
  c.detail["params"]  = spec.params;
  c.detail["payment"] = prof.payment;
  return c;
}

}  // namespace

Scenario example_scenario()
{
  auto const u = QuantileFunction::uniform();
  return Scenario({{u, 0.312}, {u, 0.312}}, 0.1);
}

CommandResult cmd_eval(Scenario const &scenario, MechanismSpec const &spec,
                       QuadratureConfig const &quad)
{
  spec.validate(scenario.size());
  QuadratureConfig q = quad;
  q.check_convergence = true;
  OutcomeProfile const prof = outcome_profile(spec, scenario, q);
  CommandResult        r;
  r.document = {{"mechanism", to_string(spec.kind)},
                {"params", spec.params},
                {"budgets", scenario.budgets()},
                {"nodes", quad.node_count},
                {"profile", prof.to_json()}};
  r.passed   = prof.converged;
  return r;
}

CommandResult cmd_solve(Scenario const &scenario, MechanismKind kind, std::string const &method,
                        SolverOptions const &opts, QuadratureConfig const &quad)
{
  auto bad = [&](std::string const &why) {
    throw Error(ErrorCode::InvalidArgument,
                "method '" + method + "' does not apply to " + to_string(kind) + ": " + why);
  };
  SolveReport rep;
  if (method.empty())
  {
    rep = solve_budget_extracting(kind, scenario, quad, opts);
  }
  else if (method == "dual")
  {
    if (kind == MechanismKind::BDFPA)
    {
      rep = solve_dual(DualKind::BDFPA, scenario, quad, opts);
    }
    else if (kind == MechanismKind::BROA)
    {
      rep = solve_dual(DualKind::BROA, scenario, quad, opts);
    }
    else
    {
      bad("the dual covers bdfpa and broa");
    }
  }
  else if (method == "max-tuple")
  {
    if (kind != MechanismKind::BDFPA && kind != MechanismKind::PFPA)
    {
      bad("the max-tuple ascent covers bdfpa and pfpa");
    }
    rep = solve_max_tuple(kind, scenario, quad, opts);
  }
  else if (method == "symmetric")
  {
    if (!is_second_price(kind))
    {
      bad("the symmetric solver covers bdspa and pspa");
    }
    rep = solve_symmetric_spa(kind, scenario, quad, opts);
  }
  else
  {
    bad("unknown method");
  }
  CommandResult r;
  r.document = rep.to_json();
  r.passed   = rep.converged;
  return r;
}

CommandResult cmd_map(Scenario const &scenario, MechanismKind from, MechanismKind to,
                      QuadratureConfig const &quad)
{
  MappedProfile m;
  if (from == MechanismKind::BROA && to == MechanismKind::BDFPA)
  {
    m = map_broa_to_ebdfpa(scenario, quad);
  }
  else if (from == MechanismKind::BDFPA && to == MechanismKind::BROA)
  {
    m = map_ebdfpa_to_broa(scenario, quad);
  }
  else if (from == MechanismKind::BROA || to == MechanismKind::BROA)
  {
    throw Error(ErrorCode::InvalidArgument, "broa maps only to and from ebdfpa");
  }
  else if (from == to)
  {
    throw Error(ErrorCode::InvalidArgument, "source and target mechanisms coincide");
  }
  else
  {
    m = map_symmetric(from, to, scenario, quad);
  }
  CommandResult r;
  r.document = m.to_json();
  r.passed   = m.certification.certified;
  return r;
}

CommandResult cmd_example(QuadratureConfig const &quad)
{
  Scenario const scenario = example_scenario();

  constexpr std::array<double, 5> ref_payment   = {0.312, 0.312, 0.207, 0.171, 0.171};
  constexpr std::array<double, 5> ref_revenue   = {0.54, 0.525, 0.344, 0.243, 0.243};
  constexpr std::array<bool, 5>   ref_exhausted = {true, true, false, false, false};

  nlohmann::json columns   = nlohmann::json::array();
  nlohmann::json params    = nlohmann::json::array();
  nlohmann::json payment   = nlohmann::json::array();
  nlohmann::json revenue   = nlohmann::json::array();
  nlohmann::json exhausted = nlohmann::json::array();
  nlohmann::json dpay      = nlohmann::json::array();
  nlohmann::json drev      = nlohmann::json::array();
  nlohmann::json match     = nlohmann::json::array();
  double         max_delta = 0.0;
  bool           ok        = true;

  for (std::size_t k = 0; k < kAll.size(); ++k)
  {
    MechanismKind const  kind = kAll[k];
    SolveReport const    rep  = solve_budget_extracting(kind, scenario, quad);
    OutcomeProfile const prof = outcome_profile({kind, rep.params}, scenario, quad);
    double const         p    = prof.payment[0];
    bool const ex = std::abs(p - scenario.budget(0)) <= kExhaustedTolerance;
    columns.push_back(display_name(kind));
    params.push_back(rep.params);
    payment.push_back(p);
    revenue.push_back(prof.revenue);
    exhausted.push_back(ex);
    dpay.push_back(std::abs(p - ref_payment[k]));
    drev.push_back(std::abs(prof.revenue - ref_revenue[k]));
    match.push_back(ex == ref_exhausted[k]);
    max_delta = std::max({max_delta, std::abs(p - ref_payment[k]),
                          std::abs(prof.revenue - ref_revenue[k])});
    ok        = ok && ex == ref_exhausted[k] && rep.converged;
  }
  ok = ok && max_delta <= kExampleTolerance;

  CommandResult r;
  r.document = {
      {"columns", columns},
      {"params", params},
      {"rows",
       {{{"label", "Each buyer's payment"},
         {"computed", payment},
         {"reference", ref_payment},
         {"delta", dpay}},
        {{"label", "Seller's revenue"},
         {"computed", revenue},
         {"reference", ref_revenue},
         {"delta", drev}},
        {{"label", "Budget exhausted?"},
         {"computed", exhausted},
         {"reference", ref_exhausted},
         {"match", match}}}},
      {"max_delta", max_delta},
      {"tolerance", kExampleTolerance},
      {"nodes", quad.node_count},
      {"passed", ok}};
  r.passed = ok;
  return r;
}

CommandResult cmd_validate(Scenario const &scenario, ValidateOptions const &opts,
                           QuadratureConfig const &quad)
{
  SolverOptions const solver;
  std::vector<Check>  checks;
  std::optional<double> rev_bdfpa;
  std::optional<double> rev_pfpa;
  std::optional<double> rev_broa;
  std::vector<std::pair<MechanismKind, double>> rev_spa;

  for (MechanismKind kind : kAll)
  {
    if (!solvable(kind, scenario))
    {
      continue;
    }
    SolveReport const   rep = solve_budget_extracting(kind, scenario, quad, solver);
    MechanismSpec const spec{kind, rep.params};
    OutcomeProfile const prof = outcome_profile(spec, scenario, quad);
    McProfile const      mc   = mc_outcome_profile(spec, scenario, opts.samples, opts.seed);
    checks.push_back(oracle_agreement(spec, scenario, prof, mc));
    checks.push_back(budget_feasibility(spec, scenario, prof, solver.feas_tol));

    IrReport const ir = ex_post_ir_check(spec, scenario, std::min<std::size_t>(opts.samples, 100000),
                                         opts.seed);
    checks.push_back({"ex-post IR " + std::string(to_string(kind)), ir.passed, ir.to_json()});

    switch (kind)
    {
    case MechanismKind::BDFPA:
      rev_bdfpa = prof.revenue;
      break;
    case MechanismKind::PFPA:
      rev_pfpa = prof.revenue;
      break;
    case MechanismKind::BROA:
      rev_broa = prof.revenue;
      break;
    default:
      rev_spa.emplace_back(kind, prof.revenue);
      break;
    }

    if (kind == MechanismKind::BDSPA)
    {
      BcicReport const b = bcic_deviation_test(spec, scenario, default_deviation_grid(), quad);
      checks.push_back({"BCIC bdspa", b.max_gain <= kBcicTolerance, b.to_json()});
    }
  }

  {
    Check c{"dominance ordering"};
    auto  ge = [&](char const *label, double a, double b) {
      bool const holds = a >= b - kDominanceTolerance;
      c.detail[label]  = {{"lhs", a}, {"rhs", b}, {"holds", holds}};
      c.passed         = c.passed && holds;
    };
    ge("ebdfpa >= broa", *rev_bdfpa, *rev_broa);
    ge("ebdfpa >= epfpa", *rev_bdfpa, *rev_pfpa);
    for (auto const &[kind, rev] : rev_spa)
    {
      ge(kind == MechanismKind::BDSPA ? "broa >= ebdspa" : "broa >= epspa", *rev_broa, rev);
    }
    checks.push_back(std::move(c));
  }

  if (opts.override_spec)
  {
    MechanismSpec const &spec = *opts.override_spec;
    spec.validate(scenario.size());
    OutcomeProfile const prof = outcome_profile(spec, scenario, quad);
    McProfile const      mc   = mc_outcome_profile(spec, scenario, opts.samples, opts.seed);
    Check                feas = budget_feasibility(spec, scenario, prof, solver.feas_tol);
    feas.name += " (given params)";
    Check agree = oracle_agreement(spec, scenario, prof, mc);
    agree.name += " (given params)";
    checks.push_back(std::move(agree));
    checks.push_back(std::move(feas));
  }

  CommandResult r;
  bool          all = true;
  r.document        = {{"samples", opts.samples}, {"seed", opts.seed}};
  r.document["checks"] = checks_to_json(checks, all);
  r.document["passed"] = all;
  r.passed             = all;
  return r;
}

}  // namespace auctionlab
