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

#include "auctionlab/auctionlab.h"

#include "auctionlab/commands.hpp"

#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

struct al_scenario
{
  auctionlab::Scenario scenario;
};

struct al_result
{
  std::string json;
};

namespace {

thread_local std::string g_last_error;

al_status status_of(auctionlab::ErrorCode code)
{
  using auctionlab::ErrorCode;
  switch (code)
  {
  case ErrorCode::InvalidArgument:
    return AL_ERR_INVALID_ARGUMENT;
  case ErrorCode::Domain:
    return AL_ERR_DOMAIN;
  case ErrorCode::Parse:
    return AL_ERR_PARSE;
  case ErrorCode::PreconditionViolation:
    return AL_ERR_PRECONDITION;
  case ErrorCode::NonConvergence:
    return AL_ERR_NONCONVERGENCE;
  case ErrorCode::RootBracketFailure:
    return AL_ERR_ROOT_BRACKET;
  case ErrorCode::DegenerateInput:
    return AL_ERR_DEGENERATE;
  case ErrorCode::AsymmetricScenario:
    return AL_ERR_ASYMMETRIC;
  case ErrorCode::Internal:
    break;
  }
  return AL_ERR_INTERNAL;
}

al_status fail(al_status s, std::string msg)
{
  g_last_error = std::move(msg);
  return s;
}

/// Runs body, mapping exceptions to status codes.
template <class F>
al_status guarded(F &&body)
{
  g_last_error.clear();
  try
  {
    return body();
  }
  catch (auctionlab::Error const &e)
  {
    return fail(status_of(e.code()), e.what());
  }
  catch (nlohmann::json::exception const &e)
  {
    return fail(AL_ERR_PARSE, e.what());
  }
  catch (std::bad_alloc const &)
  {
    return fail(AL_ERR_INTERNAL, "out of memory");
  }
  catch (std::exception const &e)
  {
    return fail(AL_ERR_INTERNAL, e.what());
  }
  catch (...)
  {
    return fail(AL_ERR_INTERNAL, "unknown failure");
  }
}

al_status require(void const *p, char const *what)
{
  if (p == nullptr)
  {
    return fail(AL_ERR_INVALID_ARGUMENT, std::string(what) + " must not be null");
  }
  return AL_OK;
}

auctionlab::QuadratureConfig quadrature(std::size_t nodes, al_quadrature_rule rule)
{
  auctionlab::QuadratureConfig q;
  if (nodes != 0)
  {
    q.node_count = nodes;
  }
  q.rule = rule == AL_RULE_GAUSS_LEGENDRE ? auctionlab::QuadratureRule::GaussLegendre
                                          : auctionlab::QuadratureRule::Trapezoid;
  q.validate();
  return q;
}

auctionlab::MechanismSpec spec_of(char const *mechanism, double const *params, std::size_t n)
{
  if (mechanism == nullptr)
  {
    throw auctionlab::Error(auctionlab::ErrorCode::InvalidArgument, "mechanism must not be null");
  }
  if (n > 0 && params == nullptr)
  {
    throw auctionlab::Error(auctionlab::ErrorCode::InvalidArgument, "params must not be null");
  }
  return {auctionlab::parse_mechanism(mechanism), std::vector<double>(params, params + n)};
}

al_status emit(auctionlab::CommandResult const &r, al_result **out, al_status on_fail)
{
  *out = new al_result{r.document.dump(2)};
  if (!r.passed)
  {
    return fail(on_fail, "checks failed; see the result document");
  }
  return AL_OK;
}

}  // namespace

extern "C" {

char const *al_version(void)
{
  return "0.1.0";
}

char const *al_status_string(al_status status)
{
  switch (status)
  {
  case AL_OK:
    return "ok";
  case AL_ERR_INVALID_ARGUMENT:
    return "invalid argument";
  case AL_ERR_PARSE:
    return "parse error";
  case AL_ERR_DOMAIN:
    return "domain error";
  case AL_ERR_PRECONDITION:
    return "precondition violation";
  case AL_ERR_ASYMMETRIC:
    return "asymmetric scenario";
  case AL_ERR_QUADRATURE:
    return "quadrature did not converge";
  case AL_ERR_NONCONVERGENCE:
    return "solver did not converge";
  case AL_ERR_ROOT_BRACKET:
    return "root bracketing failed";
  case AL_ERR_DEGENERATE:
    return "degenerate input";
  case AL_ERR_CERTIFICATION:
    return "certification failed";
  case AL_ERR_VALIDATION:
    return "validation failed";
  case AL_ERR_EXAMPLE_MISMATCH:
    return "example mismatch";
  case AL_ERR_IO:
    return "i/o error";
  case AL_ERR_INTERNAL:
    return "internal error";
  }
  return "unknown status";
}

char const *al_last_error(void)
{
  return g_last_error.c_str();
}

al_status al_scenario_from_json(char const *json, al_scenario **out)
{
  return guarded([&] {
    if (auto s = require(json, "json"); s != AL_OK)
      return s;
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    auto doc = nlohmann::json::parse(json);
    *out     = new al_scenario{auctionlab::Scenario::from_json(doc)};
    return AL_OK;
  });
}

al_status al_scenario_load(char const *path, al_scenario **out)
{
  return guarded([&] {
    if (auto s = require(path, "path"); s != AL_OK)
      return s;
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    std::ifstream in(path);
    if (!in)
    {
      return fail(AL_ERR_IO, std::string("cannot open ") + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try
    {
      doc = nlohmann::json::parse(buf.str());
    }
    catch (nlohmann::json::parse_error const &e)
    {
      return fail(AL_ERR_PARSE, std::string(path) + ": " + e.what());
    }
    *out = new al_scenario{auctionlab::Scenario::from_json(doc)};
    return AL_OK;
  });
}

al_status al_scenario_example(al_scenario **out)
{
  return guarded([&] {
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    *out = new al_scenario{auctionlab::example_scenario()};
    return AL_OK;
  });
}

size_t al_scenario_buyers(al_scenario const *scenario)
{
  return scenario == nullptr ? 0 : scenario->scenario.size();
}

int al_scenario_is_symmetric(al_scenario const *scenario)
{
  return scenario != nullptr && scenario->scenario.is_symmetric() ? 1 : 0;
}

al_status al_scenario_to_json(al_scenario const *scenario, al_result **out)
{
  return guarded([&] {
    if (auto s = require(scenario, "scenario"); s != AL_OK)
      return s;
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    *out = new al_result{scenario->scenario.to_json().dump(2)};
    return AL_OK;
  });
}

void al_scenario_free(al_scenario *scenario)
{
  delete scenario;
}

al_status al_evaluate(al_scenario const *scenario, char const *mechanism, double const *params,
                      size_t n_params, size_t nodes, al_quadrature_rule rule, al_result **out)
{
  return guarded([&] {
    if (auto s = require(scenario, "scenario"); s != AL_OK)
      return s;
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    auto const spec = spec_of(mechanism, params, n_params);
    return emit(auctionlab::cmd_eval(scenario->scenario, spec, quadrature(nodes, rule)), out,
                AL_ERR_QUADRATURE);
  });
}

al_status al_solve(al_scenario const *scenario, char const *mechanism, char const *method,
                   double tol, int trace, size_t nodes, al_result **out)
{
  return guarded([&] {
    if (auto s = require(scenario, "scenario"); s != AL_OK)
      return s;
    if (auto s = require(mechanism, "mechanism"); s != AL_OK)
      return s;
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    auctionlab::SolverOptions opts;
    if (tol > 0.0)
    {
      opts.tol = tol;
    }
    opts.trace = trace != 0;
    auto const r =
        auctionlab::cmd_solve(scenario->scenario, auctionlab::parse_mechanism(mechanism),
                              method == nullptr ? "" : method, opts,
                              quadrature(nodes, AL_RULE_TRAPEZOID));
    return emit(r, out, AL_ERR_NONCONVERGENCE);
  });
}

al_status al_map(al_scenario const *scenario, char const *from, char const *to, size_t nodes,
                 al_result **out)
{
  return guarded([&] {
    if (auto s = require(scenario, "scenario"); s != AL_OK)
      return s;
    if (auto s = require(from, "from"); s != AL_OK)
      return s;
    if (auto s = require(to, "to"); s != AL_OK)
      return s;
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    auto const r = auctionlab::cmd_map(scenario->scenario, auctionlab::parse_mechanism(from),
                                       auctionlab::parse_mechanism(to),
                                       quadrature(nodes, AL_RULE_TRAPEZOID));
    return emit(r, out, AL_ERR_CERTIFICATION);
  });
}

al_status al_example(size_t nodes, al_result **out)
{
  return guarded([&] {
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    return emit(auctionlab::cmd_example(quadrature(nodes, AL_RULE_TRAPEZOID)), out,
                AL_ERR_EXAMPLE_MISMATCH);
  });
}

al_status al_validate(al_scenario const *scenario, size_t samples, uint64_t seed,
                      char const *mechanism, double const *params, size_t n_params, size_t nodes,
                      al_result **out)
{
  return guarded([&] {
    if (auto s = require(scenario, "scenario"); s != AL_OK)
      return s;
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    auctionlab::ValidateOptions opts;
    if (samples != 0)
    {
      opts.samples = samples;
    }
    opts.seed = seed;
    if (mechanism != nullptr)
    {
      opts.override_spec = spec_of(mechanism, params, n_params);
    }
    return emit(auctionlab::cmd_validate(scenario->scenario, opts,
                                         quadrature(nodes, AL_RULE_TRAPEZOID)),
                out, AL_ERR_VALIDATION);
  });
}

al_status al_simulate(al_scenario const *scenario, char const *mechanism, double const *params,
                      size_t n_params, size_t samples, uint64_t seed, al_result **out)
{
  return guarded([&] {
    if (auto s = require(scenario, "scenario"); s != AL_OK)
      return s;
    if (auto s = require(out, "out"); s != AL_OK)
      return s;
    auto const spec = spec_of(mechanism, params, n_params);
    spec.validate(scenario->scenario.size());
    auto const mc = auctionlab::mc_outcome_profile(spec, scenario->scenario, samples, seed);
    *out          = new al_result{mc.to_json().dump(2)};
    return AL_OK;
  });
}

char const *al_result_json(al_result const *result)
{
  return result == nullptr ? "" : result->json.c_str();
}

void al_result_free(al_result *result)
{
  delete result;
}

}  // extern "C"
