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

#include "auctionlab/oracle.hpp"
#include "auctionlab/transforms.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace auctionlab {

/// Outcome of a command: a JSON document plus whether its own checks passed.
struct CommandResult
{
  nlohmann::json document = nlohmann::json::object();
  bool           passed   = true;
};

/// n = 2 uniform buyers, lambda = 0.1, budgets 0.312.
Scenario example_scenario();

/// `passed` is false when the node-doubling check fails.
CommandResult cmd_eval(Scenario const &scenario, MechanismSpec const &spec,
                       QuadratureConfig const &quad);

/// method: "dual", "max-tuple", "symmetric" or "" for the mechanism's default.
CommandResult cmd_solve(Scenario const &scenario, MechanismKind kind, std::string const &method,
                        SolverOptions const &opts, QuadratureConfig const &quad);

/// `passed` is the certification verdict.
CommandResult cmd_map(Scenario const &scenario, MechanismKind from, MechanismKind to,
                      QuadratureConfig const &quad);

constexpr double kExampleTolerance = 2e-3;

CommandResult cmd_example(QuadratureConfig const &quad);

struct ValidateOptions
{
  std::size_t                  samples = 1000000;
  std::uint64_t                seed    = kDefaultSeed;
  std::optional<MechanismSpec> override_spec;
};

CommandResult cmd_validate(Scenario const &scenario, ValidateOptions const &opts,
                           QuadratureConfig const &quad);

}  // namespace auctionlab
