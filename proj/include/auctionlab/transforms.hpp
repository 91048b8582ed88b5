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

#include "auctionlab/solvers.hpp"

#include <string>
#include <vector>

namespace auctionlab {

constexpr double kMapTolerance = 1e-4;

struct Certification
{
  OutcomeProfile source;
  OutcomeProfile target;
  double         max_discrepancy = 0.0;
  double         tolerance       = kMapTolerance;
  bool           certified       = false;

  nlohmann::json to_json() const;
};

struct MappedProfile
{
  MechanismKind                 source_kind = MechanismKind::BROA;
  MechanismKind                 target_kind = MechanismKind::BDFPA;
  std::vector<QuantileFunction> source_qfs;
  std::vector<QuantileFunction> target_qfs;
  std::vector<double>           source_params;
  std::vector<double>           target_params;
  Certification                 certification;
  nlohmann::json                construction = nlohmann::json::object();
  std::vector<std::string>      diagnostics;

  nlohmann::json to_json() const;
};

/// s(x) = (int_x^1 r) / (1 - x); the inverse of virtualize.
QuantileFunction devirtualize(QuantileFunction const &r);

/// Replaces the negative head of a virtual qf with a positive piece below lambda/2.
QuantileFunction lift(QuantileFunction const &psi, double lambda);

/// Compares two mechanism outcomes; values of both scenarios must coincide.
Certification certify(MechanismSpec const &source_spec, Scenario const &source,
                      MechanismSpec const &target_spec, Scenario const &target,
                      QuadratureConfig const &quad, double tolerance = kMapTolerance);

MappedProfile map_broa_to_ebdfpa(Scenario const &scenario, QuadratureConfig const &quad = {},
                                 SolverOptions const &opts = {});

MappedProfile map_ebdfpa_to_broa(Scenario const &scenario, QuadratureConfig const &quad = {},
                                 SolverOptions const &opts = {});

/// Symmetric mapping between any two of BDFPA, PFPA, BDSPA and PSPA.
MappedProfile map_symmetric(MechanismKind from, MechanismKind to, Scenario const &scenario,
                            QuadratureConfig const &quad = {}, SolverOptions const &opts = {});

}  // namespace auctionlab
