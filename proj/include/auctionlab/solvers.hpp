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

#include "auctionlab/evaluate.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace auctionlab {

struct SolverOptions
{
  double      tol           = 1e-6;   // stopping residual for the dual
  std::size_t max_iters     = 10000;
  double      feas_tol      = 1e-6;
  double      comp_tol      = 1e-5;
  double      pay_tol       = 1e-8;
  double      sweep_tol     = 1e-10;
  double      bisect_tol    = 1e-12;
  double      armijo        = 1e-4;
  bool        trace         = false;
};

struct IterationRecord
{
  std::size_t         iteration = 0;
  std::vector<double> params;
  double              objective    = 0.0;
  double              max_residual = 0.0;
  double              step         = 0.0;
};

enum class Uniqueness
{
  NotChecked,
  Unique,
  NonUnique
};

char const *to_string(Uniqueness u) noexcept;

struct UniquenessVerdict
{
  Uniqueness          verdict     = Uniqueness::NotChecked;
  bool                condition_a = false;
  bool                condition_b = false;
  std::optional<double> nu;
  std::vector<double> witness;
  std::vector<double> witness_payment;
  double              witness_payment_gap = 0.0;

  nlohmann::json to_json() const;
};

struct SolveReport
{
  MechanismKind              mechanism = MechanismKind::BDFPA;
  std::string                method;
  std::vector<double>        params;
  std::optional<std::vector<double>> dual;
  std::vector<double>        payment;
  std::vector<double>        residual;
  std::vector<bool>          binding;
  std::optional<double>      dual_value;
  std::optional<double>      duality_gap;
  double                     revenue    = 0.0;
  std::size_t                iterations = 0;
  bool                       converged  = false;
  bool                       monotone   = true;
  UniquenessVerdict          uniqueness;
  std::vector<IterationRecord> trace;
  std::vector<std::string>   diagnostics;

  double max_residual() const;
  nlohmann::json to_json() const;
};

enum class DualKind
{
  BDFPA,
  BROA
};

/// chi(tau) = E[max_i ((1 - tau_i) h_i - lambda)^+] + sum tau_i rho_i.
double dual_value(DualKind kind, Scenario const &scenario, std::vector<double> const &tau,
                  QuadratureConfig const &quad = {});

/// Gradient rho_i - p_i(1 - tau).
std::vector<double> dual_gradient(DualKind kind, Scenario const &scenario,
                                  std::vector<double> const &tau,
                                  QuadratureConfig const &quad = {});

/// Projected gradient descent on chi over [0,1]^n.
SolveReport solve_dual(DualKind kind, Scenario const &scenario, QuadratureConfig const &quad = {},
                       SolverOptions const &opts = {});

/// Gauss-Seidel ascent to the maximum budget-feasible tuple (BDFPA or PFPA).
SolveReport solve_max_tuple(MechanismKind kind, Scenario const &scenario,
                            QuadratureConfig const &quad = {}, SolverOptions const &opts = {});

/// Largest symmetric budget-extracting multiplier for BDSPA or PSPA.
SolveReport solve_symmetric_spa(MechanismKind kind, Scenario const &scenario,
                                QuadratureConfig const &quad = {},
                                SolverOptions const &opts = {});

/// Uniqueness of the budget-extracting BDFPA tuple given its maximum tuple.
UniquenessVerdict check_uniqueness_ebdfpa(Scenario const &scenario, SolveReport const &report,
                                          QuadratureConfig const &quad = {},
                                          SolverOptions const &opts = {});

/// Budget-extracting tuple by the default method for the mechanism: max-tuple
/// for BDFPA and PFPA, dual for BROA, symmetric for BDSPA and PSPA.
SolveReport solve_budget_extracting(MechanismKind kind, Scenario const &scenario,
                                    QuadratureConfig const &quad = {},
                                    SolverOptions const &opts = {});

/// Complementarity residual |min(1 - theta_i, rho_i - p_i)| per buyer.
std::vector<double> complementarity_residuals(std::vector<double> const &params,
                                              std::vector<double> const &payments,
                                              std::vector<double> const &budgets);

}  // namespace auctionlab
