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

#ifndef AUCTIONLAB_AUCTIONLAB_H
#define AUCTIONLAB_AUCTIONLAB_H

/*
 * C interface to auctionlab. Objects are opaque handles released with the
 * matching *_free function. Every call returns an al_status; on failure the
 * message is available from al_last_error() on the calling thread.
 *
 * Commands that run their own checks (evaluate, map, example, validate) still
 * hand back a result when a check fails, together with a non-OK status.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define AL_API __declspec(dllexport)
#else
#  define AL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum al_status
{
  AL_OK = 0,
  AL_ERR_INVALID_ARGUMENT = 1,
  AL_ERR_PARSE = 2,
  AL_ERR_DOMAIN = 3,
  AL_ERR_PRECONDITION = 4,
  AL_ERR_ASYMMETRIC = 5,
  AL_ERR_QUADRATURE = 6,
  AL_ERR_NONCONVERGENCE = 7,
  AL_ERR_ROOT_BRACKET = 8,
  AL_ERR_DEGENERATE = 9,
  AL_ERR_CERTIFICATION = 10,
  AL_ERR_VALIDATION = 11,
  AL_ERR_EXAMPLE_MISMATCH = 12,
  AL_ERR_IO = 13,
  AL_ERR_INTERNAL = 14
} al_status;

typedef struct al_scenario al_scenario;
typedef struct al_result   al_result;

typedef enum al_quadrature_rule
{
  AL_RULE_TRAPEZOID = 0,
  AL_RULE_GAUSS_LEGENDRE = 1
} al_quadrature_rule;

AL_API char const *al_version(void);
AL_API char const *al_status_string(al_status status);

/* Message of the last failed call on this thread; empty when none. */
AL_API char const *al_last_error(void);

AL_API al_status al_scenario_from_json(char const *json, al_scenario **out);
AL_API al_status al_scenario_load(char const *path, al_scenario **out);
/* The built-in two-buyer uniform example. */
AL_API al_status al_scenario_example(al_scenario **out);
AL_API size_t    al_scenario_buyers(al_scenario const *scenario);
AL_API int       al_scenario_is_symmetric(al_scenario const *scenario);
AL_API al_status al_scenario_to_json(al_scenario const *scenario, al_result **out);
AL_API void      al_scenario_free(al_scenario *scenario);

/* Outcome profile for a mechanism ("bdfpa", "pfpa", "broa", "bdspa", "pspa",
 * optionally prefixed with "e") under the given parameter tuple. */
AL_API al_status al_evaluate(al_scenario const *scenario, char const *mechanism,
                             double const *params, size_t n_params, size_t nodes,
                             al_quadrature_rule rule, al_result **out);

/* method: "dual", "max-tuple", "symmetric", or NULL for the default. */
AL_API al_status al_solve(al_scenario const *scenario, char const *mechanism, char const *method,
                          double tol, int trace, size_t nodes, al_result **out);

AL_API al_status al_map(al_scenario const *scenario, char const *from, char const *to,
                        size_t nodes, al_result **out);

AL_API al_status al_example(size_t nodes, al_result **out);

/* mechanism/params may be NULL/0; when given they are validated as supplied. */
AL_API al_status al_validate(al_scenario const *scenario, size_t samples, uint64_t seed,
                             char const *mechanism, double const *params, size_t n_params,
                             size_t nodes, al_result **out);

/* Monte Carlo outcome profile. */
AL_API al_status al_simulate(al_scenario const *scenario, char const *mechanism,
                             double const *params, size_t n_params, size_t samples,
                             uint64_t seed, al_result **out);

/* JSON document of a result; owned by the result. */
AL_API char const *al_result_json(al_result const *result);
AL_API void        al_result_free(al_result *result);

#ifdef __cplusplus
}
#endif

#endif
