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

// auctionlab command-line front end. Links only the C API.

#include "auctionlab/auctionlab.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;

enum Exit
{
  kOk          = 0,
  kUsage       = 1,
  kMalformed   = 2,
  kQuadrature  = 3,
  kSolver      = 4,
  kCertify     = 5,
  kValidate    = 6,
  kExampleFail = 7
};

struct ScenarioDeleter
{
  void operator()(al_scenario *s) const { al_scenario_free(s); }
};
struct ResultDeleter
{
  void operator()(al_result *r) const { al_result_free(r); }
};
using ScenarioPtr = std::unique_ptr<al_scenario, ScenarioDeleter>;
using ResultPtr   = std::unique_ptr<al_result, ResultDeleter>;

int exit_for(al_status s)
{
  switch (s)
  {
  case AL_OK:
    return kOk;
  case AL_ERR_INVALID_ARGUMENT:
  case AL_ERR_ASYMMETRIC:
    return kUsage;
  case AL_ERR_PARSE:
  case AL_ERR_DOMAIN:
  case AL_ERR_PRECONDITION:
  case AL_ERR_IO:
    return kMalformed;
  case AL_ERR_QUADRATURE:
    return kQuadrature;
  case AL_ERR_NONCONVERGENCE:
  case AL_ERR_ROOT_BRACKET:
  case AL_ERR_DEGENERATE:
  case AL_ERR_INTERNAL:
    return kSolver;
  case AL_ERR_CERTIFICATION:
    return kCertify;
  case AL_ERR_VALIDATION:
    return kValidate;
  case AL_ERR_EXAMPLE_MISMATCH:
    return kExampleFail;
  }
  return kSolver;
}

void report(al_status s)
{
  std::cerr << "auctionlab: " << al_status_string(s);
  if (*al_last_error() != '\0')
  {
    std::cerr << ": " << al_last_error();
  }
  std::cerr << '\n';
}

ScenarioPtr load(std::string const &path, int &code)
{
  al_scenario   *raw = nullptr;
  al_status const s  = al_scenario_load(path.c_str(), &raw);
  if (s != AL_OK)
  {
    report(s);
    code = exit_for(s);
    return nullptr;
  }
  return ScenarioPtr(raw);
}

std::vector<double> parse_params(std::string const &text)
{
  std::vector<double> out;
  std::stringstream   ss(text);
  std::string         item;
  while (std::getline(ss, item, ','))
  {
    std::size_t used = 0;
    double      v    = 0.0;
    try
    {
      v = std::stod(item, &used);
    }
    catch (std::exception const &)
    {
      throw std::invalid_argument(item);
    }
    if (used != item.size())
    {
      throw std::invalid_argument(item);
    }
    out.push_back(v);
  }
  return out;
}

std::string fmt(double v, int prec = 6)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

void print_profile_table(json const &doc)
{
  auto const &p = doc["profile"];
  std::cout << "mechanism " << doc["mechanism"].get<std::string>() << "  params";
  for (double v : doc["params"])
  {
    std::cout << ' ' << fmt(v);
  }
  std::cout << "\n\n";
  std::cout << std::left << std::setw(7) << "buyer" << std::setw(14) << "payment" << std::setw(14)
            << "utility" << std::setw(14) << "win_prob" << "budget\n";
  for (std::size_t i = 0; i < p["payment"].size(); ++i)
  {
    std::cout << std::left << std::setw(7) << i << std::setw(14) << fmt(p["payment"][i])
              << std::setw(14) << fmt(p["utility"][i]) << std::setw(14)
              << fmt(p["win_probability"][i]) << fmt(doc["budgets"][i]) << '\n';
  }
  std::cout << "\nrevenue " << fmt(p["revenue"]) << "  allocation probability "
            << fmt(p["allocation_probability"]) << "  converged "
            << (p["converged"].get<bool>() ? "yes" : "no") << '\n';
}

void print_profile_csv(json const &doc)
{
  auto const &p = doc["profile"];
  std::cout << "buyer,payment,utility,win_probability,budget\n";
  std::cout << std::setprecision(12);
  for (std::size_t i = 0; i < p["payment"].size(); ++i)
  {
    std::cout << i << ',' << p["payment"][i].get<double>() << ','
              << p["utility"][i].get<double>() << ',' << p["win_probability"][i].get<double>()
              << ',' << doc["budgets"][i].get<double>() << '\n';
  }
  std::cout << "revenue,," << p["revenue"].get<double>() << ",,\n";
}

void print_example_table(json const &doc)
{
  int const label_w = 24;
  int const col_w   = 18;
  std::cout << std::left << std::setw(label_w) << "";
  for (auto const &c : doc["columns"])
  {
    std::cout << std::setw(col_w) << c.get<std::string>();
  }
  std::cout << '\n';
  for (auto const &row : doc["rows"])
  {
    std::cout << std::setw(label_w) << row["label"].get<std::string>();
    for (std::size_t k = 0; k < row["computed"].size(); ++k)
    {
      std::string cell;
      if (row["computed"][k].is_boolean())
      {
        cell = std::string(row["computed"][k].get<bool>() ? "Yes" : "No") + " (" +
               (row["reference"][k].get<bool>() ? "Yes" : "No") + ")";
      }
      else
      {
        cell = fmt(row["computed"][k], 4) + " (" + fmt(row["reference"][k], 3) + ")";
      }
      std::cout << std::setw(col_w) << cell;
    }
    std::cout << '\n';
  }
  std::cout << "\nparameters:";
  for (std::size_t k = 0; k < doc["columns"].size(); ++k)
  {
    std::cout << "  " << doc["columns"][k].get<std::string>() << '=' << fmt(doc["params"][k][0], 4);
  }
  std::cout << "\nmax |delta| " << std::scientific << std::setprecision(2)
            << doc["max_delta"].get<double>() << " (tolerance "
            << doc["tolerance"].get<double>() << ")  "
            << (doc["passed"].get<bool>() ? "PASS" : "FAIL") << '\n';
}

void print_checks(json const &doc)
{
  for (auto const &c : doc["checks"])
  {
    std::cout << (c["passed"].get<bool>() ? "PASS  " : "FAIL  ") << c["name"].get<std::string>()
              << '\n';
  }
  std::cout << (doc["passed"].get<bool>() ? "all checks passed" : "some checks failed") << '\n';
}

int finish(al_status s, al_result *raw, std::function<void(json const &)> const &render)
{
  ResultPtr r(raw);
  if (r)
  {
    render(json::parse(al_result_json(r.get())));
  }
  if (s != AL_OK)
  {
    report(s);
  }
  return exit_for(s);
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"auctionlab: budget-constrained auction evaluation, solving and mapping.\n"
               "Defaults: 4096 quadrature nodes, 10^6 Monte Carlo samples, seed 42.\n"
               "AUCTIONLAB_THREADS caps Monte Carlo worker threads (0 = auto).\n"
               "Exit codes: 0 ok, 1 usage, 2 malformed input, 3 quadrature non-convergence,\n"
               "4 solver failure, 5 certification failure, 6 validation failure,\n"
               "7 example mismatch."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(al_version()));

  std::size_t nodes = 4096;

  auto *eval = app.add_subcommand("eval", "Outcome profile of a mechanism under given parameters");
  std::string eval_path, eval_mech, eval_params, eval_format = "table", eval_rule = "trapezoid";
  eval->add_option("scenario", eval_path, "Scenario JSON file")->required();
  eval->add_option("--mechanism", eval_mech, "bdfpa, pfpa, broa, bdspa or pspa")->required();
  eval->add_option("--params", eval_params, "Comma-separated parameter tuple")->required();
  eval->add_option("--nodes", nodes, "Quadrature nodes")->capture_default_str();
  eval->add_option("--rule", eval_rule, "trapezoid or gauss")
      ->check(CLI::IsMember({"trapezoid", "gauss"}))
      ->capture_default_str();
  eval->add_option("--format", eval_format, "table, json or csv")
      ->check(CLI::IsMember({"table", "json", "csv"}))
      ->capture_default_str();

  auto *solve = app.add_subcommand("solve", "Budget-extracting parameter tuple");
  std::string solve_path, solve_mech, solve_method;
  double      solve_tol   = 1e-6;
  bool        solve_trace = false;
  solve->add_option("scenario", solve_path, "Scenario JSON file")->required();
  solve->add_option("--mechanism", solve_mech, "bdfpa, pfpa, broa, bdspa or pspa")->required();
  solve->add_option("--method", solve_method, "dual, max-tuple or symmetric")
      ->check(CLI::IsMember({"dual", "max-tuple", "symmetric"}));
  solve->add_option("--tol", solve_tol, "Dual stopping residual")->capture_default_str();
  solve->add_flag("--trace", solve_trace, "Include the iteration trace");
  solve->add_option("--nodes", nodes, "Quadrature nodes")->capture_default_str();

  auto *map = app.add_subcommand("map", "Strategy mapping between mechanisms, certified");
  std::string map_path, map_from, map_to, map_out;
  map->add_option("scenario", map_path, "Scenario JSON file")->required();
  map->add_option("--from", map_from, "Source mechanism")->required();
  map->add_option("--to", map_to, "Target mechanism")->required();
  map->add_option("--out", map_out, "Write the mapped profile here instead of stdout");
  map->add_option("--nodes", nodes, "Quadrature nodes")->capture_default_str();

  auto *example = app.add_subcommand("example", "Reproduce the two-buyer uniform summary table");
  std::string example_format = "table";
  example->add_option("--nodes", nodes, "Quadrature nodes")->capture_default_str();
  example->add_option("--format", example_format, "table or json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  auto *validate = app.add_subcommand("validate", "Monte Carlo oracle and property checks");
  std::string   val_path, val_mech, val_params, val_format = "table";
  std::size_t   samples = 1000000;
  std::uint64_t seed    = 42;
  validate->add_option("scenario", val_path, "Scenario JSON file")->required();
  validate->add_option("--samples", samples, "Monte Carlo samples")->capture_default_str();
  validate->add_option("--seed", seed, "Monte Carlo seed")->capture_default_str();
  validate->add_option("--mechanism", val_mech, "Also check this mechanism ...");
  validate->add_option("--params", val_params, "... under these parameters");
  validate->add_option("--nodes", nodes, "Quadrature nodes")->capture_default_str();
  validate->add_option("--format", val_format, "table or json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    int const rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  int code = kOk;
  try
  {
    if (*eval)
    {
      auto sc = load(eval_path, code);
      if (!sc)
        return code;
      auto const params = parse_params(eval_params);
      al_result *raw    = nullptr;
      al_status  s      = al_evaluate(sc.get(), eval_mech.c_str(), params.data(), params.size(),
                                      nodes, eval_rule == "gauss" ? AL_RULE_GAUSS_LEGENDRE
                                                                  : AL_RULE_TRAPEZOID,
                                      &raw);
      return finish(s, raw, [&](json const &doc) {
        if (eval_format == "json")
          std::cout << doc.dump(2) << '\n';
        else if (eval_format == "csv")
          print_profile_csv(doc);
        else
          print_profile_table(doc);
      });
    }
    if (*solve)
    {
      auto sc = load(solve_path, code);
      if (!sc)
        return code;
      al_result *raw = nullptr;
      al_status  s   = al_solve(sc.get(), solve_mech.c_str(),
                                solve_method.empty() ? nullptr : solve_method.c_str(), solve_tol,
                                solve_trace ? 1 : 0, nodes, &raw);
      return finish(s, raw, [](json const &doc) { std::cout << doc.dump(2) << '\n'; });
    }
    if (*map)
    {
      auto sc = load(map_path, code);
      if (!sc)
        return code;
      al_result *raw = nullptr;
      al_status  s   = al_map(sc.get(), map_from.c_str(), map_to.c_str(), nodes, &raw);
      if (s == AL_ERR_ROOT_BRACKET)
      {
        report(s);
        return kCertify;
      }
      return finish(s, raw, [&](json const &doc) {
        if (map_out.empty())
        {
          std::cout << doc.dump(2) << '\n';
          return;
        }
        std::ofstream out(map_out);
        out << doc.dump(2) << '\n';
        auto const &c = doc["certification"];
        std::cout << "certified " << (c["certified"].get<bool>() ? "yes" : "no")
                  << "  max discrepancy " << std::scientific << std::setprecision(3)
                  << c["max_discrepancy"].get<double>() << "  written to " << map_out << '\n';
      });
    }
    if (*example)
    {
      al_result *raw = nullptr;
      al_status  s   = al_example(nodes, &raw);
      return finish(s, raw, [&](json const &doc) {
        if (example_format == "json")
          std::cout << doc.dump(2) << '\n';
        else
          print_example_table(doc);
      });
    }
    if (*validate)
    {
      auto sc = load(val_path, code);
      if (!sc)
        return code;
      if (val_mech.empty() != val_params.empty())
      {
        std::cerr << "auctionlab: --mechanism and --params go together\n";
        return kUsage;
      }
      std::vector<double> params;
      if (!val_params.empty())
        params = parse_params(val_params);
      al_result *raw = nullptr;
      al_status  s   = al_validate(sc.get(), samples, seed,
                                   val_mech.empty() ? nullptr : val_mech.c_str(), params.data(),
                                   params.size(), nodes, &raw);
      return finish(s, raw, [&](json const &doc) {
        if (val_format == "json")
          std::cout << doc.dump(2) << '\n';
        else
          print_checks(doc);
      });
    }
  }
  catch (std::invalid_argument const &e)
  {
    std::cerr << "auctionlab: malformed number '" << e.what() << "'\n";
    return kUsage;
  }
  return kUsage;
}
