// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "latprune/cli.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "latprune/baseline.hpp"
#include "latprune/error.hpp"
#include "latprune/extract.hpp"
#include "latprune/io.hpp"
#include "latprune/solver.hpp"
#include "latprune/synthetic.hpp"

namespace latprune {
namespace {

struct InstanceArgs {
  std::string network;
  std::string importance;
  std::string latency;
  int granularity = 1;
};

struct BudgetArgs {
  std::vector<double> ms;
  std::vector<double> ratio;
};

struct Instance {
  Network network;
  std::vector<LayerImportance> importances;
  std::vector<CostMatrix> matrices;
  int granularity = 1;
};

void add_instance_options(CLI::App* cmd, InstanceArgs& a) {
  cmd->add_option("--network", a.network, "Network JSON")->required();
  cmd->add_option("--importance", a.importance, "Channel importance JSON")->required();
  cmd->add_option("--latency", a.latency, "Latency table JSON")->required();
  cmd->add_option("--granularity", a.granularity,
                  "Keep channel counts at multiples of this value")
      ->check(CLI::PositiveNumber);
}

void add_budget_options(CLI::App* cmd, BudgetArgs& b, bool many) {
  auto* ms = cmd->add_option("--budget-ms", b.ms, "Latency budget in milliseconds");
  auto* ratio = cmd->add_option("--budget-ratio", b.ratio,
                                "Fraction of dense latency to remove, in (0, 1)");
  if (!many) {
    ms->expected(1);
    ratio->expected(1);
  }
  ms->excludes(ratio);
  cmd->callback([cmd, ms, ratio] {
    if (ms->count() == 0 && ratio->count() == 0) {
      throw CLI::RequiredError(cmd->get_name() + ": --budget-ms or --budget-ratio");
    }
  });
}

Instance load_instance(const InstanceArgs& a) {
  Instance inst{load_network(a.network), {}, {}, a.granularity};
  inst.importances = load_importances(a.importance, inst.network);
  inst.matrices = load_cost_matrices(a.latency, inst.network);
  return inst;
}

std::vector<double> resolve_budgets(const Instance& inst, const BudgetArgs& b) {
  if (!b.ms.empty()) {
    for (double v : b.ms) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidBudget, "--budget-ms must be finite and >= 0");
      }
    }
    return b.ms;
  }
  std::vector<double> out;
  for (double r : b.ratio) out.push_back(budget_from_ratio(inst.network, inst.matrices, r));
  return out;
}

Problem make_instance_problem(const Instance& inst, double budget) {
  return make_problem(inst.network, inst.importances, inst.matrices, budget,
                      inst.granularity);
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

int count_removed(const Solution& s) {
  return static_cast<int>(std::count(s.block_active.begin(), s.block_active.end(), false));
}

void print_report(const ValidationReport& report, std::ostream& err) {
  for (const Violation& v : report.violations) {
    fmt::print(err, "violation {}: {}\n", violation_name(v.kind), v.message);
  }
}

struct SolveArgs {
  double gap = 0.01;
  double time_limit = 60.0;
  std::int64_t node_limit = 1'000'000;
};

void add_solve_options(CLI::App* cmd, SolveArgs& s) {
  cmd->add_option("--gap", s.gap, "Target relative optimality gap")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--time-limit", s.time_limit, "Time limit in seconds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--node-limit", s.node_limit, "Branch-and-bound node limit")
      ->check(CLI::PositiveNumber);
}

SolveOptions to_options(const SolveArgs& s) {
  SolveOptions o;
  o.target_gap = s.gap;
  o.time_limit_s = s.time_limit;
  o.node_limit = s.node_limit;
  return o;
}

int cmd_plan(const InstanceArgs& ia, const BudgetArgs& ba, const SolveArgs& sa,
             const std::string& out_path, std::ostream& out, std::ostream& err) {
  const Instance inst = load_instance(ia);
  const double budget = resolve_budgets(inst, ba).front();
  const Problem problem = make_instance_problem(inst, budget);
  const Solution s = solve(problem, to_options(sa));
  if (s.status == SolveStatus::kInfeasible) {
    fmt::print(err,
               "infeasible: minimum achievable latency {:.6f} ms exceeds budget "
               "{:.6f} ms\n",
               s.min_latency_ms, budget);
    return kExitInfeasible;
  }
  const PrunePlan plan = extract_plan(s, problem);
  const ValidationReport report =
      validate_plan(plan, inst.network, inst.matrices, budget);
  if (!report.ok()) {
    print_report(report, err);
    return kExitInputError;
  }
  write_json(out_path, plan_to_json(plan));
  fmt::print(out,
             "status {} objective {:.6f} latency {:.6f} ms budget {:.6f} ms gap "
             "{:.3g} blocks removed {} nodes {}\n",
             status_name(s.status), s.objective, s.latency_ms, budget, s.gap,
             count_removed(s), s.nodes);
  return kExitOk;
}

int cmd_sweep(const InstanceArgs& ia, const BudgetArgs& ba, const SolveArgs& sa,
              const std::string& out_path, std::ostream& out) {
  const Instance inst = load_instance(ia);
  const std::vector<double> budgets = resolve_budgets(inst, ba);

  // Solved from the tightest budget up: each solution stays feasible for
  // the next budget and seeds its search, so objectives cannot decrease.
  std::vector<std::size_t> order(budgets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return budgets[a] < budgets[b]; });
  std::vector<std::string> rows(budgets.size());
  std::optional<Solution> previous;
  for (std::size_t i : order) {
    const Problem problem = make_instance_problem(inst, budgets[i]);
    SolveOptions options = to_options(sa);
    options.warm_start = previous;
    try {
      const Solution s = solve(problem, options);
      if (s.status == SolveStatus::kInfeasible) {
        rows[i] = fmt::format("{},,,,,Infeasible", budgets[i]);
        continue;
      }
      rows[i] = fmt::format("{},{},{},{},{},{}", budgets[i], s.objective, s.latency_ms,
                            s.gap, count_removed(s), status_name(s.status));
      previous = s;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTimeLimitReached &&
          e.code() != ErrorCode::kNodeLimitReached) {
        throw;
      }
      rows[i] = fmt::format("{},,,,,{}", budgets[i], error_code_name(e.code()));
    }
  }
  std::vector<std::size_t> descending = order;
  std::reverse(descending.begin(), descending.end());
  std::stable_sort(descending.begin(), descending.end(),
                   [&](std::size_t a, std::size_t b) { return budgets[a] > budgets[b]; });
  std::string csv = "budget_ms,objective,latency_ms,gap,blocks_removed,status\n";
  for (std::size_t i : descending) csv += rows[i] + "\n";
  if (out_path.empty()) {
    out << csv;
  } else {
    write_file_atomic(out_path, csv);
  }
  return kExitOk;
}

int cmd_baseline(const InstanceArgs& ia, const BudgetArgs& ba, int steps,
                 const std::string& out_path, const std::string& trace_path,
                 std::ostream& out, std::ostream& err) {
  const Instance inst = load_instance(ia);
  const double budget = resolve_budgets(inst, ba).front();
  const Problem problem = make_instance_problem(inst, budget);
  BaselineResult result;
  try {
    result = run_halp(problem, steps);
  } catch (const EmptyLayerError& e) {
    if (!trace_path.empty()) write_file_atomic(trace_path, trace_to_csv(e.trace()));
    fmt::print(err, "{}\n", e.what());
    return kExitInfeasible;
  }
  if (!trace_path.empty()) write_file_atomic(trace_path, trace_to_csv(result.trace));

  Solution s;
  s.channel_choice = result.channel_choice;
  s.block_active.assign(inst.network.num_blocks(), true);
  s.objective = result.objective;
  s.latency_ms = result.latency_ms;
  s.status = SolveStatus::kFeasible;
  PrunePlan plan = extract_plan(s, problem);
  plan.gap.reset();
  plan.solver_status = "Baseline";
  write_json(out_path, plan_to_json(plan));

  const ValidationReport report =
      validate_plan(plan, inst.network, inst.matrices, budget);
  fmt::print(out, "baseline steps {} objective {:.6f} latency {:.6f} ms budget {:.6f} ms\n",
             steps, result.objective, result.latency_ms, budget);
  if (!report.ok()) {
    print_report(report, err);
    return kExitInfeasible;
  }
  return kExitOk;
}

struct SynthArgs {
  std::string network;
  std::string preset;
  std::string device;
  int granularity = 1;
  std::string out;
  std::string network_out;
  std::string importance_out;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  std::optional<Network> network;
  DeviceModel device = resnet50_device();
  if (!a.preset.empty()) {
    network = validate_network(resnet50_spec());
  } else {
    network = load_network(a.network);
  }
  if (!a.device.empty()) device = device_model_from_json(read_json_file(a.device));
  const auto tables = synthesize_tables(*network, device, a.granularity);
  write_json(a.out, latency_to_json(tables));
  if (!a.network_out.empty()) write_json(a.network_out, network_to_json(network->spec()));
  if (!a.importance_out.empty()) {
    ImportanceFile f;
    f.layers = random_scores(*network, a.seed);
    write_json(a.importance_out, importance_to_json(f));
  }
  fmt::print(out, "wrote {} latency tables to {}\n", tables.size(), a.out);
  return kExitOk;
}

int cmd_validate(const std::string& plan_path, const std::string& network_path,
                 const std::string& latency_path, std::optional<double> budget,
                 std::ostream& out, std::ostream& err) {
  const Network network = load_network(network_path);
  const auto matrices = load_cost_matrices(latency_path, network);
  const PrunePlan plan = load_plan(plan_path);
  const double limit = budget.value_or(plan.budget_ms);
  const ValidationReport report = validate_plan(plan, network, matrices, limit);
  if (!report.ok()) {
    print_report(report, err);
    return kExitInfeasible;
  }
  fmt::print(out, "plan valid: latency {:.6f} ms within budget {:.6f} ms\n",
             report.recomputed_latency_ms.value_or(0.0), limit);
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTimeLimitReached:
    case ErrorCode::kNodeLimitReached:
      return kExitLimit;
    case ErrorCode::kEmptyLayerResult:
    case ErrorCode::kInfeasibleSolution:
      return kExitInfeasible;
    default:
      return kExitInputError;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Latency-constrained structured pruning planner", "latprune"};
  app.require_subcommand(1);

  InstanceArgs ia;
  BudgetArgs ba;
  SolveArgs sa;
  std::string out_path;

  auto* plan = app.add_subcommand("plan", "Solve for an optimal pruning plan");
  add_instance_options(plan, ia);
  add_budget_options(plan, ba, false);
  add_solve_options(plan, sa);
  plan->add_option("--out", out_path, "Plan JSON to write")->required();

  auto* sweep = app.add_subcommand("sweep", "Solve for several budgets, emit CSV");
  add_instance_options(sweep, ia);
  add_budget_options(sweep, ba, true);
  add_solve_options(sweep, sa);
  sweep->add_option("--out", out_path, "CSV file to write (default: stdout)");

  int steps = 30;
  std::string trace_path;
  auto* baseline = app.add_subcommand("baseline", "Run the per-channel knapsack baseline");
  add_instance_options(baseline, ia);
  add_budget_options(baseline, ba, false);
  baseline->add_option("--steps", steps, "Number of pruning steps")
      ->check(CLI::PositiveNumber);
  baseline->add_option("--out", out_path, "Plan JSON to write")->required();
  baseline->add_option("--trace", trace_path, "Per-step trace CSV to write");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Synthesize latency tables from a device model");
  auto* synth_net = synth->add_option("--network", sy.network, "Network JSON");
  auto* preset = synth->add_option("--preset", sy.preset, "Built-in network")
                     ->check(CLI::IsMember({"resnet50"}));
  synth_net->excludes(preset);
  synth->add_option("--device", sy.device,
                    "Device model JSON (fixed_overhead_ms, cost_per_mac_ms, tile)");
  synth->add_option("--granularity", sy.granularity, "Measure every g channels")
      ->check(CLI::PositiveNumber);
  synth->add_option("--out", sy.out, "Latency JSON to write")->required();
  synth->add_option("--network-out", sy.network_out, "Also write the network JSON");
  synth->add_option("--importance-out", sy.importance_out,
                    "Also write random importance scores");
  synth->add_option("--seed", sy.seed, "Seed for the random importance scores");
  synth->callback([&] {
    if (sy.network.empty() && sy.preset.empty()) {
      throw CLI::RequiredError("synth: --network or --preset");
    }
  });

  std::string plan_path;
  std::string network_path;
  std::string latency_path;
  std::optional<double> validate_budget;
  auto* validate = app.add_subcommand("validate", "Check a plan against its budget");
  validate->add_option("--plan", plan_path, "Plan JSON")->required();
  validate->add_option("--network", network_path, "Network JSON")->required();
  validate->add_option("--latency", latency_path, "Latency table JSON")->required();
  validate->add_option("--budget-ms", validate_budget,
                       "Budget to check against (default: the plan's own)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    for (const CLI::App* sub : app.get_subcommands()) {
      out << sub->help();
    }
    return kExitInputError;
  }

  try {
    if (plan->parsed()) return cmd_plan(ia, ba, sa, out_path, out, err);
    if (sweep->parsed()) return cmd_sweep(ia, ba, sa, out_path, out);
    if (baseline->parsed()) {
      return cmd_baseline(ia, ba, steps, out_path, trace_path, out, err);
    }
    if (synth->parsed()) return cmd_synth(sy, out);
    return cmd_validate(plan_path, network_path, latency_path, validate_budget, out,
                        err);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInputError;
  }
}

}  // namespace latprune
