// Copyright 2026 The latprune Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per headline criterion, nonzero exit if
// any fails. Uses the checked-in ResNet50-shaped fixtures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "latprune/baseline.hpp"
#include "latprune/cli.hpp"
#include "latprune/extract.hpp"
#include "latprune/io.hpp"
#include "latprune/synthetic.hpp"
#include "oracles.hpp"

namespace {

using namespace latprune;
using Clock = std::chrono::steady_clock;

std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(LATPRUNE_FIXTURE_DIR) / name;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

Problem resnet_problem(double ratio) {
  Network net = load_network(fixture("resnet50_network.json"));
  auto imp = load_importances(fixture("resnet50_importance.json"), net);
  auto matrices = build_cost_matrices(
      net, latency_from_json(read_json_file(fixture("resnet50_latency.json")), net));
  const double budget = budget_from_ratio(net, matrices, ratio);
  return make_problem(std::move(net), std::move(imp), std::move(matrices), budget, 32);
}

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs a check; an exception counts as failure with its message as detail.
void criterion(const std::string& name, const std::function<bool(std::string&)>& check) {
  std::string detail;
  bool pass = false;
  try {
    pass = check(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(name, pass, detail);
}

template <typename... Args>
std::string format(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Dual bounds seen across every solve in this run.
int dual_checks = 0;
int dual_violations = 0;
int dual_vs_exact_checks = 0;
int dual_vs_exact_violations = 0;

void record_dual(const Solution& s) {
  if (s.status == SolveStatus::kInfeasible) return;
  ++dual_checks;
  if (!(s.dual_bound >= s.objective)) ++dual_violations;
}

bool oracle_optimality(std::string& detail) {
  const auto start = Clock::now();
  int mismatches = 0;
  int feasible = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomInstanceOptions o;
    o.max_layers = 6;
    o.max_channels = 8;
    o.max_blocks = 2;
    o.monotone = seed % 2 == 1;
    const Problem p = to_problem(random_instance(seed, o));
    const Solution exact = solve_exact(p);
    SolveOptions so;
    so.target_gap = 0.0;
    const Solution s = solve(p, so);
    record_dual(s);
    const bool both_infeasible =
        exact.status == SolveStatus::kInfeasible && s.status == SolveStatus::kInfeasible;
    if (both_infeasible) continue;
    if (exact.status == SolveStatus::kInfeasible || s.status == SolveStatus::kInfeasible ||
        s.objective != exact.objective) {
      ++mismatches;
      continue;
    }
    ++feasible;
    ++dual_vs_exact_checks;
    if (!(s.dual_bound >= exact.objective)) ++dual_vs_exact_violations;
  }
  const double elapsed = seconds_since(start);
  detail = format("200 instances (%d feasible), %d objective mismatches, %.2f s (< 30 s)",
                  feasible, mismatches, elapsed);
  return mismatches == 0 && elapsed < 30.0;
}

bool budget_adherence(std::string& detail) {
  int plans = 0;
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 10'000; seed < 11'000; ++seed) {
    RandomInstanceOptions o;
    const int size = static_cast<int>(seed % 4);
    o.max_layers = 4 + 4 * size;
    o.max_channels = 8 + 8 * size;
    o.max_blocks = 1 + size;
    o.monotone = seed % 2 == 0;
    o.granularity = size == 3 ? 4 : 1;
    const RandomInstance inst = random_instance(seed, o);
    const Problem p = to_problem(inst, o.granularity);
    const Solution s = solve(p);
    record_dual(s);
    if (s.status == SolveStatus::kInfeasible) continue;
    ++plans;
    const PrunePlan plan = extract_plan(s, p);
    // Counts as read back from the plan; removed layers carry none.
    std::vector<int> counts;
    for (const LayerPlan& lp : plan.layers) {
      counts.push_back(lp.removed ? 1 : static_cast<int>(lp.kept_channel_indices.size()));
    }
    BlockDecisions z(p.network.num_blocks(), true);
    for (int b : plan.removed_blocks) z[b - 1] = false;
    const double lat = oracle::eq4_latency(inst.spec, p.matrices, counts, z);
    worst = std::max(worst, lat - p.budget_ms);
    if (!(lat <= p.budget_ms + 1e-9) ||
        !validate_plan(plan, p.network, p.matrices, p.budget_ms).ok()) {
      ++violations;
    }
  }
  detail = format("%d feasible plans of 1000 instances, %d over budget+1e-9, "
                  "max(latency - budget) = %.3g ms",
                  plans, violations, worst);
  return violations == 0 && plans > 0;
}

bool error_bound(std::string& detail) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 10'000; ++rep) {
    LatencyTable t;
    t.layer_id = 1;
    t.in_channels = 1 + static_cast<int>(rng() % 12);
    t.out_channels = 1 + static_cast<int>(rng() % 12);
    t.entries.resize(static_cast<std::size_t>(t.in_channels) * t.out_channels);
    if (rep % 2 == 0) {
      for (double& e : t.entries) e = u(rng);
    } else {
      // Monotone tile-quantized tables like a real device.
      const int tile = 1 + static_cast<int>(rng() % 4);
      for (int i = 1; i <= t.in_channels; ++i) {
        for (int j = 1; j <= t.out_channels; ++j) {
          const int qi = (i + tile - 1) / tile * tile;
          const int qj = (j + tile - 1) / tile * tile;
          t.entries[(i - 1) * t.out_channels + (j - 1)] = 0.01 + 1e-3 * qi * qj;
        }
      }
    }
    const CostMatrix c = build_cost_matrix(t);
    const int p = 1 + static_cast<int>(rng() % t.in_channels);
    const int p_hat = 1 + static_cast<int>(rng() % p);
    const int j = 1 + static_cast<int>(rng() % t.out_channels);
    const double err = std::abs(halp_channel_cost(c, p_hat, j) - halp_channel_cost(c, p, j));
    const double bound = halp_error_bound(c, p, p_hat, j);
    tightest = std::min(tightest, bound - err);
    if (!(err <= bound + 1e-12)) ++violations;
  }
  detail = format("10000 tuples, %d violations, min(bound - error) = %.3g", violations,
                  tightest);
  return violations == 0;
}

bool baseline_failure(std::string& detail) {
  const Problem p = resnet_problem(0.7);
  std::string one_shot;
  bool one_shot_fails = false;
  try {
    const BaselineResult once = run_halp(p, 1);
    const double dev = std::abs(once.latency_ms - p.budget_ms) / p.budget_ms;
    one_shot = format("steps=1 deviation %.2f%%", 100 * dev);
    one_shot_fails = dev > 0.10;
  } catch (const EmptyLayerError& e) {
    one_shot = format("steps=1 EmptyLayerResult (%d layers empty)",
                      static_cast<int>(e.empty_layers().size()));
    one_shot_fails = true;
  }
  const BaselineResult many = run_halp(p, 30);
  const double many_dev = std::abs(many.latency_ms - p.budget_ms) / p.budget_ms;
  SolveOptions so;
  so.time_limit_s = 60.0;
  const Solution s = solve(p, so);
  record_dual(s);
  const bool solver_ok = s.status != SolveStatus::kInfeasible &&
                         s.latency_ms <= p.budget_ms && s.gap <= 0.01;
  detail = format("%s; steps=30 deviation %.2f%% (< 5%%); solver latency %.4f <= budget "
                  "%.4f ms, gap %.3f%%",
                  one_shot.c_str(), 100 * many_dev, s.latency_ms, p.budget_ms,
                  100 * s.gap);
  return one_shot_fails && many_dev < 0.05 && solver_ok;
}

bool solve_time(std::string& detail) {
  bool ok = true;
  std::string summary;
  for (double ratio : {0.3, 0.5, 0.7, 0.85}) {
    const Problem p = resnet_problem(ratio);
    SolveOptions so;
    so.time_limit_s = 60.0;
    const auto start = Clock::now();
    const Solution s = solve(p, so);
    const double elapsed = seconds_since(start);
    record_dual(s);
    ok = ok && s.status != SolveStatus::kInfeasible && s.gap <= 0.01 && elapsed <= 60.0;
    summary += format("%sratio %.2f gap %.3f%% in %.2f s", summary.empty() ? "" : "; ",
                      ratio, 100 * s.gap, elapsed);
  }
  detail = "53 layers, 16 blocks, g=32: " + summary;
  return ok;
}

bool pareto(std::string& detail) {
  const auto csv = std::filesystem::temp_directory_path() / "latprune_acceptance_sweep.csv";
  std::ostringstream out, err;
  const int code = run_cli({"sweep", "--network", fixture("resnet50_network.json").string(),
                            "--importance", fixture("resnet50_importance.json").string(),
                            "--latency", fixture("resnet50_latency.json").string(),
                            "--granularity", "32", "--budget-ratio", "0.3", "0.5", "0.7",
                            "0.85", "--out", csv.string()},
                           out, err);
  if (code != kExitOk) {
    detail = "sweep exited " + std::to_string(code) + ": " + err.str();
    return false;
  }
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> objectives;
  std::vector<int> removed;
  std::string summary;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() < 6 || cells[1].empty()) {
      detail = "row without a solution: " + line;
      return false;
    }
    objectives.push_back(std::stod(cells[1]));
    removed.push_back(std::stoi(cells[4]));
    summary += format("%s%.4g/%d", summary.empty() ? "" : ", ", objectives.back(),
                      removed.back());
  }
  std::filesystem::remove(csv);
  bool ok = objectives.size() == 4;
  for (std::size_t i = 1; i < objectives.size(); ++i) {
    ok = ok && objectives[i] <= objectives[i - 1] && removed[i] >= removed[i - 1];
  }
  detail = "objective/blocks removed by decreasing budget: " + summary;
  return ok;
}

// Compact re-run of the structural invariants exercised by the unit suites.
bool invariants(std::string& detail) {
  int instances = 0;
  int broken = 0;
  std::mt19937_64 rng(99);
  for (std::uint64_t seed = 20'000; seed < 20'200; ++seed) {
    RandomInstanceOptions o;
    o.max_layers = 8;
    o.max_channels = 12;
    o.max_blocks = 3;
    o.monotone = seed % 2 == 0;
    const RandomInstance inst = random_instance(seed, o);
    const Problem p = to_problem(inst);
    ++instances;
    auto fail = [&] { ++broken; };

    // Prefix sums: nondecreasing, top-1 is the max score, total is the sum.
    for (const LayerImportance& li : p.importances) {
      for (std::size_t i = 1; i < li.prefix.size(); ++i) {
        if (li.prefix[i] < li.prefix[i - 1]) fail();
      }
      if (li.prefix.front() != *std::max_element(li.scores.begin(), li.scores.end())) fail();
    }
    // Telescoping of per-channel costs on a dyadic copy of each table.
    for (const LatencyTable& t : inst.tables) {
      LatencyTable d = t;
      for (double& e : d.entries) e = std::ldexp(std::floor(std::ldexp(e, 10)), -10);
      const CostMatrix c = build_cost_matrix(d);
      for (int row = 1; row <= c.rows(); ++row) {
        double sum = 0.0;
        for (int j = 1; j <= c.cols(); ++j) sum += halp_channel_cost(c, row, j);
        if (sum != c.at(row, c.cols())) fail();
      }
    }
    // Network serialization is byte-stable.
    const std::string net_text = network_to_json(inst.spec).dump(2);
    if (network_to_json(network_from_json(nlohmann::json::parse(net_text))).dump(2) !=
        net_text) {
      fail();
    }
    const Solution s = solve(p);
    record_dual(s);
    if (s.status == SolveStatus::kInfeasible) continue;
    // One count per layer, coupled counts equal.
    if (s.channel_choice.size() != inst.spec.layers.size()) fail();
    if (!oracle::counts_consistent(inst.spec, s.channel_choice)) fail();
    const PrunePlan plan = extract_plan(s, p);
    for (const auto& [name, members] : p.network.coupling_groups()) {
      const std::vector<int>* ref = nullptr;
      for (int l : members) {
        if (plan.layers[l - 1].removed) continue;
        if (ref && plan.layers[l - 1].kept_channel_indices != *ref) fail();
        ref = &plan.layers[l - 1].kept_channel_indices;
      }
    }
    // Plan serialization round trip.
    const std::string plan_text = plan_to_json(plan).dump(2);
    const PrunePlan back = plan_from_json(nlohmann::json::parse(plan_text));
    if (!(back == plan) || plan_to_json(back).dump(2) != plan_text) fail();
  }
  detail = format("%d random instances, %d invariant violations "
                  "(one-hot, coupling, prefix monotonicity, telescoping, round trips)",
                  instances, broken);
  return broken == 0;
}

}  // namespace

int main() {
  criterion("oracle optimality", oracle_optimality);
  criterion("budget adherence", budget_adherence);
  criterion("stale-input error bound", error_bound);
  criterion("one-shot baseline failure", baseline_failure);
  criterion("solve time", solve_time);
  criterion("pareto monotonicity", pareto);
  criterion("invariant suites", invariants);
  criterion("dual soundness", [](std::string& detail) {
    detail = format("%d solves with dual < objective: %d; %d oracle instances with "
                    "dual < exact optimum: %d",
                    dual_checks, dual_violations, dual_vs_exact_checks,
                    dual_vs_exact_violations);
    return dual_checks > 0 && dual_violations == 0 && dual_vs_exact_violations == 0;
  });
  std::printf("%s\n", failures == 0 ? "ALL PASS" : "SOME CRITERIA FAILED");
  return failures == 0 ? 0 : 1;
}
