// Acceptance suite: every criterion pinned in code, one pass/fail line each.
// Exits non-zero if any criterion fails.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "placement_oracle.hpp"
#include "redynis/bench.hpp"
#include "redynis/cluster.hpp"
#include "redynis/placement.hpp"
#include "redynis/workload.hpp"

using namespace redynis;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

double wall_seconds_since(
    const std::chrono::steady_clock::time_point& begin) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       begin)
      .count();
}

// --- criterion 1 -----------------------------------------------------------
// 1,000 randomized instances (n in [1,5], <=20 keys, counts <=50, H <= 1/n):
// placement_pass agrees with the independent brute-force reference on every
// instance, in under 10 seconds.
void ownership_math_oracle() {
  auto begin = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260808);
  for (int trial = 0; trial < 1000; ++trial) {
    auto instance = oracle::random_instance(rng);
    auto actual =
        placement_pass(instance.snapshot, instance.policy, instance.now);
    auto expected = oracle::placement_reference(instance.snapshot,
                                                instance.policy, instance.now);
    if (!(actual == expected)) {
      std::ostringstream message;
      message << "disagreement on trial " << trial
              << ": actual=" << plan_to_json(actual)
              << " expected=" << plan_to_json(expected);
      throw Failure(message.str());
    }
  }
  double elapsed = wall_seconds_since(begin);
  require(elapsed < 10.0,
          "oracle comparison took " + std::to_string(elapsed) + "s (>= 10s)");
}

// --- criterion 2 -----------------------------------------------------------
// 10,000 random accessed, non-expired keys under a valid policy: the planned
// host set is never empty.
void non_starvation_property() {
  std::mt19937_64 rng(777);
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    int n = 1 + static_cast<int>(bounded_rand(rng, 5));
    KeyMetadata meta;
    while (meta.totalAccessCount == 0) {
      meta.hostAccesses.clear();
      for (int i = 1; i <= n; ++i) {
        std::uint64_t count = bounded_rand(rng, 51);
        if (count > 0) meta.hostAccesses["node-" + std::to_string(i)] = count;
        meta.totalAccessCount += count;
      }
    }
    meta.hosts.insert("node-" +
                      std::to_string(1 + bounded_rand(rng, n)));
    meta.lastAccessedDate = 1000;

    double bound = 1.0 / n;
    OwnershipPolicy policy{0.01 + (bound - 0.01) * unit_rand(rng), 1000000,
                           1000};
    require(validate_policy(policy, static_cast<std::size_t>(n)) ==
                std::nullopt,
            "generated policy unexpectedly invalid");

    auto plan = placement_pass({{"k", meta}}, policy, 1500);
    require(plan.expired.empty(), "fresh key unexpectedly expired");
    if (plan.perKey.contains("k")) {
      if (plan.perKey.at("k").finalHosts.empty()) violations += 1;
    } else if (meta.hosts.empty()) {
      violations += 1;
    }
    if (eligible_owners(meta, policy).empty()) violations += 1;
  }
  require(violations == 0,
          std::to_string(violations) + " starvation violations");
}

// --- criterion 3 -----------------------------------------------------------
// The worked metadata listing (17 accesses split 9/3/5, replicas on node-1
// and node-3) with H = 1/3: node-1 is the only eligible owner and a pass
// evicts node-3. Exact match.
void worked_example() {
  KeyMetadata meta;
  meta.totalAccessCount = 17;
  meta.hosts = {"node-1", "node-3"};
  meta.hostAccesses = {{"node-1", 9}, {"node-2", 3}, {"node-3", 5}};
  meta.lastAccessedDate = 1480725771235;

  OwnershipPolicy policy{1.0 / 3.0, 86'400'000, 1000};
  require(eligible_owners(meta, policy) == std::set<NodeId>{"node-1"},
          "eligible owners != {node-1}");

  auto plan = placement_pass({{"obj", meta}}, policy, meta.lastAccessedDate);
  require(plan.perKey.contains("obj"), "pass made no decision for the key");
  const auto& placement = plan.perKey.at("obj");
  require(placement.newHosts.empty(), "unexpected new hosts");
  require(placement.obsoleteHosts == std::set<NodeId>{"node-3"},
          "node-3 was not evicted");
  require(placement.finalHosts == std::set<NodeId>{"node-1"},
          "final hosts != {node-1}");
  require(plan.expired.empty(), "unexpected expiry");
}

// --- criteria 4-6 ----------------------------------------------------------

struct ScenarioRuns {
  BenchReport local;
  BenchReport optimized;
  BenchReport remote;
};

ScenarioRuns run_three(Cluster& cluster, const WorkloadConfig& workload,
                       const ReplayOptions& options, int iterations) {
  ScenarioRuns runs;
  runs.local =
      run_scenario(cluster, Scenario::Local, workload, options, iterations);
  runs.optimized = run_scenario(cluster, Scenario::Optimized, workload,
                                options, iterations);
  runs.remote =
      run_scenario(cluster, Scenario::Remote, workload, options, iterations);
  return runs;
}

// Skewed workloads at read percentages 100/90/75/50, 10,000 requests,
// 3 nodes, 100ms remote latency, 1ms service cost: throughput ordering
// local >= optimized >= remote in every iteration.
void scenario_ordering() {
  SimConfig sim;
  sim.nodeCount = 3;
  sim.remoteLatencyMillis = 100;
  sim.seed = 42;
  OwnershipPolicy policy{0.33, 86'400'000, 1000};
  auto cluster = build_cluster(sim, policy);

  ReplayOptions options;
  options.serviceCostMillis = 1;

  for (int read_percent : {100, 90, 75, 50}) {
    WorkloadConfig workload;
    workload.totalRequests = 10000;
    workload.readPercent = read_percent;
    workload.distribution = Distribution::Skewed;
    workload.keyCount = 1000;
    workload.originNodes = cluster->default_origins();
    workload.seed = 42;

    auto runs = run_three(*cluster, workload, options, 3);
    for (int i = 0; i < 3; ++i) {
      double local = runs.local.iterationThroughputs[i];
      double optimized = runs.optimized.iterationThroughputs[i];
      double remote = runs.remote.iterationThroughputs[i];
      std::ostringstream at;
      at << "read%=" << read_percent << " iteration " << i << ": ";
      require(local >= optimized,
              at.str() + "local " + std::to_string(local) + " < optimized " +
                  std::to_string(optimized));
      require(optimized >= remote,
              at.str() + "optimized " + std::to_string(optimized) +
                  " < remote " + std::to_string(remote));
    }
  }
}

ScenarioRuns tenfold_runs() {
  SimConfig sim;
  sim.nodeCount = 3;
  sim.remoteLatencyMillis = 100;
  sim.seed = 42;
  // H well inside the 1/n bound: balanced dual-origin traffic keeps both
  // origins comfortably above the eligibility threshold.
  OwnershipPolicy policy{0.10, 86'400'000, 1000};
  auto cluster = build_cluster(sim, policy);

  WorkloadConfig workload;
  workload.totalRequests = 100000;
  workload.readPercent = 100;
  workload.distribution = Distribution::Skewed;
  workload.keyCount = 1000;
  workload.originNodes = cluster->default_origins();
  workload.seed = 42;

  ReplayOptions options;
  options.serviceCostMillis = 1;
  return run_three(*cluster, workload, options, 1);
}

// Skewed, 100% reads, 1s simulated daemon interval, a run long enough for
// at least 5 passes: optimized throughput at least 5x remote, within 60s of
// wall-clock time.
void tenfold_ratio() {
  auto begin = std::chrono::steady_clock::now();
  auto runs = tenfold_runs();
  require(runs.optimized.daemonPasses >= 5,
          "only " + std::to_string(runs.optimized.daemonPasses) +
              " daemon passes");
  double ratio =
      runs.optimized.throughputOpsPerSec / runs.remote.throughputOpsPerSec;
  require(ratio >= 5.0, "optimized/remote = " + std::to_string(ratio));
  require(runs.optimized.failures == 0 && runs.remote.failures == 0,
          "failed requests during the runs");
  double elapsed = wall_seconds_since(begin);
  require(elapsed < 60.0,
          "runs took " + std::to_string(elapsed) + "s (>= 60s)");
  std::printf("       optimized/remote throughput ratio: %.1f\n", ratio);
}

// Converged-phase hit rate >= 0.90 and converged throughput at least half of
// the all-local ideal.
void near_local_convergence() {
  auto runs = tenfold_runs();
  require(runs.optimized.convergedLocalHitRate >= 0.90,
          "converged hit rate " +
              std::to_string(runs.optimized.convergedLocalHitRate));
  require(!runs.local.throughputUnbounded, "local run had zero elapsed time");
  double floor = 0.5 * runs.local.throughputOpsPerSec;
  require(runs.optimized.convergedThroughputOpsPerSec >= floor,
          "converged throughput " +
              std::to_string(runs.optimized.convergedThroughputOpsPerSec) +
              " < " + std::to_string(floor));
  std::printf("       converged hit rate %.4f, converged throughput %.0f vs local %.0f\n",
              runs.optimized.convergedLocalHitRate,
              runs.optimized.convergedThroughputOpsPerSec,
              runs.local.throughputOpsPerSec);
}

// --- criterion 7 -----------------------------------------------------------
// 100 concurrent writers across 3 nodes on one multi-owner key, 50
// repetitions: replicas end byte-identical to the last value in the
// serializer's arrival log, every time.
void write_serialization() {
  SimConfig sim;
  sim.nodeCount = 3;
  sim.remoteLatencyMillis = 100;
  OwnershipPolicy policy{0.33, 86'400'000, 1000};
  auto cluster = build_cluster(sim, policy);
  const std::vector<NodeId> nodes = cluster->node_ids();
  const std::string key = "contested";

  for (int repetition = 0; repetition < 50; ++repetition) {
    cluster->reset();
    KeyMetadata meta;
    meta.hosts = {nodes.begin(), nodes.end()};
    meta.lastAccessedDate = 0;
    cluster->metadata().meta_put(key, meta);
    for (const auto& node : nodes) cluster->backend(node)->put(key, "seed");

    NodeService& serializer = cluster->service("node-1");
    serializer.set_record_arrivals(false);
    serializer.set_record_arrivals(true);

    std::atomic<int> store_failures{0};
    std::vector<std::thread> writers;
    writers.reserve(100);
    for (int w = 0; w < 100; ++w) {
      writers.emplace_back([&, w] {
        NodeId handler = nodes[w % nodes.size()];
        std::string value =
            "r" + std::to_string(repetition) + "-w" + std::to_string(w);
        StoreResult result = cluster->store(handler, key, value, w);
        if (!result.success) store_failures.fetch_add(1);
      });
    }
    for (auto& writer : writers) writer.join();
    require(store_failures.load() == 0,
            std::to_string(store_failures.load()) + " stores failed");

    auto log = serializer.arrival_log(key);
    require(log.size() == 100, "arrival log has " +
                                   std::to_string(log.size()) + " entries");
    const std::string& winner = log.back();
    for (const auto& node : nodes) {
      auto value = cluster->backend(node)->get(key);
      require(value.has_value(), "replica missing on " + node);
      require(*value == winner, "divergence on " + node + " (rep " +
                                    std::to_string(repetition) + "): " +
                                    *value + " != " + winner);
    }
  }
}

// --- criterion 8 -----------------------------------------------------------
// Keys past the staleness window vanish from every backend and from the
// metadata at the next pass; recently accessed keys survive intact.
void expiry_purge() {
  SimConfig sim;
  sim.nodeCount = 3;
  OwnershipPolicy policy{0.33, 5000, 1000};
  auto cluster = build_cluster(sim, policy);
  cluster->set_daemon_enabled(true);

  require(cluster->store("node-3", "stale-key", "old", 0).success,
          "seed store failed");
  require(cluster->store("node-3", "fresh-key", "hot", 0).success,
          "seed store failed");

  for (std::int64_t t = 500; t <= 6000; t += 500) {
    cluster->advance_virtual(t);
    auto result = cluster->fetch("node-1", "fresh-key", t);
    require(result.status == FetchStatus::Found,
            "fresh key unreadable at t=" + std::to_string(t));
  }
  cluster->advance_virtual(6500);  // final pass at 6000: stale is 6000ms old

  require(cluster->metadata().meta_get("stale-key") == std::nullopt,
          "stale key still in metadata");
  for (const auto& node : cluster->node_ids()) {
    require(cluster->backend(node)->get("stale-key") == std::nullopt,
            "stale value still on " + node);
  }

  auto fresh = cluster->metadata().meta_get("fresh-key");
  require(fresh.has_value(), "fresh key purged");
  require(!fresh->hosts.empty(), "fresh key lost all hosts");
  for (const auto& host : fresh->hosts) {
    auto value = cluster->backend(host)->get("fresh-key");
    require(value.has_value() && *value == "hot",
            "fresh value missing on " + host);
  }
}

// --- criterion 9 -----------------------------------------------------------
// Two full bench runs with the same seed produce byte-identical JSON
// reports. Reports carry no wall-clock timestamps.
void deterministic_reports() {
  auto run_once = [] {
    SimConfig sim;
    sim.nodeCount = 3;
    sim.seed = 42;
    OwnershipPolicy policy{0.33, 86'400'000, 1000};
    auto cluster = build_cluster(sim, policy);

    WorkloadConfig workload;
    workload.totalRequests = 5000;
    workload.readPercent = 90;
    workload.distribution = Distribution::Skewed;
    workload.keyCount = 500;
    workload.originNodes = cluster->default_origins();
    workload.seed = 42;

    ReplayOptions options;
    std::string combined;
    for (auto scenario :
         {Scenario::Local, Scenario::Optimized, Scenario::Remote}) {
      combined +=
          report_to_json(run_scenario(*cluster, scenario, workload, options, 2));
      combined += "\n";
    }
    return combined;
  };
  std::string first = run_once();
  std::string second = run_once();
  require(!first.empty(), "empty report");
  require(first == second, "reports differ between identical runs");
}

// --- criterion 10 ----------------------------------------------------------
// 8 concurrent streams recording 10,000 events each on one key: the final
// count is exactly 80,000 and equals the sum over accessors.
void metadata_conservation() {
  MetadataStore store;
  store.meta_create("hot", "node-1", 0);
  std::vector<std::thread> streams;
  for (int s = 0; s < 8; ++s) {
    streams.emplace_back([&store, s] {
      NodeId accessor = "node-" + std::to_string(s + 1);
      for (int i = 0; i < 10000; ++i) {
        store.record_access({"hot", accessor, i});
      }
    });
  }
  for (auto& stream : streams) stream.join();

  auto meta = store.meta_get("hot");
  require(meta.has_value(), "key vanished");
  require(meta->totalAccessCount == 80000,
          "totalAccessCount = " + std::to_string(meta->totalAccessCount));
  std::uint64_t sum = 0;
  for (const auto& [node, count] : meta->hostAccesses) {
    (void)node;
    sum += count;
  }
  require(sum == meta->totalAccessCount, "counts do not conserve");
  require(meta->hostAccesses.size() == 8, "missing accessor entries");
  for (const auto& [node, count] : meta->hostAccesses) {
    require(count == 10000, node + " recorded " + std::to_string(count));
  }
  require(store.dropped_events() == 0, "events were dropped");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {"ownership math matches the brute-force oracle (1000 instances)",
       ownership_math_oracle},
      {"non-starvation: planned hosts never empty (10000 cases)",
       non_starvation_property},
      {"worked example: 9/3/5 split, H=1/3 keeps node-1, evicts node-3",
       worked_example},
      {"throughput ordering local >= optimized >= remote at 100/90/75/50",
       scenario_ordering},
      {"optimized beats remote by at least 5x (>=5 daemon passes, <60s)",
       tenfold_ratio},
      {"near-local convergence: hit rate >= 0.90, throughput >= 0.5x local",
       near_local_convergence},
      {"write serialization: 100 writers x 50 reps, zero divergence",
       write_serialization},
      {"expiry purge removes stale keys everywhere, spares fresh ones",
       expiry_purge},
      {"identical seeds produce byte-identical reports",
       deterministic_reports},
      {"metadata conservation: 8x10000 events, exact totals",
       metadata_conservation},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    try {
      criterion.body();
      std::printf("[PASS] %s\n", criterion.name);
    } catch (const std::exception& e) {
      failures += 1;
      std::printf("[FAIL] %s\n       %s\n", criterion.name, e.what());
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
