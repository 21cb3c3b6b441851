#include <chrono>

#include "doctest.h"
#include "redynis/bench.hpp"
#include "redynis/cluster.hpp"
#include "redynis/workload.hpp"

using namespace redynis;

namespace {

OwnershipPolicy default_policy() {
  return OwnershipPolicy{0.33, 86'400'000, 1000};
}

}  // namespace

TEST_CASE("build_cluster wires n healthy nodes and a serializer") {
  SimConfig config;
  config.nodeCount = 3;
  auto cluster = build_cluster(config, default_policy());
  CHECK(cluster->node_ids() ==
        std::vector<NodeId>{"node-1", "node-2", "node-3"});
  CHECK(cluster->topology().master_propagator() == "node-1");
  CHECK(cluster->service("node-1").is_serializer());
  CHECK_FALSE(cluster->service("node-2").is_serializer());
  CHECK(cluster->daemon().passes() == 0);  // constructed, not started
  CHECK(cluster->default_origins() ==
        std::vector<NodeId>{"node-1", "node-2"});
  CHECK(cluster->scenario_holder() == "node-3");
}

TEST_CASE("single-node cluster: everything is local, H up to 1") {
  SimConfig config;
  config.nodeCount = 1;
  auto cluster = build_cluster(config, OwnershipPolicy{1.0, 1000, 1000});
  cluster->store("node-1", "k", "v", 0);
  auto result = cluster->fetch("node-1", "k", 1);
  CHECK_FALSE(result.remote);
  CHECK(result.latencyMillis == 0);
  CHECK(cluster->default_origins() == std::vector<NodeId>{"node-1"});
}

TEST_CASE("identical configs build identical topologies") {
  SimConfig config;
  config.nodeCount = 4;
  config.seed = 9;
  auto first = build_cluster(config, OwnershipPolicy{0.25, 1000, 1000});
  auto second = build_cluster(config, OwnershipPolicy{0.25, 1000, 1000});
  CHECK(first->node_ids() == second->node_ids());
  for (const auto& from : first->node_ids()) {
    for (const auto& to : first->node_ids()) {
      CHECK(first->topology().latency_millis(from, to) ==
            second->topology().latency_millis(from, to));
    }
  }
}

TEST_CASE("invalid configurations refuse to build") {
  SimConfig config;
  config.nodeCount = 0;
  CHECK_THROWS_AS(build_cluster(config, default_policy()),
                  std::invalid_argument);
  config.nodeCount = 3;
  CHECK_THROWS_AS(build_cluster(config, OwnershipPolicy{0.5, 1000, 1000}),
                  std::invalid_argument);
}

TEST_CASE("simulate_request_latency charges the virtual clock") {
  SimConfig config;
  config.nodeCount = 3;
  auto cluster = build_cluster(config, default_policy());
  CHECK(cluster->simulate_request_latency("node-1", "node-1") == 0);
  CHECK(cluster->clock().now_millis() == 0);
  CHECK(cluster->simulate_request_latency("node-1", "node-2") == 100);
  CHECK(cluster->clock().now_millis() == 100);
  CHECK_THROWS_AS(cluster->simulate_request_latency("node-1", "node-9"),
                  std::out_of_range);
}

TEST_CASE("custom asymmetric matrices are honored exactly") {
  std::map<NodeId, std::map<NodeId, std::int64_t>> matrix;
  matrix["node-1"]["node-2"] = 40;
  matrix["node-2"]["node-1"] = 170;
  auto topo =
      ClusterTopology::with_matrix({"node-1", "node-2"}, "node-1", matrix);
  SimConfig config;
  config.nodeCount = 2;
  Cluster cluster(config, OwnershipPolicy{0.5, 1000, 1000}, topo);
  CHECK(cluster.simulate_request_latency("node-1", "node-2") == 40);
  CHECK(cluster.simulate_request_latency("node-2", "node-1") == 170);
}

TEST_CASE("wall clock mode really sleeps") {
  SimConfig config;
  config.nodeCount = 2;
  config.remoteLatencyMillis = 30;
  config.clockMode = ClockMode::Wall;
  auto cluster = build_cluster(config, OwnershipPolicy{0.5, 1000, 1000});
  auto begin = std::chrono::steady_clock::now();
  CHECK(cluster->simulate_request_latency("node-1", "node-2") == 30);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - begin)
                     .count();
  CHECK(elapsed >= 25);
}

TEST_CASE("local scenario: every fetch is local from every origin") {
  SimConfig config;
  config.nodeCount = 3;
  auto cluster = build_cluster(config, default_policy());
  auto keys = key_names(10);
  std::vector<StoredValue> values(keys.begin(), keys.end());
  cluster->inject_scenario(Scenario::Local, keys, values,
                           cluster->default_origins());
  CHECK_FALSE(cluster->daemon_enabled());
  for (const auto& origin : cluster->default_origins()) {
    for (const auto& key : keys) {
      auto result = cluster->fetch(origin, key, 0);
      CHECK(result.status == FetchStatus::Found);
      CHECK_FALSE(result.remote);
      CHECK(result.latencyMillis == 0);
    }
  }
}

TEST_CASE("remote scenario: every fetch pays the full hop") {
  SimConfig config;
  config.nodeCount = 3;
  auto cluster = build_cluster(config, default_policy());
  auto keys = key_names(10);
  std::vector<StoredValue> values(keys.begin(), keys.end());
  cluster->inject_scenario(Scenario::Remote, keys, values,
                           cluster->default_origins());
  CHECK_FALSE(cluster->daemon_enabled());
  for (const auto& origin : cluster->default_origins()) {
    for (const auto& key : keys) {
      auto result = cluster->fetch(origin, key, 0);
      CHECK(result.status == FetchStatus::Found);
      CHECK(result.remote);
      CHECK(result.latencyMillis == 100);
      CHECK(result.servedBy == "node-3");
    }
  }
}

TEST_CASE("optimized scenario: remote first, local after the daemon runs") {
  SimConfig config;
  config.nodeCount = 3;
  auto cluster = build_cluster(config, default_policy());
  auto keys = key_names(5);
  std::vector<StoredValue> values(keys.begin(), keys.end());
  cluster->inject_scenario(Scenario::Optimized, keys, values,
                           cluster->default_origins());
  CHECK(cluster->daemon_enabled());

  for (const auto& key : keys) {
    CHECK(cluster->fetch("node-1", key, 10).remote);
  }
  cluster->advance_virtual(1000);  // one pass
  for (const auto& key : keys) {
    auto result = cluster->fetch("node-1", key, 1100);
    CHECK_FALSE(result.remote);
    CHECK(result.status == FetchStatus::Found);
  }
}

TEST_CASE("after daemon quiescence, store contents mirror metadata hosts") {
  SimConfig config;
  config.nodeCount = 3;
  auto cluster = build_cluster(config, default_policy());
  auto keys = key_names(20);
  std::vector<StoredValue> values(keys.begin(), keys.end());
  cluster->inject_scenario(Scenario::Optimized, keys, values,
                           cluster->default_origins());

  std::mt19937_64 rng(3);
  std::int64_t now = 0;
  for (int i = 0; i < 300; ++i) {
    now += 10;
    NodeId origin = (i % 2 == 0) ? "node-1" : "node-2";
    cluster->fetch(origin, keys[bounded_rand(rng, keys.size())], now);
    if (i % 50 == 0) cluster->advance_virtual(now);
  }
  cluster->advance_virtual(now + 2000);

  for (const auto& node : cluster->node_ids()) {
    std::set<std::string> store_keys;
    for (const auto& key : cluster->backend(node)->keys()) {
      store_keys.insert(key);
    }
    std::set<std::string> meta_keys;
    for (const auto& [key, meta] : cluster->metadata().meta_scan()) {
      if (meta.hosts.contains(node)) meta_keys.insert(key);
    }
    CHECK(store_keys == meta_keys);
  }
}

TEST_CASE("virtual replay is deterministic request by request") {
  WorkloadConfig workload;
  workload.totalRequests = 2000;
  workload.readPercent = 90;
  workload.distribution = Distribution::Skewed;
  workload.keyCount = 200;
  workload.originNodes = {"node-1", "node-2"};
  workload.seed = 21;

  auto run = [&] {
    SimConfig config;
    config.nodeCount = 3;
    auto cluster = build_cluster(config, default_policy());
    auto keys = key_names(workload.keyCount);
    std::vector<StoredValue> values(keys.begin(), keys.end());
    cluster->inject_scenario(Scenario::Optimized, keys, values,
                             workload.originNodes);
    return replay(*cluster, generate(workload), ReplayOptions{});
  };

  auto first = run();
  auto second = run();
  REQUIRE(first.records.size() == second.records.size());
  CHECK(first.elapsedMillis == second.elapsedMillis);
  CHECK(first.daemonPasses == second.daemonPasses);
  for (std::size_t i = 0; i < first.records.size(); ++i) {
    CHECK(first.records[i].startMillis == second.records[i].startMillis);
    CHECK(first.records[i].transportLatencyMillis ==
          second.records[i].transportLatencyMillis);
    CHECK(first.records[i].local == second.records[i].local);
  }
}

TEST_CASE("sequential remote reads cost exactly R x latency") {
  SimConfig config;
  config.nodeCount = 3;
  auto cluster = build_cluster(config, default_policy());

  WorkloadConfig workload;
  workload.totalRequests = 50;
  workload.readPercent = 100;
  workload.keyCount = 10;
  workload.originNodes = {"node-1"};
  workload.seed = 2;

  auto keys = key_names(workload.keyCount);
  std::vector<StoredValue> values(keys.begin(), keys.end());
  cluster->inject_scenario(Scenario::Remote, keys, values,
                           workload.originNodes);
  ReplayOptions options;
  options.serviceCostMillis = 0;
  auto trace = replay(*cluster, generate(workload), options);
  CHECK(trace.elapsedMillis == 50 * 100);
  CHECK(trace.failures == 0);
}

TEST_CASE("cluster reset clears state for the next iteration") {
  SimConfig config;
  config.nodeCount = 3;
  auto cluster = build_cluster(config, default_policy());
  cluster->store("node-1", "k", "v", 0);
  cluster->set_daemon_enabled(true);
  cluster->advance_virtual(5000);
  cluster->reset();
  CHECK(cluster->fetch("node-1", "k", 0).status == FetchStatus::Absent);
  CHECK(cluster->daemon().passes() == 0);
  CHECK(cluster->clock().now_millis() == 0);
  CHECK_FALSE(cluster->daemon_enabled());
}
