#pragma once

#include <atomic>
#include <cstdint>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "redynis/core_model.hpp"
#include "redynis/kv_backend.hpp"
#include "redynis/metadata_store.hpp"

namespace redynis {

struct KeyPlacement {
  std::set<NodeId> newHosts;       // owner hosts gaining a replica
  std::set<NodeId> obsoleteHosts;  // current hosts losing theirs
  std::set<NodeId> finalHosts;

  bool operator==(const KeyPlacement&) const = default;
};

struct PlacementPlan {
  std::map<std::string, KeyPlacement> perKey;  // only keys with changes
  std::set<std::string> expired;               // purge everywhere
  std::int64_t computedAt = 0;

  bool empty() const { return perKey.empty() && expired.empty(); }
  bool operator==(const PlacementPlan& other) const {
    return perKey == other.perKey && expired == other.expired;
  }
};

// Pure planning step over a metadata snapshot. Precondition: the policy
// validates against the topology. Keys whose last access is older than the
// expiry window are purged regardless of counts; keys that were created but
// never fetched (totalAccessCount == 0) are left alone until first access or
// expiry.
PlacementPlan placement_pass(
    const std::vector<std::pair<std::string, KeyMetadata>>& snapshot,
    const OwnershipPolicy& policy, std::int64_t now_millis);

// How the daemon reaches each node's data layer.
class DataLayer {
 public:
  virtual ~DataLayer() = default;
  virtual KvBackend* backend(const NodeId& node) = 0;
};

struct ApplyReport {
  std::uint64_t replications = 0;  // values copied to new hosts
  std::uint64_t evictions = 0;     // obsolete-host deletes
  std::uint64_t expirations = 0;   // keys purged for staleness
  std::uint64_t failures = 0;      // keys skipped, retried next pass

  bool operator==(const ApplyReport&) const = default;
};

// Enforces a plan: per key, copy the value to every new host, then delete
// from obsolete hosts, then swap the metadata host set. A key that fails any
// copy is skipped whole, so metadata never points at a host that missed its
// replica. Replication reads from the lowest-latency current host relative
// to each destination.
ApplyReport apply_plan(const PlacementPlan& plan, DataLayer& data,
                       MetadataApi& meta, const ClusterTopology& topology);

// One daemon instance cluster-wide; one pass at a time.
class Daemon {
 public:
  Daemon(MetadataApi& meta, DataLayer& data, ClusterTopology topology,
         OwnershipPolicy policy);

  // scan -> plan -> apply
  std::pair<PlacementPlan, ApplyReport> run_once(std::int64_t now_millis);

  const OwnershipPolicy& policy() const { return policy_; }
  std::uint64_t passes() const { return passes_.load(); }
  void reset_counters() { passes_.store(0); }

 private:
  MetadataApi& meta_;
  DataLayer& data_;
  ClusterTopology topology_;
  OwnershipPolicy policy_;
  std::mutex pass_mutex_;  // passes never overlap
  std::atomic<std::uint64_t> passes_{0};
};

// Wall-clock runner: fires a pass every daemonIntervalMillis until stopped.
// A failed pass is logged and the runner waits for the next interval.
class DaemonRunner {
 public:
  DaemonRunner(Daemon& daemon, std::int64_t interval_millis);
  ~DaemonRunner();

  void start();
  void stop();
  bool running() const { return running_.load(); }

 private:
  Daemon& daemon_;
  std::int64_t interval_millis_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stop_requested_{false};
  std::thread thread_;
};

// Offline formats: metadata snapshots as JSON lines
// {"key": ..., "metadata": {...}}, plans as a single JSON document.
std::string plan_to_json(const PlacementPlan& plan);
std::string snapshot_entry_to_json(const std::string& key,
                                   const KeyMetadata& meta);
// Throws std::invalid_argument naming the 1-based line number on bad input.
std::vector<std::pair<std::string, KeyMetadata>> snapshot_from_jsonl(
    std::istream& in);

}  // namespace redynis
