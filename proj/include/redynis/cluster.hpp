#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "redynis/core_model.hpp"
#include "redynis/kv_backend.hpp"
#include "redynis/metadata_store.hpp"
#include "redynis/node_service.hpp"
#include "redynis/placement.hpp"

namespace redynis {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_millis() = 0;
  virtual void advance(std::int64_t millis) = 0;
};

class VirtualClock final : public Clock {
 public:
  std::int64_t now_millis() override { return now_.load(); }
  void advance(std::int64_t millis) override { now_.fetch_add(millis); }
  void set(std::int64_t millis) { now_.store(millis); }

 private:
  std::atomic<std::int64_t> now_{0};
};

// Sleeps real time when charged. Only suitable for smoke tests.
class WallClock final : public Clock {
 public:
  std::int64_t now_millis() override;
  void advance(std::int64_t millis) override;
};

enum class ClockMode { Virtual, Wall };
enum class Scenario { Local, Remote, Optimized };

std::optional<Scenario> parse_scenario(const std::string& name);
const char* to_string(Scenario scenario);

struct SimConfig {
  int nodeCount = 3;
  std::int64_t remoteLatencyMillis = 100;
  NodeId masterPropagator;  // defaults to the first node
  std::uint64_t seed = 0;
  ClockMode clockMode = ClockMode::Virtual;
  int streamsPerNode = 1;  // concurrent client streams per origin node
};

std::optional<std::string> validate_sim_config(const SimConfig& config);

// In-process cluster: n nodes (service + backend each), one shared metadata
// store, a latency-charging transport and the placement daemon, wired for
// deterministic virtual-clock runs.
class Cluster final : public DataLayer {
 public:
  Cluster(const SimConfig& config, const OwnershipPolicy& policy);
  Cluster(const SimConfig& config, const OwnershipPolicy& policy,
          ClusterTopology topology);

  const SimConfig& config() const { return config_; }
  const ClusterTopology& topology() const { return topology_; }
  const OwnershipPolicy& policy() const { return policy_; }
  const std::vector<NodeId>& node_ids() const { return topology_.nodes(); }

  // Requesting nodes and the remote-scenario holder. The holder is the last
  // node and issues no requests of its own; a single-node cluster degenerates
  // to the one node playing both roles.
  std::vector<NodeId> default_origins() const;
  const NodeId& scenario_holder() const;

  NodeService& service(const NodeId& node);
  KvBackend* backend(const NodeId& node) override;
  MetadataStore& metadata() { return metadata_; }
  Daemon& daemon() { return *daemon_; }
  Clock& clock() { return *clock_; }

  FetchResult fetch(const NodeId& handler, const std::string& key,
                    std::int64_t now_millis);
  StoreResult store(const NodeId& handler, const std::string& key,
                    const StoredValue& value, std::int64_t now_millis);

  // Charges the one-way latency to the cluster clock and returns it.
  std::int64_t simulate_request_latency(const NodeId& from, const NodeId& to);

  void set_daemon_enabled(bool enabled) { daemon_enabled_ = enabled; }
  bool daemon_enabled() const { return daemon_enabled_; }

  // Fires every daemon pass due in (clock, to_millis] under the virtual
  // clock; returns how many ran.
  std::uint64_t advance_virtual(std::int64_t to_millis);
  std::int64_t next_pass_at() const { return next_pass_at_; }
  // Runs the passes due through `now_millis` without moving the clock past
  // it; the discrete-event replay loop drives this.
  std::uint64_t fire_due_passes(std::int64_t now_millis);

  void inject_scenario(Scenario scenario,
                       const std::vector<std::string>& keys,
                       const std::vector<StoredValue>& values,
                       const std::vector<NodeId>& origins);

  // Clears stores, metadata and clock; daemon disabled until the next
  // scenario injection.
  void reset();

 private:
  class SimPeerClient final : public PeerClient {
   public:
    explicit SimPeerClient(Cluster& cluster) : cluster_(cluster) {}
    std::optional<StoredValue> peer_get(const NodeId& peer,
                                        const std::string& key) override;
    bool peer_put(const NodeId& peer, const std::string& key,
                  const StoredValue& value) override;
    std::optional<StoreResult> relay_store(const NodeId& serializer,
                                           const NodeId& origin,
                                           const std::string& key,
                                           const StoredValue& value,
                                           std::int64_t now_millis) override;

   private:
    Cluster& cluster_;
  };

  SimConfig config_;
  OwnershipPolicy policy_;
  ClusterTopology topology_;
  std::unique_ptr<Clock> clock_;
  MetadataStore metadata_;
  DirectMetricsSink sink_;
  SimPeerClient peer_client_;
  std::map<NodeId, std::unique_ptr<InMemoryKvBackend>> backends_;
  std::map<NodeId, std::unique_ptr<NodeService>> services_;
  std::unique_ptr<Daemon> daemon_;
  bool daemon_enabled_ = false;
  std::int64_t next_pass_at_ = 0;
};

// n nodes running, shared metadata store, daemon constructed but not started.
std::unique_ptr<Cluster> build_cluster(const SimConfig& config,
                                       const OwnershipPolicy& policy);

}  // namespace redynis
