#include "redynis/cluster.hpp"

#include <chrono>
#include <stdexcept>
#include <thread>

namespace redynis {

std::int64_t WallClock::now_millis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void WallClock::advance(std::int64_t millis) {
  if (millis > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(millis));
  }
}

std::optional<Scenario> parse_scenario(const std::string& name) {
  if (name == "local") return Scenario::Local;
  if (name == "remote") return Scenario::Remote;
  if (name == "optimized") return Scenario::Optimized;
  return std::nullopt;
}

const char* to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::Local: return "local";
    case Scenario::Remote: return "remote";
    case Scenario::Optimized: return "optimized";
  }
  return "unknown";
}

std::optional<std::string> validate_sim_config(const SimConfig& config) {
  if (config.nodeCount < 1) return "nodeCount must be >= 1";
  if (config.remoteLatencyMillis < 0) return "remoteLatencyMillis must be >= 0";
  if (config.streamsPerNode < 1) return "streamsPerNode must be >= 1";
  return std::nullopt;
}

namespace {

std::vector<NodeId> make_node_ids(int count) {
  std::vector<NodeId> ids;
  ids.reserve(count);
  for (int i = 1; i <= count; ++i) {
    ids.push_back("node-" + std::to_string(i));
  }
  return ids;
}

ClusterTopology default_topology(const SimConfig& config) {
  if (auto violation = validate_sim_config(config)) {
    throw std::invalid_argument("invalid sim config: " + *violation);
  }
  auto nodes = make_node_ids(config.nodeCount);
  NodeId master =
      config.masterPropagator.empty() ? nodes.front() : config.masterPropagator;
  return ClusterTopology::uniform(nodes, master, config.remoteLatencyMillis);
}

}  // namespace

Cluster::Cluster(const SimConfig& config, const OwnershipPolicy& policy)
    : Cluster(config, policy, default_topology(config)) {}

Cluster::Cluster(const SimConfig& config, const OwnershipPolicy& policy,
                 ClusterTopology topology)
    : config_(config),
      policy_(policy),
      topology_(std::move(topology)),
      sink_(metadata_),
      peer_client_(*this) {
  if (auto violation = validate_sim_config(config_)) {
    throw std::invalid_argument("invalid sim config: " + *violation);
  }
  if (auto violation = validate_policy(policy_, topology_)) {
    throw std::invalid_argument("invalid ownership policy: " + *violation);
  }
  if (config_.clockMode == ClockMode::Virtual) {
    clock_ = std::make_unique<VirtualClock>();
  } else {
    clock_ = std::make_unique<WallClock>();
  }
  for (const auto& node : topology_.nodes()) {
    backends_[node] = std::make_unique<InMemoryKvBackend>();
  }
  for (const auto& node : topology_.nodes()) {
    services_[node] = std::make_unique<NodeService>(
        node, topology_, *backends_[node], metadata_, peer_client_, sink_);
  }
  daemon_ = std::make_unique<Daemon>(metadata_, *this, topology_, policy_);
  next_pass_at_ = policy_.daemonIntervalMillis;
}

std::vector<NodeId> Cluster::default_origins() const {
  const auto& nodes = topology_.nodes();
  if (nodes.size() == 1) return {nodes.front()};
  return {nodes.begin(), nodes.end() - 1};
}

const NodeId& Cluster::scenario_holder() const {
  return topology_.nodes().back();
}

NodeService& Cluster::service(const NodeId& node) {
  auto it = services_.find(node);
  if (it == services_.end()) {
    throw std::out_of_range("unknown node: " + node);
  }
  return *it->second;
}

KvBackend* Cluster::backend(const NodeId& node) {
  auto it = backends_.find(node);
  return it == backends_.end() ? nullptr : it->second.get();
}

FetchResult Cluster::fetch(const NodeId& handler, const std::string& key,
                           std::int64_t now_millis) {
  return service(handler).fetch(key, now_millis);
}

StoreResult Cluster::store(const NodeId& handler, const std::string& key,
                           const StoredValue& value, std::int64_t now_millis) {
  return service(handler).store(key, value, now_millis);
}

std::int64_t Cluster::simulate_request_latency(const NodeId& from,
                                               const NodeId& to) {
  if (!topology_.contains(from) || !topology_.contains(to)) {
    throw std::out_of_range("unknown node in latency request");
  }
  std::int64_t charge = topology_.latency_millis(from, to);
  clock_->advance(charge);
  return charge;
}

std::uint64_t Cluster::advance_virtual(std::int64_t to_millis) {
  auto* vclock = dynamic_cast<VirtualClock*>(clock_.get());
  if (!vclock) {
    throw std::logic_error("advance_virtual requires the virtual clock");
  }
  std::uint64_t fired = fire_due_passes(to_millis);
  vclock->set(to_millis);
  return fired;
}

std::uint64_t Cluster::fire_due_passes(std::int64_t now_millis) {
  std::uint64_t fired = 0;
  while (daemon_enabled_ && next_pass_at_ <= now_millis) {
    if (auto* vclock = dynamic_cast<VirtualClock*>(clock_.get())) {
      vclock->set(next_pass_at_);
    }
    daemon_->run_once(next_pass_at_);
    next_pass_at_ += policy_.daemonIntervalMillis;
    fired += 1;
  }
  return fired;
}

void Cluster::inject_scenario(Scenario scenario,
                              const std::vector<std::string>& keys,
                              const std::vector<StoredValue>& values,
                              const std::vector<NodeId>& origins) {
  if (keys.size() != values.size()) {
    throw std::invalid_argument("keys and values must have the same length");
  }
  for (const auto& origin : origins) {
    if (!topology_.contains(origin)) {
      throw std::invalid_argument("origin outside topology: " + origin);
    }
  }
  std::int64_t now = clock_->now_millis();

  switch (scenario) {
    case Scenario::Local: {
      // Theoretical ideal: every requesting node already holds every key.
      std::set<NodeId> hosts(origins.begin(), origins.end());
      for (std::size_t i = 0; i < keys.size(); ++i) {
        for (const auto& origin : hosts) {
          backends_.at(origin)->put(keys[i], values[i]);
        }
        KeyMetadata meta;
        meta.hosts = hosts;
        meta.lastAccessedDate = now;
        metadata_.meta_put(keys[i], std::move(meta));
      }
      set_daemon_enabled(false);
      break;
    }
    case Scenario::Remote:
    case Scenario::Optimized: {
      // Pure-penalty placement: one holder that never issues requests.
      const NodeId& holder = scenario_holder();
      for (std::size_t i = 0; i < keys.size(); ++i) {
        backends_.at(holder)->put(keys[i], values[i]);
        KeyMetadata meta;
        meta.hosts = {holder};
        meta.lastAccessedDate = now;
        metadata_.meta_put(keys[i], std::move(meta));
      }
      set_daemon_enabled(scenario == Scenario::Optimized);
      break;
    }
  }
}

void Cluster::reset() {
  for (auto& [node, backend] : backends_) {
    (void)node;
    backend->clear();
  }
  metadata_.clear();
  daemon_->reset_counters();
  daemon_enabled_ = false;
  next_pass_at_ = policy_.daemonIntervalMillis;
  if (auto* vclock = dynamic_cast<VirtualClock*>(clock_.get())) {
    vclock->set(0);
  }
}

std::optional<StoredValue> Cluster::SimPeerClient::peer_get(
    const NodeId& peer, const std::string& key) {
  KvBackend* backend = cluster_.backend(peer);
  if (!backend) return std::nullopt;
  return backend->get(key);
}

bool Cluster::SimPeerClient::peer_put(const NodeId& peer,
                                      const std::string& key,
                                      const StoredValue& value) {
  KvBackend* backend = cluster_.backend(peer);
  if (!backend) return false;
  return backend->put(key, value);
}

std::optional<StoreResult> Cluster::SimPeerClient::relay_store(
    const NodeId& serializer, const NodeId& origin, const std::string& key,
    const StoredValue& value, std::int64_t now_millis) {
  auto it = cluster_.services_.find(serializer);
  if (it == cluster_.services_.end()) return std::nullopt;
  return it->second->serialize_store(key, value, now_millis, origin);
}

std::unique_ptr<Cluster> build_cluster(const SimConfig& config,
                                       const OwnershipPolicy& policy) {
  return std::make_unique<Cluster>(config, policy);
}

}  // namespace redynis
