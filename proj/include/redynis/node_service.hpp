#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "redynis/core_model.hpp"
#include "redynis/kv_backend.hpp"
#include "redynis/metadata_store.hpp"

namespace redynis {

enum class FetchStatus { Found, Absent, Diverged };

struct FetchResult {
  FetchStatus status = FetchStatus::Absent;
  std::optional<StoredValue> value;
  NodeId servedBy;
  bool remote = false;
  std::int64_t latencyMillis = 0;  // topology latency of the hops taken
};

enum class StorePath { Created, LocalOnly, SerializerDirect, SerializerRelayed };

const char* to_string(StorePath path);

struct StoreResult {
  bool success = false;
  StorePath path = StorePath::Created;
  std::int64_t latencyMillis = 0;
};

// Access-metric recording is fire-and-forget relative to the response; the
// sink decides how. Tests install a deferring sink to assert the response
// path never waits on the metadata layer.
class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void record(const AccessEvent& event) = 0;
};

class DirectMetricsSink final : public MetricsSink {
 public:
  explicit DirectMetricsSink(MetadataApi& meta) : meta_(meta) {}
  void record(const AccessEvent& event) override { meta_.record_access(event); }

 private:
  MetadataApi& meta_;
};

// How a node reaches its peers' data layers. The simulated cluster wires this
// to direct backend access; HTTP deployments go over the wire.
class PeerClient {
 public:
  virtual ~PeerClient() = default;
  virtual std::optional<StoredValue> peer_get(const NodeId& peer,
                                              const std::string& key) = 0;
  virtual bool peer_put(const NodeId& peer, const std::string& key,
                        const StoredValue& value) = 0;
  // nullopt signals transport failure.
  virtual std::optional<StoreResult> relay_store(const NodeId& serializer,
                                                 const NodeId& origin,
                                                 const std::string& key,
                                                 const StoredValue& value,
                                                 std::int64_t now_millis) = 0;
};

// Per-node request handling: fetch with locality routing and metric
// collection, store with write serialization through the master propagator.
class NodeService {
 public:
  NodeService(NodeId self, ClusterTopology topology, KvBackend& local,
              MetadataApi& meta, PeerClient& peers, MetricsSink& metrics);

  const NodeId& id() const { return self_; }
  bool is_serializer() const {
    return self_ == topology_.master_propagator();
  }

  FetchResult fetch(const std::string& key, std::int64_t now_millis);
  StoreResult store(const std::string& key, const StoredValue& value,
                    std::int64_t now_millis);

  // Serializer-side entry point; relayed stores land here. Re-reads metadata
  // under a per-key lock and fans the value out to every owner host.
  StoreResult serialize_store(const std::string& key, const StoredValue& value,
                              std::int64_t now_millis, const NodeId& origin);

  // Remote owner choice: minimum latency from this node, ties broken by
  // lexicographic node id.
  NodeId choose_owner(const std::set<NodeId>& hosts) const;

  // Test hook: when enabled, the serializer logs values in arrival order.
  void set_record_arrivals(bool enabled);
  std::vector<StoredValue> arrival_log(const std::string& key);

 private:
  StoreResult store_with_meta(const std::string& key, const StoredValue& value,
                              std::int64_t now_millis, const KeyMetadata& meta);
  std::mutex& key_lock(const std::string& key);

  NodeId self_;
  ClusterTopology topology_;
  KvBackend& local_;
  MetadataApi& meta_;
  PeerClient& peers_;
  MetricsSink& metrics_;

  std::mutex locks_mutex_;
  std::unordered_map<std::string, std::unique_ptr<std::mutex>> key_locks_;

  bool record_arrivals_ = false;
  std::mutex arrivals_mutex_;
  std::unordered_map<std::string, std::vector<StoredValue>> arrivals_;
};

}  // namespace redynis
