#include "redynis/node_service.hpp"

#include <algorithm>

namespace redynis {

const char* to_string(StorePath path) {
  switch (path) {
    case StorePath::Created: return "created";
    case StorePath::LocalOnly: return "local-only";
    case StorePath::SerializerDirect: return "serializer-direct";
    case StorePath::SerializerRelayed: return "serializer-relayed";
  }
  return "unknown";
}

NodeService::NodeService(NodeId self, ClusterTopology topology,
                         KvBackend& local, MetadataApi& meta,
                         PeerClient& peers, MetricsSink& metrics)
    : self_(std::move(self)),
      topology_(std::move(topology)),
      local_(local),
      meta_(meta),
      peers_(peers),
      metrics_(metrics) {}

NodeId NodeService::choose_owner(const std::set<NodeId>& hosts) const {
  NodeId best;
  std::int64_t best_latency = 0;
  for (const auto& host : hosts) {
    std::int64_t latency = topology_.latency_millis(self_, host);
    if (best.empty() || latency < best_latency) {
      best = host;
      best_latency = latency;
    }
    // std::set iterates in lexicographic order, so the first host at the
    // minimum latency wins the tie.
  }
  return best;
}

FetchResult NodeService::fetch(const std::string& key,
                               std::int64_t now_millis) {
  auto meta = meta_.meta_get(key);
  FetchResult result;
  result.servedBy = self_;
  if (!meta) {
    result.status = FetchStatus::Absent;
    return result;
  }

  std::optional<StoredValue> value;
  if (meta->hosts.contains(self_)) {
    value = local_.get(key);
  } else if (!meta->hosts.empty()) {
    // Metadata is the source of truth: a stale local copy mid-eviction is
    // never served.
    NodeId owner = choose_owner(meta->hosts);
    result.servedBy = owner;
    result.remote = true;
    result.latencyMillis = topology_.latency_millis(self_, owner);
    value = peers_.peer_get(owner, key);
  }

  if (value) {
    result.status = FetchStatus::Found;
    result.value = std::move(value);
    metrics_.record(AccessEvent{key, self_, now_millis});
  } else {
    result.status = FetchStatus::Diverged;
  }
  return result;
}

StoreResult NodeService::store(const std::string& key,
                               const StoredValue& value,
                               std::int64_t now_millis) {
  for (int attempt = 0; attempt < 3; ++attempt) {
    auto meta = meta_.meta_get(key);
    if (meta) {
      return store_with_meta(key, value, now_millis, *meta);
    }
    if (!local_.put(key, value)) {
      return StoreResult{false, StorePath::Created, 0};
    }
    MetaCreateResult created = meta_.meta_create(key, self_, now_millis);
    if (created == MetaCreateResult::Ok) {
      return StoreResult{true, StorePath::Created, 0};
    }
    if (created == MetaCreateResult::TransportError) {
      local_.del(key);  // no metadata, no value
      return StoreResult{false, StorePath::Created, 0};
    }
    // Lost the creation race. Re-read and run the owner branches; if this
    // node did not end up an owner, drop the stray local copy.
    auto current = meta_.meta_get(key);
    if (current) {
      StoreResult result = store_with_meta(key, value, now_millis, *current);
      auto after = meta_.meta_get(key);
      if (after && !after->hosts.contains(self_)) {
        local_.del(key);
      }
      return result;
    }
    // Created and deleted in between; start over.
    local_.del(key);
  }
  return StoreResult{false, StorePath::Created, 0};
}

StoreResult NodeService::store_with_meta(const std::string& key,
                                         const StoredValue& value,
                                         std::int64_t now_millis,
                                         const KeyMetadata& meta) {
  if (meta.hosts.contains(self_) && meta.hosts.size() == 1) {
    bool ok = local_.put(key, value);
    return StoreResult{ok, StorePath::LocalOnly, 0};
  }
  if (is_serializer()) {
    return serialize_store(key, value, now_millis, self_);
  }
  const NodeId& serializer = topology_.master_propagator();
  std::int64_t relay_hop = topology_.latency_millis(self_, serializer);
  auto relayed = peers_.relay_store(serializer, self_, key, value, now_millis);
  if (!relayed) {
    return StoreResult{false, StorePath::SerializerRelayed, relay_hop};
  }
  return StoreResult{relayed->success, StorePath::SerializerRelayed,
                     relay_hop + relayed->latencyMillis};
}

StoreResult NodeService::serialize_store(const std::string& key,
                                         const StoredValue& value,
                                         std::int64_t now_millis,
                                         const NodeId& origin) {
  (void)origin;  // the serializer re-reads metadata, never the relayer's view
  std::lock_guard guard(key_lock(key));

  auto meta = meta_.meta_get(key);
  if (!meta) {
    // Key vanished between the relay decision and its arrival: store fresh
    // here, same as the null-metadata branch.
    if (!local_.put(key, value)) {
      return StoreResult{false, StorePath::Created, 0};
    }
    meta_.meta_create(key, self_, now_millis);
    if (record_arrivals_) {
      std::lock_guard log_guard(arrivals_mutex_);
      arrivals_[key].push_back(value);
    }
    return StoreResult{true, StorePath::Created, 0};
  }

  if (record_arrivals_) {
    std::lock_guard log_guard(arrivals_mutex_);
    arrivals_[key].push_back(value);
  }

  bool ok = true;
  std::int64_t charge = 0;  // replica puts fan out in parallel
  for (const auto& host : meta->hosts) {
    bool put_ok = (host == self_) ? local_.put(key, value)
                                  : peers_.peer_put(host, key, value);
    ok = ok && put_ok;
    charge = std::max(charge, topology_.latency_millis(self_, host));
  }
  return StoreResult{ok, StorePath::SerializerDirect, charge};
}

std::mutex& NodeService::key_lock(const std::string& key) {
  std::lock_guard guard(locks_mutex_);
  auto& slot = key_locks_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void NodeService::set_record_arrivals(bool enabled) {
  std::lock_guard guard(arrivals_mutex_);
  record_arrivals_ = enabled;
  if (!enabled) arrivals_.clear();
}

std::vector<StoredValue> NodeService::arrival_log(const std::string& key) {
  std::lock_guard guard(arrivals_mutex_);
  auto it = arrivals_.find(key);
  if (it == arrivals_.end()) return {};
  return it->second;
}

}  // namespace redynis
