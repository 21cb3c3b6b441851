#include "redynis/metadata_store.hpp"

#include <algorithm>

namespace redynis {

std::optional<KeyMetadata> MetadataStore::meta_get(const std::string& key) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

MetaCreateResult MetadataStore::meta_create(const std::string& key,
                                            const NodeId& initial_host,
                                            std::int64_t at_millis) {
  std::lock_guard lock(mutex_);
  KeyMetadata meta;
  meta.hosts.insert(initial_host);
  meta.lastAccessedDate = at_millis;
  auto [it, inserted] = entries_.emplace(key, std::move(meta));
  (void)it;
  return inserted ? MetaCreateResult::Ok : MetaCreateResult::AlreadyExists;
}

void MetadataStore::record_access(const AccessEvent& event) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(event.key);
  if (it == entries_.end()) {
    dropped_events_.fetch_add(1);
    return;
  }
  KeyMetadata& meta = it->second;
  meta.hostAccesses[event.accessor] += 1;
  meta.totalAccessCount += 1;
  meta.lastAccessedDate = std::max(meta.lastAccessedDate, event.atMillis);
}

bool MetadataStore::meta_set_hosts(const std::string& key,
                                   const std::set<NodeId>& new_hosts) {
  if (new_hosts.empty()) return false;
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return false;
  it->second.hosts = new_hosts;
  return true;
}

void MetadataStore::meta_delete(const std::string& key) {
  std::lock_guard lock(mutex_);
  entries_.erase(key);
}

std::vector<std::pair<std::string, KeyMetadata>> MetadataStore::meta_scan() {
  std::lock_guard lock(mutex_);
  std::vector<std::pair<std::string, KeyMetadata>> snapshot(entries_.begin(),
                                                            entries_.end());
  // Deterministic scan order regardless of hash-map layout.
  std::sort(snapshot.begin(), snapshot.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return snapshot;
}

void MetadataStore::meta_put(const std::string& key, KeyMetadata meta) {
  std::lock_guard lock(mutex_);
  entries_[key] = std::move(meta);
}

void MetadataStore::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
  dropped_events_.store(0);
}

}  // namespace redynis
