#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "redynis/core_model.hpp"

namespace redynis {

// One recorded fetch, fed to the metadata layer off the response path.
struct AccessEvent {
  std::string key;
  NodeId accessor;
  std::int64_t atMillis = 0;
};

enum class MetaCreateResult { Ok, AlreadyExists, TransportError };

// Interface over the (logically centralized) metadata layer. The in-memory
// MetadataStore below is the authoritative implementation; HTTP deployments
// put a remote client behind the same surface.
class MetadataApi {
 public:
  virtual ~MetadataApi() = default;

  virtual std::optional<KeyMetadata> meta_get(const std::string& key) = 0;

  // First-writer-wins; the loser receives AlreadyExists and must re-read.
  virtual MetaCreateResult meta_create(const std::string& key,
                                       const NodeId& initial_host,
                                       std::int64_t at_millis) = 0;

  // Atomic per-key increment. Events for unknown keys are dropped (the key
  // may have been expired concurrently) and counted for diagnostics.
  virtual void record_access(const AccessEvent& event) = 0;

  // Replaces the host set atomically; access counts untouched. Returns false
  // when new_hosts is empty or the key does not exist.
  virtual bool meta_set_hosts(const std::string& key,
                              const std::set<NodeId>& new_hosts) = 0;

  // Idempotent.
  virtual void meta_delete(const std::string& key) = 0;

  // Point-in-time snapshot; no entry is ever torn mid-update.
  virtual std::vector<std::pair<std::string, KeyMetadata>> meta_scan() = 0;
};

class MetadataStore final : public MetadataApi {
 public:
  std::optional<KeyMetadata> meta_get(const std::string& key) override;
  MetaCreateResult meta_create(const std::string& key,
                               const NodeId& initial_host,
                               std::int64_t at_millis) override;
  void record_access(const AccessEvent& event) override;
  bool meta_set_hosts(const std::string& key,
                      const std::set<NodeId>& new_hosts) override;
  void meta_delete(const std::string& key) override;
  std::vector<std::pair<std::string, KeyMetadata>> meta_scan() override;

  // Test-harness seeding: installs metadata verbatim.
  void meta_put(const std::string& key, KeyMetadata meta);

  std::uint64_t dropped_events() const { return dropped_events_.load(); }
  void clear();

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, KeyMetadata> entries_;
  std::atomic<std::uint64_t> dropped_events_{0};
};

}  // namespace redynis
