#pragma once

#include <cstddef>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace redynis {

// Values are opaque byte sequences; std::string doubles as the byte carrier.
using StoredValue = std::string;

// Per-node data layer. Kept behind an interface so a real external store
// client can be swapped in; the bundled implementation is an in-memory map.
class KvBackend {
 public:
  virtual ~KvBackend() = default;

  virtual std::optional<StoredValue> get(const std::string& key) = 0;

  // Returns false when the backend rejects the value (configured capacity
  // exceeded); the value is not stored in that case.
  virtual bool put(const std::string& key, StoredValue value) = 0;

  // Returns whether the key was present.
  virtual bool del(const std::string& key) = 0;

  virtual std::vector<std::string> keys() = 0;
  virtual std::size_t size() = 0;
};

class InMemoryKvBackend final : public KvBackend {
 public:
  // max_value_bytes == 0 means unbounded.
  explicit InMemoryKvBackend(std::size_t max_value_bytes = 0)
      : max_value_bytes_(max_value_bytes) {}

  std::optional<StoredValue> get(const std::string& key) override;
  bool put(const std::string& key, StoredValue value) override;
  bool del(const std::string& key) override;
  std::vector<std::string> keys() override;
  std::size_t size() override;
  void clear();

 private:
  std::size_t max_value_bytes_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, StoredValue> data_;
};

}  // namespace redynis
