#include "redynis/kv_backend.hpp"

#include <mutex>

namespace redynis {

std::optional<StoredValue> InMemoryKvBackend::get(const std::string& key) {
  std::shared_lock lock(mutex_);
  auto it = data_.find(key);
  if (it == data_.end()) return std::nullopt;
  return it->second;
}

bool InMemoryKvBackend::put(const std::string& key, StoredValue value) {
  if (max_value_bytes_ != 0 && value.size() > max_value_bytes_) {
    return false;
  }
  std::unique_lock lock(mutex_);
  data_[key] = std::move(value);
  return true;
}

bool InMemoryKvBackend::del(const std::string& key) {
  std::unique_lock lock(mutex_);
  return data_.erase(key) > 0;
}

std::vector<std::string> InMemoryKvBackend::keys() {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  out.reserve(data_.size());
  for (const auto& [key, value] : data_) {
    (void)value;
    out.push_back(key);
  }
  return out;
}

std::size_t InMemoryKvBackend::size() {
  std::shared_lock lock(mutex_);
  return data_.size();
}

void InMemoryKvBackend::clear() {
  std::unique_lock lock(mutex_);
  data_.clear();
}

}  // namespace redynis
