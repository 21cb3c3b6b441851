#include "redynis/placement.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace redynis {

PlacementPlan placement_pass(
    const std::vector<std::pair<std::string, KeyMetadata>>& snapshot,
    const OwnershipPolicy& policy, std::int64_t now_millis) {
  PlacementPlan plan;
  plan.computedAt = now_millis;

  for (const auto& [key, meta] : snapshot) {
    if (now_millis - meta.lastAccessedDate > policy.expiryMillis) {
      plan.expired.insert(key);
      continue;
    }
    if (meta.totalAccessCount == 0) {
      // Created but never fetched: exempt until first access or expiry.
      continue;
    }

    std::set<NodeId> owner_hosts = eligible_owners(meta, policy);
    std::set<NodeId> delete_hosts;
    for (const auto& [node, count] : meta.hostAccesses) {
      (void)count;
      if (ownership_fraction(meta, node) - policy.coefficient < 0.0) {
        delete_hosts.insert(node);
      }
    }

    KeyPlacement placement;
    for (const auto& host : owner_hosts) {
      if (!meta.hosts.contains(host)) placement.newHosts.insert(host);
    }
    for (const auto& host : meta.hosts) {
      if (delete_hosts.contains(host)) placement.obsoleteHosts.insert(host);
    }
    if (!owner_hosts.empty()) {
      // Current hosts with no recorded accesses sit below any positive H.
      for (const auto& host : meta.hosts) {
        if (!owner_hosts.contains(host) && !meta.hostAccesses.contains(host)) {
          placement.obsoleteHosts.insert(host);
        }
      }
    }

    if (placement.newHosts.empty() && placement.obsoleteHosts.empty()) {
      continue;
    }
    placement.finalHosts = meta.hosts;
    for (const auto& host : placement.newHosts) {
      placement.finalHosts.insert(host);
    }
    for (const auto& host : placement.obsoleteHosts) {
      placement.finalHosts.erase(host);
    }
    plan.perKey.emplace(key, std::move(placement));
  }
  return plan;
}

namespace {

// Lowest-latency current host that actually has the value.
std::optional<StoredValue> read_replica(const std::set<NodeId>& sources,
                                        const NodeId& destination,
                                        const std::string& key,
                                        DataLayer& data,
                                        const ClusterTopology& topology) {
  std::vector<NodeId> ordered(sources.begin(), sources.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const NodeId& a, const NodeId& b) {
                     return topology.latency_millis(a, destination) <
                            topology.latency_millis(b, destination);
                   });
  for (const auto& source : ordered) {
    KvBackend* backend = data.backend(source);
    if (!backend) continue;
    if (auto value = backend->get(key)) return value;
  }
  return std::nullopt;
}

}  // namespace

ApplyReport apply_plan(const PlacementPlan& plan, DataLayer& data,
                       MetadataApi& meta, const ClusterTopology& topology) {
  ApplyReport report;

  for (const auto& [key, placement] : plan.perKey) {
    auto current = meta.meta_get(key);
    if (!current) {
      report.failures += 1;
      continue;
    }

    // Copy before delete: every new host must hold the value before any
    // replica is removed or the metadata is switched.
    bool copies_ok = true;
    std::uint64_t copied = 0;
    for (const auto& dest : placement.newHosts) {
      KvBackend* backend = data.backend(dest);
      if (!backend) {
        copies_ok = false;
        break;
      }
      auto value =
          read_replica(current->hosts, dest, key, data, topology);
      if (!value || !backend->put(key, *value)) {
        copies_ok = false;
        break;
      }
      copied += 1;
    }
    if (!copies_ok) {
      report.failures += 1;
      continue;
    }

    std::uint64_t evicted = 0;
    for (const auto& host : placement.obsoleteHosts) {
      if (KvBackend* backend = data.backend(host)) {
        backend->del(key);
        evicted += 1;
      }
    }

    if (!meta.meta_set_hosts(key, placement.finalHosts)) {
      report.failures += 1;
      continue;
    }
    report.replications += copied;
    report.evictions += evicted;
  }

  for (const auto& key : plan.expired) {
    auto current = meta.meta_get(key);
    if (current) {
      for (const auto& host : current->hosts) {
        if (KvBackend* backend = data.backend(host)) backend->del(key);
      }
      meta.meta_delete(key);
    }
    report.expirations += 1;
  }
  return report;
}

Daemon::Daemon(MetadataApi& meta, DataLayer& data, ClusterTopology topology,
               OwnershipPolicy policy)
    : meta_(meta),
      data_(data),
      topology_(std::move(topology)),
      policy_(std::move(policy)) {
  if (auto violation = validate_policy(policy_, topology_)) {
    throw std::invalid_argument("invalid ownership policy: " + *violation);
  }
}

std::pair<PlacementPlan, ApplyReport> Daemon::run_once(
    std::int64_t now_millis) {
  std::lock_guard guard(pass_mutex_);
  auto snapshot = meta_.meta_scan();
  PlacementPlan plan = placement_pass(snapshot, policy_, now_millis);
  ApplyReport report = apply_plan(plan, data_, meta_, topology_);
  passes_.fetch_add(1);
  return {std::move(plan), report};
}

DaemonRunner::DaemonRunner(Daemon& daemon, std::int64_t interval_millis)
    : daemon_(daemon), interval_millis_(interval_millis) {
  if (interval_millis_ <= 0) {
    throw std::invalid_argument("daemon interval must be positive");
  }
}

DaemonRunner::~DaemonRunner() { stop(); }

void DaemonRunner::start() {
  if (running_.exchange(true)) return;
  stop_requested_.store(false);
  thread_ = std::thread([this] {
    while (!stop_requested_.load()) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(interval_millis_));
      if (stop_requested_.load()) break;
      auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
      try {
        daemon_.run_once(now);
      } catch (const std::exception& e) {
        std::cerr << "placement pass failed: " << e.what() << "\n";
      }
    }
  });
}

void DaemonRunner::stop() {
  stop_requested_.store(true);
  if (thread_.joinable()) thread_.join();
  running_.store(false);
}

std::string plan_to_json(const PlacementPlan& plan) {
  nlohmann::ordered_json j;
  j["computedAt"] = plan.computedAt;
  nlohmann::ordered_json per_key = nlohmann::ordered_json::object();
  for (const auto& [key, placement] : plan.perKey) {
    nlohmann::ordered_json entry;
    entry["newHosts"] = placement.newHosts;
    entry["obsoleteHosts"] = placement.obsoleteHosts;
    entry["finalHosts"] = placement.finalHosts;
    per_key[key] = entry;
  }
  j["perKey"] = per_key;
  j["expired"] = plan.expired;
  return j.dump();
}

std::string snapshot_entry_to_json(const std::string& key,
                                   const KeyMetadata& meta) {
  nlohmann::ordered_json j;
  j["key"] = key;
  j["metadata"] = nlohmann::ordered_json::parse(metadata_to_json(meta));
  return j.dump();
}

std::vector<std::pair<std::string, KeyMetadata>> snapshot_from_jsonl(
    std::istream& in) {
  std::vector<std::pair<std::string, KeyMetadata>> entries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    line_number += 1;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      if (!j.is_object() || !j.contains("key") || !j.contains("metadata")) {
        throw std::invalid_argument(
            "expected an object with \"key\" and \"metadata\"");
      }
      std::string key = j["key"].get<std::string>();
      KeyMetadata meta = metadata_from_json(j["metadata"].dump());
      entries.emplace_back(std::move(key), std::move(meta));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "line " << line_number << ": " << e.what();
      throw std::invalid_argument(msg.str());
    }
  }
  return entries;
}

}  // namespace redynis
