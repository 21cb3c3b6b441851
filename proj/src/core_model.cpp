#include "redynis/core_model.hpp"

#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace redynis {

ClusterTopology ClusterTopology::uniform(const std::vector<NodeId>& nodes,
                                         const NodeId& master_propagator,
                                         std::int64_t remote_latency_millis) {
  std::map<NodeId, std::map<NodeId, std::int64_t>> latencies;
  for (const auto& from : nodes) {
    for (const auto& to : nodes) {
      latencies[from][to] = (from == to) ? 0 : remote_latency_millis;
    }
  }
  return with_matrix(nodes, master_propagator, latencies);
}

ClusterTopology ClusterTopology::with_matrix(
    const std::vector<NodeId>& nodes, const NodeId& master_propagator,
    const std::map<NodeId, std::map<NodeId, std::int64_t>>& latencies) {
  if (nodes.empty()) {
    throw std::invalid_argument("topology requires at least one node");
  }
  std::set<NodeId> seen;
  for (const auto& node : nodes) {
    if (node.empty()) {
      throw std::invalid_argument("node ids must be non-empty");
    }
    if (!seen.insert(node).second) {
      throw std::invalid_argument("duplicate node id: " + node);
    }
  }
  if (!seen.contains(master_propagator)) {
    throw std::invalid_argument("master propagator " + master_propagator +
                                " is not a cluster node");
  }
  ClusterTopology topo;
  topo.nodes_ = nodes;
  topo.master_propagator_ = master_propagator;
  for (const auto& from : nodes) {
    for (const auto& to : nodes) {
      std::int64_t value = 0;
      auto row = latencies.find(from);
      if (row != latencies.end()) {
        auto cell = row->second.find(to);
        if (cell != row->second.end()) value = cell->second;
      }
      if (value < 0) {
        throw std::invalid_argument("negative latency for " + from + " -> " +
                                    to);
      }
      topo.latency_[from][to] = (from == to) ? 0 : value;
    }
  }
  return topo;
}

bool ClusterTopology::contains(const NodeId& node) const {
  return latency_.contains(node);
}

std::int64_t ClusterTopology::latency_millis(const NodeId& from,
                                             const NodeId& to) const {
  return latency_.at(from).at(to);
}

double ownership_fraction(const KeyMetadata& meta, const NodeId& node) {
  if (meta.totalAccessCount == 0) return 0.0;
  auto it = meta.hostAccesses.find(node);
  if (it == meta.hostAccesses.end()) return 0.0;
  return static_cast<double>(it->second) /
         static_cast<double>(meta.totalAccessCount);
}

std::set<NodeId> eligible_owners(const KeyMetadata& meta,
                                 const OwnershipPolicy& policy) {
  std::set<NodeId> owners;
  // Nodes absent from hostAccesses have f == 0 < H, so scanning the access
  // map covers every candidate.
  for (const auto& [node, count] : meta.hostAccesses) {
    (void)count;
    if (ownership_fraction(meta, node) - policy.coefficient >= 0.0) {
      owners.insert(node);
    }
  }
  return owners;
}

std::optional<std::string> validate_policy(const OwnershipPolicy& policy,
                                           const ClusterTopology& topology) {
  return validate_policy(policy, topology.node_count());
}

std::optional<std::string> validate_policy(const OwnershipPolicy& policy,
                                           std::size_t node_count) {
  if (node_count < 1) {
    return "topology must have at least one node";
  }
  if (!(policy.coefficient > 0.0)) {
    return "coefficient H must be > 0";
  }
  double bound = 1.0 / static_cast<double>(node_count);
  if (policy.coefficient > bound) {
    std::ostringstream msg;
    msg << "H exceeds 1/n: coefficient " << policy.coefficient
        << " > " << bound << " for " << node_count << " nodes";
    return msg.str();
  }
  if (policy.expiryMillis <= 0) {
    return "expiryMillis must be positive";
  }
  if (policy.daemonIntervalMillis <= 0) {
    return "daemonIntervalMillis must be positive";
  }
  return std::nullopt;
}

std::string metadata_to_json(const KeyMetadata& meta) {
  nlohmann::ordered_json j;
  j["totalAccessCount"] = meta.totalAccessCount;
  j["hosts"] = meta.hosts;
  nlohmann::ordered_json accesses = nlohmann::ordered_json::object();
  for (const auto& [node, count] : meta.hostAccesses) {
    accesses[node] = count;
  }
  j["hostAccesses"] = accesses;
  j["lastAccessedDate"] = meta.lastAccessedDate;
  return j.dump();
}

KeyMetadata metadata_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed metadata JSON: ") +
                                e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("metadata JSON must be an object");
  }
  static const std::set<std::string> known = {"totalAccessCount", "hosts",
                                              "hostAccesses",
                                              "lastAccessedDate"};
  for (const auto& [field, value] : j.items()) {
    (void)value;
    if (!known.contains(field)) {
      throw std::invalid_argument("unknown metadata field: " + field);
    }
  }
  for (const auto& field : known) {
    if (!j.contains(field)) {
      throw std::invalid_argument("missing metadata field: " + field);
    }
  }

  KeyMetadata meta;
  if (!j["totalAccessCount"].is_number_unsigned()) {
    throw std::invalid_argument("totalAccessCount must be a non-negative integer");
  }
  meta.totalAccessCount = j["totalAccessCount"].get<std::uint64_t>();
  if (!j["hosts"].is_array()) {
    throw std::invalid_argument("hosts must be an array");
  }
  for (const auto& host : j["hosts"]) {
    if (!host.is_string()) {
      throw std::invalid_argument("hosts entries must be strings");
    }
    meta.hosts.insert(host.get<std::string>());
  }
  if (!j["hostAccesses"].is_object()) {
    throw std::invalid_argument("hostAccesses must be an object");
  }
  for (const auto& [node, count] : j["hostAccesses"].items()) {
    if (!count.is_number_unsigned()) {
      throw std::invalid_argument("hostAccesses counts must be non-negative integers");
    }
    meta.hostAccesses[node] = count.get<std::uint64_t>();
  }
  if (!j["lastAccessedDate"].is_number_integer()) {
    throw std::invalid_argument("lastAccessedDate must be an integer");
  }
  meta.lastAccessedDate = j["lastAccessedDate"].get<std::int64_t>();
  if (meta.lastAccessedDate < 0) {
    throw std::invalid_argument("lastAccessedDate must be >= 0");
  }
  return meta;
}

}  // namespace redynis
