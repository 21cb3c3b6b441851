#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace redynis {

// Nodes are addressed by an opaque string id ("node-1", ...). Ids must be
// non-empty and unique within a topology.
using NodeId = std::string;

// Per-key usage record kept in the metadata layer. Field names mirror the
// wire format exactly; see metadata_to_json / metadata_from_json.
struct KeyMetadata {
  std::uint64_t totalAccessCount = 0;
  std::set<NodeId> hosts;                        // nodes holding a replica
  std::map<NodeId, std::uint64_t> hostAccesses;  // accessor -> access count
  std::int64_t lastAccessedDate = 0;             // epoch millis

  bool operator==(const KeyMetadata&) const = default;
};

// Placement policy knobs. `coefficient` is the ownership threshold H, a
// fraction in (0, 1]; it must also satisfy H <= 1/n for the cluster size n.
struct OwnershipPolicy {
  double coefficient = 0.0;
  std::int64_t expiryMillis = 0;
  std::int64_t daemonIntervalMillis = 0;
};

class ClusterTopology {
 public:
  ClusterTopology() = default;

  // Uniform matrix: 0 on the diagonal, `remote_latency_millis` elsewhere.
  static ClusterTopology uniform(const std::vector<NodeId>& nodes,
                                 const NodeId& master_propagator,
                                 std::int64_t remote_latency_millis);

  // Explicit matrix. Missing (x, y) pairs default to 0; the diagonal is
  // forced to 0.
  static ClusterTopology with_matrix(
      const std::vector<NodeId>& nodes, const NodeId& master_propagator,
      const std::map<NodeId, std::map<NodeId, std::int64_t>>& latencies);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  const NodeId& master_propagator() const { return master_propagator_; }
  bool contains(const NodeId& node) const;

  // One-way request latency in millis. Throws std::out_of_range for nodes
  // outside the topology.
  std::int64_t latency_millis(const NodeId& from, const NodeId& to) const;

 private:
  std::vector<NodeId> nodes_;
  NodeId master_propagator_;
  std::map<NodeId, std::map<NodeId, std::int64_t>> latency_;
};

// f(O, x): the fraction of all recorded accesses on the key contributed by
// `node`. Total function: 0 when the key has never been accessed or the node
// never accessed it.
double ownership_fraction(const KeyMetadata& meta, const NodeId& node);

// Nodes eligible to hold a replica: exactly { x : f(O, x) - H >= 0 }. The
// boundary f == H is eligible. The comparison is done in plain double
// arithmetic with no epsilon.
std::set<NodeId> eligible_owners(const KeyMetadata& meta,
                                 const OwnershipPolicy& policy);

// nullopt when the policy is valid for the topology, otherwise a description
// of the violated constraint. Callers must refuse to start a daemon with an
// invalid policy.
std::optional<std::string> validate_policy(const OwnershipPolicy& policy,
                                           const ClusterTopology& topology);

// Convenience overload for contexts where only the node count matters.
std::optional<std::string> validate_policy(const OwnershipPolicy& policy,
                                           std::size_t node_count);

// Canonical JSON codec for KeyMetadata. Output key order is fixed:
// totalAccessCount, hosts, hostAccesses, lastAccessedDate. Parsing rejects
// unknown or missing fields and negative counts with std::invalid_argument.
std::string metadata_to_json(const KeyMetadata& meta);
KeyMetadata metadata_from_json(const std::string& json_text);

}  // namespace redynis
