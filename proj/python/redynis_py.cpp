#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "redynis/bench.hpp"
#include "redynis/cluster.hpp"
#include "redynis/core_model.hpp"
#include "redynis/placement.hpp"
#include "redynis/workload.hpp"

namespace py = pybind11;
using namespace redynis;

namespace {

Scenario scenario_from_name(const std::string& name) {
  auto parsed = parse_scenario(name);
  if (!parsed) throw std::invalid_argument("unknown scenario: " + name);
  return *parsed;
}

Distribution distribution_from_name(const std::string& name) {
  auto parsed = parse_distribution(name);
  if (!parsed) throw std::invalid_argument("unknown distribution: " + name);
  return *parsed;
}

// One-call benchmark entry point mirroring the CLI's bench subcommand;
// returns the report as a JSON string.
std::string run_bench(const std::string& scenario, std::uint64_t requests,
                      int read_percent, const std::string& distribution,
                      std::uint64_t key_count, int nodes, double coefficient,
                      std::int64_t remote_latency_ms, std::uint64_t seed,
                      int iterations, std::int64_t service_cost_ms,
                      std::int64_t daemon_interval_ms,
                      std::int64_t expiry_ms) {
  SimConfig sim;
  sim.nodeCount = nodes;
  sim.remoteLatencyMillis = remote_latency_ms;
  sim.seed = seed;
  OwnershipPolicy policy{coefficient, expiry_ms, daemon_interval_ms};
  auto cluster = build_cluster(sim, policy);

  WorkloadConfig workload;
  workload.totalRequests = requests;
  workload.readPercent = read_percent;
  workload.distribution = distribution_from_name(distribution);
  workload.keyCount = key_count;
  workload.originNodes = cluster->default_origins();
  workload.seed = seed;

  ReplayOptions options;
  options.serviceCostMillis = service_cost_ms;

  BenchReport report = run_scenario(*cluster, scenario_from_name(scenario),
                                    workload, options, iterations);
  return report_to_json(report);
}

std::vector<Request> generate_workload(std::uint64_t requests,
                                       int read_percent,
                                       const std::string& distribution,
                                       std::uint64_t key_count,
                                       double hot_fraction,
                                       double hot_access_fraction,
                                       const std::vector<NodeId>& origins,
                                       std::uint64_t seed,
                                       double zipf_exponent) {
  WorkloadConfig config;
  config.totalRequests = requests;
  config.readPercent = read_percent;
  config.distribution = distribution_from_name(distribution);
  config.keyCount = key_count;
  config.hotFraction = hot_fraction;
  config.hotAccessFraction = hot_access_fraction;
  config.originNodes = origins;
  config.seed = seed;
  config.zipfExponent = zipf_exponent;
  return generate(config);
}

}  // namespace

PYBIND11_MODULE(_redynis, m) {
  m.doc() = "Traffic-aware dynamic repartitioning for a distributed KV store";

  py::class_<KeyMetadata>(m, "KeyMetadata")
      .def(py::init<>())
      .def_readwrite("total_access_count", &KeyMetadata::totalAccessCount)
      .def_readwrite("hosts", &KeyMetadata::hosts)
      .def_readwrite("host_accesses", &KeyMetadata::hostAccesses)
      .def_readwrite("last_accessed_date", &KeyMetadata::lastAccessedDate)
      .def("__eq__", [](const KeyMetadata& a, const KeyMetadata& b) {
        return a == b;
      });

  py::class_<OwnershipPolicy>(m, "OwnershipPolicy")
      .def(py::init<>())
      .def(py::init([](double coefficient, std::int64_t expiry_millis,
                       std::int64_t daemon_interval_millis) {
             return OwnershipPolicy{coefficient, expiry_millis,
                                    daemon_interval_millis};
           }),
           py::arg("coefficient"), py::arg("expiry_millis") = 86'400'000,
           py::arg("daemon_interval_millis") = 1000)
      .def_readwrite("coefficient", &OwnershipPolicy::coefficient)
      .def_readwrite("expiry_millis", &OwnershipPolicy::expiryMillis)
      .def_readwrite("daemon_interval_millis",
                     &OwnershipPolicy::daemonIntervalMillis);

  py::class_<KeyPlacement>(m, "KeyPlacement")
      .def_readonly("new_hosts", &KeyPlacement::newHosts)
      .def_readonly("obsolete_hosts", &KeyPlacement::obsoleteHosts)
      .def_readonly("final_hosts", &KeyPlacement::finalHosts);

  py::class_<PlacementPlan>(m, "PlacementPlan")
      .def_readonly("per_key", &PlacementPlan::perKey)
      .def_readonly("expired", &PlacementPlan::expired)
      .def_readonly("computed_at", &PlacementPlan::computedAt)
      .def("empty", &PlacementPlan::empty)
      .def("to_json", &plan_to_json);

  m.def("ownership_fraction", &ownership_fraction, py::arg("metadata"),
        py::arg("node"),
        "Fraction of the key's recorded accesses contributed by the node.");
  m.def("eligible_owners", &eligible_owners, py::arg("metadata"),
        py::arg("policy"),
        "Nodes whose access fraction clears the ownership coefficient.");
  m.def(
      "validate_policy",
      [](const OwnershipPolicy& policy,
         std::size_t node_count) -> std::optional<std::string> {
        return validate_policy(policy, node_count);
      },
      py::arg("policy"), py::arg("node_count"),
      "None when valid, else the violated constraint.");
  m.def("placement_pass", &placement_pass, py::arg("snapshot"),
        py::arg("policy"), py::arg("now_millis"),
        "Owner/evict/expire decisions for one metadata snapshot.");
  m.def("metadata_to_json", &metadata_to_json, py::arg("metadata"));
  m.def("metadata_from_json", &metadata_from_json, py::arg("text"));

  py::class_<Request>(m, "Request")
      .def_readonly("origin", &Request::origin)
      .def_property_readonly("kind",
                             [](const Request& request) {
                               return request.kind == RequestKind::Read
                                          ? "read"
                                          : "write";
                             })
      .def_readonly("key", &Request::key)
      .def_readonly("value", &Request::value);
  m.def("generate_workload", &generate_workload, py::arg("requests") = 100000,
        py::arg("read_percent") = 100, py::arg("distribution") = "skewed",
        py::arg("key_count") = 10000, py::arg("hot_fraction") = 0.10,
        py::arg("hot_access_fraction") = 0.90,
        py::arg("origins") = std::vector<NodeId>{"node-1", "node-2"},
        py::arg("seed") = 42, py::arg("zipf_exponent") = 0.0,
        "Deterministic request trace for the configured popularity model.");
  m.def("run_bench", &run_bench, py::arg("scenario"),
        py::arg("requests") = 10000, py::arg("read_percent") = 100,
        py::arg("distribution") = "skewed", py::arg("key_count") = 1000,
        py::arg("nodes") = 3, py::arg("coefficient") = 0.33,
        py::arg("remote_latency_ms") = 100, py::arg("seed") = 42,
        py::arg("iterations") = 1, py::arg("service_cost_ms") = 1,
        py::arg("daemon_interval_ms") = 1000,
        py::arg("expiry_ms") = 86'400'000,
        "Run one scenario and return the report as JSON.");
}
