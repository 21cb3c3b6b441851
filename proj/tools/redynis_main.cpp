#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "redynis/bench.hpp"
#include "redynis/cluster.hpp"
#include "redynis/http_service.hpp"
#include "redynis/placement.hpp"
#include "redynis/workload.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct MergedConfig {
  redynis::SimConfig sim;
  redynis::OwnershipPolicy policy{0.33, 86'400'000, 1000};
  redynis::WorkloadConfig workload;
  std::int64_t serviceCostMillis = 1;
  std::vector<std::string> scenarios{"optimized"};
  int iterations = 5;
  std::string reportPath;
};

// Config file first, flags on top (CLI wins on conflict), env seed last.
void apply_config_file(const std::string& path, MergedConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");

  if (j.contains("nodeCount")) config.sim.nodeCount = j["nodeCount"].get<int>();
  if (j.contains("remoteLatencyMillis")) {
    config.sim.remoteLatencyMillis = j["remoteLatencyMillis"].get<std::int64_t>();
  }
  if (j.contains("masterPropagator")) {
    config.sim.masterPropagator = j["masterPropagator"].get<std::string>();
  }
  if (j.contains("seed")) config.sim.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("clockMode")) {
    std::string mode = j["clockMode"].get<std::string>();
    if (mode == "virtual") {
      config.sim.clockMode = redynis::ClockMode::Virtual;
    } else if (mode == "wall") {
      config.sim.clockMode = redynis::ClockMode::Wall;
    } else {
      throw std::invalid_argument("clockMode must be virtual or wall");
    }
  }
  if (j.contains("streamsPerNode")) {
    config.sim.streamsPerNode = j["streamsPerNode"].get<int>();
  }
  if (j.contains("coefficient")) config.policy.coefficient = j["coefficient"].get<double>();
  if (j.contains("expiryMillis")) config.policy.expiryMillis = j["expiryMillis"].get<std::int64_t>();
  if (j.contains("daemonIntervalMillis")) {
    config.policy.daemonIntervalMillis = j["daemonIntervalMillis"].get<std::int64_t>();
  }
  if (j.contains("totalRequests")) config.workload.totalRequests = j["totalRequests"].get<std::uint64_t>();
  if (j.contains("readPercent")) config.workload.readPercent = j["readPercent"].get<int>();
  if (j.contains("distribution")) {
    auto parsed = redynis::parse_distribution(j["distribution"].get<std::string>());
    if (!parsed) throw std::invalid_argument("distribution must be uniform or skewed");
    config.workload.distribution = *parsed;
  }
  if (j.contains("keyCount")) config.workload.keyCount = j["keyCount"].get<std::uint64_t>();
  if (j.contains("hotFraction")) config.workload.hotFraction = j["hotFraction"].get<double>();
  if (j.contains("hotAccessFraction")) {
    config.workload.hotAccessFraction = j["hotAccessFraction"].get<double>();
  }
  if (j.contains("originNodes")) {
    config.workload.originNodes = j["originNodes"].get<std::vector<std::string>>();
  }
  if (j.contains("zipfExponent")) config.workload.zipfExponent = j["zipfExponent"].get<double>();
  if (j.contains("serviceCostMillis")) config.serviceCostMillis = j["serviceCostMillis"].get<std::int64_t>();
  if (j.contains("iterations")) config.iterations = j["iterations"].get<int>();
  if (j.contains("scenario")) config.scenarios = {j["scenario"].get<std::string>()};
  if (j.contains("scenarios")) config.scenarios = j["scenarios"].get<std::vector<std::string>>();
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("REDYNIS_SEED");
  if (!raw || !*raw) return std::nullopt;
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int run_bench(const MergedConfig& config) {
  if (auto violation = redynis::validate_sim_config(config.sim)) {
    std::cerr << "invalid configuration: " << *violation << "\n";
    return kExitValidation;
  }
  redynis::ClusterTopology topo = redynis::ClusterTopology::uniform(
      [&] {
        std::vector<redynis::NodeId> ids;
        for (int i = 1; i <= config.sim.nodeCount; ++i) {
          ids.push_back("node-" + std::to_string(i));
        }
        return ids;
      }(),
      config.sim.masterPropagator.empty() ? "node-1" : config.sim.masterPropagator,
      config.sim.remoteLatencyMillis);
  if (auto violation = redynis::validate_policy(config.policy, topo)) {
    std::cerr << "invalid configuration: " << *violation << "\n";
    return kExitValidation;
  }
  std::vector<redynis::Scenario> scenarios;
  for (const auto& name : config.scenarios) {
    auto parsed = redynis::parse_scenario(name);
    if (!parsed) {
      std::cerr << "invalid configuration: unknown scenario " << name << "\n";
      return kExitValidation;
    }
    scenarios.push_back(*parsed);
  }
  if (config.iterations < 1) {
    std::cerr << "invalid configuration: iterations must be >= 1\n";
    return kExitValidation;
  }

  auto cluster = redynis::build_cluster(config.sim, config.policy);
  redynis::WorkloadConfig workload = config.workload;
  if (workload.originNodes.empty()) {
    workload.originNodes = cluster->default_origins();
  }
  workload.seed = config.sim.seed;
  if (auto violation = redynis::validate_workload(workload)) {
    std::cerr << "invalid configuration: " << *violation << "\n";
    return kExitValidation;
  }
  for (const auto& origin : workload.originNodes) {
    if (!topo.contains(origin)) {
      std::cerr << "invalid configuration: origin " << origin
                << " is not a cluster node\n";
      return kExitValidation;
    }
  }

  redynis::ReplayOptions options;
  options.serviceCostMillis = config.serviceCostMillis;
  options.streamsPerNode = config.sim.streamsPerNode;

  try {
    std::vector<redynis::BenchReport> reports;
    for (auto scenario : scenarios) {
      reports.push_back(redynis::run_scenario(*cluster, scenario, workload,
                                              options, config.iterations));
    }
    std::cout << redynis::report_table(reports);
    if (reports.size() >= 2) {
      auto comparison = redynis::compare_reports(reports);
      std::cout << "\n";
      for (const auto& entry : comparison.entries) {
        std::cout << entry.numerator << "/" << entry.denominator << " = "
                  << entry.ratio << (entry.capped ? " (capped)" : "") << "  ["
                  << entry.ordering << "]\n";
      }
    }
    if (!config.reportPath.empty()) {
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      for (const auto& report : reports) {
        out.push_back(nlohmann::ordered_json::parse(redynis::report_to_json(report)));
      }
      std::ofstream file(config.reportPath);
      if (!file) {
        std::cerr << "cannot write report to " << config.reportPath << "\n";
        return kExitRuntime;
      }
      file << out.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "bench failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int run_daemon_pass(const std::string& metadata_path, double coefficient,
                    int nodes, std::int64_t now, std::int64_t expiry_ms) {
  redynis::OwnershipPolicy policy{coefficient, expiry_ms, 1000};
  if (auto violation = redynis::validate_policy(policy, static_cast<std::size_t>(nodes))) {
    std::cerr << "invalid configuration: " << *violation << "\n";
    return kExitValidation;
  }
  std::ifstream in(metadata_path);
  if (!in) {
    std::cerr << "cannot open metadata file: " << metadata_path << "\n";
    return kExitValidation;
  }
  std::vector<std::pair<std::string, redynis::KeyMetadata>> snapshot;
  try {
    snapshot = redynis::snapshot_from_jsonl(in);
  } catch (const std::exception& e) {
    std::cerr << "malformed metadata: " << e.what() << "\n";
    return kExitValidation;
  }
  auto plan = redynis::placement_pass(snapshot, policy, now);
  std::cout << redynis::plan_to_json(plan) << "\n";
  return kExitOk;
}

int run_serve(const std::string& node_id, const std::string& host, int port,
              const std::vector<std::string>& peer_specs,
              const std::string& serializer,
              const std::string& metadata_host) {
  redynis::HttpNodeConfig config;
  config.id = node_id;
  config.listenHost = host;
  config.port = port;
  config.serializer = serializer.empty() ? node_id : serializer;
  config.metadataHost = metadata_host;
  for (const auto& spec : peer_specs) {
    auto eq = spec.find('=');
    auto colon = spec.rfind(':');
    if (eq == std::string::npos || colon == std::string::npos || colon < eq) {
      std::cerr << "invalid configuration: peer must be id=host:port, got " << spec << "\n";
      return kExitValidation;
    }
    redynis::NodeAddress address;
    address.host = spec.substr(eq + 1, colon - eq - 1);
    try {
      address.port = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
      std::cerr << "invalid configuration: bad peer port in " << spec << "\n";
      return kExitValidation;
    }
    config.peers[spec.substr(0, eq)] = address;
  }

  try {
    redynis::HttpNodeServer server(std::move(config));
    if (!server.start()) {
      std::cerr << "failed to bind " << host << ":" << port << "\n";
      return kExitRuntime;
    }
    std::cout << "node " << node_id << " listening on " << host << ":"
              << server.port() << (server.is_serializer() ? " (serializer)" : "")
              << std::endl;
    server.wait();
  } catch (const std::exception& e) {
    std::cerr << "serve failed: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

int run_gen_trace(const MergedConfig& config, const std::string& out_path) {
  redynis::WorkloadConfig workload = config.workload;
  workload.seed = config.sim.seed;
  if (workload.originNodes.empty()) {
    std::vector<redynis::NodeId> ids;
    for (int i = 1; i <= config.sim.nodeCount; ++i) {
      ids.push_back("node-" + std::to_string(i));
    }
    if (ids.size() > 1) ids.pop_back();  // holder issues no requests
    workload.originNodes = ids;
  }
  if (auto violation = redynis::validate_workload(workload)) {
    std::cerr << "invalid configuration: " << *violation << "\n";
    return kExitValidation;
  }
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path);
    if (!file) {
      std::cerr << "cannot write trace to " << out_path << "\n";
      return kExitRuntime;
    }
    out = &file;
  }
  for (const auto& request : redynis::generate(workload)) {
    *out << redynis::request_to_json(request) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Redynis: traffic-aware dynamic repartitioning harness"};
  app.require_subcommand(1);

  MergedConfig config;
  if (auto seed = env_seed()) config.sim.seed = *seed;

  std::string config_path;
  std::string scenario_flag;
  std::string distribution_flag;
  std::string report_path;

  auto add_shared_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--nodes", config.sim.nodeCount, "cluster size");
    cmd->add_option("--remote-latency-ms", config.sim.remoteLatencyMillis,
                    "one-way remote request latency");
    cmd->add_option("--master", config.sim.masterPropagator,
                    "master propagator node id");
    cmd->add_option("--seed", config.sim.seed, "workload/topology seed");
    cmd->add_option("--streams", config.sim.streamsPerNode,
                    "client streams per origin node");
    cmd->add_option("--coefficient", config.policy.coefficient,
                    "ownership coefficient H");
    cmd->add_option("--expiry-ms", config.policy.expiryMillis,
                    "staleness window for purging");
    cmd->add_option("--daemon-interval-ms", config.policy.daemonIntervalMillis,
                    "period between placement passes");
    cmd->add_option("--requests", config.workload.totalRequests,
                    "total requests per run");
    cmd->add_option("--read-pct", config.workload.readPercent,
                    "read percentage, 50-100");
    cmd->add_option("--distribution", distribution_flag,
                    "key popularity: uniform|skewed");
    cmd->add_option("--key-count", config.workload.keyCount, "distinct keys");
    cmd->add_option("--hot-fraction", config.workload.hotFraction,
                    "share of keys in the hot set");
    cmd->add_option("--hot-access-fraction", config.workload.hotAccessFraction,
                    "share of requests hitting the hot set");
    cmd->add_option("--zipf-exponent", config.workload.zipfExponent,
                    "true-Zipf skew exponent (0 = two-tier model)");
    cmd->add_option("--origins", config.workload.originNodes,
                    "request origin node ids");
    cmd->add_option("--service-cost-ms", config.serviceCostMillis,
                    "per-request local processing charge");
  };

  auto* bench = app.add_subcommand("bench", "run benchmark scenarios");
  add_shared_flags(bench);
  bench->add_option("--scenario", scenario_flag,
                    "local|remote|optimized|all (repeat with commas)");
  bench->add_option("--iterations", config.iterations,
                    "iterations for confidence intervals");
  bench->add_option("--report", report_path, "write JSON report here");

  std::string metadata_path;
  double dp_coefficient = 0.33;
  int dp_nodes = 3;
  std::int64_t dp_now = 0;
  std::int64_t dp_expiry = 86'400'000;
  auto* daemon_pass = app.add_subcommand(
      "daemon-pass", "compute one offline placement plan from a metadata snapshot");
  daemon_pass->add_option("--metadata", metadata_path,
                          "metadata snapshot, JSON lines")->required();
  daemon_pass->add_option("--coefficient", dp_coefficient, "ownership coefficient H");
  daemon_pass->add_option("--nodes", dp_nodes, "cluster size for the 1/n bound");
  daemon_pass->add_option("--now", dp_now, "evaluation time, epoch millis");
  daemon_pass->add_option("--expiry-ms", dp_expiry, "staleness window");

  std::string serve_node = "node-1";
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::vector<std::string> serve_peers;
  std::string serve_serializer;
  std::string serve_metadata_host;
  auto* serve = app.add_subcommand("serve", "run one node with the HTTP interface");
  serve->add_option("--node-id", serve_node, "this node's id");
  serve->add_option("--host", serve_host, "listen address");
  serve->add_option("--port", serve_port, "listen port");
  serve->add_option("--peers", serve_peers, "peer nodes as id=host:port");
  serve->add_option("--serializer", serve_serializer,
                    "write-serializer node id (default: this node)");
  serve->add_option("--metadata-host", serve_metadata_host,
                    "node holding the authoritative metadata store "
                    "(default: the serializer)");

  std::string trace_out;
  auto* gen_trace = app.add_subcommand("gen-trace", "write a workload trace as JSON lines");
  add_shared_flags(gen_trace);
  gen_trace->add_option("--out", trace_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int parse_code = app.exit(e);
    return parse_code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (!config_path.empty()) {
      // Re-parse flags over the file-provided values: flags win on conflict.
      MergedConfig file_config;
      if (auto seed = env_seed()) file_config.sim.seed = *seed;
      apply_config_file(config_path, file_config);
      auto keep = [&](auto& target, const auto& parsed, const char* flag,
                      CLI::App* cmd) {
        if (cmd->count(flag) == 0) target = parsed;
      };
      CLI::App* active = bench->parsed() ? bench : gen_trace;
      keep(config.sim.nodeCount, file_config.sim.nodeCount, "--nodes", active);
      keep(config.sim.remoteLatencyMillis, file_config.sim.remoteLatencyMillis,
           "--remote-latency-ms", active);
      keep(config.sim.masterPropagator, file_config.sim.masterPropagator,
           "--master", active);
      keep(config.sim.seed, file_config.sim.seed, "--seed", active);
      keep(config.sim.streamsPerNode, file_config.sim.streamsPerNode,
           "--streams", active);
      keep(config.policy.coefficient, file_config.policy.coefficient,
           "--coefficient", active);
      keep(config.policy.expiryMillis, file_config.policy.expiryMillis,
           "--expiry-ms", active);
      keep(config.policy.daemonIntervalMillis,
           file_config.policy.daemonIntervalMillis, "--daemon-interval-ms",
           active);
      keep(config.workload.totalRequests, file_config.workload.totalRequests,
           "--requests", active);
      keep(config.workload.readPercent, file_config.workload.readPercent,
           "--read-pct", active);
      keep(config.workload.keyCount, file_config.workload.keyCount,
           "--key-count", active);
      keep(config.workload.hotFraction, file_config.workload.hotFraction,
           "--hot-fraction", active);
      keep(config.workload.hotAccessFraction,
           file_config.workload.hotAccessFraction, "--hot-access-fraction",
           active);
      keep(config.workload.zipfExponent, file_config.workload.zipfExponent,
           "--zipf-exponent", active);
      keep(config.workload.originNodes, file_config.workload.originNodes,
           "--origins", active);
      keep(config.serviceCostMillis, file_config.serviceCostMillis,
           "--service-cost-ms", active);
      if (active->count("--distribution") == 0) {
        config.workload.distribution = file_config.workload.distribution;
      }
      if (active == bench) {
        keep(config.iterations, file_config.iterations, "--iterations", active);
        if (active->count("--scenario") == 0) config.scenarios = file_config.scenarios;
      }
      config.sim.clockMode = file_config.sim.clockMode;
    }
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  }

  if (!distribution_flag.empty()) {
    auto parsed = redynis::parse_distribution(distribution_flag);
    if (!parsed) {
      std::cerr << "invalid configuration: distribution must be uniform or skewed\n";
      return kExitValidation;
    }
    config.workload.distribution = *parsed;
  }
  if (!scenario_flag.empty()) {
    config.scenarios.clear();
    if (scenario_flag == "all") {
      config.scenarios = {"local", "remote", "optimized"};
    } else {
      std::stringstream parts(scenario_flag);
      std::string part;
      while (std::getline(parts, part, ',')) config.scenarios.push_back(part);
    }
  }
  config.reportPath = report_path;

  if (bench->parsed()) return run_bench(config);
  if (daemon_pass->parsed()) {
    return run_daemon_pass(metadata_path, dp_coefficient, dp_nodes, dp_now,
                           dp_expiry);
  }
  if (serve->parsed()) {
    return run_serve(serve_node, serve_host, serve_port, serve_peers,
                     serve_serializer, serve_metadata_host);
  }
  if (gen_trace->parsed()) return run_gen_trace(config, trace_out);
  return kExitValidation;
}
