#include "redynis/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace redynis {

namespace {

struct Stream {
  NodeId origin;
  std::vector<const Request*> queue;
  std::size_t next = 0;
  std::int64_t time = 0;

  bool done() const { return next >= queue.size(); }
};

constexpr double kRatioCap = 1e9;

}  // namespace

ReplayTrace replay(Cluster& cluster, const std::vector<Request>& requests,
                   const ReplayOptions& options) {
  if (options.streamsPerNode < 1) {
    throw std::invalid_argument("streamsPerNode must be >= 1");
  }

  // Streams per origin, requests dealt round-robin within each origin so
  // per-stream order matches trace order.
  std::vector<Stream> streams;
  std::map<NodeId, std::vector<std::size_t>> origin_streams;
  for (const auto& request : requests) {
    auto [it, inserted] = origin_streams.try_emplace(request.origin);
    if (inserted) {
      for (int k = 0; k < options.streamsPerNode; ++k) {
        it->second.push_back(streams.size());
        streams.push_back(Stream{request.origin, {}, 0, 0});
      }
    }
  }
  std::map<NodeId, std::size_t> deal;
  for (const auto& request : requests) {
    auto& indices = origin_streams[request.origin];
    std::size_t slot = deal[request.origin]++ % indices.size();
    streams[indices[slot]].queue.push_back(&request);
  }

  ReplayTrace trace;
  trace.records.reserve(requests.size());
  std::int64_t next_pass = cluster.next_pass_at();

  while (true) {
    Stream* current = nullptr;
    for (auto& stream : streams) {
      if (stream.done()) continue;
      if (!current || stream.time < current->time) current = &stream;
    }
    if (!current) break;

    if (cluster.daemon_enabled() && next_pass <= current->time) {
      trace.daemonPasses += cluster.fire_due_passes(current->time);
      next_pass = cluster.next_pass_at();
      continue;
    }

    const Request& request = *current->queue[current->next++];
    RequestRecord record;
    record.startMillis = current->time;
    record.read = request.kind == RequestKind::Read;
    if (record.read) {
      FetchResult result = cluster.fetch(request.origin, request.key,
                                         current->time);
      record.transportLatencyMillis = result.latencyMillis;
      record.local = !result.remote;
      record.failed = result.status == FetchStatus::Diverged;
    } else {
      StoreResult result = cluster.store(request.origin, request.key,
                                         request.value, current->time);
      record.transportLatencyMillis = result.latencyMillis;
      record.failed = !result.success;
    }
    if (record.failed) trace.failures += 1;
    current->time += options.serviceCostMillis + record.transportLatencyMillis;
    trace.records.push_back(record);
  }

  for (const auto& stream : streams) {
    trace.elapsedMillis = std::max(trace.elapsedMillis, stream.time);
  }
  if (auto* vclock = dynamic_cast<VirtualClock*>(&cluster.clock())) {
    vclock->set(std::max(vclock->now_millis(), trace.elapsedMillis));
  }
  return trace;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double rank = p / 100.0 * static_cast<double>(values.size());
  auto index = static_cast<std::size_t>(std::ceil(rank));
  if (index == 0) index = 1;
  if (index > values.size()) index = values.size();
  return values[index - 1];
}

double student_t_99(int degrees_of_freedom) {
  // Two-sided 99% critical values; normal approximation past df 30.
  static const double table[] = {
      63.657, 9.925, 5.841, 4.604, 4.032, 3.707, 3.499, 3.355, 3.250, 3.169,
      3.106,  3.055, 3.012, 2.977, 2.947, 2.921, 2.898, 2.878, 2.861, 2.845,
      2.831,  2.819, 2.807, 2.797, 2.787, 2.779, 2.771, 2.763, 2.756, 2.750};
  if (degrees_of_freedom < 1) return 0.0;
  if (degrees_of_freedom <= 30) return table[degrees_of_freedom - 1];
  return 2.576;
}

BenchReport run_scenario(Cluster& cluster, Scenario scenario,
                         const WorkloadConfig& workload,
                         const ReplayOptions& options, int iterations) {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (auto violation = validate_workload(workload)) {
    throw std::invalid_argument("invalid workload config: " + *violation);
  }

  BenchReport report;
  report.scenario = to_string(scenario);
  report.workload = workload;
  report.policy = cluster.policy();
  report.sim = cluster.config();
  report.serviceCostMillis = options.serviceCostMillis;
  report.iterations = iterations;

  auto keys = key_names(workload.keyCount);
  std::vector<StoredValue> values;
  values.reserve(keys.size());
  for (const auto& key : keys) values.push_back("v0:" + key);

  std::vector<double> latencies;
  std::uint64_t reads_total = 0, reads_local = 0;
  std::uint64_t window_reads = 0, window_reads_local = 0;
  double converged_throughput_sum = 0.0;
  int converged_samples = 0;

  for (int iteration = 0; iteration < iterations; ++iteration) {
    WorkloadConfig iter_workload = workload;
    iter_workload.seed = workload.seed + static_cast<std::uint64_t>(iteration);
    auto requests = generate(iter_workload);

    cluster.reset();
    cluster.inject_scenario(scenario, keys, values, workload.originNodes);
    ReplayTrace trace = replay(cluster, requests, options);

    report.failures += trace.failures;
    report.daemonPasses += trace.daemonPasses;

    double throughput;
    if (trace.elapsedMillis > 0) {
      throughput = static_cast<double>(requests.size()) * 1000.0 /
                   static_cast<double>(trace.elapsedMillis);
    } else {
      throughput = std::numeric_limits<double>::infinity();
      report.throughputUnbounded = true;
    }
    report.iterationThroughputs.push_back(throughput);

    for (const auto& record : trace.records) {
      latencies.push_back(
          static_cast<double>(record.transportLatencyMillis));
      if (record.read) {
        reads_total += 1;
        if (record.local) reads_local += 1;
      }
    }

    // Converged phase: the trailing window of the trace by request count.
    std::size_t window =
        static_cast<std::size_t>(std::floor(options.convergedWindowFraction *
                                            static_cast<double>(trace.records.size())));
    if (window > 0) {
      std::size_t first = trace.records.size() - window;
      std::int64_t window_start = trace.records[first].startMillis;
      for (std::size_t i = first; i < trace.records.size(); ++i) {
        const auto& record = trace.records[i];
        if (record.read) {
          window_reads += 1;
          if (record.local) window_reads_local += 1;
        }
      }
      std::int64_t span = trace.elapsedMillis - window_start;
      if (span > 0) {
        converged_throughput_sum += static_cast<double>(window) * 1000.0 /
                                    static_cast<double>(span);
        converged_samples += 1;
      } else {
        report.convergedUnbounded = true;
      }
    }
  }

  double finite_sum = 0.0;
  int finite_count = 0;
  for (double throughput : report.iterationThroughputs) {
    if (std::isfinite(throughput)) {
      finite_sum += throughput;
      finite_count += 1;
    }
  }
  if (report.throughputUnbounded) {
    report.throughputOpsPerSec = std::numeric_limits<double>::infinity();
    report.ci99Low = std::numeric_limits<double>::infinity();
    report.ci99High = std::numeric_limits<double>::infinity();
  } else {
    double mean = finite_sum / finite_count;
    report.throughputOpsPerSec = mean;
    if (finite_count > 1) {
      double sq = 0.0;
      for (double throughput : report.iterationThroughputs) {
        sq += (throughput - mean) * (throughput - mean);
      }
      double stddev = std::sqrt(sq / (finite_count - 1));
      double half = student_t_99(finite_count - 1) * stddev /
                    std::sqrt(static_cast<double>(finite_count));
      report.ci99Low = mean - half;
      report.ci99High = mean + half;
    } else {
      report.ci99Low = mean;
      report.ci99High = mean;
    }
  }

  report.meanLatencyMillis =
      latencies.empty()
          ? 0.0
          : std::accumulate(latencies.begin(), latencies.end(), 0.0) /
                static_cast<double>(latencies.size());
  report.p50LatencyMillis = percentile(latencies, 50.0);
  report.p99LatencyMillis = percentile(latencies, 99.0);
  report.localHitRate =
      reads_total == 0
          ? 0.0
          : static_cast<double>(reads_local) / static_cast<double>(reads_total);
  report.convergedLocalHitRate =
      window_reads == 0 ? 0.0
                        : static_cast<double>(window_reads_local) /
                              static_cast<double>(window_reads);
  if (report.convergedUnbounded) {
    report.convergedThroughputOpsPerSec =
        std::numeric_limits<double>::infinity();
  } else if (converged_samples > 0) {
    report.convergedThroughputOpsPerSec =
        converged_throughput_sum / converged_samples;
  }
  return report;
}

namespace {

void require_matching_workloads(const std::vector<BenchReport>& reports) {
  for (std::size_t i = 1; i < reports.size(); ++i) {
    WorkloadConfig a = reports[0].workload;
    WorkloadConfig b = reports[i].workload;
    if (!(a == b)) {
      throw std::invalid_argument(
          "reports were produced from different workloads: " +
          reports[0].scenario + " vs " + reports[i].scenario);
    }
  }
}

nlohmann::ordered_json workload_to_json(const WorkloadConfig& workload) {
  nlohmann::ordered_json j;
  j["totalRequests"] = workload.totalRequests;
  j["readPercent"] = workload.readPercent;
  j["distribution"] = to_string(workload.distribution);
  j["keyCount"] = workload.keyCount;
  j["hotFraction"] = workload.hotFraction;
  j["hotAccessFraction"] = workload.hotAccessFraction;
  j["originNodes"] = workload.originNodes;
  j["seed"] = workload.seed;
  j["zipfExponent"] = workload.zipfExponent;
  return j;
}

nlohmann::ordered_json finite_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

}  // namespace

std::string report_to_json(const BenchReport& report) {
  nlohmann::ordered_json j;
  j["scenario"] = report.scenario;
  j["workload"] = workload_to_json(report.workload);
  nlohmann::ordered_json policy;
  policy["coefficient"] = report.policy.coefficient;
  policy["expiryMillis"] = report.policy.expiryMillis;
  policy["daemonIntervalMillis"] = report.policy.daemonIntervalMillis;
  j["policy"] = policy;
  nlohmann::ordered_json sim;
  sim["nodeCount"] = report.sim.nodeCount;
  sim["remoteLatencyMillis"] = report.sim.remoteLatencyMillis;
  sim["masterPropagator"] = report.sim.masterPropagator;
  sim["seed"] = report.sim.seed;
  sim["clockMode"] =
      report.sim.clockMode == ClockMode::Virtual ? "virtual" : "wall";
  sim["streamsPerNode"] = report.sim.streamsPerNode;
  j["sim"] = sim;
  j["serviceCostMillis"] = report.serviceCostMillis;
  j["iterations"] = report.iterations;
  j["throughputOpsPerSec"] = finite_or_null(report.throughputOpsPerSec);
  j["throughputUnbounded"] = report.throughputUnbounded;
  j["ci99Low"] = finite_or_null(report.ci99Low);
  j["ci99High"] = finite_or_null(report.ci99High);
  j["meanLatencyMillis"] = report.meanLatencyMillis;
  j["p50LatencyMillis"] = report.p50LatencyMillis;
  j["p99LatencyMillis"] = report.p99LatencyMillis;
  j["localHitRate"] = report.localHitRate;
  j["convergedLocalHitRate"] = report.convergedLocalHitRate;
  j["convergedThroughputOpsPerSec"] =
      finite_or_null(report.convergedThroughputOpsPerSec);
  j["convergedUnbounded"] = report.convergedUnbounded;
  j["failures"] = report.failures;
  j["daemonPasses"] = report.daemonPasses;
  nlohmann::ordered_json iteration_throughputs = nlohmann::ordered_json::array();
  for (double throughput : report.iterationThroughputs) {
    iteration_throughputs.push_back(finite_or_null(throughput));
  }
  j["iterationThroughputs"] = iteration_throughputs;
  return j.dump(2);
}

Comparison compare_reports(const std::vector<BenchReport>& reports) {
  if (reports.size() < 2) {
    throw std::invalid_argument("need at least two reports to compare");
  }
  require_matching_workloads(reports);

  Comparison comparison;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t k = 0; k < reports.size(); ++k) {
      if (i == k) continue;
      const BenchReport& a = reports[i];
      const BenchReport& b = reports[k];
      ComparisonEntry entry;
      entry.numerator = a.scenario;
      entry.denominator = b.scenario;

      bool a_inf = !std::isfinite(a.throughputOpsPerSec);
      bool b_inf = !std::isfinite(b.throughputOpsPerSec);
      if (a_inf && b_inf) {
        entry.ratio = 1.0;
        entry.capped = true;
        entry.ordering = a.scenario + " ~ " + b.scenario;
      } else if (a_inf) {
        entry.ratio = kRatioCap;
        entry.capped = true;
        entry.ordering = a.scenario + " > " + b.scenario;
      } else if (b_inf) {
        entry.ratio = 0.0;
        entry.capped = true;
        entry.ordering = b.scenario + " > " + a.scenario;
      } else {
        double raw = a.throughputOpsPerSec / b.throughputOpsPerSec;
        entry.capped = raw > kRatioCap;
        entry.ratio = std::min(raw, kRatioCap);
        if (a.throughputOpsPerSec > b.throughputOpsPerSec) {
          entry.ordering = a.scenario + " > " + b.scenario;
        } else if (a.throughputOpsPerSec < b.throughputOpsPerSec) {
          entry.ordering = b.scenario + " > " + a.scenario;
        } else {
          entry.ordering = a.scenario + " ~ " + b.scenario;
        }
      }
      comparison.entries.push_back(std::move(entry));
    }
  }
  return comparison;
}

std::string comparison_to_json(const Comparison& comparison) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& entry : comparison.entries) {
    nlohmann::ordered_json j;
    j["numerator"] = entry.numerator;
    j["denominator"] = entry.denominator;
    j["ratio"] = entry.ratio;
    j["capped"] = entry.capped;
    j["ordering"] = entry.ordering;
    entries.push_back(j);
  }
  nlohmann::ordered_json j;
  j["entries"] = entries;
  return j.dump(2);
}

std::string report_table(const std::vector<BenchReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(11) << "scenario" << std::right
      << std::setw(14) << "ops/sec" << std::setw(12) << "mean ms"
      << std::setw(10) << "p50 ms" << std::setw(10) << "p99 ms"
      << std::setw(11) << "local-hit" << std::setw(12) << "conv-hit"
      << std::setw(10) << "failures" << "\n";
  for (const auto& report : reports) {
    out << std::left << std::setw(11) << report.scenario << std::right
        << std::fixed << std::setprecision(2) << std::setw(14);
    if (std::isfinite(report.throughputOpsPerSec)) {
      out << report.throughputOpsPerSec;
    } else {
      out << "inf";
    }
    out << std::setw(12) << report.meanLatencyMillis << std::setw(10)
        << report.p50LatencyMillis << std::setw(10) << report.p99LatencyMillis
        << std::setw(11) << std::setprecision(4) << report.localHitRate
        << std::setw(12) << report.convergedLocalHitRate << std::setw(10)
        << report.failures << "\n";
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
  }
  return out.str();
}

}  // namespace redynis
