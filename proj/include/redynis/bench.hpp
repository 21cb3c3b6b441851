#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redynis/cluster.hpp"
#include "redynis/workload.hpp"

namespace redynis {

struct ReplayOptions {
  std::int64_t serviceCostMillis = 1;  // charged per request in all scenarios
  int streamsPerNode = 1;
  // Fraction of each run (trailing, by request count) treated as the
  // converged phase when reporting post-warmup statistics.
  double convergedWindowFraction = 0.25;
};

struct RequestRecord {
  std::int64_t startMillis = 0;
  std::int64_t transportLatencyMillis = 0;
  bool read = false;
  bool local = false;  // reads only: served without a remote hop
  bool failed = false;
};

struct ReplayTrace {
  std::vector<RequestRecord> records;  // ordered by start time
  std::int64_t elapsedMillis = 0;      // last stream completion
  std::uint64_t failures = 0;
  std::uint64_t daemonPasses = 0;
};

// Deterministic event loop: one virtual clock per client stream, requests
// partitioned per origin round-robin over its streams, daemon passes fired
// at interval boundaries between request starts.
ReplayTrace replay(Cluster& cluster, const std::vector<Request>& requests,
                   const ReplayOptions& options);

struct BenchReport {
  std::string scenario;
  WorkloadConfig workload;
  OwnershipPolicy policy;
  SimConfig sim;
  std::int64_t serviceCostMillis = 1;
  int iterations = 1;

  double throughputOpsPerSec = 0.0;  // simulated-time basis, mean over iterations
  bool throughputUnbounded = false;  // a run finished in zero simulated time
  double ci99Low = 0.0;
  double ci99High = 0.0;
  double meanLatencyMillis = 0.0;  // transport latency of the hops taken
  double p50LatencyMillis = 0.0;
  double p99LatencyMillis = 0.0;
  double localHitRate = 0.0;  // fetches served without a remote hop
  double convergedLocalHitRate = 0.0;
  double convergedThroughputOpsPerSec = 0.0;
  bool convergedUnbounded = false;
  std::uint64_t failures = 0;
  std::uint64_t daemonPasses = 0;
  std::vector<double> iterationThroughputs;
};

// Resets the cluster, injects the scenario and replays the workload once per
// iteration. Iteration i regenerates the trace with seed (workload.seed + i)
// so the 99% confidence interval reflects seed-to-seed variation.
BenchReport run_scenario(Cluster& cluster, Scenario scenario,
                         const WorkloadConfig& workload,
                         const ReplayOptions& options, int iterations);

struct ComparisonEntry {
  std::string numerator;
  std::string denominator;
  double ratio = 0.0;
  bool capped = false;  // degenerate division (zero-elapsed run)
  std::string ordering;
};

struct Comparison {
  std::vector<ComparisonEntry> entries;
};

// Pairwise throughput ratios and ordering verdicts. Throws
// std::invalid_argument when the reports were not produced from the same
// workload shape.
Comparison compare_reports(const std::vector<BenchReport>& reports);

std::string report_to_json(const BenchReport& report);
std::string comparison_to_json(const Comparison& comparison);
std::string report_table(const std::vector<BenchReport>& reports);

// Statistics helpers (pure, test-visible).
double percentile(std::vector<double> values, double p);
// Two-sided 99% Student-t critical value for the given degrees of freedom.
double student_t_99(int degrees_of_freedom);

}  // namespace redynis
