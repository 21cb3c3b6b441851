#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "redynis/core_model.hpp"
#include "redynis/kv_backend.hpp"

namespace redynis {

enum class Distribution { Uniform, Skewed };

std::optional<Distribution> parse_distribution(const std::string& name);
const char* to_string(Distribution distribution);

struct WorkloadConfig {
  std::uint64_t totalRequests = 100000;
  int readPercent = 100;  // [50, 100]
  Distribution distribution = Distribution::Uniform;
  std::uint64_t keyCount = 10000;
  double hotFraction = 0.10;        // share of keys in the hot set
  double hotAccessFraction = 0.90;  // share of requests hitting the hot set
  std::vector<NodeId> originNodes;
  std::uint64_t seed = 0;
  // Off by default. When > 0 the skewed draw follows a true Zipf curve with
  // this exponent instead of the two-tier hot-set model.
  double zipfExponent = 0.0;

  bool operator==(const WorkloadConfig&) const = default;
};

std::optional<std::string> validate_workload(const WorkloadConfig& config);

enum class RequestKind { Read, Write };

struct Request {
  NodeId origin;
  RequestKind kind = RequestKind::Read;
  std::string key;
  StoredValue value;  // writes only
};

// Deterministic per seed. Exactly floor(totalRequests * readPercent / 100)
// reads; origins round-robin over originNodes; keys drawn per the configured
// popularity model (writes use the same model as reads).
std::vector<Request> generate(const WorkloadConfig& config);

std::map<std::string, std::uint64_t> empirical_distribution(
    const std::vector<Request>& requests);

// Zero-padded key names, stable across key counts of the same magnitude.
std::string key_name(std::uint64_t index, std::uint64_t key_count);
std::vector<std::string> key_names(std::uint64_t key_count);

std::uint64_t hot_key_count(const WorkloadConfig& config);

// JSON-lines trace format, one request per line.
std::string request_to_json(const Request& request);
Request request_from_json(const std::string& line);
std::vector<Request> trace_from_jsonl(std::istream& in);

// Uniform integer in [0, bound) from the engine, without modulo bias.
std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound);
// Uniform double in [0, 1).
double unit_rand(std::mt19937_64& rng);

}  // namespace redynis
