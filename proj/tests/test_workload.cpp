#include <cmath>
#include <sstream>

#include "doctest.h"
#include "redynis/workload.hpp"

using namespace redynis;

namespace {

WorkloadConfig base_config() {
  WorkloadConfig config;
  config.totalRequests = 10000;
  config.readPercent = 100;
  config.distribution = Distribution::Skewed;
  config.keyCount = 1000;
  config.originNodes = {"node-1", "node-2"};
  config.seed = 42;
  return config;
}

}  // namespace

TEST_CASE("read/write split is exact") {
  auto config = base_config();
  config.readPercent = 100;
  auto all_reads = generate(config);
  CHECK(all_reads.size() == 10000);
  for (const auto& request : all_reads) {
    CHECK(request.kind == RequestKind::Read);
  }

  config.readPercent = 73;
  std::uint64_t reads = 0;
  for (const auto& request : generate(config)) {
    if (request.kind == RequestKind::Read) reads += 1;
  }
  CHECK(reads == 7300);
}

TEST_CASE("same seed, same trace; different seed, different trace") {
  auto config = base_config();
  auto first = generate(config);
  auto second = generate(config);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].key == second[i].key);
    CHECK(first[i].kind == second[i].kind);
    CHECK(first[i].origin == second[i].origin);
  }

  config.seed = 43;
  auto shifted = generate(config);
  bool any_difference = false;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].key != shifted[i].key) {
      any_difference = true;
      break;
    }
  }
  CHECK(any_difference);
}

TEST_CASE("origins round-robin in trace order") {
  auto config = base_config();
  config.totalRequests = 6;
  auto requests = generate(config);
  CHECK(requests[0].origin == "node-1");
  CHECK(requests[1].origin == "node-2");
  CHECK(requests[2].origin == "node-1");
  CHECK(requests[5].origin == "node-2");
}

TEST_CASE("hot set receives its share within 3 sigma") {
  auto config = base_config();  // 10k requests, hot = first 100 of 1000 keys
  auto requests = generate(config);
  std::uint64_t hot_count = hot_key_count(config);
  CHECK(hot_count == 100);

  std::uint64_t hot_hits = 0;
  for (const auto& [key, count] : empirical_distribution(requests)) {
    if (key < key_name(hot_count, config.keyCount)) hot_hits += count;
  }
  // Binomial(10000, 0.9): mean 9000, the spec allows +/- 150
  CHECK(hot_hits >= 8850);
  CHECK(hot_hits <= 9150);
}

TEST_CASE("uniform histogram is flat to a chi-squared sanity bound") {
  WorkloadConfig config;
  config.totalRequests = 100000;
  config.readPercent = 100;
  config.distribution = Distribution::Uniform;
  config.keyCount = 100;
  config.originNodes = {"node-1"};
  config.seed = 7;

  auto histogram = empirical_distribution(generate(config));
  REQUIRE(histogram.size() == 100);
  double expected = 1000.0;
  double chi_squared = 0.0;
  std::uint64_t min_count = UINT64_MAX, max_count = 0;
  for (const auto& [key, count] : histogram) {
    (void)key;
    double diff = static_cast<double>(count) - expected;
    chi_squared += diff * diff / expected;
    min_count = std::min(min_count, count);
    max_count = std::max(max_count, count);
  }
  // chi^2(99) stays under 149 at the 0.999 quantile
  CHECK(chi_squared < 149.0);
  CHECK(static_cast<double>(max_count) / static_cast<double>(min_count) < 1.3);
}

TEST_CASE("true-Zipf option skews harder than the two-tier model") {
  auto config = base_config();
  config.zipfExponent = 1.0;
  auto histogram = empirical_distribution(generate(config));
  // rank-1 key dominates any deep-tail key under zipf(1.0)
  std::uint64_t first = histogram.count(key_name(0, config.keyCount))
                            ? histogram.at(key_name(0, config.keyCount))
                            : 0;
  CHECK(first > 500);  // ~ 10000 / H(1000) ~ 1337
}

TEST_CASE("empirical_distribution of nothing is empty") {
  CHECK(empirical_distribution({}).empty());
}

TEST_CASE("writes carry values, reads do not") {
  auto config = base_config();
  config.readPercent = 50;
  for (const auto& request : generate(config)) {
    if (request.kind == RequestKind::Write) {
      CHECK_FALSE(request.value.empty());
    } else {
      CHECK(request.value.empty());
    }
  }
}

TEST_CASE("invalid configurations are named") {
  auto config = base_config();
  config.readPercent = 30;
  CHECK(validate_workload(config).has_value());
  config = base_config();
  config.readPercent = 101;
  CHECK(validate_workload(config).has_value());
  config = base_config();
  config.hotFraction = 0.0;
  CHECK(validate_workload(config).has_value());
  config = base_config();
  config.hotAccessFraction = 1.0;
  CHECK(validate_workload(config).has_value());
  config = base_config();
  config.originNodes.clear();
  CHECK(validate_workload(config).has_value());
  config = base_config();
  config.keyCount = 0;
  CHECK(validate_workload(config).has_value());
  CHECK_THROWS_AS(generate(config), std::invalid_argument);
}

TEST_CASE("trace JSONL round-trips reads and writes") {
  auto config = base_config();
  config.readPercent = 50;
  config.totalRequests = 200;
  auto requests = generate(config);

  std::stringstream buffer;
  for (const auto& request : requests) {
    buffer << request_to_json(request) << "\n";
  }
  auto parsed = trace_from_jsonl(buffer);
  REQUIRE(parsed.size() == requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    CHECK(parsed[i].origin == requests[i].origin);
    CHECK(parsed[i].kind == requests[i].kind);
    CHECK(parsed[i].key == requests[i].key);
    CHECK(parsed[i].value == requests[i].value);
  }

  std::stringstream bad("{\"origin\":\"n\",\"kind\":\"scan\",\"key\":\"k\"}\n");
  CHECK_THROWS_AS(trace_from_jsonl(bad), std::invalid_argument);
}

TEST_CASE("key names are stable and zero padded") {
  CHECK(key_name(0, 1000) == "key-000");
  CHECK(key_name(42, 1000) == "key-042");
  CHECK(key_name(999, 1000) == "key-999");
  CHECK(key_names(3) ==
        std::vector<std::string>{"key-0", "key-1", "key-2"});
}

TEST_CASE("bounded_rand stays in range and covers the range") {
  std::mt19937_64 rng(5);
  std::vector<bool> seen(10, false);
  for (int i = 0; i < 1000; ++i) {
    auto draw = bounded_rand(rng, 10);
    REQUIRE(draw < 10);
    seen[draw] = true;
  }
  for (bool hit : seen) CHECK(hit);
  CHECK_THROWS_AS(bounded_rand(rng, 0), std::invalid_argument);
}
