#include "redynis/workload.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace redynis {

std::optional<Distribution> parse_distribution(const std::string& name) {
  if (name == "uniform") return Distribution::Uniform;
  if (name == "skewed") return Distribution::Skewed;
  return std::nullopt;
}

const char* to_string(Distribution distribution) {
  switch (distribution) {
    case Distribution::Uniform: return "uniform";
    case Distribution::Skewed: return "skewed";
  }
  return "unknown";
}

std::optional<std::string> validate_workload(const WorkloadConfig& config) {
  if (config.totalRequests == 0) return "totalRequests must be > 0";
  if (config.readPercent < 50 || config.readPercent > 100) {
    return "readPercent must be in [50, 100]";
  }
  if (config.keyCount == 0) return "keyCount must be > 0";
  if (!(config.hotFraction > 0.0) || !(config.hotFraction < 1.0)) {
    return "hotFraction must be in (0, 1)";
  }
  if (!(config.hotAccessFraction > 0.0) ||
      !(config.hotAccessFraction < 1.0)) {
    return "hotAccessFraction must be in (0, 1)";
  }
  if (config.originNodes.empty()) return "originNodes must be non-empty";
  if (config.zipfExponent < 0.0) return "zipfExponent must be >= 0";
  return std::nullopt;
}

std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bound must be > 0");
  // Rejection sampling over the unbiased prefix of the 64-bit range.
  std::uint64_t threshold = (~bound + 1) % bound;  // 2^64 mod bound
  while (true) {
    std::uint64_t sample = rng();
    if (sample >= threshold) return sample % bound;
  }
}

double unit_rand(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string key_name(std::uint64_t index, std::uint64_t key_count) {
  std::size_t width = std::to_string(key_count == 0 ? 1 : key_count - 1).size();
  std::string digits = std::to_string(index);
  if (digits.size() < width) {
    digits.insert(0, width - digits.size(), '0');
  }
  return "key-" + digits;
}

std::vector<std::string> key_names(std::uint64_t key_count) {
  std::vector<std::string> names;
  names.reserve(key_count);
  for (std::uint64_t i = 0; i < key_count; ++i) {
    names.push_back(key_name(i, key_count));
  }
  return names;
}

std::uint64_t hot_key_count(const WorkloadConfig& config) {
  auto hot = static_cast<std::uint64_t>(
      std::ceil(config.hotFraction * static_cast<double>(config.keyCount)));
  return std::min(std::max<std::uint64_t>(hot, 1), config.keyCount);
}

namespace {

// CDF table for the optional true-Zipf draw over ranks 1..keyCount.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t key_count, double exponent) {
    cdf_.reserve(key_count);
    double sum = 0.0;
    for (std::uint64_t rank = 1; rank <= key_count; ++rank) {
      sum += 1.0 / std::pow(static_cast<double>(rank), exponent);
      cdf_.push_back(sum);
    }
    total_ = sum;
  }

  std::uint64_t draw(std::mt19937_64& rng) const {
    double target = unit_rand(rng) * total_;
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), target);
    if (it == cdf_.end()) return cdf_.size() - 1;
    return static_cast<std::uint64_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
  double total_ = 0.0;
};

}  // namespace

std::vector<Request> generate(const WorkloadConfig& config) {
  if (auto violation = validate_workload(config)) {
    throw std::invalid_argument("invalid workload config: " + *violation);
  }
  std::mt19937_64 rng(config.seed);

  // Exact read/write split, positions shuffled.
  std::uint64_t reads = config.totalRequests *
                        static_cast<std::uint64_t>(config.readPercent) / 100;
  std::vector<RequestKind> kinds(config.totalRequests, RequestKind::Write);
  std::fill(kinds.begin(), kinds.begin() + reads, RequestKind::Read);
  for (std::uint64_t i = config.totalRequests - 1; i > 0; --i) {
    std::uint64_t j = bounded_rand(rng, i + 1);
    std::swap(kinds[i], kinds[j]);
  }

  std::uint64_t hot_count = hot_key_count(config);
  std::uint64_t cold_count = config.keyCount - hot_count;
  std::unique_ptr<ZipfSampler> zipf;
  if (config.distribution == Distribution::Skewed &&
      config.zipfExponent > 0.0) {
    zipf = std::make_unique<ZipfSampler>(config.keyCount, config.zipfExponent);
  }

  std::vector<Request> requests;
  requests.reserve(config.totalRequests);
  for (std::uint64_t i = 0; i < config.totalRequests; ++i) {
    std::uint64_t key_index = 0;
    if (config.distribution == Distribution::Uniform) {
      key_index = bounded_rand(rng, config.keyCount);
    } else if (zipf) {
      key_index = zipf->draw(rng);
    } else if (cold_count == 0 ||
               unit_rand(rng) < config.hotAccessFraction) {
      key_index = bounded_rand(rng, hot_count);
    } else {
      key_index = hot_count + bounded_rand(rng, cold_count);
    }

    Request request;
    request.origin = config.originNodes[i % config.originNodes.size()];
    request.kind = kinds[i];
    request.key = key_name(key_index, config.keyCount);
    if (request.kind == RequestKind::Write) {
      request.value = "v:" + request.key + ":" + std::to_string(i);
    }
    requests.push_back(std::move(request));
  }
  return requests;
}

std::map<std::string, std::uint64_t> empirical_distribution(
    const std::vector<Request>& requests) {
  std::map<std::string, std::uint64_t> histogram;
  for (const auto& request : requests) {
    histogram[request.key] += 1;
  }
  return histogram;
}

std::string request_to_json(const Request& request) {
  nlohmann::ordered_json j;
  j["origin"] = request.origin;
  j["kind"] = request.kind == RequestKind::Read ? "read" : "write";
  j["key"] = request.key;
  if (request.kind == RequestKind::Write) {
    j["value"] = request.value;
  }
  return j.dump();
}

Request request_from_json(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  Request request;
  request.origin = j.at("origin").get<std::string>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "read") {
    request.kind = RequestKind::Read;
  } else if (kind == "write") {
    request.kind = RequestKind::Write;
  } else {
    throw std::invalid_argument("unknown request kind: " + kind);
  }
  request.key = j.at("key").get<std::string>();
  if (request.kind == RequestKind::Write) {
    request.value = j.value("value", "");
  }
  return request;
}

std::vector<Request> trace_from_jsonl(std::istream& in) {
  std::vector<Request> requests;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    line_number += 1;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      requests.push_back(request_from_json(line));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "line " << line_number << ": " << e.what();
      throw std::invalid_argument(msg.str());
    }
  }
  return requests;
}

}  // namespace redynis
