#include "redynis/http_service.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <utility>

#include "httplib.h"
#include "json.hpp"

namespace redynis {

AsyncMetricsSink::AsyncMetricsSink(MetadataApi& meta) : meta_(meta) {
  worker_ = std::thread([this] { run(); });
}

AsyncMetricsSink::~AsyncMetricsSink() { stop(); }

void AsyncMetricsSink::record(const AccessEvent& event) {
  {
    std::lock_guard guard(mutex_);
    if (stopping_) return;
    queue_.push_back(event);
  }
  wake_.notify_one();
}

void AsyncMetricsSink::flush() {
  std::unique_lock lock(mutex_);
  drained_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void AsyncMetricsSink::stop() {
  {
    std::lock_guard guard(mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  wake_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void AsyncMetricsSink::run() {
  std::unique_lock lock(mutex_);
  while (true) {
    wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty() && stopping_) break;
    AccessEvent event = queue_.front();
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    meta_.record_access(event);
    lock.lock();
    busy_ = false;
    if (queue_.empty()) drained_.notify_all();
  }
}

namespace {

std::int64_t wall_millis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Peer access over the wire: raw store reads/writes plus the relay hop to
// the write serializer.
class HttpPeerClient final : public PeerClient {
 public:
  explicit HttpPeerClient(std::map<NodeId, NodeAddress> peers)
      : peers_(std::move(peers)) {}

  std::optional<StoredValue> peer_get(const NodeId& peer,
                                      const std::string& key) override {
    auto client = connect(peer);
    if (!client) return std::nullopt;
    auto res = client->Get("/internal/kv/" + key);
    if (!res || res->status != 200) return std::nullopt;
    return res->body;
  }

  bool peer_put(const NodeId& peer, const std::string& key,
                const StoredValue& value) override {
    auto client = connect(peer);
    if (!client) return false;
    auto res = client->Put("/internal/kv/" + key, value,
                           "application/octet-stream");
    return res && res->status == 200;
  }

  std::optional<StoreResult> relay_store(const NodeId& serializer,
                                         const NodeId& origin,
                                         const std::string& key,
                                         const StoredValue& value,
                                         std::int64_t now_millis) override {
    auto client = connect(serializer);
    if (!client) return std::nullopt;
    httplib::Headers headers{
        {"X-Origin-Node", origin},
        {"X-Request-Millis", std::to_string(now_millis)}};
    auto res = client->Put("/internal/relay/" + key, headers, value,
                           "application/octet-stream");
    if (!res || res->status != 200) return std::nullopt;
    try {
      auto j = nlohmann::json::parse(res->body);
      StoreResult result;
      result.success = j.at("success").get<bool>();
      std::string path = j.value("path", "serializer-direct");
      if (path == "created") {
        result.path = StorePath::Created;
      } else {
        result.path = StorePath::SerializerDirect;
      }
      return result;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

 private:
  std::unique_ptr<httplib::Client> connect(const NodeId& peer) {
    auto it = peers_.find(peer);
    if (it == peers_.end()) return nullptr;
    auto client =
        std::make_unique<httplib::Client>(it->second.host, it->second.port);
    client->set_connection_timeout(5, 0);
    client->set_read_timeout(30, 0);
    return client;
  }

  std::map<NodeId, NodeAddress> peers_;
};

// Metadata layer as seen from a replica: every call goes to the authority.
class HttpMetadataClient final : public MetadataApi {
 public:
  explicit HttpMetadataClient(NodeAddress authority)
      : authority_(std::move(authority)) {}

  std::optional<KeyMetadata> meta_get(const std::string& key) override {
    auto client = connect();
    auto res = client->Get("/meta/" + key);
    if (!res || res->status != 200) return std::nullopt;
    try {
      return metadata_from_json(res->body);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  MetaCreateResult meta_create(const std::string& key,
                               const NodeId& initial_host,
                               std::int64_t at_millis) override {
    nlohmann::json j{{"key", key}, {"host", initial_host},
                     {"atMillis", at_millis}};
    auto client = connect();
    auto res = client->Post("/internal/meta/create", j.dump(),
                            "application/json");
    if (!res) return MetaCreateResult::TransportError;
    if (res->status == 409) return MetaCreateResult::AlreadyExists;
    if (res->status != 200) return MetaCreateResult::TransportError;
    return MetaCreateResult::Ok;
  }

  void record_access(const AccessEvent& event) override {
    nlohmann::json j{{"key", event.key}, {"node", event.accessor},
                     {"atMillis", event.atMillis}};
    auto client = connect();
    client->Post("/internal/meta/access", j.dump(), "application/json");
  }

  bool meta_set_hosts(const std::string& key,
                      const std::set<NodeId>& new_hosts) override {
    nlohmann::json j{{"key", key}, {"hosts", new_hosts}};
    auto client = connect();
    auto res = client->Post("/internal/meta/set-hosts", j.dump(),
                            "application/json");
    return res && res->status == 200;
  }

  void meta_delete(const std::string& key) override {
    nlohmann::json j{{"key", key}};
    auto client = connect();
    client->Post("/internal/meta/delete", j.dump(), "application/json");
  }

  std::vector<std::pair<std::string, KeyMetadata>> meta_scan() override {
    auto client = connect();
    auto res = client->Get("/internal/meta/scan");
    std::vector<std::pair<std::string, KeyMetadata>> entries;
    if (!res || res->status != 200) return entries;
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (!j.is_array()) return entries;
    for (const auto& entry : j) {
      try {
        entries.emplace_back(entry.at("key").get<std::string>(),
                             metadata_from_json(entry.at("metadata").dump()));
      } catch (const std::exception&) {
      }
    }
    return entries;
  }

  bool meta_put_raw(const std::string& key, const std::string& metadata_json) {
    nlohmann::json j{{"key", key},
                     {"metadata", nlohmann::json::parse(metadata_json)}};
    auto client = connect();
    auto res =
        client->Post("/internal/meta/put", j.dump(), "application/json");
    return res && res->status == 200;
  }

 private:
  std::unique_ptr<httplib::Client> connect() {
    auto client =
        std::make_unique<httplib::Client>(authority_.host, authority_.port);
    client->set_connection_timeout(5, 0);
    client->set_read_timeout(30, 0);
    return client;
  }

  NodeAddress authority_;
};

}  // namespace

struct HttpNodeServer::Impl {
  HttpNodeConfig config;
  ClusterTopology topology;
  InMemoryKvBackend backend;
  MetadataStore authority_store;          // used when this node serializes
  std::unique_ptr<HttpMetadataClient> meta_client;  // used otherwise
  MetadataApi* meta = nullptr;
  std::unique_ptr<AsyncMetricsSink> sink;
  std::unique_ptr<HttpPeerClient> peers;
  std::unique_ptr<NodeService> node;
  httplib::Server server;
  std::thread server_thread;
  int bound_port = 0;

  explicit Impl(HttpNodeConfig cfg) : config(std::move(cfg)) {
    std::vector<NodeId> nodes;
    nodes.push_back(config.id);
    for (const auto& [peer, address] : config.peers) {
      (void)address;
      if (peer == config.id) {
        throw std::invalid_argument("peer list must not include this node");
      }
      nodes.push_back(peer);
    }
    std::sort(nodes.begin(), nodes.end());
    if (config.serializer.empty()) config.serializer = config.id;
    if (config.metadataHost.empty()) config.metadataHost = config.serializer;
    if (config.serializer != config.id &&
        !config.peers.contains(config.serializer)) {
      throw std::invalid_argument("serializer " + config.serializer +
                                  " is not this node or a known peer");
    }
    // Real deployments see real network latency; the simulated matrix is all
    // zeros here and X-Remote carries the locality signal.
    topology = ClusterTopology::uniform(nodes, config.serializer, 0);

    if (config.id == config.metadataHost) {
      meta = &authority_store;
    } else {
      auto it = config.peers.find(config.metadataHost);
      if (it == config.peers.end()) {
        throw std::invalid_argument("metadata host " + config.metadataHost +
                                    " is not this node or a known peer");
      }
      meta_client = std::make_unique<HttpMetadataClient>(it->second);
      meta = meta_client.get();
    }
    sink = std::make_unique<AsyncMetricsSink>(*meta);
    peers = std::make_unique<HttpPeerClient>(config.peers);
    node = std::make_unique<NodeService>(config.id, topology, backend, *meta,
                                         *peers, *sink);
    install_routes();
  }

  ~Impl() {
    stop();
    sink->stop();
  }

  void install_routes() {
    server.Get("/health", [this](const httplib::Request&,
                                 httplib::Response& res) {
      nlohmann::ordered_json j;
      j["node"] = config.id;
      j["role"] = config.id == config.serializer ? "serializer" : "replica";
      res.set_content(j.dump(), "application/json");
    });

    server.Get("/kv/:key", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      const std::string& key = req.path_params.at("key");
      FetchResult result = node->fetch(key, wall_millis());
      res.set_header("X-Served-By", result.servedBy);
      res.set_header("X-Remote", result.remote ? "true" : "false");
      switch (result.status) {
        case FetchStatus::Found:
          res.status = 200;
          res.set_content(*result.value, "application/octet-stream");
          break;
        case FetchStatus::Absent:
          res.status = 404;
          break;
        case FetchStatus::Diverged:
          res.status = 500;
          res.set_content("metadata/data divergence", "text/plain");
          break;
      }
    });

    server.Put("/kv/:key", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      const std::string& key = req.path_params.at("key");
      StoreResult result = node->store(key, req.body, wall_millis());
      nlohmann::ordered_json j;
      j["success"] = result.success;
      j["path"] = to_string(result.path);
      if (result.success) {
        res.status = 200;
      } else if (result.path == StorePath::SerializerRelayed) {
        res.status = 502;
      } else {
        res.status = 500;
      }
      res.set_content(j.dump(), "application/json");
    });

    server.Get("/meta/:key", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      const std::string& key = req.path_params.at("key");
      auto meta_value = meta->meta_get(key);
      if (!meta_value) {
        res.status = 404;
        return;
      }
      res.set_content(metadata_to_json(*meta_value), "application/json");
    });

    server.Put("/meta/:key", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      const std::string& key = req.path_params.at("key");
      try {
        KeyMetadata parsed = metadata_from_json(req.body);
        if (config.id == config.metadataHost) {
          authority_store.meta_put(key, std::move(parsed));
          res.status = 200;
        } else {
          res.status = meta_client->meta_put_raw(key, req.body) ? 200 : 502;
        }
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
      }
    });

    server.Get("/internal/kv/:key", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      auto value = backend.get(req.path_params.at("key"));
      if (!value) {
        res.status = 404;
        return;
      }
      res.set_content(*value, "application/octet-stream");
    });

    server.Put("/internal/kv/:key", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      res.status = backend.put(req.path_params.at("key"), req.body) ? 200 : 500;
    });

    server.Put("/internal/relay/:key", [this](const httplib::Request& req,
                                              httplib::Response& res) {
      const std::string& key = req.path_params.at("key");
      NodeId origin = req.get_header_value("X-Origin-Node");
      std::int64_t at = wall_millis();
      if (req.has_header("X-Request-Millis")) {
        try {
          at = std::stoll(req.get_header_value("X-Request-Millis"));
        } catch (const std::exception&) {
        }
      }
      StoreResult result = node->serialize_store(key, req.body, at, origin);
      nlohmann::ordered_json j;
      j["success"] = result.success;
      j["path"] = to_string(result.path);
      res.status = result.success ? 200 : 500;
      res.set_content(j.dump(), "application/json");
    });

    if (config.id == config.metadataHost) {
      install_authority_routes();
    }
  }

  void install_authority_routes() {
    server.Post("/internal/meta/access", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      auto j = nlohmann::json::parse(req.body, nullptr, false);
      if (!j.is_object()) {
        res.status = 400;
        return;
      }
      AccessEvent event;
      event.key = j.value("key", "");
      event.accessor = j.value("node", "");
      event.atMillis = j.value("atMillis", std::int64_t{0});
      authority_store.record_access(event);
      res.status = 200;
    });

    server.Post("/internal/meta/create", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      auto j = nlohmann::json::parse(req.body, nullptr, false);
      if (!j.is_object()) {
        res.status = 400;
        return;
      }
      auto outcome = authority_store.meta_create(
          j.value("key", ""), j.value("host", ""),
          j.value("atMillis", std::int64_t{0}));
      res.status = outcome == MetaCreateResult::Ok ? 200 : 409;
    });

    server.Post("/internal/meta/set-hosts", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
      auto j = nlohmann::json::parse(req.body, nullptr, false);
      if (!j.is_object() || !j.contains("hosts")) {
        res.status = 400;
        return;
      }
      std::set<NodeId> hosts;
      for (const auto& host : j["hosts"]) hosts.insert(host.get<std::string>());
      res.status =
          authority_store.meta_set_hosts(j.value("key", ""), hosts) ? 200 : 400;
    });

    server.Post("/internal/meta/delete", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      auto j = nlohmann::json::parse(req.body, nullptr, false);
      if (!j.is_object()) {
        res.status = 400;
        return;
      }
      authority_store.meta_delete(j.value("key", ""));
      res.status = 200;
    });

    server.Post("/internal/meta/put", [this](const httplib::Request& req,
                                             httplib::Response& res) {
      auto j = nlohmann::json::parse(req.body, nullptr, false);
      if (!j.is_object() || !j.contains("key") || !j.contains("metadata")) {
        res.status = 400;
        return;
      }
      try {
        authority_store.meta_put(j["key"].get<std::string>(),
                                 metadata_from_json(j["metadata"].dump()));
        res.status = 200;
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(e.what(), "text/plain");
      }
    });

    server.Get("/internal/meta/scan", [this](const httplib::Request&,
                                             httplib::Response& res) {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& [key, entry] : authority_store.meta_scan()) {
        nlohmann::json item;
        item["key"] = key;
        item["metadata"] = nlohmann::json::parse(metadata_to_json(entry));
        out.push_back(std::move(item));
      }
      res.set_content(out.dump(), "application/json");
    });
  }

  bool start() {
    if (config.port == 0) {
      bound_port = server.bind_to_any_port(config.listenHost);
      if (bound_port <= 0) return false;
    } else {
      if (!server.bind_to_port(config.listenHost, config.port)) return false;
      bound_port = config.port;
    }
    server_thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    return true;
  }

  void stop() {
    if (server.is_running()) server.stop();
    if (server_thread.joinable()) server_thread.join();
  }
};

HttpNodeServer::HttpNodeServer(HttpNodeConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpNodeServer::~HttpNodeServer() = default;

bool HttpNodeServer::start() { return impl_->start(); }

void HttpNodeServer::wait() {
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

void HttpNodeServer::stop() { impl_->stop(); }

int HttpNodeServer::port() const { return impl_->bound_port; }

const NodeId& HttpNodeServer::id() const { return impl_->config.id; }

bool HttpNodeServer::is_serializer() const {
  return impl_->config.id == impl_->config.serializer;
}

KvBackend& HttpNodeServer::local_backend() { return impl_->backend; }

NodeService& HttpNodeServer::service() { return *impl_->node; }

void HttpNodeServer::flush_metrics() { impl_->sink->flush(); }

}  // namespace redynis
