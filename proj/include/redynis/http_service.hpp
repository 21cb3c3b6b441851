#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "redynis/core_model.hpp"
#include "redynis/kv_backend.hpp"
#include "redynis/metadata_store.hpp"
#include "redynis/node_service.hpp"

namespace redynis {

// Applies access events on a worker thread so the fetch response path never
// waits on the metadata layer.
class AsyncMetricsSink final : public MetricsSink {
 public:
  explicit AsyncMetricsSink(MetadataApi& meta);
  ~AsyncMetricsSink() override;

  void record(const AccessEvent& event) override;
  // Blocks until every queued event has been applied.
  void flush();
  void stop();

 private:
  void run();

  MetadataApi& meta_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable drained_;
  std::deque<AccessEvent> queue_;
  bool stopping_ = false;
  bool busy_ = false;
  std::thread worker_;
};

struct NodeAddress {
  std::string host;
  int port = 0;
};

struct HttpNodeConfig {
  NodeId id;
  std::string listenHost = "127.0.0.1";
  int port = 0;  // 0 picks any free port
  std::map<NodeId, NodeAddress> peers;  // other nodes, by id
  NodeId serializer;    // must be this node or one of the peers
  NodeId metadataHost;  // node holding the authoritative metadata store;
                        // defaults to the serializer
};

// One Redynis node over HTTP/1.1. The metadata-host node holds the
// authoritative metadata store; other nodes reach it through the same
// interface over the wire.
//
// Public surface:
//   GET  /kv/{key}    fetch (X-Served-By / X-Remote headers), 404 when absent
//   PUT  /kv/{key}    store, {"success":...,"path":...}; 502 on relay failure
//   GET  /meta/{key}  metadata JSON, 404 when absent
//   PUT  /meta/{key}  seed metadata verbatim (test harness)
//   GET  /health      {"node":...,"role":"serializer"|"replica"}
class HttpNodeServer {
 public:
  explicit HttpNodeServer(HttpNodeConfig config);
  ~HttpNodeServer();

  HttpNodeServer(const HttpNodeServer&) = delete;
  HttpNodeServer& operator=(const HttpNodeServer&) = delete;

  // Binds and serves on a background thread. False on bind failure.
  bool start();
  // Blocks until the server stops (CLI serve mode).
  void wait();
  void stop();

  int port() const;
  const NodeId& id() const;
  bool is_serializer() const;

  KvBackend& local_backend();
  NodeService& service();
  // Drains pending access events (tests).
  void flush_metrics();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace redynis
