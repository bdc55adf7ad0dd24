#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpcite/analytics.hpp"
#include "bpcite/citation_engine.hpp"
#include "bpcite/corpus.hpp"
#include "bpcite/explainer.hpp"
#include "bpcite/store.hpp"

namespace httplib {
class Server;
}

namespace bpcite {

using QueryParams = std::map<std::string, std::string>;

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// Read-only JSON API over one immutable store snapshot.
class Api {
 public:
  static constexpr std::string_view kSchema = "bpcite.api/1";

  /// Loads corpus, model and citation index; refuses artifacts built from
  /// different corpus/model versions.
  explicit Api(const ProjectStore& store);
  Api(Corpus corpus, ModelArtifact model, std::vector<CitationRecord> records, LimeConfig lime = {});

  /// Never throws; errors become 4xx payloads.
  ApiResponse handle(std::string_view path, const QueryParams& params) const;

  nlohmann::json health() const;
  nlohmann::json bps() const;
  nlohmann::json filters() const;
  nlohmann::json timeline(const QueryParams& params) const;
  nlohmann::json bar(const QueryParams& params) const;
  nlohmann::json document(const QueryParams& params) const;

 private:
  const Document& find_document(const std::string& id) const;
  const BindingPrecedent& find_precedent(BpId bp) const;
  const Eigen::VectorXd& statement_latent(BpId bp) const;
  Explanation lime(const Document& doc, BpId bp) const;

  Corpus corpus_;
  ModelArtifact model_;
  std::vector<CitationRecord> records_;
  LimeConfig lime_config_;
  std::map<std::string, std::size_t> doc_index_;
  std::map<BpId, Eigen::VectorXd> statement_latents_;

  mutable std::mutex lime_mutex_;
  mutable std::map<std::pair<std::string, BpId>, Explanation> lime_cache_;
};

/// Thin HTTP front end; GET only.
class HttpServer {
 public:
  explicit HttpServer(const Api& api);
  ~HttpServer();

  /// Binds "host:port" (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& bind);
  /// Blocks serving on the calling thread.
  void run(const std::string& bind);
  void stop();

 private:
  static std::pair<std::string, int> parse_bind(const std::string& bind);

  const Api& api_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace bpcite
