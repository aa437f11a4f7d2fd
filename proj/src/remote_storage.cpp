#include "provkernel/remote_storage.hpp"

#include <mutex>
#include <regex>

#include "httplib.h"
#include "provkernel/error.hpp"
#include "provkernel/json_codec.hpp"

namespace provkernel {

bool is_valid_base_url(const std::string& url) {
  static const std::regex pattern(R"(^http://[A-Za-z0-9.\-]+(:[0-9]{1,5})?/?$)");
  return std::regex_match(url, pattern);
}

struct RemoteStorage::Client {
  explicit Client(const std::string& url) : http(url) {}
  std::mutex mutex;
  httplib::Client http;
};

namespace {

std::string document_url(const ClusterPath& path) {
  return "/storage/" + path.item.str() + "/" + std::string(directory_name(path.kind)) + "/" + path.path;
}

[[noreturn]] void raise_from(const httplib::Result& result, const std::string& what) {
  if (!result) {
    fail(ErrorCode::StorageUnavailable, what + ": " + httplib::to_string(result.error()));
  }
  auto body = wire::Json::parse(result->body, nullptr, false);
  ErrorCode code = ErrorCode::StorageUnavailable;
  if (body.is_object() && body.contains("code") && body["code"].is_string() &&
      parse_error_code(body["code"].get<std::string>(), code)) {
    fail(code, body.value("message", what));
  }
  fail(ErrorCode::StorageUnavailable, what + ": HTTP " + std::to_string(result->status));
}

}  // namespace

RemoteStorage::RemoteStorage(const std::string& base_url, int timeout_seconds) {
  if (!is_valid_base_url(base_url)) fail(ErrorCode::ConfigError, "malformed base url '" + base_url + "'");
  base_url_ = base_url.back() == '/' ? base_url.substr(0, base_url.size() - 1) : base_url;
  client_ = std::make_unique<Client>(base_url_);
  client_->http.set_keep_alive(true);
  client_->http.set_tcp_nodelay(true);
  client_->http.set_connection_timeout(timeout_seconds, 0);
  client_->http.set_read_timeout(timeout_seconds, 0);
  client_->http.set_write_timeout(timeout_seconds, 0);
}

RemoteStorage::~RemoteStorage() = default;

std::optional<StoredDocument> RemoteStorage::find(const ClusterPath& path) const {
  std::lock_guard lock(client_->mutex);
  auto result = client_->http.Get(document_url(path));
  if (result && result->status == 200) {
    return StoredDocument{path, result->body, result->get_header_value("X-Written-At")};
  }
  if (result && result->status == 404) {
    auto body = wire::Json::parse(result->body, nullptr, false);
    if (body.is_object() && body.value("code", "") == "NotFound") return std::nullopt;
  }
  raise_from(result, "GET " + path.to_string());
}

std::vector<ClusterPath> RemoteStorage::list(const ItemPath& item, ClusterKind kind,
                                             std::string_view prefix) const {
  std::lock_guard lock(client_->mutex);
  httplib::Params params{{"prefix", std::string(prefix)}};
  auto result = client_->http.Get("/storage/" + item.str() + "/" + std::string(directory_name(kind)), params,
                                  httplib::Headers{});
  if (!result || result->status != 200) raise_from(result, "list " + item.str());
  std::vector<ClusterPath> out;
  wire::Json body = wire::parse_json(result->body);
  for (const auto& path : body.at("paths")) {
    out.push_back(ClusterPath::make(item, kind, path.get<std::string>()));
  }
  return out;
}

std::vector<ItemPath> RemoteStorage::items() const {
  std::lock_guard lock(client_->mutex);
  auto result = client_->http.Get("/storage");
  if (!result || result->status != 200) raise_from(result, "list items");
  std::vector<ItemPath> out;
  wire::Json body = wire::parse_json(result->body);
  for (const auto& item : body.at("items")) {
    out.push_back(ItemPath::parse(item.get<std::string>()));
  }
  return out;
}

void RemoteStorage::do_put(const StoredDocument& doc, bool must_be_absent) {
  std::lock_guard lock(client_->mutex);
  httplib::Headers headers;
  if (must_be_absent) headers.emplace("If-None-Match", "*");
  auto result = client_->http.Put(document_url(doc.path), headers, doc.body, "application/xml");
  if (!result || (result->status != 201 && result->status != 204)) raise_from(result, "PUT " + doc.path.to_string());
}

void RemoteStorage::do_remove(const ClusterPath& path) {
  std::lock_guard lock(client_->mutex);
  auto result = client_->http.Delete(document_url(path));
  if (!result || result->status != 204) raise_from(result, "DELETE " + path.to_string());
}

}  // namespace provkernel
