#pragma once

#include <memory>
#include <string>

#include "provkernel/storage.hpp"

namespace provkernel {

// ClusterStorage over the service's /storage endpoints. Server-side errors
// come back with their original ErrorCode; transport failures are
// StorageUnavailable.
class RemoteStorage final : public ClusterStorage {
 public:
  // base_url like "http://127.0.0.1:8080". ConfigError if malformed.
  explicit RemoteStorage(const std::string& base_url, int timeout_seconds = 30);
  ~RemoteStorage() override;

  std::optional<StoredDocument> find(const ClusterPath& path) const override;
  std::vector<ClusterPath> list(const ItemPath& item, ClusterKind kind,
                                std::string_view prefix) const override;
  std::vector<ItemPath> items() const override;
  std::string backend_id() const override { return "remote:" + base_url_; }

 protected:
  void do_put(const StoredDocument& doc, bool must_be_absent) override;
  void do_remove(const ClusterPath& path) override;

 private:
  struct Client;
  std::string base_url_;
  std::unique_ptr<Client> client_;
};

// True for "http://host:port" with an optional trailing slash.
bool is_valid_base_url(const std::string& url);

}  // namespace provkernel
