#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "provkernel/address.hpp"

namespace provkernel {

struct StoredDocument {
  ClusterPath path;
  std::string body;  // well-formed UTF-8 XML
  std::string written_at;
};

// Pluggable persistence for Item clusters. Every operation is atomic on its
// own; cross-operation ordering belongs to the caller.
//
// put() is non-virtual so that all backends share the same rules: the body
// must be well-formed XML whose root element matches the cluster kind, and
// Event/Workflow documents are write-once (an existing one is AlreadyExists
// regardless of `expected_absent`).
class ClusterStorage {
 public:
  virtual ~ClusterStorage() = default;

  void put(const StoredDocument& doc, bool expected_absent);
  // Throws NotFound.
  StoredDocument get(const ClusterPath& path) const;
  virtual std::optional<StoredDocument> find(const ClusterPath& path) const = 0;
  // Lexicographically sorted, filtered by string prefix on the relative path.
  virtual std::vector<ClusterPath> list(const ItemPath& item, ClusterKind kind,
                                        std::string_view prefix) const = 0;
  // ImmutableCluster for Event/Workflow, NotFound when absent.
  void remove(const ClusterPath& path);
  // Every item with at least one stored document, sorted.
  virtual std::vector<ItemPath> items() const = 0;
  virtual std::string backend_id() const = 0;

 protected:
  // Backends may assume the document was validated. When `must_be_absent`
  // they must fail with AlreadyExists atomically if the path exists.
  virtual void do_put(const StoredDocument& doc, bool must_be_absent) = 0;
  virtual void do_remove(const ClusterPath& path) = 0;
};

class MemoryStorage final : public ClusterStorage {
 public:
  std::optional<StoredDocument> find(const ClusterPath& path) const override;
  std::vector<ClusterPath> list(const ItemPath& item, ClusterKind kind,
                                std::string_view prefix) const override;
  std::vector<ItemPath> items() const override;
  std::string backend_id() const override { return "memory"; }

 protected:
  void do_put(const StoredDocument& doc, bool must_be_absent) override;
  void do_remove(const ClusterPath& path) override;

 private:
  mutable std::shared_mutex mutex_;
  std::map<ClusterPath, StoredDocument> docs_;
};

// Layout: <root>/items/<uuid>/<kind directory>/<path>.xml
// Writes go through a temporary file; create-if-absent uses link(2) so the
// check and the write are one atomic step.
class FileStorage final : public ClusterStorage {
 public:
  struct Options {
    bool sync = true;  // fsync each written file
  };

  explicit FileStorage(std::filesystem::path root);
  FileStorage(std::filesystem::path root, Options options);

  const std::filesystem::path& root() const { return root_; }

  std::optional<StoredDocument> find(const ClusterPath& path) const override;
  std::vector<ClusterPath> list(const ItemPath& item, ClusterKind kind,
                                std::string_view prefix) const override;
  std::vector<ItemPath> items() const override;
  std::string backend_id() const override { return "file:" + root_.string(); }

 protected:
  void do_put(const StoredDocument& doc, bool must_be_absent) override;
  void do_remove(const ClusterPath& path) override;

 private:
  std::filesystem::path file_for(const ClusterPath& path) const;

  std::filesystem::path root_;
  Options options_;
};

}  // namespace provkernel
