#include "provkernel/storage.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include "provkernel/error.hpp"
#include "provkernel/util.hpp"
#include "provkernel/xml.hpp"

namespace provkernel {

namespace fs = std::filesystem;

void ClusterStorage::put(const StoredDocument& doc, bool expected_absent) {
  if (!is_valid_relative_path(doc.path.path) || doc.path.item.empty()) {
    fail(ErrorCode::InvalidPath, "invalid cluster path '" + doc.path.path + "'");
  }
  xml::Element root = xml::parse(doc.body);
  if (root.name != element_name(doc.path.kind)) {
    fail(ErrorCode::SchemaViolation, "document root <" + root.name + "> does not match cluster kind " +
                                         std::string(element_name(doc.path.kind)));
  }
  do_put(doc, expected_absent || is_immutable(doc.path.kind));
}

StoredDocument ClusterStorage::get(const ClusterPath& path) const {
  auto doc = find(path);
  if (!doc) fail(ErrorCode::NotFound, "no document at " + path.to_string());
  return std::move(*doc);
}

void ClusterStorage::remove(const ClusterPath& path) {
  if (is_immutable(path.kind)) {
    fail(ErrorCode::ImmutableCluster,
         std::string(directory_name(path.kind)) + " documents cannot be deleted");
  }
  do_remove(path);
}

// ---------------------------------------------------------------------------
// MemoryStorage

std::optional<StoredDocument> MemoryStorage::find(const ClusterPath& path) const {
  std::shared_lock lock(mutex_);
  auto it = docs_.find(path);
  if (it == docs_.end()) return std::nullopt;
  return it->second;
}

std::vector<ClusterPath> MemoryStorage::list(const ItemPath& item, ClusterKind kind,
                                             std::string_view prefix) const {
  std::shared_lock lock(mutex_);
  std::vector<ClusterPath> out;
  ClusterPath lower{item, kind, std::string(prefix)};
  for (auto it = docs_.lower_bound(lower); it != docs_.end(); ++it) {
    const ClusterPath& p = it->first;
    if (p.item != item || p.kind != kind || !p.path.starts_with(prefix)) break;
    out.push_back(p);
  }
  return out;
}

std::vector<ItemPath> MemoryStorage::items() const {
  std::shared_lock lock(mutex_);
  std::vector<ItemPath> out;
  for (const auto& [path, doc] : docs_) {
    if (out.empty() || out.back() != path.item) out.push_back(path.item);
  }
  return out;
}

void MemoryStorage::do_put(const StoredDocument& doc, bool must_be_absent) {
  std::unique_lock lock(mutex_);
  auto it = docs_.find(doc.path);
  if (it != docs_.end() && must_be_absent) {
    fail(ErrorCode::AlreadyExists, "document exists at " + doc.path.to_string());
  }
  StoredDocument stored = doc;
  if (stored.written_at.empty()) stored.written_at = now_utc();
  docs_[doc.path] = std::move(stored);
}

void MemoryStorage::do_remove(const ClusterPath& path) {
  std::unique_lock lock(mutex_);
  if (docs_.erase(path) == 0) fail(ErrorCode::NotFound, "no document at " + path.to_string());
}

// ---------------------------------------------------------------------------
// FileStorage

namespace {

[[noreturn]] void io_failure(const std::string& what, const fs::path& path) {
  fail(ErrorCode::StorageUnavailable, what + " " + path.string() + ": " + std::strerror(errno));
}

std::string format_mtime(const fs::path& path) {
  struct stat st {};
  if (::stat(path.c_str(), &st) != 0) return {};
  std::tm tm{};
  gmtime_r(&st.st_mtim.tv_sec, &tm);
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(st.st_mtim.tv_nsec / 1000000));
  return buffer;
}

std::atomic<unsigned long> temp_counter{0};

}  // namespace

FileStorage::FileStorage(fs::path root) : FileStorage(std::move(root), Options{}) {}

FileStorage::FileStorage(fs::path root, Options options)
    : root_(std::move(root)), options_(options) {
  std::error_code ec;
  fs::create_directories(root_ / "items", ec);
  if (ec) {
    fail(ErrorCode::StorageUnavailable, "cannot create store at " + root_.string() + ": " + ec.message());
  }
  if (::access((root_ / "items").c_str(), W_OK) != 0) io_failure("store not writable:", root_);
}

fs::path FileStorage::file_for(const ClusterPath& path) const {
  return root_ / "items" / path.item.str() / std::string(directory_name(path.kind)) /
         (path.path + ".xml");
}

std::optional<StoredDocument> FileStorage::find(const ClusterPath& path) const {
  fs::path file = file_for(path);
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    if (errno == ENOENT || !fs::exists(file)) return std::nullopt;
    io_failure("cannot read", file);
  }
  std::ostringstream body;
  body << in.rdbuf();
  return StoredDocument{path, body.str(), format_mtime(file)};
}

std::vector<ClusterPath> FileStorage::list(const ItemPath& item, ClusterKind kind,
                                           std::string_view prefix) const {
  fs::path dir = root_ / "items" / item.str() / std::string(directory_name(kind));
  std::vector<ClusterPath> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (auto it = fs::recursive_directory_iterator(dir, ec); it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (ec) fail(ErrorCode::StorageUnavailable, "cannot list " + dir.string() + ": " + ec.message());
    if (!it->is_regular_file()) continue;
    std::string relative = fs::relative(it->path(), dir).generic_string();
    if (!relative.ends_with(".xml")) continue;
    relative.resize(relative.size() - 4);
    if (!relative.starts_with(prefix) || !is_valid_relative_path(relative)) continue;
    out.push_back(ClusterPath{item, kind, std::move(relative)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ItemPath> FileStorage::items() const {
  std::vector<ItemPath> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / "items", ec)) {
    if (!entry.is_directory()) continue;
    try {
      out.push_back(ItemPath::parse(entry.path().filename().string()));
    } catch (const Error&) {
      // Not an item directory.
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void FileStorage::do_put(const StoredDocument& doc, bool must_be_absent) {
  fs::path file = file_for(doc.path);
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  if (ec) fail(ErrorCode::StorageUnavailable, "cannot create " + file.parent_path().string());

  fs::path temp = file;
  temp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(temp_counter++);
  int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) io_failure("cannot create", temp);
  const char* data = doc.body.data();
  std::size_t remaining = doc.body.size();
  while (remaining > 0) {
    ssize_t written = ::write(fd, data, remaining);
    if (written < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      ::unlink(temp.c_str());
      io_failure("cannot write", temp);
    }
    data += written;
    remaining -= static_cast<std::size_t>(written);
  }
  if (options_.sync && ::fsync(fd) != 0) {
    ::close(fd);
    ::unlink(temp.c_str());
    io_failure("cannot sync", temp);
  }
  ::close(fd);

  if (must_be_absent) {
    int rc = ::link(temp.c_str(), file.c_str());
    int err = errno;
    ::unlink(temp.c_str());
    if (rc != 0) {
      if (err == EEXIST) fail(ErrorCode::AlreadyExists, "document exists at " + doc.path.to_string());
      errno = err;
      io_failure("cannot link", file);
    }
  } else if (::rename(temp.c_str(), file.c_str()) != 0) {
    ::unlink(temp.c_str());
    io_failure("cannot rename", file);
  }
}

void FileStorage::do_remove(const ClusterPath& path) {
  fs::path file = file_for(path);
  if (::unlink(file.c_str()) != 0) {
    if (errno == ENOENT) fail(ErrorCode::NotFound, "no document at " + path.to_string());
    io_failure("cannot delete", file);
  }
}

}  // namespace provkernel
