#include "provkernel/address.hpp"

#include <boost/uuid/uuid.hpp>
#include <boost/uuid/uuid_generators.hpp>
#include <boost/uuid/uuid_io.hpp>

#include <mutex>

#include "provkernel/error.hpp"
#include "provkernel/util.hpp"

namespace provkernel {

ItemPath ItemPath::generate() {
  static std::mutex mutex;
  static boost::uuids::random_generator generator;
  std::lock_guard lock(mutex);
  return ItemPath(boost::uuids::to_string(generator()));
}

ItemPath ItemPath::parse(std::string_view text) {
  bool ok = text.size() == 36;
  for (std::size_t i = 0; ok && i < text.size(); ++i) {
    char c = text[i];
    if (i == 8 || i == 13 || i == 18 || i == 23) ok = c == '-';
    else ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  }
  if (!ok) fail(ErrorCode::InvalidPath, "not a canonical item uuid: '" + std::string(text) + "'");
  return ItemPath(std::string(text));
}

namespace {
struct KindNames {
  ClusterKind kind;
  std::string_view element;
  std::string_view directory;
};

constexpr KindNames kKindNames[] = {
    {ClusterKind::Property, "property", "properties"},
    {ClusterKind::Workflow, "workflow", "workflows"},
    {ClusterKind::Event, "event", "events"},
    {ClusterKind::Outcome, "outcome", "outcomes"},
    {ClusterKind::View, "view", "views"},
    {ClusterKind::Collection, "collection", "collections"},
    {ClusterKind::Agent, "agent", "agents"},
};
}  // namespace

std::string_view element_name(ClusterKind kind) {
  return kKindNames[static_cast<int>(kind)].element;
}

std::string_view directory_name(ClusterKind kind) {
  return kKindNames[static_cast<int>(kind)].directory;
}

ClusterKind parse_cluster_kind(std::string_view text) {
  for (const auto& names : kKindNames) {
    if (names.element == text || names.directory == text) return names.kind;
  }
  fail(ErrorCode::InvalidPath, "unknown cluster kind '" + std::string(text) + "'");
}

bool is_immutable(ClusterKind kind) {
  return kind == ClusterKind::Event || kind == ClusterKind::Workflow;
}

ClusterPath ClusterPath::make(ItemPath item, ClusterKind kind, std::string path) {
  if (item.empty()) fail(ErrorCode::InvalidPath, "cluster path without item");
  if (!is_valid_relative_path(path)) {
    fail(ErrorCode::InvalidPath, "invalid cluster path '" + path + "'");
  }
  return ClusterPath{std::move(item), kind, std::move(path)};
}

ClusterPath ClusterPath::parse(std::string_view text) {
  auto first = text.find('/');
  if (first == std::string_view::npos) fail(ErrorCode::InvalidPath, "malformed cluster path");
  auto second = text.find('/', first + 1);
  if (second == std::string_view::npos) fail(ErrorCode::InvalidPath, "malformed cluster path");
  return make(ItemPath::parse(text.substr(0, first)),
              parse_cluster_kind(text.substr(first + 1, second - first - 1)),
              std::string(text.substr(second + 1)));
}

std::string ClusterPath::to_string() const {
  return item.str() + "/" + std::string(directory_name(kind)) + "/" + path;
}

}  // namespace provkernel
