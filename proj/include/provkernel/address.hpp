#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace provkernel {

// Identity of one Item: a random 128-bit UUID in canonical 8-4-4-4-12 form.
class ItemPath {
 public:
  ItemPath() = default;

  static ItemPath generate();
  // Throws InvalidPath unless `text` is a canonical lowercase UUID.
  static ItemPath parse(std::string_view text);

  const std::string& str() const noexcept { return uuid_; }
  bool empty() const noexcept { return uuid_.empty(); }

  auto operator<=>(const ItemPath&) const = default;

 private:
  explicit ItemPath(std::string uuid) : uuid_(std::move(uuid)) {}
  std::string uuid_;
};

enum class ClusterKind { Property, Workflow, Event, Outcome, View, Collection, Agent };

inline constexpr ClusterKind kAllClusterKinds[] = {
    ClusterKind::Property, ClusterKind::Workflow,   ClusterKind::Event, ClusterKind::Outcome,
    ClusterKind::View,     ClusterKind::Collection, ClusterKind::Agent,
};

// Root element name of documents of this kind ("property", "event", ...).
std::string_view element_name(ClusterKind kind);
// Directory / URL segment for this kind ("properties", "events", ...).
std::string_view directory_name(ClusterKind kind);
// Accepts either the element or the directory spelling. Throws InvalidPath.
ClusterKind parse_cluster_kind(std::string_view text);
// Event and Workflow documents are write-once.
bool is_immutable(ClusterKind kind);

struct ClusterPath {
  ItemPath item;
  ClusterKind kind = ClusterKind::Property;
  std::string path;

  // Validates the relative path; throws InvalidPath.
  static ClusterPath make(ItemPath item, ClusterKind kind, std::string path);
  // Parses "<uuid>/<kind>/<relative path>".
  static ClusterPath parse(std::string_view text);

  std::string to_string() const;

  auto operator<=>(const ClusterPath&) const = default;
};

}  // namespace provkernel
