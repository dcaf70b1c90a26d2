#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evl/annotator.hpp"
#include "evl/enrichment.hpp"

namespace evl {

inline constexpr std::size_t kDefaultRelatedLimit = 6;

enum class NodeRole { parent, related, label };
enum class ColorRole { blue, green, pink };

std::string_view role_name(NodeRole r);
std::string_view color_name(ColorRole c);
constexpr ColorRole color_for(NodeRole r) {
  switch (r) {
    case NodeRole::parent: return ColorRole::blue;
    case NodeRole::related: return ColorRole::green;
    case NodeRole::label: return ColorRole::pink;
  }
  return ColorRole::blue;
}

struct GraphNode {
  std::string node_id;
  std::string text;
  NodeRole role = NodeRole::parent;

  ColorRole color() const { return color_for(role); }

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::string from;
  std::string to;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct EntityGraph {
  std::size_t segment_index = 0;
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  friend bool operator==(const EntityGraph&, const EntityGraph&) = default;
};

/// Bundles keyed by text::normalize(annotation.lookup_name()).
using BundleMap = std::map<std::string, EnrichmentBundle>;

/// One star per distinct normalized surface, in first-occurrence order: the
/// entity (blue), its category and differing record labels (pink), and up to
/// `related_limit` related words (green). A related word equal to a label is
/// dropped in favour of the label. A missing bundle counts as empty.
EntityGraph build_graph(std::size_t segment_index, const std::vector<EntityAnnotation>& annotations,
                        const BundleMap& bundles, std::size_t related_limit = kDefaultRelatedLimit);

/// {"segment":n,"nodes":[{"id","text","role","color"}],"edges":[{"from","to"}]}
nlohmann::ordered_json serialize_graph(const EntityGraph& g);

/// Inverse of serialize_graph. Throws std::invalid_argument on schema errors,
/// including a color that does not match the role.
EntityGraph parse_graph(const nlohmann::json& doc);

}  // namespace evl
