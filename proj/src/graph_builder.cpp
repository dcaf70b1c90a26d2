#include "evl/graph_builder.hpp"

#include <limits>
#include <set>
#include <stdexcept>

#include "evl/text.hpp"

namespace evl {

namespace {

std::string node_id(std::size_t segment, NodeRole role, std::string_view parent, std::string_view text) {
  std::string key = std::to_string(segment);
  key += '\x1f';
  key += role_name(role);
  key += '\x1f';
  key += parent;
  key += '\x1f';
  key += text;
  return "n" + text::hex64(text::fnv1a64(key), 12);
}

NodeRole parse_role(const std::string& s) {
  if (s == "parent") return NodeRole::parent;
  if (s == "related") return NodeRole::related;
  if (s == "label") return NodeRole::label;
  throw std::invalid_argument("unknown node role '" + s + "'");
}

const std::string& required_string(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    throw std::invalid_argument(std::string("graph: missing string field '") + key + "'");
  }
  return j[key].get_ref<const std::string&>();
}

}  // namespace

std::string_view role_name(NodeRole r) {
  switch (r) {
    case NodeRole::parent: return "parent";
    case NodeRole::related: return "related";
    case NodeRole::label: return "label";
  }
  return "parent";
}

std::string_view color_name(ColorRole c) {
  switch (c) {
    case ColorRole::blue: return "blue";
    case ColorRole::green: return "green";
    case ColorRole::pink: return "pink";
  }
  return "blue";
}

EntityGraph build_graph(std::size_t segment_index, const std::vector<EntityAnnotation>& annotations,
                        const BundleMap& bundles, std::size_t related_limit) {
  if (related_limit == 0) throw std::invalid_argument("build_graph: related_limit must be positive");
  EntityGraph g;
  g.segment_index = segment_index;

  std::set<std::string> parents_seen;
  for (const auto& a : annotations) {
    const std::string parent_key = text::normalize(a.surface);
    if (parent_key.empty() || !parents_seen.insert(parent_key).second) continue;

    const std::string parent_text = text::collapse_whitespace(a.surface);
    const std::string parent_id = node_id(segment_index, NodeRole::parent, "", parent_key);
    g.nodes.push_back({parent_id, parent_text, NodeRole::parent});

    EnrichmentBundle empty{a.surface, {}};
    const auto it = bundles.find(text::normalize(a.lookup_name()));
    const EnrichmentBundle& bundle = it != bundles.end() ? it->second : empty;

    std::set<std::string> child_keys{parent_key};
    auto add_child = [&](NodeRole role, const std::string& display) {
      const std::string key = text::normalize(display);
      if (key.empty() || !child_keys.insert(key).second) return false;
      const std::string id = node_id(segment_index, role, parent_key, key);
      g.nodes.push_back({id, text::collapse_whitespace(display), role});
      g.edges.push_back({parent_id, id});
      return true;
    };

    add_child(NodeRole::label, std::string(category_name(a.category)));
    for (const auto& r : bundle.records) add_child(NodeRole::label, r.label);

    std::size_t related = 0;
    for (const auto& word : merge_related(bundle, std::numeric_limits<std::size_t>::max())) {
      if (related == related_limit) break;
      if (add_child(NodeRole::related, word)) ++related;
    }
  }
  return g;
}

nlohmann::ordered_json serialize_graph(const EntityGraph& g) {
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"id", n.node_id}, {"text", n.text}, {"role", role_name(n.role)}, {"color", color_name(n.color())}});
  }
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"to", e.to}});
  nlohmann::ordered_json j;
  j["segment"] = g.segment_index;
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j;
}

EntityGraph parse_graph(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("segment") || !doc["segment"].is_number_unsigned()) {
    throw std::invalid_argument("graph: missing unsigned 'segment'");
  }
  EntityGraph g;
  g.segment_index = doc["segment"].get<std::size_t>();
  for (const char* key : {"nodes", "edges"}) {
    if (!doc.contains(key) || !doc[key].is_array()) throw std::invalid_argument(std::string("graph: missing array '") + key + "'");
  }
  for (const auto& n : doc["nodes"]) {
    GraphNode node{required_string(n, "id"), required_string(n, "text"), parse_role(required_string(n, "role"))};
    if (required_string(n, "color") != color_name(node.color())) {
      throw std::invalid_argument("graph: color does not match role for node " + node.node_id);
    }
    g.nodes.push_back(std::move(node));
  }
  for (const auto& e : doc["edges"]) g.edges.push_back({required_string(e, "from"), required_string(e, "to")});
  return g;
}

}  // namespace evl
