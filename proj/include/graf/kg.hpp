#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace graf {

using EntityId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Triplet {
    std::string head;
    std::string relation;
    std::string tail;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct TripletBlock {
    std::vector<Triplet> triplets;
    std::size_t skipped = 0;   // non-empty lines that did not match "(h;r;t)"
    bool saw_stop = false;
};

/// Parses LLM triplet output: one "(head;relation;tail)" per line, ending
/// at a line equal to "STOP". Unmatched lines are skipped and counted.
TripletBlock parse_triplet_block(std::string_view text);

/// Strict single-line parse; nullopt when the line is not a triplet.
std::optional<Triplet> parse_triplet_line(std::string_view line);

std::string format_triplet(const Triplet& t);

struct Edge {
    EntityId head;
    std::string relation;
    EntityId tail;
};

/// An incident edge seen from one endpoint.
struct Incidence {
    EdgeId edge;
    EntityId other;
};

/// Entities and directed labeled relations. Immutable once built;
/// traversal through `incident` ignores direction.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    std::size_t entity_count() const noexcept { return names_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return names_.empty(); }

    const std::string& name(EntityId id) const { return names_.at(id); }
    const std::string& key(EntityId id) const { return keys_.at(id); }
    const Edge& edge(EdgeId id) const { return edges_.at(id); }
    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const std::string> names() const noexcept { return names_; }

    /// Incident edges of `id` in ascending edge-id order. A self-loop is
    /// listed once.
    std::span<const Incidence> incident(EntityId id) const { return adjacency_.at(id); }

    std::optional<EntityId> find(std::string_view name) const;
    Triplet triplet(EdgeId id) const;
    std::vector<Triplet> triplets() const;

    /// Builder used by build_graph and by subgraph extraction.
    class Builder;

private:
    std::vector<std::string> names_;
    std::vector<std::string> keys_;
    std::unordered_map<std::string, EntityId> index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> adjacency_;
};

class KnowledgeGraph::Builder {
public:
    EntityId add_entity(std::string_view display_name);
    /// Returns false for an exact (canonical) duplicate.
    bool add_edge(EntityId head, std::string_view relation, EntityId tail);
    KnowledgeGraph finish() &&;

private:
    KnowledgeGraph graph_;
    std::unordered_map<std::string, EdgeId> edge_keys_;
};

/// Claim graphs share the knowledge graph structure.
using ClaimGraph = KnowledgeGraph;

/// Canonicalizes entities (lowercase, collapsed whitespace), keeps the
/// first-seen casing for display and drops duplicate edges. Triplets with
/// an empty field after trimming are ignored.
KnowledgeGraph build_graph(std::span<const Triplet> triplets);

/// One "(head;relation;tail)" line per edge in edge order.
void persist_graph(const KnowledgeGraph& kg, const std::filesystem::path& path);
std::string serialize_graph(const KnowledgeGraph& kg);

/// Strict reader: blank lines and a trailing STOP are allowed, any other
/// non-triplet line throws with path and line number.
KnowledgeGraph load_graph(const std::filesystem::path& path);
KnowledgeGraph deserialize_graph(std::string_view text, std::string_view source = "<memory>");

/// Same entity keys, names and edge multiset (ignoring edge order).
bool equivalent(const KnowledgeGraph& a, const KnowledgeGraph& b);

}  // namespace graf
