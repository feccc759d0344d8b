#include "graf/kg.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "graf/text.hpp"

namespace graf {

std::optional<Triplet> parse_triplet_line(std::string_view raw) {
    std::string_view line = text::trim(raw);
    if (line.size() < 2 || line.front() != '(' || line.back() != ')') return std::nullopt;
    std::string_view inner = line.substr(1, line.size() - 2);
    const auto first = inner.find(';');
    if (first == std::string_view::npos) return std::nullopt;
    const auto second = inner.find(';', first + 1);
    if (second == std::string_view::npos || inner.find(';', second + 1) != std::string_view::npos) return std::nullopt;
    Triplet t{std::string(text::trim(inner.substr(0, first))),
              std::string(text::trim(inner.substr(first + 1, second - first - 1))),
              std::string(text::trim(inner.substr(second + 1)))};
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) return std::nullopt;
    return t;
}

TripletBlock parse_triplet_block(std::string_view text) {
    TripletBlock block;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text::trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        if (line == "STOP") {
            block.saw_stop = true;
            break;
        }
        if (line.empty()) continue;
        if (auto t = parse_triplet_line(line)) {
            block.triplets.push_back(std::move(*t));
        } else {
            ++block.skipped;
        }
    }
    return block;
}

std::string format_triplet(const Triplet& t) { return "(" + t.head + ";" + t.relation + ";" + t.tail + ")"; }

std::optional<EntityId> KnowledgeGraph::find(std::string_view name) const {
    auto it = index_.find(text::canonical_key(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Triplet KnowledgeGraph::triplet(EdgeId id) const {
    const Edge& e = edges_.at(id);
    return {names_[e.head], e.relation, names_[e.tail]};
}

std::vector<Triplet> KnowledgeGraph::triplets() const {
    std::vector<Triplet> out;
    out.reserve(edges_.size());
    for (EdgeId i = 0; i < edges_.size(); ++i) out.push_back(triplet(i));
    return out;
}

EntityId KnowledgeGraph::Builder::add_entity(std::string_view display_name) {
    std::string key = text::canonical_key(display_name);
    if (auto it = graph_.index_.find(key); it != graph_.index_.end()) return it->second;
    const auto id = static_cast<EntityId>(graph_.names_.size());
    graph_.names_.emplace_back(text::trim(display_name));
    graph_.index_.emplace(key, id);
    graph_.keys_.push_back(std::move(key));
    graph_.adjacency_.emplace_back();
    return id;
}

bool KnowledgeGraph::Builder::add_edge(EntityId head, std::string_view relation, EntityId tail) {
    if (head >= graph_.names_.size() || tail >= graph_.names_.size()) {
        throw std::out_of_range("add_edge: endpoint is not an entity");
    }
    std::string key = std::to_string(head) + '\x1f' + text::canonical_key(relation) + '\x1f' + std::to_string(tail);
    const auto id = static_cast<EdgeId>(graph_.edges_.size());
    if (!edge_keys_.emplace(std::move(key), id).second) return false;
    graph_.edges_.push_back({head, std::string(text::trim(relation)), tail});
    graph_.adjacency_[head].push_back({id, tail});
    if (tail != head) graph_.adjacency_[tail].push_back({id, head});
    return true;
}

KnowledgeGraph KnowledgeGraph::Builder::finish() && { return std::move(graph_); }

KnowledgeGraph build_graph(std::span<const Triplet> triplets) {
    KnowledgeGraph::Builder b;
    for (const auto& t : triplets) {
        if (text::trim(t.head).empty() || text::trim(t.relation).empty() || text::trim(t.tail).empty()) continue;
        const EntityId h = b.add_entity(t.head);
        const EntityId tl = b.add_entity(t.tail);
        b.add_edge(h, t.relation, tl);
    }
    return std::move(b).finish();
}

std::string serialize_graph(const KnowledgeGraph& kg) {
    std::string out;
    for (EdgeId i = 0; i < kg.edge_count(); ++i) {
        out += format_triplet(kg.triplet(i));
        out += '\n';
    }
    return out;
}

void persist_graph(const KnowledgeGraph& kg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write graph file " + path.string());
    out << serialize_graph(kg);
    if (!out) throw std::runtime_error("write failed for graph file " + path.string());
}

KnowledgeGraph deserialize_graph(std::string_view text, std::string_view source) {
    std::vector<Triplet> triplets;
    std::size_t pos = 0;
    std::size_t lineno = 0;
    bool stopped = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text::trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++lineno;
        if (line.empty()) continue;
        if (stopped) {
            throw std::runtime_error(std::string(source) + ":" + std::to_string(lineno) + ": content after STOP");
        }
        if (line == "STOP") {
            stopped = true;
            continue;
        }
        auto t = parse_triplet_line(line);
        if (!t) {
            throw std::runtime_error(std::string(source) + ":" + std::to_string(lineno) +
                                     ": expected '(head;relation;tail)', got '" + std::string(line) + "'");
        }
        triplets.push_back(std::move(*t));
    }
    return build_graph(triplets);
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open graph file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_graph(buf.str(), path.string());
}

bool equivalent(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    if (a.entity_count() != b.entity_count() || a.edge_count() != b.edge_count()) return false;
    std::map<std::string, std::string> names_a;
    std::map<std::string, std::string> names_b;
    for (EntityId i = 0; i < a.entity_count(); ++i) names_a.emplace(a.key(i), a.name(i));
    for (EntityId i = 0; i < b.entity_count(); ++i) names_b.emplace(b.key(i), b.name(i));
    if (names_a != names_b) return false;
    auto edge_multiset = [](const KnowledgeGraph& g) {
        std::vector<std::string> keys;
        for (const auto& e : g.edges()) keys.push_back(g.key(e.head) + '\x1f' + e.relation + '\x1f' + g.key(e.tail));
        std::sort(keys.begin(), keys.end());
        return keys;
    };
    return edge_multiset(a) == edge_multiset(b);
}

}  // namespace graf
