#include "mnar/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <set>
#include <sstream>

namespace mnar {

const char* node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Counterfactual: return "counterfactual";
    case NodeKind::MissIndicator: return "missind";
    case NodeKind::Proxy: return "proxy";
    case NodeKind::Context: return "context";
    case NodeKind::FixedIntervention: return "fixed";
  }
  return "?";
}

NodeKind node_kind_from(const std::string& name) {
  if (name == "counterfactual") return NodeKind::Counterfactual;
  if (name == "missind") return NodeKind::MissIndicator;
  if (name == "proxy") return NodeKind::Proxy;
  if (name == "context") return NodeKind::Context;
  if (name == "fixed") return NodeKind::FixedIntervention;
  fail(Errc::ParseError, "unknown node kind: " + name);
}

Dag::Dag(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::set<std::string> seen;
  for (const auto& n : nodes_)
    if (!seen.insert(n.name).second)
      fail(Errc::DuplicateName, "duplicate node: " + n.name);

  parents_.assign(nodes_.size(), {});
  children_.assign(nodes_.size(), {});
  std::set<std::pair<std::string, std::string>> edge_seen;
  for (const auto& e : edges_) {
    std::size_t u = node_index(e.from);
    std::size_t v = node_index(e.to);
    if (u == v) fail(Errc::CycleDetected, "self loop at " + e.from);
    if (!edge_seen.insert({e.from, e.to}).second)
      fail(Errc::DuplicateName, "duplicate edge " + e.from + " -> " + e.to);
    children_[u].emplace_back(v, e.deterministic);
    parents_[v].emplace_back(u, e.deterministic);
  }

  // Kahn's algorithm; leftovers mean a cycle.
  std::vector<std::size_t> indeg(nodes_.size(), 0);
  for (std::size_t v = 0; v < nodes_.size(); ++v) indeg[v] = parents_[v].size();
  std::deque<std::size_t> ready;
  for (std::size_t v = 0; v < nodes_.size(); ++v)
    if (indeg[v] == 0) ready.push_back(v);
  while (!ready.empty()) {
    std::size_t u = ready.front();
    ready.pop_front();
    topo_.push_back(u);
    for (auto [v, det] : children_[u])
      if (--indeg[v] == 0) ready.push_back(v);
  }
  if (topo_.size() != nodes_.size())
    fail(Errc::CycleDetected, "graph contains a directed cycle");
}

bool Dag::has_node(const std::string& name) const {
  for (const auto& n : nodes_)
    if (n.name == name) return true;
  return false;
}

std::size_t Dag::node_index(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].name == name) return i;
  fail(Errc::UnknownNode, "no node named " + name);
}

std::vector<bool> Dag::descendants_of(std::size_t i) const {
  std::vector<bool> mark(nodes_.size(), false);
  std::deque<std::size_t> work{i};
  mark[i] = true;
  while (!work.empty()) {
    std::size_t u = work.front();
    work.pop_front();
    for (auto [v, det] : children_[u])
      if (!mark[v]) {
        mark[v] = true;
        work.push_back(v);
      }
  }
  return mark;
}

std::vector<bool> Dag::ancestors_of(const std::vector<std::size_t>& seeds) const {
  std::vector<bool> mark(nodes_.size(), false);
  std::deque<std::size_t> work;
  for (std::size_t s : seeds)
    if (!mark[s]) {
      mark[s] = true;
      work.push_back(s);
    }
  while (!work.empty()) {
    std::size_t u = work.front();
    work.pop_front();
    for (auto [v, det] : parents_[u])
      if (!mark[v]) {
        mark[v] = true;
        work.push_back(v);
      }
  }
  return mark;
}

Dag build_mdag(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges) {
  // Convention checks run on the raw lists so that the reported error names
  // the convention even when the same edge also breaks acyclicity.
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].name, i).second)
      fail(Errc::DuplicateName, "duplicate node: " + nodes[i].name);
    if (nodes[i].kind == NodeKind::FixedIntervention)
      fail(Errc::FixedInterventionMisuse,
           "fixed node " + nodes[i].name + " is not allowed before splitting");
  }
  std::vector<std::vector<std::size_t>> children(nodes.size());
  std::vector<std::vector<std::pair<std::size_t, bool>>> parents(nodes.size());
  for (const auto& e : edges) {
    auto u = index.find(e.from);
    auto v = index.find(e.to);
    if (u == index.end()) fail(Errc::UnknownNode, "no node named " + e.from);
    if (v == index.end()) fail(Errc::UnknownNode, "no node named " + e.to);
    children[u->second].push_back(v->second);
    parents[v->second].emplace_back(u->second, e.deterministic);
  }

  // Underlying variables may not sit downstream of missingness machinery.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind != NodeKind::MissIndicator &&
        nodes[i].kind != NodeKind::Proxy)
      continue;
    std::vector<bool> mark(nodes.size(), false);
    std::deque<std::size_t> work{i};
    while (!work.empty()) {
      std::size_t u = work.front();
      work.pop_front();
      for (std::size_t v : children[u]) {
        if (mark[v]) continue;
        mark[v] = true;
        if (nodes[v].kind == NodeKind::Counterfactual)
          fail(Errc::CounterfactualDownstreamOfMissingness,
               nodes[v].name + " is a descendant of " + nodes[i].name);
        work.push_back(v);
      }
    }
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind != NodeKind::Proxy) continue;
    bool has_cf = false, has_miss = false, all_det = true;
    for (auto [p, det] : parents[i]) {
      all_det = all_det && det;
      if (nodes[p].kind == NodeKind::Counterfactual) has_cf = true;
      if (nodes[p].kind == NodeKind::MissIndicator) has_miss = true;
    }
    if (parents[i].size() != 2 || !has_cf || !has_miss || !all_det)
      fail(Errc::BadProxyParents,
           "proxy " + nodes[i].name +
               " needs exactly one counterfactual and one missingness "
               "parent, both deterministic");
  }

  return Dag(std::move(nodes), std::move(edges));
}

Dag parse_graph_spec(const std::string& text) {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool has_fixed = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty()) continue;
    auto at = [&](std::size_t i) -> const std::string& {
      if (i >= tok.size())
        fail(Errc::ParseError,
             "line " + std::to_string(lineno) + ": truncated statement");
      return tok[i];
    };
    std::string& last = tok.back();
    if (last.empty() || last.back() != ';')
      fail(Errc::ParseError,
           "line " + std::to_string(lineno) + ": missing ';'");
    last.pop_back();
    if (last.empty()) tok.pop_back();

    if (tok[0] == "node") {
      const std::string& name = at(1);
      const std::string& kv = at(2);
      if (kv.rfind("kind=", 0) != 0)
        fail(Errc::ParseError,
             "line " + std::to_string(lineno) + ": expected kind=...");
      NodeKind kind;
      try {
        kind = node_kind_from(kv.substr(5));
      } catch (const Error&) {
        fail(Errc::ParseError, "line " + std::to_string(lineno) +
                                   ": unknown node kind " + kv.substr(5));
      }
      has_fixed = has_fixed || kind == NodeKind::FixedIntervention;
      nodes.push_back({name, kind});
    } else if (tok[0] == "edge") {
      const std::string& from = at(1);
      if (at(2) != "->")
        fail(Errc::ParseError,
             "line " + std::to_string(lineno) + ": expected '->'");
      const std::string& to = at(3);
      bool det = false;
      if (tok.size() > 4) {
        if (at(4) == "[det]")
          det = true;
        else
          fail(Errc::ParseError, "line " + std::to_string(lineno) +
                                     ": unexpected token " + at(4));
      }
      edges.push_back({from, to, det});
    } else {
      fail(Errc::ParseError, "line " + std::to_string(lineno) +
                                 ": unknown statement " + tok[0]);
    }
  }
  if (has_fixed) return Dag(std::move(nodes), std::move(edges));
  return build_mdag(std::move(nodes), std::move(edges));
}

std::string graph_spec_text(const Dag& g) {
  std::ostringstream out;
  for (const auto& n : g.nodes())
    out << "node " << n.name << " kind=" << node_kind_name(n.kind) << ";\n";
  for (const auto& e : g.edges()) {
    out << "edge " << e.from << " -> " << e.to;
    if (e.deterministic) out << " [det]";
    out << ";\n";
  }
  return out.str();
}

DsepResult d_separated_ex(const Dag& g,
                          const std::vector<std::string>& a,
                          const std::vector<std::string>& b,
                          const std::vector<std::string>& z) {
  auto to_indices = [&](const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& name : names) out.push_back(g.node_index(name));
    return out;
  };
  auto ai = to_indices(a), bi = to_indices(b), zi = to_indices(z);

  std::set<std::size_t> seen;
  for (auto lists : {&ai, &bi, &zi})
    for (std::size_t i : *lists)
      if (!seen.insert(i).second)
        fail(Errc::OverlappingSets, "node in two query sets: " + g.node(i).name);
  for (auto lists : {&ai, &bi})
    for (std::size_t i : *lists)
      if (g.node(i).kind == NodeKind::FixedIntervention)
        fail(Errc::FixedInterventionMisuse,
             "fixed node " + g.node(i).name + " cannot be a query endpoint");

  std::vector<bool> in_b(g.size(), false);
  for (std::size_t i : bi) in_b[i] = true;
  // Fixed nodes are constants: they block like conditioned non-colliders.
  std::vector<bool> blocked(g.size(), false);
  for (std::size_t i : zi) blocked[i] = true;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.node(i).kind == NodeKind::FixedIntervention) blocked[i] = true;
  std::vector<bool> anc_z = g.ancestors_of(zi);

  // Reachability over (node, direction) states; direction records whether
  // the last edge pointed into the node. Colliders pass only when z (or a
  // descendant in z via anc_z) licenses them.
  enum Dir { kIn = 0, kOut = 1 };
  std::vector<std::array<bool, 2>> visited(g.size(), {false, false});
  bool det_warning = false;
  std::deque<std::pair<std::size_t, int>> work;

  auto push = [&](std::size_t node, int dir, bool via_det) {
    det_warning = det_warning || via_det;
    if (visited[node][dir]) return;
    visited[node][dir] = true;
    work.emplace_back(node, dir);
  };

  for (std::size_t s : ai) {
    for (auto [child, det] : g.children(s)) push(child, kIn, det);
    for (auto [parent, det] : g.parents(s)) push(parent, kOut, det);
  }

  bool reached = false;
  while (!work.empty()) {
    auto [u, dir] = work.front();
    work.pop_front();
    if (in_b[u]) {
      reached = true;
      // keep draining to finish the warning sweep
      continue;
    }
    if (dir == kIn) {
      if (!blocked[u])
        for (auto [child, det] : g.children(u)) push(child, kIn, det);
      if (anc_z[u])  // collider licensed by z
        for (auto [parent, det] : g.parents(u)) push(parent, kOut, det);
    } else {
      if (!blocked[u]) {
        for (auto [child, det] : g.children(u)) push(child, kIn, det);
        for (auto [parent, det] : g.parents(u)) push(parent, kOut, det);
      }
    }
  }
  return {!reached, det_warning};
}

bool d_separated(const Dag& g,
                 const std::vector<std::string>& a,
                 const std::vector<std::string>& b,
                 const std::vector<std::string>& z) {
  return d_separated_ex(g, a, b, z).separated;
}

Swig split(const Dag& g, const std::map<std::string, std::string>& interventions) {
  for (const auto& [name, label] : interventions) {
    std::size_t i = g.node_index(name);
    NodeKind kind = g.node(i).kind;
    if (kind == NodeKind::Proxy || kind == NodeKind::FixedIntervention)
      fail(Errc::SplitOnProxy,
           "cannot split " + name + " (" + node_kind_name(kind) + ")");
    if (g.has_node(label))
      fail(Errc::DuplicateName, "fixed label collides with node " + label);
  }

  // Random halves keep every node's name and incoming edges; fixed halves
  // are appended and take over the outgoing edges.
  std::vector<GraphNode> nodes = g.nodes();
  std::vector<std::string> fixed_of(g.size());
  for (std::size_t i : g.topological_order()) {
    auto it = interventions.find(g.node(i).name);
    if (it == interventions.end()) continue;
    nodes.push_back({it->second, NodeKind::FixedIntervention});
    fixed_of[i] = it->second;
  }

  std::vector<GraphEdge> edges;
  for (const auto& e : g.edges()) {
    std::size_t u = g.node_index(e.from);
    std::string from = fixed_of[u].empty() ? e.from : fixed_of[u];
    edges.push_back({from, e.to, e.deterministic});
  }
  Dag raw(nodes, edges);

  // Counterfactual relabeling: everything downstream of a fixed half gets
  // the labels of its fixed ancestors, in the intervention's topological
  // order in the original graph.
  std::vector<std::string> fixed_labels_in_order;
  for (std::size_t i : g.topological_order())
    if (!fixed_of[i].empty()) fixed_labels_in_order.push_back(fixed_of[i]);

  std::map<std::string, std::vector<bool>> downstream;
  for (const auto& label : fixed_labels_in_order)
    downstream[label] = raw.descendants_of(raw.node_index(label));

  std::map<std::string, std::string> relabeling;
  std::vector<GraphNode> renamed = raw.nodes();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.node(i).kind == NodeKind::FixedIntervention) continue;
    std::string suffix;
    for (const auto& label : fixed_labels_in_order) {
      if (downstream[label][i] && raw.node_index(label) != i) {
        if (!suffix.empty()) suffix += ",";
        suffix += label;
      }
    }
    if (!suffix.empty()) {
      std::string fresh = raw.node(i).name + "^{" + suffix + "}";
      relabeling[raw.node(i).name] = fresh;
      renamed[i].name = fresh;
    }
  }

  std::vector<GraphEdge> renamed_edges;
  for (const auto& e : raw.edges()) {
    auto rename = [&](const std::string& n) {
      auto it = relabeling.find(n);
      return it == relabeling.end() ? n : it->second;
    };
    renamed_edges.push_back({rename(e.from), rename(e.to), e.deterministic});
  }

  Swig out{Dag(std::move(renamed), std::move(renamed_edges)),
           std::map<std::string, std::string>(interventions),
           std::move(relabeling)};
  return out;
}

Dag permutation_mdag() {
  std::vector<GraphNode> nodes = {
      {"Y^(1)", NodeKind::Counterfactual}, {"X^(1)", NodeKind::Counterfactual},
      {"R_1", NodeKind::MissIndicator},    {"R_2", NodeKind::MissIndicator},
      {"Y", NodeKind::Proxy},              {"X", NodeKind::Proxy},
  };
  std::vector<GraphEdge> edges = {
      {"Y^(1)", "X^(1)", false}, {"X^(1)", "R_1", false},
      {"R_1", "R_2", false},     {"Y", "R_2", false},
      {"Y^(1)", "Y", true},      {"R_1", "Y", true},
      {"X^(1)", "X", true},      {"R_2", "X", true},
  };
  return build_mdag(std::move(nodes), std::move(edges));
}

}  // namespace mnar
