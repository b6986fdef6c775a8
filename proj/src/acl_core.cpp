#include "aclgate/acl_core.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace aclgate {

namespace {

std::string join_path(const std::vector<EntityId>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += " -> ";
    out += path[i];
  }
  return out;
}

}  // namespace

Directory Directory::build(std::vector<DirectoryEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const DirectoryEntry& a, const DirectoryEntry& b) {
              return a.entity < b.entity;
            });

  Directory dir;
  dir.entries_ = std::move(entries);
  for (std::size_t i = 0; i < dir.entries_.size(); ++i) {
    const auto& e = dir.entries_[i];
    if (e.entity.empty()) throw DataError("directory entry with empty entity id");
    if (e.entity == kWildcardEntity)
      throw DataError("'*' is reserved and cannot be declared in the directory");
    auto [it, inserted] = dir.index_.emplace(e.entity, i);
    if (!inserted)
      throw DataError("duplicate directory entity '" + e.entity + "'");
  }

  for (auto& e : dir.entries_) {
    if (e.kind == EntityKind::user && !e.members.empty())
      throw DataError("user '" + e.entity + "' must not have members");
    std::sort(e.members.begin(), e.members.end());
    e.members.erase(std::unique(e.members.begin(), e.members.end()),
                    e.members.end());
    for (const auto& m : e.members) {
      if (!dir.index_.count(m))
        throw DataError("group '" + e.entity + "' references unknown member '" +
                        m + "'");
    }
  }

  // Cycle check over group -> member edges; only group chains can loop.
  enum class Mark { white, grey, black };
  std::vector<Mark> mark(dir.entries_.size(), Mark::white);
  std::vector<EntityId> path;
  auto dfs = [&](auto&& self, std::size_t idx) -> void {
    mark[idx] = Mark::grey;
    path.push_back(dir.entries_[idx].entity);
    for (const auto& m : dir.entries_[idx].members) {
      const std::size_t mi = dir.index_.at(m);
      if (mark[mi] == Mark::grey) {
        path.push_back(m);
        auto first = std::find(path.begin(), path.end(), m);
        throw DataError("directory membership cycle: " +
                        join_path({first, path.end()}));
      }
      if (mark[mi] == Mark::white) self(self, mi);
    }
    path.pop_back();
    mark[idx] = Mark::black;
  };
  for (std::size_t i = 0; i < dir.entries_.size(); ++i)
    if (mark[i] == Mark::white) dfs(dfs, i);

  // Reverse edges: member -> containing groups, used by closure_of.
  dir.containing_groups_.assign(dir.entries_.size(), {});
  for (std::size_t i = 0; i < dir.entries_.size(); ++i)
    for (const auto& m : dir.entries_[i].members)
      dir.containing_groups_[dir.index_.at(m)].push_back(i);

  return dir;
}

bool Directory::contains(const EntityId& id) const {
  return index_.count(id) != 0;
}

const DirectoryEntry* Directory::find(const EntityId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

bool Directory::is_user(const EntityId& id) const {
  const auto* e = find(id);
  return e != nullptr && e->kind == EntityKind::user;
}

std::vector<EntityId> Directory::user_ids() const {
  std::vector<EntityId> out;
  for (const auto& e : entries_)
    if (e.kind == EntityKind::user) out.push_back(e.entity);
  return out;
}

std::vector<EntityId> Directory::closure_of(const EntityId& user) const {
  auto it = index_.find(user);
  if (it == index_.end()) throw DataError("unknown user '" + user + "'");
  if (entries_[it->second].kind != EntityKind::user)
    throw DataError("'" + user + "' is a group, not a user");

  std::set<std::size_t> seen{it->second};
  std::deque<std::size_t> queue{it->second};
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (const std::size_t g : containing_groups_[cur])
      if (seen.insert(g).second) queue.push_back(g);
  }

  std::vector<EntityId> out;
  out.reserve(seen.size());
  for (const std::size_t i : seen) out.push_back(entries_[i].entity);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t AclGraph::doc_index_of(const DocId& id) const {
  auto it = doc_index_.find(id);
  if (it == doc_index_.end()) throw DataError("unknown document '" + id + "'");
  return it->second;
}

std::size_t AclGraph::entity_index_of(const EntityId& id) const {
  auto it = entity_index_.find(id);
  if (it == entity_index_.end()) throw DataError("unknown entity '" + id + "'");
  return it->second;
}

Bitset AclGraph::entity_bits_for(const std::vector<EntityId>& ids) const {
  Bitset bits(entity_count());
  for (const auto& id : ids) bits.set(entity_index_of(id));
  return bits;
}

Bitset AclGraph::doc_bits_for(const std::vector<DocId>& ids) const {
  Bitset bits(doc_count());
  for (const auto& id : ids) bits.set(doc_index_of(id));
  return bits;
}

std::vector<EntityId> AclGraph::entity_ids(const Bitset& bits) const {
  std::vector<EntityId> out;
  out.reserve(bits.count());
  bits.for_each([&](std::size_t i) { out.push_back(entities_[i]); });
  return out;
}

std::vector<DocId> AclGraph::doc_ids(const Bitset& bits) const {
  std::vector<DocId> out;
  out.reserve(bits.count());
  bits.for_each([&](std::size_t i) { out.push_back(docs_[i].id); });
  return out;
}

AclGraph build_graph(std::vector<DocumentMeta> docs, const Directory& directory) {
  AclGraph g;

  std::sort(docs.begin(), docs.end(),
            [](const DocumentMeta& a, const DocumentMeta& b) { return a.id < b.id; });
  g.docs_ = std::move(docs);

  bool wildcard_used = false;
  for (std::size_t i = 0; i < g.docs_.size(); ++i) {
    auto& d = g.docs_[i];
    if (d.id.empty()) throw DataError("document with empty id");
    auto [it, inserted] = g.doc_index_.emplace(d.id, i);
    if (!inserted) throw DataError("duplicate document id '" + d.id + "'");

    std::sort(d.acl.begin(), d.acl.end());
    d.acl.erase(std::unique(d.acl.begin(), d.acl.end()), d.acl.end());
    for (const auto& member : d.acl) {
      if (member == kWildcardEntity) {
        wildcard_used = true;
        continue;
      }
      if (!directory.contains(member))
        throw DataError("document '" + d.id + "' ACL references unknown entity '" +
                        member + "'");
    }
  }

  g.entities_.reserve(directory.entries().size() + 1);
  for (const auto& e : directory.entries()) g.entities_.push_back(e.entity);
  if (wildcard_used) g.entities_.push_back(kWildcardEntity);
  std::sort(g.entities_.begin(), g.entities_.end());
  for (std::size_t i = 0; i < g.entities_.size(); ++i)
    g.entity_index_.emplace(g.entities_[i], i);
  if (wildcard_used)
    g.wildcard_index_ = g.entity_index_.at(kWildcardEntity);

  g.acl_bits_.assign(g.docs_.size(), Bitset(g.entities_.size()));
  g.doc_bits_.assign(g.entities_.size(), Bitset(g.docs_.size()));
  for (std::size_t d = 0; d < g.docs_.size(); ++d) {
    const auto& acl = g.docs_[d].acl;
    if (acl.empty()) ++g.empty_acl_count_;
    for (const auto& member : acl) {
      const std::size_t e = g.entity_index_.at(member);
      g.acl_bits_[d].set(e);
      g.doc_bits_[e].set(d);
      ++g.edge_count_;
    }
  }
  return g;
}

std::vector<EntityId> resolve_user_entities(const EntityId& user,
                                            const Directory& directory) {
  return directory.closure_of(user);
}

bool can_access(const EntityId& user, const DocId& doc, const AclGraph& graph,
                const Directory& directory) {
  const std::size_t d = graph.doc_index_of(doc);
  const auto& acl = graph.acl_bits(d);
  if (graph.wildcard_index() && acl.test(*graph.wildcard_index())) return true;
  for (const auto& id : directory.closure_of(user)) {
    if (graph.has_entity(id) && acl.test(graph.entity_index_of(id))) return true;
  }
  return false;
}

std::vector<std::vector<EntityId>> unique_acls(const AclGraph& graph) {
  std::vector<Bitset> seen;
  for (std::size_t d = 0; d < graph.doc_count(); ++d) {
    const auto& bits = graph.acl_bits(d);
    if (bits.none()) continue;
    seen.push_back(bits);
  }
  std::sort(seen.begin(), seen.end(),
            [](const Bitset& a, const Bitset& b) { return lex_compare(a, b) < 0; });
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());

  std::vector<std::vector<EntityId>> out;
  out.reserve(seen.size());
  for (const auto& bits : seen) out.push_back(graph.entity_ids(bits));
  return out;
}

GraphStats graph_stats(const AclGraph& graph) {
  GraphStats s;
  s.documents = graph.doc_count();
  s.entities = graph.entity_count();
  s.edges = graph.edge_count();
  s.unique_acls = unique_acls(graph).size();
  s.empty_acls = graph.empty_acl_count();
  return s;
}

}  // namespace aclgate
