#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "aclgate/bitset.hpp"
#include "aclgate/errors.hpp"

namespace aclgate {

using EntityId = std::string;
using DocId = std::string;

// Reserved ACL token granting access to everyone, including users outside the
// directory. It never appears in the directory itself.
inline constexpr const char* kWildcardEntity = "*";

enum class EntityKind { user, group };

struct DirectoryEntry {
  EntityId entity;
  EntityKind kind = EntityKind::user;
  std::vector<EntityId> members;  // empty for users
};

struct DocumentMeta {
  DocId id;
  std::vector<EntityId> acl;
  std::optional<std::string> text;
};

// Validated, immutable user/group directory. Membership is acyclic; users
// carry no members; every member id resolves.
class Directory {
 public:
  Directory() = default;

  // Validates and canonicalizes. Throws DataError on duplicate ids, unknown
  // members, members on a user entry, or a membership cycle (message carries
  // the cycle path).
  static Directory build(std::vector<DirectoryEntry> entries);

  const std::vector<DirectoryEntry>& entries() const { return entries_; }
  bool contains(const EntityId& id) const;
  const DirectoryEntry* find(const EntityId& id) const;
  bool is_user(const EntityId& id) const;

  std::vector<EntityId> user_ids() const;

  // {user} plus every group reachable by transitive membership. Sorted.
  // Throws DataError if `user` is absent or names a group.
  std::vector<EntityId> closure_of(const EntityId& user) const;

 private:
  std::vector<DirectoryEntry> entries_;                     // canonical order
  std::unordered_map<EntityId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> containing_groups_;  // member -> groups
};

// Bipartite document/entity adjacency derived from ACLs. Both vertex sets are
// in canonical (lexicographic id) order; dual bitset indexes are kept for
// word-parallel intersection on either side.
class AclGraph {
 public:
  AclGraph() = default;

  std::size_t doc_count() const { return docs_.size(); }
  std::size_t entity_count() const { return entities_.size(); }

  const std::vector<DocumentMeta>& documents() const { return docs_; }
  const std::vector<EntityId>& entities() const { return entities_; }

  bool has_doc(const DocId& id) const { return doc_index_.count(id) != 0; }
  bool has_entity(const EntityId& id) const { return entity_index_.count(id) != 0; }

  std::size_t doc_index_of(const DocId& id) const;        // DataError if unknown
  std::size_t entity_index_of(const EntityId& id) const;  // DataError if unknown

  // Entities on the ACL of document d, as bits over entity indices.
  const Bitset& acl_bits(std::size_t d) const { return acl_bits_[d]; }
  // Documents listing entity e, as bits over document indices.
  const Bitset& doc_bits(std::size_t e) const { return doc_bits_[e]; }

  bool edge(std::size_t d, std::size_t e) const { return acl_bits_[d].test(e); }

  std::size_t edge_count() const { return edge_count_; }
  std::size_t empty_acl_count() const { return empty_acl_count_; }

  std::optional<std::size_t> wildcard_index() const { return wildcard_index_; }

  Bitset entity_bits_for(const std::vector<EntityId>& ids) const;
  Bitset doc_bits_for(const std::vector<DocId>& ids) const;
  std::vector<EntityId> entity_ids(const Bitset& bits) const;
  std::vector<DocId> doc_ids(const Bitset& bits) const;

  friend AclGraph build_graph(std::vector<DocumentMeta> docs,
                              const Directory& directory);

 private:
  std::vector<DocumentMeta> docs_;
  std::vector<EntityId> entities_;
  std::unordered_map<DocId, std::size_t> doc_index_;
  std::unordered_map<EntityId, std::size_t> entity_index_;
  std::vector<Bitset> acl_bits_;
  std::vector<Bitset> doc_bits_;
  std::size_t edge_count_ = 0;
  std::size_t empty_acl_count_ = 0;
  std::optional<std::size_t> wildcard_index_;
};

// Builds the bipartite graph with edge set exactly {(D,E) : E in acl(D)}.
// Entity vertices are the directory entities plus the wildcard when some ACL
// uses it. Throws DataError on duplicate document ids or ACL members that do
// not resolve in the directory.
AclGraph build_graph(std::vector<DocumentMeta> docs, const Directory& directory);

// Group closure for a user: {user} plus all transitively containing groups.
std::vector<EntityId> resolve_user_entities(const EntityId& user,
                                            const Directory& directory);

// True iff the user's closure intersects acl(doc), or the ACL carries the
// wildcard. Strict: unknown user or document is a DataError.
bool can_access(const EntityId& user, const DocId& doc, const AclGraph& graph,
                const Directory& directory);

// Distinct non-empty ACLs occurring on at least one document, each sorted,
// the list itself in canonical order. Empty ACLs are excluded: they seed
// nothing and their documents are never selectable.
std::vector<std::vector<EntityId>> unique_acls(const AclGraph& graph);

struct GraphStats {
  std::size_t documents = 0;
  std::size_t entities = 0;
  std::size_t edges = 0;
  std::size_t unique_acls = 0;
  std::size_t empty_acls = 0;  // warning count: such documents join no biclique
};

GraphStats graph_stats(const AclGraph& graph);

}  // namespace aclgate
