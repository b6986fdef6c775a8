#include "aclgate/policy_gate.hpp"

#include <algorithm>
#include <unordered_map>

namespace aclgate {

const char* to_string(GateMode mode) {
  return mode == GateMode::agentic ? "agentic" : "fully_agentic";
}

ParticipantSet ParticipantSet::build(std::vector<EntityId> users,
                                     EntityId initiator) {
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  if (users.empty()) throw UsageError("participant set must be non-empty");
  if (!std::binary_search(users.begin(), users.end(), initiator))
    throw UsageError("initiator '" + initiator +
                     "' is not among the participants");
  return ParticipantSet{std::move(users), std::move(initiator)};
}

namespace {

// Graph-entity bits a participant resolves to. Externals resolve to nothing;
// they can reach wildcard documents only.
Bitset participant_entity_bits(const EntityId& user, const AclGraph& graph,
                               const Directory& directory) {
  Bitset bits(graph.entity_count());
  const DirectoryEntry* entry = directory.find(user);
  if (entry == nullptr) return bits;  // external
  if (entry->kind != EntityKind::user)
    throw DataError("participant '" + user + "' names a group, not a user");
  for (const auto& id : directory.closure_of(user))
    if (graph.has_entity(id)) bits.set(graph.entity_index_of(id));
  return bits;
}

bool bits_can_access(const Bitset& user_bits, std::size_t doc_idx,
                     const AclGraph& graph) {
  const auto& acl = graph.acl_bits(doc_idx);
  if (graph.wildcard_index() && acl.test(*graph.wildcard_index())) return true;
  return user_bits.intersects(acl);
}

}  // namespace

bool participant_can_access(const EntityId& user, std::size_t doc_idx,
                            const AclGraph& graph, const Directory& directory) {
  return bits_can_access(participant_entity_bits(user, graph, directory),
                         doc_idx, graph);
}

std::vector<EntityId> authorized_users_for_model(
    const ModelCard& model, const AclGraph& graph, const Directory& directory,
    const std::vector<EntityId>& user_universe) {
  std::vector<EntityId> universe = user_universe;
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

  if (model.is_base) return universe;

  std::vector<std::size_t> doc_idx;
  doc_idx.reserve(model.training_docs.size());
  for (const auto& d : model.training_docs) doc_idx.push_back(graph.doc_index_of(d));

  std::vector<EntityId> out;
  for (const auto& user : universe) {
    const Bitset bits = participant_entity_bits(user, graph, directory);
    const bool ok = std::all_of(doc_idx.begin(), doc_idx.end(), [&](std::size_t d) {
      return bits_can_access(bits, d, graph);
    });
    if (ok) out.push_back(user);
  }
  return out;
}

AccessDecision check_model_access(const EntityId& user, const ModelCard& model,
                                  const AclGraph& graph,
                                  const Directory& directory) {
  AccessDecision decision;
  if (model.is_base) {
    decision.allow = true;
    return decision;
  }
  const Bitset bits = participant_entity_bits(user, graph, directory);
  std::vector<DocId> docs = model.training_docs;
  std::sort(docs.begin(), docs.end());
  for (const auto& d : docs) {
    if (!bits_can_access(bits, graph.doc_index_of(d), graph))
      decision.blocking_docs.push_back(d);
  }
  decision.allow = decision.blocking_docs.empty();
  return decision;
}

ModelCard select_model_for_participants(const std::vector<ModelCard>& registry,
                                        const ParticipantSet& participants,
                                        const AclGraph& graph,
                                        const Directory& directory) {
  const ModelCard* base = nullptr;
  for (const auto& m : registry) {
    if (!m.is_base) continue;
    if (base != nullptr)
      throw ConfigError("model registry contains multiple base models");
    base = &m;
  }
  if (base == nullptr)
    throw ConfigError("model registry contains no base model");

  const ModelCard* best = nullptr;
  for (const auto& m : registry) {
    if (m.is_base) continue;
    const bool usable =
        std::all_of(participants.users.begin(), participants.users.end(),
                    [&](const EntityId& u) {
                      return check_model_access(u, m, graph, directory).allow;
                    });
    if (!usable) continue;
    if (best == nullptr ||
        m.training_docs.size() > best->training_docs.size() ||
        (m.training_docs.size() == best->training_docs.size() &&
         m.model_id < best->model_id))
      best = &m;
  }
  return best != nullptr ? *best : *base;
}

GateResult filter_retrieval(const std::vector<DocId>& candidates,
                            const ParticipantSet& participants, GateMode mode,
                            const AclGraph& graph, const Directory& directory) {
  std::vector<std::pair<EntityId, Bitset>> resolved;
  resolved.reserve(participants.users.size());
  for (const auto& u : participants.users)
    resolved.emplace_back(u, participant_entity_bits(u, graph, directory));

  GateResult result;
  result.candidates = candidates;
  result.participants = participants.users;
  for (const auto& doc : candidates) {
    const std::size_t d = graph.doc_index_of(doc);
    std::vector<EntityId> blocking;
    for (const auto& [user, bits] : resolved)
      if (!bits_can_access(bits, d, graph)) blocking.push_back(user);

    AuditRecord record;
    record.op = "filter_retrieval";
    record.participants = participants.users;
    record.doc = doc;
    record.blocking = blocking;
    if (blocking.empty()) {
      result.allowed.push_back(doc);
      record.decision = "allow";
    } else if (mode == GateMode::agentic) {
      result.consent_required.push_back(GateEntry{doc, std::move(blocking)});
      record.decision = "consent_pending";
    } else {
      result.excluded.push_back(GateEntry{doc, std::move(blocking)});
      record.decision = "exclude";
    }
    result.audit.push_back(std::move(record));
  }
  return result;
}

GateResult grant_consent(GateResult result, const std::vector<DocId>& doc_ids) {
  for (const auto& doc : doc_ids) {
    auto it = std::find_if(result.consent_required.begin(),
                           result.consent_required.end(),
                           [&](const GateEntry& e) { return e.doc == doc; });
    if (it == result.consent_required.end())
      throw UsageError("document '" + doc + "' is not pending consent");

    AuditRecord record;
    record.op = "grant_consent";
    record.participants = result.participants;
    record.doc = doc;
    record.decision = "consent_granted";
    record.blocking = it->blocking_users;
    result.audit.push_back(std::move(record));

    result.allowed.push_back(doc);
    result.consent_required.erase(it);
  }

  // Restore original candidate order among the allowed docs.
  std::unordered_map<DocId, std::size_t> pos;
  for (std::size_t i = 0; i < result.candidates.size(); ++i)
    pos.emplace(result.candidates[i], i);
  std::sort(result.allowed.begin(), result.allowed.end(),
            [&](const DocId& a, const DocId& b) { return pos.at(a) < pos.at(b); });
  return result;
}

}  // namespace aclgate
