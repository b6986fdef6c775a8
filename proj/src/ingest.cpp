#include "aclgate/ingest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aclgate {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string at(const std::filesystem::path& path, std::size_t line) {
  return path.filename().string() + ":" + std::to_string(line);
}

// Applies `fn` to each non-blank line parsed as JSON; parse failures become
// positioned DataErrors.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(at(path, lineno) + ": parse error: " + e.what());
    }
    if (!record.is_object())
      throw DataError(at(path, lineno) + ": expected a JSON object");
    fn(record, lineno);
  }
}

std::string require_string(const json& record, const char* field,
                           const std::filesystem::path& path, std::size_t line) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string() || it->get<std::string>().empty())
    throw DataError(at(path, line) + ": missing or invalid '" +
                    std::string(field) + "'");
  return it->get<std::string>();
}

std::vector<std::string> optional_string_array(const json& record,
                                               const char* field,
                                               const std::filesystem::path& path,
                                               std::size_t line) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_array())
    throw DataError(at(path, line) + ": '" + std::string(field) +
                    "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string())
      throw DataError(at(path, line) + ": '" + std::string(field) +
                      "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

Instruction parse_instruction(const json& node, const std::filesystem::path& path) {
  Instruction out;
  out.lookup_key = node.value("lookup_key", std::string{});
  out.encoding = node.value("encoding", std::string{});
  if (out.lookup_key.empty() || out.encoding.empty())
    throw DataError(path.filename().string() +
                    ": hidden_instruction needs lookup_key and encoding");
  for (const auto& [key, value] : node.items()) {
    if (key == "lookup_key" || key == "encoding") continue;
    if (value.is_string()) out.params[key] = value.get<std::string>();
  }
  return out;
}

}  // namespace

std::vector<DocumentMeta> load_documents(const std::filesystem::path& path) {
  std::vector<DocumentMeta> docs;
  std::map<std::string, std::size_t> first_line;
  for_each_record(path, [&](const json& record, std::size_t line) {
    DocumentMeta doc;
    doc.id = require_string(record, "id", path, line);
    doc.acl = optional_string_array(record, "acl", path, line);
    if (auto it = record.find("text"); it != record.end() && it->is_string())
      doc.text = it->get<std::string>();
    auto [pos, inserted] = first_line.emplace(doc.id, line);
    if (!inserted)
      throw DataError(at(path, line) + ": duplicate document id '" + doc.id +
                      "' (first defined at " + at(path, pos->second) + ")");
    docs.push_back(std::move(doc));
  });
  return docs;
}

std::vector<DirectoryEntry> load_directory(const std::filesystem::path& path) {
  std::vector<DirectoryEntry> entries;
  std::map<std::string, std::size_t> first_line;
  for_each_record(path, [&](const json& record, std::size_t line) {
    DirectoryEntry entry;
    entry.entity = require_string(record, "entity", path, line);
    const std::string kind = require_string(record, "kind", path, line);
    if (kind == "user") {
      entry.kind = EntityKind::user;
    } else if (kind == "group") {
      entry.kind = EntityKind::group;
    } else {
      throw DataError(at(path, line) + ": kind must be 'user' or 'group', got '" +
                      kind + "'");
    }
    entry.members = optional_string_array(record, "members", path, line);
    auto [pos, inserted] = first_line.emplace(entry.entity, line);
    if (!inserted)
      throw DataError(at(path, line) + ": duplicate entity '" + entry.entity +
                      "' (first defined at " + at(path, pos->second) + ")");
    entries.push_back(std::move(entry));
  });
  return entries;
}

std::vector<ModelCard> load_models(const std::filesystem::path& path) {
  std::vector<ModelCard> models;
  std::map<std::string, std::size_t> first_line;
  for_each_record(path, [&](const json& record, std::size_t line) {
    ModelCard model;
    model.model_id = require_string(record, "model_id", path, line);
    model.training_docs = optional_string_array(record, "training_docs", path, line);
    model.is_base = record.value("is_base", false);
    if (model.is_base && !model.training_docs.empty())
      throw DataError(at(path, line) + ": base model '" + model.model_id +
                      "' must have no training docs");
    if (!model.is_base && model.training_docs.empty())
      throw DataError(at(path, line) + ": model '" + model.model_id +
                      "' has an empty training set");
    auto [pos, inserted] = first_line.emplace(model.model_id, line);
    if (!inserted)
      throw DataError(at(path, line) + ": duplicate model_id '" + model.model_id +
                      "' (first defined at " + at(path, pos->second) + ")");
    models.push_back(std::move(model));
  });
  return models;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.filename().string() + ": parse error: " + e.what());
  }
  if (!root.is_object())
    throw DataError(path.filename().string() + ": expected a JSON object");

  ScenarioConfig cfg;
  const std::string kind = root.value("kind", std::string("email"));
  if (kind == "email") {
    cfg.kind = ScenarioKind::email;
  } else if (kind == "coauthoring") {
    cfg.kind = ScenarioKind::coauthoring;
  } else {
    throw DataError(path.filename().string() + ": unknown scenario kind '" +
                    kind + "'");
  }

  cfg.initiator = require_string(root, "initiator", path, 1);
  cfg.adversary = require_string(root, "adversary", path, 1);
  cfg.recipients = optional_string_array(root, "recipients", path, 1);
  cfg.mailbox_docs = optional_string_array(root, "mailbox_docs", path, 1);
  cfg.initiator_query = require_string(root, "initiator_query", path, 1);
  cfg.k = root.value("k", 3);
  if (cfg.k < 1)
    throw DataError(path.filename().string() + ": k must be >= 1");

  if (auto it = root.find("adversary_email"); it != root.end() && it->is_object()) {
    cfg.adversary_email.subject = it->value("subject", std::string{});
    cfg.adversary_email.visible_body = it->value("visible_body", std::string{});
    if (auto hi = it->find("hidden_instruction");
        hi != it->end() && hi->is_object())
      cfg.adversary_email.hidden_instruction = parse_instruction(*hi, path);
  } else if (cfg.kind == ScenarioKind::email) {
    throw DataError(path.filename().string() + ": missing adversary_email");
  }

  if (auto it = root.find("secret"); it != root.end() && it->is_object()) {
    cfg.secret.doc = it->value("doc", std::string{});
    cfg.secret.value = it->value("value", std::string{});
    cfg.secret.encodings = optional_string_array(*it, "encodings", path, 1);
  } else {
    throw DataError(path.filename().string() + ": missing secret");
  }

  cfg.shared_doc = root.value("shared_doc", std::string{});
  if (auto it = root.find("hidden_instruction"); it != root.end() && it->is_object())
    cfg.hidden_instruction = parse_instruction(*it, path);
  if (cfg.kind == ScenarioKind::coauthoring && cfg.shared_doc.empty())
    throw DataError(path.filename().string() +
                    ": coauthoring scenario needs shared_doc");
  return cfg;
}

CorpusBundle load_bundle(const std::filesystem::path& docs_path,
                         const std::optional<std::filesystem::path>& directory_path,
                         const std::optional<std::filesystem::path>& models_path,
                         const std::optional<std::filesystem::path>& scenario_path,
                         const LoadOptions& options) {
  CorpusBundle bundle;
  bundle.documents = load_documents(docs_path);

  std::vector<DirectoryEntry> entries;
  if (directory_path) {
    entries = load_directory(*directory_path);
  } else {
    // No directory file: every distinct ACL member acts as a plain user.
    std::set<EntityId> ids;
    for (const auto& d : bundle.documents)
      for (const auto& m : d.acl)
        if (m != kWildcardEntity) ids.insert(m);
    for (const auto& id : ids)
      entries.push_back(DirectoryEntry{id, EntityKind::user, {}});
  }

  // Permissive mode synthesizes unknown references as users, with warnings.
  if (!options.strict) {
    std::set<EntityId> known;
    for (const auto& e : entries) known.insert(e.entity);
    std::set<EntityId> synthesized;
    auto patch = [&](const EntityId& id, const std::string& where) {
      if (id == kWildcardEntity || known.count(id) || synthesized.count(id))
        return;
      synthesized.insert(id);
      bundle.warnings.push_back("unknown entity '" + id + "' referenced by " +
                                where + "; synthesized as user");
    };
    for (const auto& d : bundle.documents)
      for (const auto& m : d.acl) patch(m, "document '" + d.id + "'");
    for (const auto& e : entries)
      for (const auto& m : e.members) patch(m, "group '" + e.entity + "'");
    for (const auto& id : synthesized)
      entries.push_back(DirectoryEntry{id, EntityKind::user, {}});
  }

  bundle.directory = Directory::build(std::move(entries));
  bundle.graph = build_graph(bundle.documents, bundle.directory);

  if (models_path) {
    bundle.models = load_models(*models_path);
    for (const auto& m : bundle.models)
      for (const auto& d : m.training_docs)
        if (!bundle.graph.has_doc(d))
          throw DataError("model '" + m.model_id +
                          "' references unknown document '" + d + "'");
  }

  if (scenario_path) {
    ScenarioConfig cfg = load_scenario(*scenario_path);
    for (const auto& d : cfg.mailbox_docs)
      if (!bundle.graph.has_doc(d))
        throw DataError("scenario references unknown document '" + d + "'");
    if (!cfg.secret.doc.empty() && !bundle.graph.has_doc(cfg.secret.doc))
      throw DataError("scenario secret references unknown document '" +
                      cfg.secret.doc + "'");
    if (!cfg.shared_doc.empty() && !bundle.graph.has_doc(cfg.shared_doc))
      throw DataError("scenario references unknown shared document '" +
                      cfg.shared_doc + "'");
    if (!bundle.directory.is_user(cfg.initiator))
      throw DataError("scenario initiator '" + cfg.initiator +
                      "' is not a directory user");
    bundle.scenario = std::move(cfg);
  }
  return bundle;
}

std::string documents_to_jsonl(const std::vector<DocumentMeta>& docs) {
  std::string out;
  for (const auto& d : docs) {
    ordered_json line;
    line["id"] = d.id;
    line["acl"] = d.acl;
    if (d.text) line["text"] = *d.text;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string directory_to_jsonl(const std::vector<DirectoryEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    ordered_json line;
    line["entity"] = e.entity;
    line["kind"] = e.kind == EntityKind::user ? "user" : "group";
    if (!e.members.empty()) line["members"] = e.members;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string models_to_jsonl(const std::vector<ModelCard>& models) {
  std::string out;
  for (const auto& m : models) {
    ordered_json line;
    line["model_id"] = m.model_id;
    line["training_docs"] = m.training_docs;
    line["is_base"] = m.is_base;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string scenario_to_json(const ScenarioConfig& scenario) {
  ordered_json root;
  root["kind"] = scenario.kind == ScenarioKind::email ? "email" : "coauthoring";
  root["initiator"] = scenario.initiator;
  root["adversary"] = scenario.adversary;
  root["recipients"] = scenario.recipients;
  root["mailbox_docs"] = scenario.mailbox_docs;

  auto instruction_json = [](const Instruction& i) {
    ordered_json node;
    node["lookup_key"] = i.lookup_key;
    node["encoding"] = i.encoding;
    for (const auto& [k, v] : i.params) node[k] = v;
    return node;
  };

  ordered_json email;
  email["subject"] = scenario.adversary_email.subject;
  email["visible_body"] = scenario.adversary_email.visible_body;
  if (scenario.adversary_email.hidden_instruction)
    email["hidden_instruction"] =
        instruction_json(*scenario.adversary_email.hidden_instruction);
  root["adversary_email"] = email;

  root["initiator_query"] = scenario.initiator_query;
  root["secret"] = ordered_json{{"doc", scenario.secret.doc},
                                {"value", scenario.secret.value},
                                {"encodings", scenario.secret.encodings}};
  root["k"] = scenario.k;
  if (!scenario.shared_doc.empty()) root["shared_doc"] = scenario.shared_doc;
  if (scenario.hidden_instruction)
    root["hidden_instruction"] = instruction_json(*scenario.hidden_instruction);
  return root.dump(2) + "\n";
}

std::string audit_to_jsonl(const std::vector<AuditRecord>& records,
                           bool with_wallclock) {
  std::string ts;
  if (with_wallclock) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    ts = buf;
  }
  std::string out;
  for (const auto& r : records) {
    ordered_json line;
    line["op"] = r.op;
    line["participants"] = r.participants;
    line["doc"] = r.doc;
    line["decision"] = r.decision;
    line["blocking"] = r.blocking;
    if (with_wallclock) line["ts"] = ts;
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace aclgate
