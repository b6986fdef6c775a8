#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aclgate/acl_core.hpp"
#include "aclgate/policy_gate.hpp"
#include "aclgate/rag_sim.hpp"

namespace aclgate {

// Parsers for the line-delimited corpus formats. Every error is positioned
// (file:line) and duplicates name both offending lines.

std::vector<DocumentMeta> load_documents(const std::filesystem::path& path);
std::vector<DirectoryEntry> load_directory(const std::filesystem::path& path);
std::vector<ModelCard> load_models(const std::filesystem::path& path);

// scenario.json is a single JSON object, not line-delimited.
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct LoadOptions {
  // Strict mode rejects unknown entity references. Permissive synthesizes the
  // missing id as a user entry and records a warning instead.
  bool strict = true;
};

// Fully linked corpus: graph built, references checked across files.
struct CorpusBundle {
  std::vector<DocumentMeta> documents;
  Directory directory;
  AclGraph graph;
  std::vector<ModelCard> models;
  std::optional<ScenarioConfig> scenario;
  std::vector<std::string> warnings;
};

CorpusBundle load_bundle(const std::filesystem::path& docs_path,
                         const std::optional<std::filesystem::path>& directory_path,
                         const std::optional<std::filesystem::path>& models_path,
                         const std::optional<std::filesystem::path>& scenario_path,
                         const LoadOptions& options = {});

// Inverse serializers; parse-then-serialize round-trips semantically.
std::string documents_to_jsonl(const std::vector<DocumentMeta>& docs);
std::string directory_to_jsonl(const std::vector<DirectoryEntry>& entries);
std::string models_to_jsonl(const std::vector<ModelCard>& models);
std::string scenario_to_json(const ScenarioConfig& scenario);

std::string audit_to_jsonl(const std::vector<AuditRecord>& records,
                           bool with_wallclock = false);

}  // namespace aclgate
