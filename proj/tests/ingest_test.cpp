#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "aclgate/ingest.hpp"

using namespace aclgate;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("aclgate-ingest-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }

  fs::path write(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p;
  }

  static int& counter() {
    static int n = 0;
    return n;
  }
};

const char* kDocs =
    R"({"id": "d1", "acl": ["e1", "e2"]}
{"id": "d2", "acl": ["e1", "e2"], "text": "hello"}
{"id": "d3", "acl": ["e1"]}
{"id": "d4", "acl": ["e2", "e3"]}
)";

const char* kDirectory =
    R"({"entity": "e1", "kind": "user"}
{"entity": "e2", "kind": "user"}
{"entity": "e3", "kind": "user"}
{"entity": "g1", "kind": "group", "members": ["e1", "e2"]}
)";

}  // namespace

TEST_CASE("load_documents") {
  TempDir tmp;
  SUBCASE("well-formed lines parse in order") {
    const auto p = tmp.write("documents.jsonl",
                             "{\"id\": \"a\", \"acl\": []}\n"
                             "{\"id\": \"b\", \"acl\": [\"x\"], \"text\": \"t\"}\n");
    const auto docs = load_documents(p);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].id == "a");
    CHECK(docs[1].text == "t");
  }
  SUBCASE("malformed line is named") {
    const auto p = tmp.write("documents.jsonl",
                             "{\"id\": \"a\", \"acl\": []}\n"
                             "{\"id\": \"b\", \"acl\": []}\n"
                             "{nope\n");
    CHECK_THROWS_WITH_AS(load_documents(p), doctest::Contains(":3"), DataError);
  }
  SUBCASE("duplicate ids name both lines") {
    const auto p = tmp.write("documents.jsonl",
                             "{\"id\": \"x\", \"acl\": []}\n"
                             "{\"id\": \"dup\", \"acl\": []}\n"
                             "{\"id\": \"y\", \"acl\": []}\n"
                             "{\"id\": \"z\", \"acl\": []}\n"
                             "{\"id\": \"dup\", \"acl\": []}\n");
    try {
      load_documents(p);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string what = e.what();
      CHECK(what.find(":5") != std::string::npos);
      CHECK(what.find(":2") != std::string::npos);
      CHECK(what.find("dup") != std::string::npos);
    }
  }
  SUBCASE("unknown fields are ignored") {
    const auto p = tmp.write("documents.jsonl",
                             "{\"id\": \"a\", \"acl\": [], \"owner\": \"zz\"}\n");
    CHECK(load_documents(p).size() == 1);
  }
}

TEST_CASE("load_directory errors") {
  TempDir tmp;
  SUBCASE("bad kind") {
    const auto p =
        tmp.write("directory.jsonl", "{\"entity\": \"e\", \"kind\": \"robot\"}\n");
    CHECK_THROWS_AS(load_directory(p), DataError);
  }
  SUBCASE("duplicate entity") {
    const auto p = tmp.write("directory.jsonl",
                             "{\"entity\": \"e\", \"kind\": \"user\"}\n"
                             "{\"entity\": \"e\", \"kind\": \"user\"}\n");
    CHECK_THROWS_WITH_AS(load_directory(p), doctest::Contains(":2"), DataError);
  }
}

TEST_CASE("load_models validation") {
  TempDir tmp;
  SUBCASE("base with training docs rejected") {
    const auto p = tmp.write(
        "models.jsonl",
        "{\"model_id\": \"m\", \"training_docs\": [\"d\"], \"is_base\": true}\n");
    CHECK_THROWS_AS(load_models(p), DataError);
  }
  SUBCASE("non-base with empty training set rejected") {
    const auto p = tmp.write(
        "models.jsonl", "{\"model_id\": \"m\", \"training_docs\": []}\n");
    CHECK_THROWS_AS(load_models(p), DataError);
  }
}

TEST_CASE("load_bundle referential integrity") {
  TempDir tmp;
  const auto docs = tmp.write("documents.jsonl", kDocs);
  const auto dir = tmp.write("directory.jsonl", kDirectory);

  SUBCASE("valid bundle links up") {
    const auto bundle = load_bundle(docs, dir.string(), std::nullopt, std::nullopt);
    CHECK(bundle.graph.doc_count() == 4);
    CHECK(bundle.graph.entity_count() == 4);  // three users plus g1
    CHECK(bundle.graph.edge_count() == 7);
    CHECK(bundle.warnings.empty());
  }
  SUBCASE("group referencing unknown member") {
    const auto bad = tmp.write("directory2.jsonl",
                               "{\"entity\": \"g\", \"kind\": \"group\", "
                               "\"members\": [\"phantom\"]}\n");
    CHECK_THROWS_WITH_AS(
        load_bundle(docs, bad.string(), std::nullopt, std::nullopt),
        doctest::Contains("phantom"), DataError);
  }
  SUBCASE("model referencing unknown doc") {
    const auto models = tmp.write(
        "models.jsonl",
        "{\"model_id\": \"m\", \"training_docs\": [\"d9\"]}\n");
    CHECK_THROWS_WITH_AS(
        load_bundle(docs, dir.string(), models.string(), std::nullopt),
        doctest::Contains("d9"), DataError);
  }
  SUBCASE("unknown ACL entity: strict rejects, permissive warns") {
    const auto loose = tmp.write("loose.jsonl",
                                 "{\"id\": \"d\", \"acl\": [\"mystery\"]}\n");
    CHECK_THROWS_AS(load_bundle(loose, dir.string(), std::nullopt, std::nullopt),
                    DataError);
    LoadOptions permissive;
    permissive.strict = false;
    const auto bundle =
        load_bundle(loose, dir.string(), std::nullopt, std::nullopt, permissive);
    REQUIRE(bundle.warnings.size() == 1);
    CHECK(bundle.warnings[0].find("mystery") != std::string::npos);
    CHECK(bundle.graph.has_entity("mystery"));
  }
  SUBCASE("no directory file: ACL members become users") {
    const auto bundle = load_bundle(docs, std::nullopt, std::nullopt, std::nullopt);
    CHECK(bundle.graph.entity_count() == 3);
    CHECK(bundle.directory.is_user("e1"));
  }
}

TEST_CASE("scenario round-trip") {
  TempDir tmp;
  const char* scenario =
      R"({
  "kind": "email",
  "initiator": "alice",
  "adversary": "bob",
  "recipients": ["carol"],
  "mailbox_docs": ["d2"],
  "adversary_email": {
    "subject": "hi",
    "visible_body": "hello there",
    "hidden_instruction": {"lookup_key": "budget total", "encoding": "day_of_month", "month": "May"}
  },
  "initiator_query": "draft a reply",
  "secret": {"doc": "d2", "value": "9", "encodings": ["day_of_month"]},
  "k": 2
})";
  const auto p = tmp.write("scenario.json", scenario);
  const auto cfg = load_scenario(p);
  CHECK(cfg.initiator == "alice");
  CHECK(cfg.recipients == std::vector<EntityId>{"carol"});
  REQUIRE(cfg.adversary_email.hidden_instruction.has_value());
  CHECK(cfg.adversary_email.hidden_instruction->encoding == "day_of_month");
  CHECK(cfg.adversary_email.hidden_instruction->params.at("month") == "May");
  CHECK(cfg.secret.value == "9");

  // serialize -> parse -> compare fields
  const auto p2 = tmp.write("scenario2.json", scenario_to_json(cfg));
  const auto cfg2 = load_scenario(p2);
  CHECK(cfg2.initiator == cfg.initiator);
  CHECK(cfg2.adversary == cfg.adversary);
  CHECK(cfg2.mailbox_docs == cfg.mailbox_docs);
  CHECK(cfg2.secret.encodings == cfg.secret.encodings);
  CHECK(cfg2.k == cfg.k);
  CHECK(cfg2.adversary_email.hidden_instruction->params ==
        cfg.adversary_email.hidden_instruction->params);
}

TEST_CASE("documents/directory/models round-trip") {
  TempDir tmp;
  const auto docs_path = tmp.write("documents.jsonl", kDocs);
  const auto docs = load_documents(docs_path);
  const auto docs2 = load_documents(tmp.write("documents2.jsonl",
                                              documents_to_jsonl(docs)));
  CHECK(docs.size() == docs2.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(docs[i].id == docs2[i].id);
    CHECK(docs[i].acl == docs2[i].acl);
    CHECK(docs[i].text == docs2[i].text);
  }

  const auto dir_path = tmp.write("directory.jsonl", kDirectory);
  const auto entries = load_directory(dir_path);
  const auto entries2 =
      load_directory(tmp.write("directory2.jsonl", directory_to_jsonl(entries)));
  REQUIRE(entries.size() == entries2.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(entries[i].entity == entries2[i].entity);
    CHECK((entries[i].kind == entries2[i].kind));
    CHECK(entries[i].members == entries2[i].members);
  }

  const auto models_path = tmp.write(
      "models.jsonl",
      "{\"model_id\": \"m\", \"training_docs\": [\"d1\"]}\n"
      "{\"model_id\": \"base\", \"training_docs\": [], \"is_base\": true}\n");
  const auto models = load_models(models_path);
  const auto models2 =
      load_models(tmp.write("models2.jsonl", models_to_jsonl(models)));
  REQUIRE(models.size() == models2.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    CHECK(models[i].model_id == models2[i].model_id);
    CHECK(models[i].training_docs == models2[i].training_docs);
    CHECK(models[i].is_base == models2[i].is_base);
  }
}

TEST_CASE("invalid fixtures produce positioned errors, never crashes") {
  TempDir tmp;
  const std::vector<std::string> bad_docs = {
      "null\n",
      "[]\n",
      "{\"acl\": []}\n",
      "{\"id\": \"\", \"acl\": []}\n",
      "{\"id\": \"d\", \"acl\": \"not-a-list\"}\n",
      "{\"id\": \"d\", \"acl\": [42]}\n",
  };
  int i = 0;
  for (const auto& content : bad_docs) {
    const auto p = tmp.write("bad" + std::to_string(i++) + ".jsonl", content);
    CHECK_THROWS_AS(load_documents(p), DataError);
  }
  CHECK_THROWS_AS(load_documents(tmp.path / "missing.jsonl"), DataError);
}

TEST_CASE("audit serialization") {
  std::vector<AuditRecord> records{
      {"filter_retrieval", {"alice", "bob"}, "d1", "allow", {}},
      {"filter_retrieval", {"alice", "bob"}, "d2", "exclude", {"bob"}},
  };
  const auto out = audit_to_jsonl(records);
  CHECK(out ==
        "{\"op\":\"filter_retrieval\",\"participants\":[\"alice\",\"bob\"],"
        "\"doc\":\"d1\",\"decision\":\"allow\",\"blocking\":[]}\n"
        "{\"op\":\"filter_retrieval\",\"participants\":[\"alice\",\"bob\"],"
        "\"doc\":\"d2\",\"decision\":\"exclude\",\"blocking\":[\"bob\"]}\n");
  const auto stamped = audit_to_jsonl(records, true);
  CHECK(stamped.find("\"ts\":") != std::string::npos);
}
