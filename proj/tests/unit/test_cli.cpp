#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "toxlabel/cli.h"
#include "toxlabel/hashing.h"

using namespace toxlabel;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "toxlabel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json last_log(const std::string& err) {
  std::istringstream in(err);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return nlohmann::json::parse(last);
}

// A two-source workspace: registry, data files and a config.
fs::path workspace(const std::string& name) {
  const fs::path dir = fs::path(TOXLABEL_TEST_TMP) / ("cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir / "data");
  std::ofstream(dir / "data" / "a.csv") << "text,label\nyou are dumb,1\nnice game,0\ngg,0\n";
  std::ofstream(dir / "data" / "b.tsv") << "comment\ttag\nhola\tNOT\nidiota\tOFF\n";
  std::ofstream(dir / "registry.json") << R"({"version": 1, "sources": [
    {"name": "A", "language": "en", "path": "data/a.csv", "format": "csv",
     "columns": {"text": "text", "label": "label"}, "binarization": {"1": "toxic", "0": "non-toxic"}},
    {"name": "B", "language": "es", "path": "data/b.tsv", "format": "tsv",
     "columns": {"text": "comment", "label": "tag"}, "binarization": {"OFF": "toxic", "NOT": "non-toxic"}}]})";
  std::ofstream(dir / "config.json") << R"({"registry": "registry.json", "seed": 1, "backoff_base_ms": 0})";
  return dir;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).status == 0);
  auto bad = run({"--no-such-flag"});
  CHECK(bad.status == 2);
  CHECK(last_log(bad.err)["error"] == "UsageError");
}

TEST_CASE("missing registry is a config error") {
  const auto dir = workspace("missing");
  auto r = run({"cost", "--registry", (dir / "nope.json").string(), "--out", (dir / "out").string()});
  CHECK(r.status == 2);
  auto log = last_log(r.err);
  CHECK(log["level"] == "error");
  CHECK(log["class"] == "config");
  CHECK(log["exit"] == 2);

  auto no_config = run({"cost", "--out", (dir / "out").string()});
  CHECK(no_config.status == 2);
}

TEST_CASE("empty registry costs nothing") {
  const auto dir = workspace("empty");
  std::ofstream(dir / "empty.json") << R"({"version": 1, "sources": []})";
  auto r = run({"cost", "--registry", (dir / "empty.json").string(), "--out", (dir / "out").string()});
  REQUIRE(r.status == 0);
  auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["total"]["cost_usd"] == 0.0);
  CHECK(summary["total"]["records"] == 0);
}

TEST_CASE("ingest, cost and manifests") {
  const auto dir = workspace("ingest");
  const auto out = (dir / "out").string();
  auto r = run({"--config", (dir / "config.json").string(), "--out", out, "ingest"});
  REQUIRE(r.status == 0);
  CHECK(nlohmann::json::parse(r.out)["records"] == 5);
  auto manifest = nlohmann::json::parse(slurp(dir / "out" / "ingest.manifest.json"));
  CHECK(manifest["subcommand"] == "ingest");
  CHECK(manifest["seed"] == 1);
  REQUIRE(manifest["artifacts"].size() == 2);
  for (const auto& a : manifest["artifacts"]) {
    const auto body = slurp(dir / "out" / a["path"].get<std::string>());
    CHECK(a["bytes"] == body.size());
    CHECK(a["sha256"] == sha256_hex(body));
  }
  auto report = nlohmann::json::parse(slurp(dir / "out" / "ingest_report.json"));
  CHECK(report[0]["name"] == "A");
  CHECK(report[0]["toxicity_pct"] == "33.33");
  CHECK(report[1]["toxic"] == 1);

  auto only_b = run({"--config", (dir / "config.json").string(), "--out", out, "--source", "B", "cost"});
  REQUIRE(only_b.status == 0);
  auto cost = nlohmann::json::parse(only_b.out);
  CHECK(cost["total"]["records"] == 2);
  CHECK(cost["per_source"].contains("B"));
  CHECK_FALSE(cost["per_source"].contains("A"));

  CHECK(run({"--config", (dir / "config.json").string(), "--out", out, "--source", "Z", "cost"}).status == 2);
}

TEST_CASE("transfer with scripted responses") {
  const auto dir = workspace("transfer");
  const auto out = dir / "out";
  const auto config = (dir / "config.json").string();
  REQUIRE(run({"--config", config, "--out", out.string(), "ingest"}).status == 0);
  // answer every record as toxic: agreement keeps exactly the toxic lines
  std::ofstream fixture(dir / "mock.jsonl");
  std::istringstream records(slurp(out / "records.jsonl"));
  std::string line;
  while (std::getline(records, line)) {
    auto j = nlohmann::json::parse(line);
    nlohmann::json m;
    m["record_id"] = j["id"];
    m["body_text"] = R"({"overall_category":"toxic","spans":[{"text":"x","category":["Insults"]}]})";
    fixture << m.dump() << '\n';
  }
  fixture.close();
  std::ofstream(dir / "config.json") << R"({"registry": "registry.json", "seed": 1, "backoff_base_ms": 0,
                                             "mock_fixture": "mock.jsonl"})";

  auto r = run({"--config", config, "--out", out.string(), "--mock", "transfer"});
  REQUIRE(r.status == 0);
  auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["records"] == 5);
  CHECK(summary["kept"]["rows"] == 2);
  CHECK(summary["discarded"] == 3);
  CHECK(summary["discard_reasons"]["disagreement"] == 3);
  const auto first = slurp(out / "mlsnt.jsonl");

  auto again = run({"--config", config, "--out", out.string(), "--mock", "transfer"});
  REQUIRE(again.status == 0);
  CHECK(slurp(out / "mlsnt.jsonl") == first);

  auto stats = nlohmann::json::parse(slurp(out / "stats.json"));
  CHECK(stats.size() == 2);

  // annotate, then transfer from the saved responses
  REQUIRE(run({"--config", config, "--out", out.string(), "--mock", "annotate"}).status == 0);
  auto reused = run({"--config", config, "--out", (dir / "reuse").string(), "transfer", "--responses",
                     (out / "responses.jsonl").string()});
  REQUIRE(reused.status == 0);
  CHECK(slurp(dir / "reuse" / "mlsnt.jsonl") == first);

  // evaluate the responses against gold that matches the scripted answers
  std::ofstream gold(dir / "gold.jsonl");
  std::istringstream recs(slurp(out / "records.jsonl"));
  while (std::getline(recs, line)) {
    auto j = nlohmann::json::parse(line);
    gold << nlohmann::json{{"id", j["id"]}, {"binary", "toxic"}, {"categories", {"Insults"}}}.dump() << '\n';
  }
  gold.close();
  auto ev = run({"--config", config, "--out", out.string(), "eval", "--gold", (dir / "gold.jsonl").string(), "--pred",
                 (out / "responses.jsonl").string()});
  REQUIRE(ev.status == 0);
  CHECK(nlohmann::json::parse(ev.out)["no_filter_weighted_f1"] == 1.0);
  CHECK(slurp(out / "eval.txt").find("100.00%") != std::string::npos);
}

TEST_CASE("all requests failing is an endpoint error") {
  const auto dir = workspace("endpoint");
  std::ofstream(dir / "mock.jsonl") << R"({"record_id":"unrelated","body_text":"x"})" << '\n';
  std::ofstream(dir / "config.json") << R"({"registry": "registry.json", "mock_fixture": "mock.jsonl",
                                             "backoff_base_ms": 0})";
  auto r = run({"--config", (dir / "config.json").string(), "--out", (dir / "out").string(), "--mock", "annotate"});
  CHECK(r.status == 4);
  CHECK(last_log(r.err)["class"] == "endpoint");
}

TEST_CASE("sample, assemble and reconcile") {
  const auto dir = workspace("misc");
  const auto out = dir / "out";
  const auto config = (dir / "config.json").string();

  std::ofstream pool(dir / "pool.jsonl");
  for (int i = 0; i < 30; ++i) {
    pool << nlohmann::json{{"id", "p" + std::to_string(i)},
                           {"game", "G"},
                           {"language", "en"},
                           {"text", "t"},
                           {"predicted_label", i % 2 ? "Insults" : "Non-Toxic"}}
                .dump()
         << '\n';
  }
  pool.close();
  auto s = run({"--config", config, "--out", out.string(), "sample", "--pool", (dir / "pool.jsonl").string()});
  REQUIRE(s.status == 0);
  CHECK(fs::exists(out / "sample_G_en.csv"));
  CHECK(fs::exists(out / "sample_plan.json"));

  std::ofstream rows(dir / "rows.jsonl");
  rows << R"({"id":"x","source":"COLD","text":"t","context":["c"],"final_binary":"toxic","final_categories":["Hate"]})"
       << '\n';
  rows.close();
  auto a = run({"--config", config, "--out", out.string(), "assemble", "--input", (dir / "rows.jsonl").string()});
  REQUIRE(a.status == 0);
  auto corpus = nlohmann::json::parse(slurp(out / "corpus.jsonl"));
  CHECK(corpus["token"] == "MLSNT");
  CHECK(corpus["segments"][0]["text"] == "MLSNT");
  auto u = run({"--config", config, "--out", out.string(), "assemble", "--input", (dir / "rows.jsonl").string(),
                "--override-token", "GAME_UNKNOWN"});
  REQUIRE(u.status == 0);
  CHECK(nlohmann::json::parse(slurp(out / "corpus.jsonl"))["token"] == "GAME_UNKNOWN");

  std::ofstream(dir / "release.jsonl") << R"({"source":"COLD","final_binary":"toxic"})" << '\n';
  auto rec = run({"--config", config, "--out", out.string(), "reconcile", "--release",
                  (dir / "release.jsonl").string()});
  CHECK(rec.status == 3);
  auto report = nlohmann::json::parse(slurp(out / "reconcile.json"));
  CHECK(report["passed"] == false);
  CHECK(report["rows"][0]["observed_lines"] == 1);
}
