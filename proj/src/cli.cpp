#include "toxlabel/cli.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "toxlabel/annotator.h"
#include "toxlabel/csv.h"
#include "toxlabel/error.h"
#include "toxlabel/hashing.h"
#include "toxlabel/ingest.h"
#include "toxlabel/metrics.h"
#include "toxlabel/parse.h"
#include "toxlabel/reconcile.h"
#include "toxlabel/run_config.h"
#include "toxlabel/sampler.h"
#include "toxlabel/softprompt.h"
#include "toxlabel/transfer.h"

namespace toxlabel {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Flags {
  std::string config;
  std::string registry;
  std::vector<std::string> sources;
  bool mock = false;
  std::optional<std::uint64_t> seed;
  std::string out;

  std::string responses;
  std::string gold;
  std::string pred;
  std::string conditioning = "predicted";
  std::string pool;
  std::string input;
  std::string override_token;
  std::string release;
  std::string release_format = "jsonl";
  std::string source_column = "source";
  std::string label_column = "final_binary";
  std::int64_t tolerance = 20;
};

class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err) {}

  void info(std::string_view event, ojson fields = ojson::object()) {
    ojson j;
    j["level"] = "info";
    j["event"] = event;
    for (auto& [k, v] : fields.items()) j[k] = v;
    err_ << j.dump(-1, ' ', false, ojson::error_handler_t::replace) << '\n';
  }

  int error(const std::string& code, std::string_view cls, const std::string& message, int status) {
    ojson j;
    j["level"] = "error";
    j["error"] = code;
    j["class"] = cls;
    j["message"] = message;
    j["exit"] = status;
    err_ << j.dump(-1, ' ', false, ojson::error_handler_t::replace) << '\n';
    return status;
  }

 private:
  std::ostream& err_;
};

std::string_view class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::kConfig: return "config";
    case ErrorClass::kData: return "data";
    case ErrorClass::kEndpoint: return "endpoint";
  }
  return "data";
}

// Artifacts are rendered in memory, then written together with their checksums.
class Artifacts {
 public:
  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

  ojson write(const fs::path& dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
    ojson list = ojson::array();
    for (const auto& [name, content] : files_) {
      write_file(dir / name, content);
      ojson a;
      a["path"] = name;
      a["bytes"] = content.size();
      a["sha256"] = sha256_hex(content);
      list.push_back(std::move(a));
    }
    return list;
  }

  static void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.close();
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string pretty(const ojson& j) { return j.dump(2, ' ', false, ojson::error_handler_t::replace) + "\n"; }

class Command {
 public:
  Command(std::string name, const Flags& flags, std::ostream& out, Logger& log)
      : name_(std::move(name)), flags_(flags), out_(out), log_(log) {}

  int run() {
    load_config();
    if (name_ == "ingest") return ingest();
    if (name_ == "cost") return cost();
    if (name_ == "annotate") return annotate();
    if (name_ == "transfer") return transfer();
    if (name_ == "eval") return eval();
    if (name_ == "sample") return sample();
    if (name_ == "assemble") return assemble();
    if (name_ == "reconcile") return reconcile_release();
    throw Error(ErrorCode::kInvalidConfig, "unknown subcommand " + name_);
  }

 private:
  void load_config() {
    if (!flags_.config.empty()) {
      config_ = RunConfig::from_file(flags_.config);
    } else {
      config_.base_dir = fs::current_path();
      config_.out_dir = config_.base_dir / "out";
    }
    if (!flags_.registry.empty()) {
      config_.registry = fs::absolute(flags_.registry).lexically_normal();
      if (!fs::is_regular_file(config_.registry)) {
        throw Error(ErrorCode::kInvalidConfig, "registry not found: " + config_.registry.string());
      }
    }
    if (flags_.seed) config_.seed = *flags_.seed;
    if (!flags_.out.empty()) config_.out_dir = fs::absolute(flags_.out).lexically_normal();
    if (config_.taxonomy) taxonomy_ = Taxonomy::from_file(config_.taxonomy->string());
    log_.info("config", {{"subcommand", name_}, {"config_hash", config_.hash()}, {"seed", config_.seed}});
  }

  const Taxonomy& taxonomy() const { return taxonomy_ ? *taxonomy_ : Taxonomy::builtin(); }

  std::vector<SourceDescriptor> selected_sources() const {
    if (config_.registry.empty()) throw Error(ErrorCode::kInvalidConfig, "no registry given (--config or --registry)");
    Registry registry = Registry::from_file(config_.registry);
    if (flags_.sources.empty()) return registry.sources;
    std::vector<SourceDescriptor> out;
    for (const auto& name : flags_.sources) {
      const SourceDescriptor* d = registry.find(name);
      if (!d) throw Error(ErrorCode::kInvalidConfig, "source '" + name + "' is not in the registry");
      out.push_back(*d);
    }
    return out;
  }

  struct Loaded {
    std::vector<ChatRecord> records;
    std::vector<LoadReport> reports;
  };

  Loaded load_records() const {
    const auto descriptors = selected_sources();
    Loaded l;
    for (auto& r : load_sources(descriptors)) {
      log_.info("loaded", {{"source", r.report.source},
                           {"raw_rows", r.report.raw_rows},
                           {"loaded", r.report.loaded},
                           {"dropped", r.report.dropped()}});
      l.reports.push_back(r.report);
      l.records.insert(l.records.end(), std::make_move_iterator(r.records.begin()),
                       std::make_move_iterator(r.records.end()));
    }
    return l;
  }

  ojson source_list() const {
    ojson s = ojson::array();
    for (const auto& n : flags_.sources) s.push_back(n);
    return s;
  }

  int finish(const Artifacts& artifacts, ojson summary, int status = 0) {
    ojson manifest;
    manifest["subcommand"] = name_;
    manifest["config_hash"] = config_.hash();
    manifest["seed"] = config_.seed;
    manifest["sources"] = source_list();
    manifest["artifacts"] = artifacts.write(config_.out_dir);
    manifest["summary"] = std::move(summary);
    const std::string manifest_name = name_ + ".manifest.json";
    Artifacts::write_file(config_.out_dir / manifest_name, pretty(manifest));
    log_.info("done", {{"manifest", manifest_name}, {"status", status}});
    out_ << pretty(manifest["summary"]);
    return status;
  }

  int ingest() {
    const auto descriptors = selected_sources();
    Loaded l = load_records();
    std::ostringstream records;
    write_records_jsonl(records, l.records);

    ojson report = ojson::array();
    for (std::size_t i = 0; i < l.reports.size(); ++i) {
      const auto& r = l.reports[i];
      std::int64_t toxic = 0;
      for (const auto& rec : l.records) {
        if (rec.source == r.source && rec.human_binary == BinaryLabel::kToxic) ++toxic;
      }
      ojson row;
      row["name"] = r.source;
      row["language"] = descriptors[i].language;
      row["platform"] = descriptors[i].platform;
      row["raw_rows"] = r.raw_rows;
      row["lines"] = r.loaded;
      row["dropped_empty_text"] = r.dropped_empty_text;
      row["dropped_invalid_utf8"] = r.dropped_invalid_utf8;
      row["toxic"] = toxic;
      row["toxicity_pct"] = r.loaded > 0 ? ojson(Percent::from_ratio(toxic, r.loaded).to_string()) : ojson();
      row["reference_lines"] = descriptors[i].reference_lines ? ojson(*descriptors[i].reference_lines) : ojson();
      report.push_back(std::move(row));
    }

    Artifacts a;
    a.add("records.jsonl", records.str());
    a.add("ingest_report.json", pretty(report));
    ojson summary;
    summary["records"] = l.records.size();
    summary["sources"] = report;
    return finish(a, summary);
  }

  static ojson cost_json(const CostLine& c) {
    ojson j;
    j["records"] = c.records;
    j["input_tokens"] = c.input_tokens;
    j["output_tokens"] = c.output_tokens;
    j["cost_usd"] = round_half_up(c.cost, 6);
    return j;
  }

  static ojson cost_json(const CostEstimate& e) {
    ojson j;
    j["total"] = cost_json(e.total);
    ojson per = ojson::object();
    for (const auto& [source, line] : e.per_source) per[source] = cost_json(line);
    j["per_source"] = std::move(per);
    return j;
  }

  int cost() {
    Loaded l = load_records();
    const CostEstimate e = estimate_cost(l.records, config_.request_config(), config_.pricing);
    ojson j = cost_json(e);
    j["pricing"] = {{"input_price_per_million", config_.pricing.input_price_per_million},
                    {"output_price_per_million", config_.pricing.output_price_per_million},
                    {"expected_output_tokens", config_.pricing.expected_output_tokens}};
    Artifacts a;
    a.add("cost.json", pretty(j));
    return finish(a, j);
  }

  std::unique_ptr<ChatBackend> make_backend() const {
    if (flags_.mock) {
      if (config_.mock_fixture) {
        return std::make_unique<MockBackend>(MockBackend::from_fixture_file(config_.mock_fixture->string()));
      }
      return std::make_unique<MockBackend>();
    }
    return std::make_unique<HttpBackend>(config_.endpoint);
  }

  std::vector<RawResponse> run_annotator(const std::vector<ChatRecord>& records) const {
    std::vector<AnnotationRequest> requests;
    requests.reserve(records.size());
    for (const auto& r : records) requests.push_back(build_request(r, config_.request_config()));
    auto backend = make_backend();
    log_.info("annotate", {{"requests", requests.size()},
                           {"backend", flags_.mock ? "mock" : "http"},
                           {"parallelism", config_.parallelism}});
    auto responses = annotate_batch(requests, *backend, config_.batch_options());
    std::size_t failed = 0;
    for (const auto& r : responses) failed += r.status == ResponseStatus::kApiFailure ? 1 : 0;
    log_.info("annotated", {{"ok", responses.size() - failed}, {"api_failures", failed}});
    if (!responses.empty() && failed == responses.size()) {
      throw Error(ErrorCode::kEndpointFailure,
                  "all " + std::to_string(failed) + " requests failed; last error: " + responses.back().error);
    }
    return responses;
  }

  int annotate() {
    Loaded l = load_records();
    const auto responses = run_annotator(l.records);
    std::ostringstream body;
    write_responses_jsonl(body, responses);
    std::int64_t failed = 0;
    for (const auto& r : responses) failed += r.status == ResponseStatus::kApiFailure ? 1 : 0;
    Artifacts a;
    a.add("responses.jsonl", body.str());
    ojson summary;
    summary["requests"] = responses.size();
    summary["api_failures"] = failed;
    summary["cost"] = cost_json(actual_cost(responses, config_.pricing).total);
    return finish(a, summary);
  }

  int transfer() {
    Loaded l = load_records();
    std::vector<RawResponse> responses;
    if (!flags_.responses.empty()) {
      std::ifstream in(flags_.responses, std::ios::binary);
      if (!in) throw Error(ErrorCode::kFileNotFound, flags_.responses);
      responses = read_responses_jsonl(in);
    } else {
      responses = run_annotator(l.records);
    }

    const OutcomeMap outcomes = outcomes_from_responses(responses, taxonomy());
    const Provenance provenance{config_.model, config_.prompt_version, config_.temperature};
    const Partition partition = apply_agreement_filter(l.records, outcomes, provenance);
    std::map<std::string, std::int64_t> original;
    for (const auto& r : l.reports) original[r.source] = r.loaded;
    const auto stats = compute_source_stats(partition, original);

    std::ostringstream unified, discards;
    const EmitManifest kept = emit_unified(partition.kept, unified, {config_.include_spans});
    const EmitManifest dropped = emit_discards(partition.discarded, discards);
    if (!kept.valid) throw Error(ErrorCode::kIoError, kept.error);
    if (!dropped.valid) throw Error(ErrorCode::kIoError, dropped.error);

    Artifacts a;
    a.add("mlsnt.jsonl", unified.str());
    a.add("discards.jsonl", discards.str());
    a.add("stats.json", pretty(stats_to_json(stats)));
    ojson summary;
    summary["records"] = l.records.size();
    summary["kept"] = to_json(kept);
    summary["discarded"] = partition.discarded.size();
    std::map<std::string, std::int64_t> reasons;
    for (const auto& t : partition.discarded) ++reasons[std::string(to_string(*t.discard_reason))];
    summary["discard_reasons"] = reasons;
    return finish(a, summary);
  }

  static std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kFileNotFound, path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      if (!trim(line).empty()) lines.push_back(line);
    }
    return lines;
  }

  static nlohmann::json parse_line(const std::string& line, const std::string& path, std::size_t n) {
    try {
      return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, path + ":" + std::to_string(n) + ": " + e.what());
    }
  }

  // Gold labels come either as JSONL {id, binary, categories} or as a filled-in
  // annotation sheet (CSV with id and gold_label columns).
  std::vector<GoldRecord> read_gold(const std::string& path) const {
    std::vector<GoldRecord> gold;
    if (path.ends_with(".csv")) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error(ErrorCode::kFileNotFound, path);
      csv::Reader reader(in, ',');
      auto header = reader.next();
      if (!header) return gold;
      auto col = [&](std::string_view name) {
        auto it = std::find(header->fields.begin(), header->fields.end(), name);
        if (it == header->fields.end()) throw Error(ErrorCode::kFormatError, path + " lacks column " + std::string(name));
        return static_cast<std::size_t>(it - header->fields.begin());
      };
      const std::size_t id_col = col("id");
      const std::size_t label_col = col("gold_label");
      while (auto row = reader.next()) {
        if (row->fields.size() <= std::max(id_col, label_col)) continue;
        const std::string& label = row->fields[label_col];
        if (trim(label).empty()) continue;  // not yet annotated
        GoldRecord g;
        g.id = row->fields[id_col];
        const Category c = taxonomy().parse_category(label);
        g.binary = is_toxic(c) ? BinaryLabel::kToxic : BinaryLabel::kNonToxic;
        if (is_toxic(c)) g.categories.insert(c);
        gold.push_back(std::move(g));
      }
      return gold;
    }
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto j = parse_line(lines[i], path, i + 1);
      try {
        GoldRecord g;
        g.id = j.at("id").get<std::string>();
        auto b = binary_label_from_string(j.at("binary").get<std::string>());
        if (!b) throw Error(ErrorCode::kFormatError, path + ": bad binary label for " + g.id);
        g.binary = *b;
        if (j.contains("categories")) {
          for (const auto& c : j.at("categories")) g.categories.insert(taxonomy().parse_category(c.get<std::string>()));
        }
        g.categories.erase(Category::kNonToxic);
        gold.push_back(std::move(g));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kFormatError, path + ":" + std::to_string(i + 1) + ": " + e.what());
      }
    }
    return gold;
  }

  int eval() {
    if (flags_.gold.empty() || flags_.pred.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "eval needs --gold and --pred");
    }
    const auto gold = read_gold(flags_.gold);
    std::ifstream pin(flags_.pred, std::ios::binary);
    if (!pin) throw Error(ErrorCode::kFileNotFound, flags_.pred);
    const auto responses = read_responses_jsonl(pin);
    std::map<std::string, LlmAnnotation, std::less<>> annotations;
    std::int64_t unparsed = 0;
    for (const auto& r : responses) {
      if (r.status != ResponseStatus::kOk) {
        ++unparsed;
        continue;
      }
      auto outcome = try_parse_response(r.record_id, r.body_text, taxonomy());
      if (outcome.annotation) {
        annotations.emplace(r.record_id, std::move(*outcome.annotation));
      } else {
        ++unparsed;
      }
    }
    if (flags_.conditioning != "predicted" && flags_.conditioning != "gold") {
      throw Error(ErrorCode::kInvalidConfig, "--conditioning must be predicted or gold");
    }
    const auto conditioning =
        flags_.conditioning == "gold" ? ToxicConditioning::kGold : ToxicConditioning::kPredicted;
    const FilterReport report = filtered_evaluation(gold, annotations, conditioning);

    std::vector<std::string> g, p;
    for (const auto& rec : gold) {
      auto it = annotations.find(rec.id);
      if (it == annotations.end()) continue;
      g.emplace_back(display_name(line_label(rec.binary, rec.categories)));
      p.emplace_back(display_name(line_label(it->second.overall, it->second.categories())));
    }
    std::vector<std::string> classes;
    for (Category c : kAllLabels) classes.emplace_back(display_name(c));

    ojson j;
    j["filter"] = to_json(report);
    j["unparsed_predictions"] = unparsed;
    std::string text = format_filter_table(report);
    if (!g.empty()) {
      const F1Report f1 = f1_scores(g, p, classes);
      j["line_f1"] = to_json(f1);
      text += "\n" + format_f1_table(f1);
    } else {
      j["line_f1"] = nullptr;
    }
    Artifacts a;
    a.add("eval.json", pretty(j));
    a.add("eval.txt", text);
    ojson summary;
    summary["evaluated"] = g.size();
    summary["excluded"] = report.excluded;
    summary["no_filter_weighted_f1"] = j["filter"]["no_filter"]["weighted_f1"];
    summary["agreed_toxic_weighted_f1"] = j["filter"]["agreed_toxic"]["weighted_f1"];
    return finish(a, summary);
  }

  static std::string file_token(std::string s) {
    for (auto& c : s) {
      const auto u = static_cast<unsigned char>(c);
      if (!(std::isalnum(u) || c == '-' || c == '_')) c = '_';
    }
    return s;
  }

  int sample() {
    if (flags_.pool.empty()) throw Error(ErrorCode::kInvalidConfig, "sample needs --pool");
    const auto lines = read_lines(flags_.pool);
    std::vector<PoolItem> pool;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      pool.push_back(pool_item_from_json(parse_line(lines[i], flags_.pool, i + 1)));
    }
    const auto groups = build_evaluation_sets(pool, config_.sample_base_target, config_.spillover, config_.seed);
    Artifacts a;
    ojson plans = ojson::array();
    for (const auto& grp : groups) {
      const std::string name = "sample_" + file_token(grp.game) + "_" + file_token(grp.language) + ".csv";
      std::ostringstream sheet;
      write_annotation_sheet(sheet, grp.set.items);
      a.add(name, sheet.str());
      ojson pj;
      pj["game"] = grp.game;
      pj["language"] = grp.language;
      pj["sheet"] = name;
      pj["plan"] = to_json(grp.plan);
      pj["drawn"] = grp.set.items.size();
      std::int64_t shortfall = 0;
      for (auto s : grp.set.shortfall) shortfall += s;
      pj["shortfall"] = shortfall;
      plans.push_back(std::move(pj));
    }
    a.add("sample_plan.json", pretty(plans));
    ojson summary;
    summary["pool"] = pool.size();
    summary["groups"] = groups.size();
    return finish(a, summary);
  }

  int assemble() {
    if (flags_.input.empty()) throw Error(ErrorCode::kInvalidConfig, "assemble needs --input");
    std::optional<GameToken> override_token;
    if (!flags_.override_token.empty()) {
      override_token = game_token_from_string(flags_.override_token);
      if (!override_token) throw Error(ErrorCode::kInvalidConfig, "unknown game token " + flags_.override_token);
    }
    const auto lines = read_lines(flags_.input);
    std::vector<CorpusRecord> records;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      records.push_back(corpus_record_from_json(parse_line(lines[i], flags_.input, i + 1)));
    }
    AssembleOptions options;
    options.placement = config_.placement;
    options.max_len = config_.max_len;
    auto token_map = config_.token_map;
    if (token_map.empty()) token_map.emplace("MLSNT", GameToken::kMlsnt);
    const auto corpus = build_corpus(records, token_map, options, override_token);
    std::string body;
    std::size_t truncated = 0;
    for (const auto& s : corpus) {
      body += to_json(s).dump(-1, ' ', false, ojson::error_handler_t::replace);
      body += '\n';
      truncated += s.context_dropped > 0 ? 1 : 0;
    }
    Artifacts a;
    a.add("corpus.jsonl", body);
    ojson summary;
    summary["sequences"] = corpus.size();
    summary["context_truncated"] = truncated;
    summary["placement"] = to_string(options.placement);
    summary["max_len"] = options.max_len;
    return finish(a, summary);
  }

  int reconcile_release() {
    if (flags_.release.empty()) throw Error(ErrorCode::kInvalidConfig, "reconcile needs --release");
    ReleaseSchema schema;
    schema.format = source_format_from_string(flags_.release_format);
    schema.source_column = flags_.source_column;
    if (flags_.label_column.empty()) {
      schema.label_column.reset();
    } else {
      schema.label_column = flags_.label_column;
    }
    const auto counts = count_release(fs::path(flags_.release), schema);
    const auto report = reconcile(counts, flags_.tolerance);
    Artifacts a;
    a.add("reconcile.json", pretty(to_json(report)));
    ojson summary;
    summary["passed"] = report.passed;
    summary["labels_available"] = report.labels_available;
    return finish(a, summary, report.passed ? 0 : exit_status(ErrorClass::kData));
  }

  std::string name_;
  const Flags& flags_;
  std::ostream& out_;
  Logger& log_;
  RunConfig config_;
  std::optional<Taxonomy> taxonomy_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Logger log(err);
  Flags flags;
  CLI::App app{"Toxicity label transfer pipeline", "toxlabel"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--config", flags.config, "Run configuration (JSON)");
  app.add_option("--registry", flags.registry, "Override the registry path from the config");
  app.add_option("--source", flags.sources, "Restrict to these registry sources");
  app.add_flag("--mock", flags.mock, "Use the mock annotator instead of the HTTP endpoint");
  app.add_option("--seed", flags.seed, "Override the configured seed");
  app.add_option("--out", flags.out, "Output directory");

  auto* ingest = app.add_subcommand("ingest", "Load sources and write the registry report");
  auto* cost = app.add_subcommand("cost", "Estimate annotation cost");
  auto* annotate = app.add_subcommand("annotate", "Annotate records and write raw responses");
  auto* transfer = app.add_subcommand("transfer", "Annotate, filter and emit the unified dataset");
  transfer->add_option("--responses", flags.responses, "Reuse raw responses instead of calling the annotator");
  auto* eval = app.add_subcommand("eval", "Score predictions against gold labels");
  eval->add_option("--gold", flags.gold, "Gold labels (JSONL or filled annotation sheet CSV)");
  eval->add_option("--pred", flags.pred, "Raw responses JSONL");
  eval->add_option("--conditioning", flags.conditioning, "LLM toxic subset conditions on: predicted | gold");
  auto* sample = app.add_subcommand("sample", "Draw stratified evaluation sheets");
  sample->add_option("--pool", flags.pool, "Predicted pool JSONL");
  auto* assemble = app.add_subcommand("assemble", "Build the soft-prompt corpus");
  assemble->add_option("--input", flags.input, "Corpus rows JSONL");
  assemble->add_option("--override-token", flags.override_token, "Use this game token for every record");
  auto* reconcile = app.add_subcommand("reconcile", "Compare a dataset release with the published statistics");
  reconcile->add_option("--release", flags.release, "Release file");
  reconcile->add_option("--format", flags.release_format, "jsonl | csv | tsv");
  reconcile->add_option("--source-column", flags.source_column, "Column naming the source dataset");
  reconcile->add_option("--label-column", flags.label_column, "Binary label column; empty for counts only");
  reconcile->add_option("--tolerance", flags.tolerance, "Toxicity tolerance in hundredths of a point");
  for (auto* sub : {ingest, cost, annotate, transfer, eval, sample, assemble, reconcile}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return log.error("UsageError", "config", e.what(), exit_status(ErrorClass::kConfig));
  }

  try {
    Command cmd(app.get_subcommands().front()->get_name(), flags, out, log);
    return cmd.run();
  } catch (const Error& e) {
    return log.error(std::string(to_string(e.code())), class_name(e.error_class()), e.detail(),
                     exit_status(e.error_class()));
  } catch (const std::exception& e) {
    return log.error("InternalError", "data", e.what(), exit_status(ErrorClass::kData));
  }
}

}  // namespace toxlabel
