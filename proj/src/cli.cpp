#include "ldpjudge/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "ldpjudge/alignment.hpp"
#include "ldpjudge/analysis.hpp"
#include "ldpjudge/augmentation.hpp"
#include "ldpjudge/baselines.hpp"
#include "ldpjudge/config.hpp"
#include "ldpjudge/csv.hpp"
#include "ldpjudge/datastore.hpp"
#include "ldpjudge/digest.hpp"
#include "ldpjudge/json_io.hpp"
#include "ldpjudge/jury.hpp"
#include "ldpjudge/metrics.hpp"
#include "ldpjudge/service.hpp"

namespace ldpjudge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  bool mock = false;
  std::string script;
  std::string fixed_clock;
  int parallelism = 0;
  std::string runs = "runs";
  std::string answer_model;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

CliConfig load_config(const Common& common) {
  CliConfig config;
  try {
    std::optional<fs::path> path;
    if (!common.config_path.empty()) path = common.config_path;
    config = load_cli_config(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  config.mock = common.mock;
  if (common.mock && (!config.judge.endpoint_url.empty() || !config.align.endpoint_url.empty())) {
    throw ConfigError("--mock runs offline and cannot be combined with an endpoint_url setting");
  }
  if (common.parallelism != 0) {
    config.judge.parallelism = common.parallelism;
    config.align.parallelism = common.parallelism;
  }
  if (!common.answer_model.empty()) config.judge.answer_model_id = common.answer_model;
  for (const auto& v : validate(config.judge)) throw ConfigError("judge: " + v.message);
  for (const auto& v : validate(config.align)) throw ConfigError("align: " + v.message);
  for (const auto& v : validate(config.triage)) throw ConfigError("triage: " + v.message);
  return config;
}

Clock make_clock(const Common& common) {
  if (common.fixed_clock.empty()) return system_clock();
  if (!is_iso8601_utc(common.fixed_clock)) {
    throw ConfigError("--fixed-clock expects an ISO-8601 UTC timestamp such as 2025-01-01T00:00:00Z");
  }
  return fixed_clock(common.fixed_clock);
}

std::shared_ptr<ChatTransport> make_transport(const CliConfig& config, const Common& common) {
  const bool offline = common.mock || !common.script.empty();
  if (offline) {
    if (!config.judge.endpoint_url.empty()) {
      throw ConfigError("--script runs offline and cannot be combined with judge.endpoint_url");
    }
    Responder responder = mock_response;
    if (!common.script.empty()) responder = JudgeScript::load(common.script).responder(mock_response);
    return std::make_shared<ScriptedTransport>(std::move(responder), config.judge.model_id);
  }
  if (config.judge.endpoint_url.empty()) {
    throw ConfigError("no judge endpoint configured: set judge.endpoint_url or pass --mock");
  }
  return std::make_shared<HttpChatTransport>(endpoint_config(config.judge));
}

std::unique_ptr<Embedder> make_cli_embedder(const CliConfig& config) {
  if (config.mock) return std::make_unique<HashingEmbedder>();
  return make_embedder(config.align);
}

std::string score_field(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string();
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<Evaluation> evaluations_from(RunStore& store, const std::string& run_id,
                                         const std::string& file) {
  if (!file.empty()) return load_jsonl<Evaluation>(file);
  if (run_id.empty()) throw ConfigError("pass --run or --evaluations");
  return store.evaluations(run_id);
}

// Writes into the run when one is named, otherwise to `fallback`.
void emit(RunStore& store, const std::string& run_id, const std::string& relative,
          const std::string& content, std::ostream& fallback) {
  if (run_id.empty()) {
    fallback << content;
  } else {
    store.write_artifact(run_id, relative, content);
  }
}

// -- subcommands ------------------------------------------------------------------

int cmd_ingest(const Common&, const std::string& corpus_dir, const std::string& legalbench,
               const std::string& out_dir, Io io) {
  if (!legalbench.empty()) {
    if (out_dir.empty()) throw ConfigError("--legalbench needs --out");
    const auto imported = import_legalbench_ldp(legalbench);
    for (const auto& w : imported.warnings) io.err << "warning: " << w << "\n";
    for (const auto& e : imported.errors) {
      io.err << fmt::format("{}:{}: {}\n", fs::path(legalbench).filename().string(), e.line,
                            e.message);
    }
    save_corpus(imported.corpus, out_dir);
    write_file(fs::path(out_dir) / "human_evaluations.jsonl",
               to_jsonl(imported.human_evaluations));
    write_file(fs::path(out_dir) / "sidecar.jsonl", to_jsonl(imported.sidecar));
    io.out << fmt::format("imported {} QA pairs over {} contracts; {} record(s) rejected\n",
                          imported.corpus.qa_pairs.size(), imported.corpus.contracts.size(),
                          imported.errors.size());
    return imported.errors.empty() ? kExitOk : kExitData;
  }
  if (corpus_dir.empty()) throw ConfigError("ingest needs --corpus or --legalbench");
  const Corpus corpus = load_corpus(corpus_dir);
  io.out << fmt::format("corpus ok: {} contracts, {} QA pairs\n", corpus.contracts.size(),
                        corpus.qa_pairs.size());
  return kExitOk;
}

int cmd_judge(const Common& common, const std::string& corpus_dir, bool verify, Io io) {
  const CliConfig config = load_config(common);
  const Clock clock = make_clock(common);
  auto transport = make_transport(config, common);
  const Corpus corpus = load_corpus(corpus_dir);
  if (corpus.empty()) throw Error(ErrorCode::kValidation, "corpus holds no QA pairs");

  json snapshot = judge_snapshot(config);
  snapshot["mock"] = common.mock;
  snapshot["script_digest"] = common.script.empty() ? json(nullptr) : json(sha256_file(common.script));
  snapshot["verify"] = verify;
  RunStore store(common.runs);
  const RunManifest manifest = store.open_or_create(snapshot, corpus_digests(corpus_dir), clock());

  Judge judge(config.judge, transport, clock);
  const auto items = judge.evaluate_batch(
      corpus.qa_pairs, [&](const std::string& id) -> const ContractDoc& { return corpus.contract(id); });

  std::vector<Evaluation> evaluations;
  std::vector<RawResponseRecord> raw;
  std::vector<json> failures;
  int exit_code = kExitOk;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    raw.insert(raw.end(), item.raw_responses.begin(), item.raw_responses.end());
    if (item.error) {
      failures.push_back({{"qa_id", corpus.qa_pairs[i].id},
                          {"code", to_string(item.error->code())},
                          {"message", item.error->what()}});
      exit_code = std::max(exit_code, exit_code_for(item.error->code()));
      continue;
    }
    Evaluation evaluation = item.outcome->evaluation;
    if (verify) {
      const auto& qa = corpus.qa_pairs[i];
      auto verified = judge.verify_chain(evaluation, corpus.contract(qa.contract_id), qa);
      raw.insert(raw.end(), verified.raw_responses.begin(), verified.raw_responses.end());
      if (verified.warning) io.err << "warning: " << qa.id << ": " << verified.warning_message << "\n";
      evaluation = std::move(verified.evaluation);
    }
    evaluations.push_back(std::move(evaluation));
  }
  store.write_artifact(manifest.run_id, kEvaluationsFile, to_jsonl(evaluations));
  store.write_artifact(manifest.run_id, kRawResponsesFile, to_jsonl(raw));
  if (!failures.empty()) {
    store.write_artifact(manifest.run_id, "reports/judge_failures.jsonl", to_jsonl(failures));
    for (const auto& f : failures) {
      io.err << fmt::format("{}: {} ({})\n", f["qa_id"].get<std::string>(),
                            f["message"].get<std::string>(), f["code"].get<std::string>());
    }
  }
  io.out << fmt::format("run {}: {} evaluated, {} failed\n", manifest.run_id, evaluations.size(),
                        failures.size());
  io.out << store.run_dir(manifest.run_id).string() << "\n";
  return exit_code;
}

int cmd_score(const Common& common, const std::string& run_id, const std::string& file, Io io) {
  RunStore store(common.runs);
  const auto evaluations = evaluations_from(store, run_id, file);
  if (evaluations.empty()) throw Error(ErrorCode::kValidation, "no evaluations to score");
  std::string csv = csv_row({"qa_id", "n_correct", "n_incorrect", "n_irrelevant", "n_missing",
                             "correctness", "precision", "recall", "f1"});
  std::vector<json> records;
  std::vector<std::optional<double>> c, p, r, f;
  for (const auto& evaluation : evaluations) {
    const TagCounts counts = tag_counts(evaluation);
    const ScoreSet s = compute_scores(counts);
    csv += csv_row({evaluation.qa_id, std::to_string(counts.n_correct),
                    std::to_string(counts.n_incorrect), std::to_string(counts.n_irrelevant),
                    std::to_string(counts.n_missing), score_field(s.correctness),
                    score_field(s.precision), score_field(s.recall), score_field(s.f1)});
    records.push_back({{"qa_id", evaluation.qa_id},
                       {"evaluator_id", evaluation.evaluator_id},
                       {"counts", counts},
                       {"scores", s}});
    c.push_back(s.correctness);
    p.push_back(s.precision);
    r.push_back(s.recall);
    f.push_back(s.f1);
  }
  emit(store, run_id, "reports/scores.csv", csv, io.out);
  if (!run_id.empty()) store.write_artifact(run_id, "reports/scores.jsonl", to_jsonl(records));
  auto show = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.3f}", *v) : std::string("n/a");
  };
  io.out << fmt::format("scored {}: mean correctness {} precision {} recall {} f1 {}\n",
                        evaluations.size(), show(mean_of(c)), show(mean_of(p)), show(mean_of(r)),
                        show(mean_of(f)));
  return kExitOk;
}

int cmd_baseline(const Common& common, const std::string& corpus_dir, const std::string& run_id,
                 int max_n, Io io) {
  RunStore store(common.runs);
  const Corpus corpus = load_corpus(corpus_dir);
  std::string csv = csv_row({"qa_id", "bleu", "rouge_1_f1", "rouge_2_f1", "rouge_l_f1"});
  std::size_t scored = 0;
  for (const auto& qa : corpus.qa_pairs) {
    if (!qa.ground_truth) continue;
    try {
      const double b = bleu(qa.answer, *qa.ground_truth, max_n);
      const auto r1 = rouge_n(qa.answer, *qa.ground_truth, 1);
      const auto r2 = rouge_n(qa.answer, *qa.ground_truth, 2);
      const auto rl = rouge_l(qa.answer, *qa.ground_truth);
      csv += csv_row({qa.id, fmt::format("{:.4f}", b), fmt::format("{:.4f}", r1.f1),
                      fmt::format("{:.4f}", r2.f1), fmt::format("{:.4f}", rl.f1)});
      ++scored;
    } catch (const Error& e) {
      io.err << "warning: " << qa.id << ": " << e.what() << "\n";
    }
  }
  if (scored == 0) throw Error(ErrorCode::kValidation, "no QA pair carries a ground truth answer");
  emit(store, run_id, "reports/baselines.csv", csv, io.out);
  io.out << fmt::format("baselines computed for {} QA pairs\n", scored);
  return kExitOk;
}

int cmd_align(const Common& common, const std::string& run_id, const std::string& human_file,
              Io io) {
  const CliConfig config = load_config(common);
  if (run_id.empty()) throw ConfigError("align needs --run");
  RunStore store(common.runs);
  std::map<std::string, Evaluation> machine;
  for (auto& e : store.evaluations(run_id)) machine.emplace(e.qa_id, std::move(e));

  std::vector<Evaluation> human;
  if (!human_file.empty()) {
    human = load_jsonl<Evaluation>(human_file);
  } else {
    for (const auto& review : store.reviews(run_id)) {
      if (review.evaluation) human.push_back(*review.evaluation);
    }
  }
  if (human.empty()) throw Error(ErrorCode::kValidation, "no human evaluations to align against");

  auto embedder = make_cli_embedder(config);
  std::vector<json> records;
  std::string csv = csv_row({"qa_id", "evaluator_id", "pairs", "unmatched_machine",
                             "unmatched_human", "accuracy", "adjusted_accuracy"});
  double sum = 0.0, sum_adjusted = 0.0;
  for (const auto& h : human) {
    auto it = machine.find(h.qa_id);
    if (it == machine.end()) {
      io.err << "warning: no machine evaluation for " << h.qa_id << "\n";
      continue;
    }
    const auto report = align(it->second, h, *embedder, config.align);
    json record = to_json_value(report);
    record["evaluator_id"] = h.evaluator_id;
    records.push_back(std::move(record));
    csv += csv_row({h.qa_id, h.evaluator_id, std::to_string(report.pairs.size()),
                    std::to_string(report.unmatched_machine.size()),
                    std::to_string(report.unmatched_human.size()),
                    fmt::format("{:.4f}", report.accuracy),
                    fmt::format("{:.4f}", report.adjusted_accuracy)});
    sum += report.accuracy;
    sum_adjusted += report.adjusted_accuracy;
  }
  if (records.empty()) throw Error(ErrorCode::kValidation, "no QA pair had both evaluations");
  store.write_artifact(run_id, "reports/alignment.jsonl", to_jsonl(records));
  store.write_artifact(run_id, "reports/alignment.csv", csv);
  const double n = static_cast<double>(records.size());
  io.out << fmt::format("aligned {}: mean accuracy {:.3f}, adjusted {:.3f}\n", records.size(),
                        sum / n, sum_adjusted / n);
  return kExitOk;
}

int cmd_jury(const Common& common, const std::vector<std::string>& judge_files,
             const std::string& strategy_name, const std::string& out_file,
             const std::string& run_id, Io io) {
  const CliConfig config = load_config(common);
  const auto strategy = parse_jury_strategy(strategy_name);
  if (!strategy) throw ConfigError("unknown jury strategy " + strategy_name);
  if (judge_files.size() < 2) throw ConfigError("a jury needs at least two --judges files");
  if (out_file.empty() && run_id.empty()) throw ConfigError("jury needs --out or --run");

  std::vector<std::string> order;
  std::map<std::string, std::vector<Evaluation>> by_qa;
  for (const auto& file : judge_files) {
    for (auto& e : load_jsonl<Evaluation>(file)) {
      if (!by_qa.count(e.qa_id)) order.push_back(e.qa_id);
      by_qa[e.qa_id].push_back(std::move(e));
    }
  }
  auto embedder = make_cli_embedder(config);
  std::vector<Evaluation> verdicts;
  for (const auto& qa_id : order) {
    const auto& evaluations = by_qa[qa_id];
    if (evaluations.size() < 2) {
      io.err << "warning: " << qa_id << " has a single judge; skipped\n";
      continue;
    }
    verdicts.push_back(aggregate(evaluations, *strategy, *embedder, config.align));
  }
  if (verdicts.empty()) throw Error(ErrorCode::kValidation, "no QA pair had two or more judges");
  const std::string content = to_jsonl(verdicts);
  if (!out_file.empty()) write_file(out_file, content);
  if (!run_id.empty()) {
    RunStore store(common.runs);
    store.write_artifact(run_id, fmt::format("reports/jury_{}.jsonl", to_string(*strategy)), content);
  }
  io.out << fmt::format("jury ({}) aggregated {} QA pairs\n", to_string(*strategy), verdicts.size());
  return kExitOk;
}

int cmd_augment(const Common& common, const std::string& corpus_dir,
                const std::string& evaluations_file, const std::vector<std::string>& kind_names,
                std::uint64_t seed, const std::string& out_dir, Io io) {
  const CliConfig config = load_config(common);
  if (out_dir.empty()) throw ConfigError("augment needs --out");
  std::vector<AugmentationKind> kinds;
  for (const auto& name : kind_names) {
    if (name == "all") {
      kinds.assign(std::begin(kAllAugmentationKinds), std::end(kAllAugmentationKinds));
      continue;
    }
    auto kind = parse_augmentation_kind(name);
    if (!kind) throw ConfigError("unknown augmentation kind " + name);
    kinds.push_back(*kind);
  }
  if (kinds.empty()) kinds.assign(std::begin(kAllAugmentationKinds), std::end(kAllAugmentationKinds));

  auto transport = make_transport(config, common);
  auto client = std::make_shared<const ChatClient>(transport, config.judge.max_retries,
                                                   config.judge.backoff_base);
  const Augmenter augmenter(client);
  const Corpus corpus = load_corpus(corpus_dir);
  const auto evaluations = load_jsonl<Evaluation>(evaluations_file);

  std::vector<AugmentedExample> examples;
  std::string skipped = csv_row({"qa_id", "kind", "code", "reason"});
  std::size_t skipped_count = 0;
  std::uint64_t index = 0;
  for (const auto& evaluation : evaluations) {
    const QAPair& qa = corpus.qa(evaluation.qa_id);
    for (auto kind : kinds) {
      try {
        examples.push_back(augmenter.apply(kind, qa, evaluation, seed + index));
      } catch (const Error& e) {
        if (exit_code_for(e.code()) == kExitProvider && e.code() != ErrorCode::kProviderResponse) {
          throw;
        }
        skipped += csv_row({qa.id, std::string(to_string(kind)), std::string(to_string(e.code())),
                            e.what()});
        ++skipped_count;
      }
      ++index;
    }
  }
  std::vector<json> lines;
  for (const auto& ex : examples) lines.push_back(to_json_value(ex));
  write_file(fs::path(out_dir) / "augmented.jsonl", to_jsonl(lines));
  write_file(fs::path(out_dir) / "edit_log.csv", edit_log_csv(examples));
  write_file(fs::path(out_dir) / "skipped.csv", skipped);
  io.out << fmt::format("augmented {} example(s), skipped {}\n", examples.size(), skipped_count);
  return examples.empty() ? kExitData : kExitOk;
}

int cmd_iaa(const Common& common, const std::string& a_file, const std::string& b_file,
            const std::string& corpus_dir, bool group, const std::string& run_id, Io io) {
  IAAOptions options;
  options.group_by_contract_type = group;
  if (group) {
    if (corpus_dir.empty()) throw ConfigError("--group-by-contract-type needs --corpus");
    const Corpus corpus = load_corpus(corpus_dir);
    for (const auto& qa : corpus.qa_pairs) {
      options.contract_type_by_qa[qa.id] = corpus.contract(qa.contract_id).contract_type;
    }
  }
  const auto a = load_jsonl<HumanReview>(a_file);
  const auto b = load_jsonl<HumanReview>(b_file);
  const auto cells = iaa(a, b, options);
  const std::string csv = iaa_csv(cells);
  io.out << csv;
  if (!run_id.empty()) {
    RunStore store(common.runs);
    store.write_artifact(run_id, "reports/iaa.csv", csv);
    store.write_artifact(run_id, "reports/iaa.json", to_json_value(cells).dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_triage(const Common& common, const std::string& run_id, const std::string& file,
               const std::optional<double>& relevance, const std::optional<double>& correctness,
               const std::vector<double>& baselines, const std::vector<std::string>& reviewers,
               Io io) {
  CliConfig config = load_config(common);
  if (relevance) config.triage.relevance_threshold = *relevance;
  if (correctness) config.triage.correctness_threshold = *correctness;
  for (const auto& v : validate(config.triage)) throw ConfigError(v.message);
  if (!reviewers.empty() && reviewers.size() != baselines.size()) {
    throw ConfigError("--reviewer must be given once per --baseline-hours");
  }
  RunStore store(common.runs);
  const auto evaluations = evaluations_from(store, run_id, file);
  if (evaluations.empty()) throw Error(ErrorCode::kValidation, "no evaluations to triage");
  const TriageReport report = triage(score_map(evaluations), config.triage);

  std::vector<std::pair<std::string, TriageReport>> savings;
  for (std::size_t i = 0; i < baselines.size(); ++i) {
    const std::string name = reviewers.empty() ? fmt::format("Reviewer {}", i + 1) : reviewers[i];
    savings.emplace_back(name, time_savings(report, baselines[i]));
  }
  json j = to_json_value(report);
  if (!savings.empty()) {
    j["time_savings"] = json::array();
    for (const auto& [name, r] : savings) {
      j["time_savings"].push_back(
          {{"reviewer", name}, {"baseline_hours", *r.baseline_hours}, {"estimated_hours", *r.estimated_hours}});
    }
  }
  if (!run_id.empty()) {
    store.write_artifact(run_id, "reports/triage.json", j.dump(2) + "\n");
    store.write_artifact(run_id, "reports/triage.csv", triage_csv(report));
    if (!savings.empty()) {
      store.write_artifact(run_id, "reports/time_savings.csv", time_savings_csv(savings));
    }
  } else {
    io.out << triage_csv(report);
    if (!savings.empty()) io.out << time_savings_csv(savings);
  }
  io.out << fmt::format("triage at relevance >= {:.2f}: {} cleared, {} flagged of {}\n",
                        config.triage.relevance_threshold, report.cleared.size(),
                        report.flagged.size(), report.total);
  for (const auto& [name, r] : savings) {
    io.out << fmt::format("{}: {:.2f} h -> {:.2f} h\n", name, *r.baseline_hours, *r.estimated_hours);
  }
  return kExitOk;
}

int cmd_report(const Common& common, const std::string& run_id, Io io) {
  if (run_id.empty()) throw ConfigError("report needs --run");
  RunStore store(common.runs);
  const LoadedRun run = store.load_run(run_id);
  io.out << fmt::format("run {} created {}\n", run.manifest.run_id, run.manifest.created_at);
  io.out << fmt::format("artifacts verified: {}\n", run.manifest.artifact_digests.size());
  std::vector<std::optional<double>> c, f;
  for (const auto& e : run.evaluations) {
    const auto s = compute_scores(tag_counts(e));
    c.push_back(s.correctness);
    f.push_back(s.f1);
  }
  auto show = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.3f}", *v) : std::string("n/a");
  };
  io.out << fmt::format("evaluations: {} (mean correctness {}, mean f1 {})\n",
                        run.evaluations.size(), show(mean_of(c)), show(mean_of(f)));
  io.out << fmt::format("raw responses: {}\nreviews: {}\n", run.raw_responses.size(),
                        run.reviews.size());
  for (const auto& [path, _] : run.reports) io.out << "report: " << path << "\n";
  return kExitOk;
}

int cmd_serve(const Common& common, const std::string& run_id, const std::string& corpus_dir,
              const std::string& host, int port, Io io) {
  const CliConfig config = load_config(common);
  if (run_id.empty()) throw ConfigError("serve needs --run");
  if (config.service_tokens.empty()) {
    throw ConfigError("serve needs service.tokens (token:reviewer pairs) in the configuration");
  }
  auto store = std::make_shared<RunStore>(common.runs);
  ServiceOptions options;
  options.align = config.align;
  options.triage = config.triage;
  options.store = store;
  options.run_id = run_id;
  auto service = std::make_shared<AnnotationService>(
      load_corpus(corpus_dir), store->evaluations(run_id),
      std::shared_ptr<Embedder>(make_cli_embedder(config)), options, make_clock(common));
  AnnotationServer server(service, config.service_tokens);
  const int bound = server.bind(host.empty() ? config.service_host : host,
                                port < 0 ? config.service_port : port);
  io.out << fmt::format("serving run {} on {}:{}\n", run_id,
                        host.empty() ? config.service_host : host, bound);
  io.out.flush();
  server.serve();
  return kExitOk;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTransport:
    case ErrorCode::kAuthentication:
    case ErrorCode::kProviderResponse:
    case ErrorCode::kEmptyEvaluation:
    case ErrorCode::kMalformedTag: return kExitProvider;
    default: return kExitData;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference-free legal QA evaluation with Legal Data Points", "ldpjudge"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "key = value configuration file");
  app.add_flag("--mock", common.mock, "scripted judge and offline embedder; no network");
  app.add_option("--script", common.script, "JSONL of canned judge responses");
  app.add_option("--fixed-clock", common.fixed_clock, "pin every timestamp (ISO-8601 UTC)");
  app.add_option("--parallelism", common.parallelism, "max in-flight provider calls")
      ->check(CLI::PositiveNumber);
  app.add_option("--runs", common.runs, "root directory for run artifacts");
  app.add_option("--answer-model", common.answer_model, "model that produced the answers");

  std::string corpus, run_id, file, out_path, legalbench, human, strategy = "hybrid", reviews_a,
      reviews_b, host;
  std::vector<std::string> judges, kinds, reviewers;
  std::vector<double> baselines;
  std::optional<double> relevance, correctness;
  bool verify = false, group = false;
  int max_n = 4, port = -1;
  std::uint64_t seed = 0;

  auto* ingest = app.add_subcommand("ingest", "validate a corpus or import released LDP records");
  ingest->add_option("--corpus", corpus, "directory with contracts.jsonl and qa.jsonl");
  ingest->add_option("--legalbench", legalbench, "released LDP JSONL to import");
  ingest->add_option("--out", out_path, "output directory for an import");

  auto* judge = app.add_subcommand("judge", "segment and tag every answer in a corpus");
  judge->add_option("--corpus", corpus)->required();
  judge->add_flag("--verify", verify, "run a chain-of-verification pass");

  auto* score = app.add_subcommand("score", "correctness, precision, recall and f1 per QA pair");
  score->add_option("--run", run_id);
  score->add_option("--evaluations", file);

  auto* baseline = app.add_subcommand("baseline", "BLEU and ROUGE against ground truth answers");
  baseline->add_option("--corpus", corpus)->required();
  baseline->add_option("--run", run_id);
  baseline->add_option("--max-n", max_n)->check(CLI::Range(1, 4));

  auto* align_cmd = app.add_subcommand("align", "alignment accuracy against human evaluations");
  align_cmd->add_option("--run", run_id)->required();
  align_cmd->add_option("--human", human, "JSONL of human evaluations (default: run reviews)");

  auto* jury = app.add_subcommand("jury", "aggregate several judges per LDP");
  jury->add_option("--judges", judges)->required();
  jury->add_option("--strategy", strategy, "rule_based, majority or hybrid");
  jury->add_option("--out", out_path);
  jury->add_option("--run", run_id);

  auto* augment = app.add_subcommand("augment", "synthesize Incorrect- and Missing-rich examples");
  augment->add_option("--corpus", corpus)->required();
  augment->add_option("--evaluations", file)->required();
  augment->add_option("--kind", kinds, "augmentation kind, repeatable; default all");
  augment->add_option("--seed", seed);
  augment->add_option("--out", out_path)->required();

  auto* iaa_cmd = app.add_subcommand("iaa", "agreement between two reviewers");
  iaa_cmd->add_option("--reviews-a", reviews_a)->required();
  iaa_cmd->add_option("--reviews-b", reviews_b)->required();
  iaa_cmd->add_option("--corpus", corpus);
  iaa_cmd->add_flag("--group-by-contract-type", group);
  iaa_cmd->add_option("--run", run_id);

  auto* triage_cmd = app.add_subcommand("triage", "clear QA pairs that meet the thresholds");
  triage_cmd->add_option("--run", run_id);
  triage_cmd->add_option("--evaluations", file);
  triage_cmd->add_option("--relevance-threshold", relevance);
  triage_cmd->add_option("--correctness-threshold", correctness);
  triage_cmd->add_option("--baseline-hours", baselines, "manual review hours, repeatable");
  triage_cmd->add_option("--reviewer", reviewers, "label per --baseline-hours");

  auto* report = app.add_subcommand("report", "verify a run and summarize it");
  report->add_option("--run", run_id)->required();

  auto* serve = app.add_subcommand("serve", "annotation API over a run");
  serve->add_option("--run", run_id)->required();
  serve->add_option("--corpus", corpus)->required();
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("ldpjudge");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Io io{out, err};
  try {
    if (*ingest) return cmd_ingest(common, corpus, legalbench, out_path, io);
    if (*judge) return cmd_judge(common, corpus, verify, io);
    if (*score) return cmd_score(common, run_id, file, io);
    if (*baseline) return cmd_baseline(common, corpus, run_id, max_n, io);
    if (*align_cmd) return cmd_align(common, run_id, human, io);
    if (*jury) return cmd_jury(common, judges, strategy, out_path, run_id, io);
    if (*augment) return cmd_augment(common, corpus, file, kinds, seed, out_path, io);
    if (*iaa_cmd) return cmd_iaa(common, reviews_a, reviews_b, corpus, group, run_id, io);
    if (*triage_cmd) {
      return cmd_triage(common, run_id, file, relevance, correctness, baselines, reviewers, io);
    }
    if (*report) return cmd_report(common, run_id, io);
    if (*serve) return cmd_serve(common, run_id, corpus, host, port, io);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [io]: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ldpjudge::cli
