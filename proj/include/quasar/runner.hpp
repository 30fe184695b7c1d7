#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quasar/config.hpp"
#include "quasar/demo.hpp"
#include "quasar/evaluation.hpp"
#include "quasar/http_backend.hpp"
#include "quasar/perturb.hpp"
#include "quasar/problem_template.hpp"
#include "quasar/replay.hpp"

namespace quasar {

// Commands are not safe to run concurrently against one output directory;
// the lock file makes the second runner fail fast instead of corrupting
// artifacts. Stale locks after a crash must be removed by hand.
class OutDirLock {
 public:
  explicit OutDirLock(const std::filesystem::path& out_dir) : path_(out_dir / ".lock") {
    std::filesystem::create_directories(out_dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw ConfigError("output directory " + out_dir.string() +
                        " is locked by another run (delete " + path_.string() +
                        " if that run is dead)");
    }
  }
  ~OutDirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
  }
  OutDirLock(const OutDirLock&) = delete;
  OutDirLock& operator=(const OutDirLock&) = delete;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string render_text() const {
    std::vector<size_t> widths(header.size());
    for (size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : rows) {
      for (size_t c = 0; c < row.size() && c < widths.size(); ++c) {
        widths[c] = std::max(widths[c], row[c].size());
      }
    }
    auto emit = [&](const std::vector<std::string>& cells) {
      std::string line;
      for (size_t c = 0; c < widths.size(); ++c) {
        std::string cell = c < cells.size() ? cells[c] : std::string();
        if (c == 0) {
          line += cell + std::string(widths[c] - cell.size(), ' ');
        } else {
          line += std::string(widths[c] - cell.size(), ' ') + cell;
        }
        if (c + 1 < widths.size()) line += "  ";
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      return line + "\n";
    };
    std::string out = emit(header);
    size_t total = 0;
    for (size_t c = 0; c < widths.size(); ++c) total += widths[c] + (c + 1 < widths.size() ? 2 : 0);
    out += std::string(total, '-') + "\n";
    for (const auto& row : rows) out += emit(row);
    return out;
  }

  std::string render_csv() const {
    auto quote = [](const std::string& cell) {
      if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
      std::string quoted = "\"";
      for (char c : cell) {
        quoted += c;
        if (c == '"') quoted += '"';
      }
      return quoted + "\"";
    };
    auto emit = [&](const std::vector<std::string>& cells) {
      std::string line;
      for (size_t c = 0; c < cells.size(); ++c) {
        if (c) line += ',';
        line += quote(cells[c]);
      }
      return line + "\n";
    };
    std::string out = emit(header);
    for (const auto& row : rows) out += emit(row);
    return out;
  }
};

inline std::string format_delta(const Decimal& delta) {
  std::string s = delta.to_fixed(1);
  if (!delta.is_negative() && !delta.is_zero()) s = "+" + s;
  return s;
}

inline Decimal mean(const std::vector<Decimal>& values) {
  if (values.empty()) throw std::invalid_argument("mean of nothing");
  Decimal sum(0);
  for (const auto& v : values) sum = sum + v;
  return sum / Decimal(static_cast<std::int64_t>(values.size()));
}

inline std::string iso_utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  }
  return out;
}

inline Json config_to_json(const RunConfig& c) {
  Json endpoints = Json::object();
  for (const auto& [name, e] : c.endpoints) {
    endpoints[name] = Json{{"base_url", e.base_url},
                           {"model_id", e.model_id},
                           {"temperature", e.temperature.to_string()},
                           {"max_tokens", e.max_tokens},
                           {"auth_env", e.auth_env}};
  }
  Json datasets = Json::array();
  for (const auto& d : c.datasets) {
    Json j{{"task", d.task}, {"path", d.path.string()}, {"schema", d.schema}};
    if (d.limit) j["limit"] = *d.limit;
    datasets.push_back(j);
  }
  Json templates = Json::array();
  for (const auto& t : c.robustness_templates) {
    templates.push_back(Json{{"task", t.task}, {"path", t.path.string()}, {"count", t.count}});
  }
  Json caps = Json::object();
  for (const auto& [task, cap] : c.demo_caps) caps[task] = cap;
  Json fractions = Json::array();
  for (const auto& f : c.scaling_fractions) fractions.push_back(f.to_string());
  return Json{{"endpoints", endpoints},
              {"generator", c.generator},
              {"teacher", c.teacher},
              {"correctors", c.correctors},
              {"judge", Json{{"enabled", c.judge_enabled}, {"endpoint", c.judge}}},
              {"datasets", datasets},
              {"strategies", c.strategies},
              {"robustness_templates", templates},
              {"prompts_dir", c.prompts_dir.string()},
              {"cache_dir", c.cache_dir.string()},
              {"out_dir", c.out_dir.string()},
              {"backend", c.backend},
              {"seed", c.seed},
              {"max_in_flight", c.max_in_flight},
              {"numeric_eps", c.numeric_eps.to_string()},
              {"demo_caps", caps},
              {"scaling_fractions", fractions}};
}

inline Json gateway_stats_json(const GatewayStats& s) {
  return Json{{"requests", s.requests},
              {"cache_hits", s.cache_hits},
              {"backend_calls", s.backend_calls},
              {"retries", s.retries},
              {"failures", s.failures}};
}

// Owns the wiring for one run: prompts, backend, generator and judge
// gateways, output locations, and the manifest bookkeeping.
class Runner {
 public:
  explicit Runner(RunConfig config)
      : config_(std::move(config)), started_at_(iso_utc_now()) {
    validate_config(config_);
    prompts_ = std::make_unique<PromptLibrary>(config_.prompts_dir);
    if (config_.backend == "replay") {
      if (config_.cache_dir.empty()) {
        throw ConfigError("replay backend needs cache_dir pointing at recorded replies");
      }
      backend_ = std::make_shared<ReplayBackend>(config_.cache_dir);
    } else {
      backend_ = std::make_shared<HttpBackend>();
    }
    GatewayOptions options;
    options.cache_dir = config_.cache_dir;
    options.max_in_flight = config_.max_in_flight;
    gateway_ = std::make_unique<Gateway>(backend_, options);
    judge_gateway_ = std::make_unique<Gateway>(backend_, options);
    lock_ = std::make_unique<OutDirLock>(config_.out_dir);
    std::filesystem::create_directories(outcomes_dir());
  }

  const RunConfig& config() const { return config_; }
  const PromptLibrary& prompts() const { return *prompts_; }
  Gateway& gateway() { return *gateway_; }
  const ChatBackend& backend() const { return *backend_; }
  std::filesystem::path outcomes_dir() const { return config_.out_dir / "outcomes"; }

  const ModelEndpoint& endpoint(const std::string& name) const {
    auto it = config_.endpoints.find(name);
    if (it == config_.endpoints.end()) throw ConfigError("endpoint " + name + " is not defined");
    return it->second;
  }

  JudgeContext* judge_context() {
    if (!config_.judge_enabled) return nullptr;
    judge_ctx_.gateway = judge_gateway_.get();
    judge_ctx_.prompts = prompts_.get();
    judge_ctx_.endpoint = endpoint(config_.judge);
    return &judge_ctx_;
  }

  std::vector<TaskRecord> load_dataset(const DatasetConfig& dataset) const {
    LoadResult loaded = load_records(dataset.path, dataset.schema);
    std::vector<TaskRecord> records = std::move(loaded.records);
    for (auto& r : records) r.task = dataset.task;
    if (dataset.limit && *dataset.limit < records.size()) records.resize(*dataset.limit);
    return records;
  }

  // One (record set, strategy) evaluation pass; outcomes persisted in input
  // order under outcomes/<task>__<strategy>.jsonl.
  std::vector<EvalOutcome> run_pair(const std::vector<TaskRecord>& records,
                                    const StrategyVariant& variant, const std::string& file_task) {
    std::vector<std::string> rendered;
    rendered.reserve(records.size());
    for (const auto& record : records) {
      rendered.push_back(prompts_->render(variant, record.question_text()).full_text);
    }
    std::vector<ChatExchange> replies =
        gateway_->complete_batch(endpoint(config_.generator), rendered);

    EvalOptions options;
    options.judge_enabled = config_.judge_enabled;
    options.numeric_eps = config_.numeric_eps;
    JudgeContext* judge = judge_context();

    std::vector<EvalOutcome> outcomes;
    outcomes.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
      if (replies[i].ok) {
        outcomes.push_back(
            evaluate_completion(records[i], variant.id(), replies[i].response, options, judge));
      } else {
        EvalOutcome failed;
        failed.record_id = records[i].id;
        failed.task = records[i].task;
        failed.strategy_id = variant.id();
        failed.error = replies[i].error;
        outcomes.push_back(std::move(failed));
      }
    }
    write_outcomes(file_task, variant.id(), outcomes);
    return outcomes;
  }

  void write_outcomes(const std::string& task, const std::string& strategy_id,
                      const std::vector<EvalOutcome>& outcomes) {
    std::string content;
    for (const auto& o : outcomes) {
      content += outcome_to_json(o).dump();
      content += '\n';
    }
    std::filesystem::path path =
        outcomes_dir() / (sanitize_name(task) + "__" + sanitize_name(strategy_id) + ".jsonl");
    atomic_write_file(path, content);
    note_artifact(path);
  }

  std::vector<EvalOutcome> read_all_outcomes() const {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::exists(outcomes_dir())) {
      for (const auto& entry : std::filesystem::directory_iterator(outcomes_dir())) {
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    std::vector<EvalOutcome> outcomes;
    for (const auto& file : files) {
      JsonlFile parsed = read_jsonl(file);
      for (const auto& line : parsed.lines) outcomes.push_back(outcome_from_json(line.value));
      if (!parsed.rejects.empty()) {
        throw ConfigError(file.string() + ": corrupt outcome line " +
                          std::to_string(parsed.rejects.front().line_number));
      }
    }
    return outcomes;
  }

  void write_table(const std::string& stem, const TextTable& table) {
    std::filesystem::path csv = config_.out_dir / (stem + ".csv");
    std::filesystem::path txt = config_.out_dir / (stem + ".txt");
    atomic_write_file(csv, table.render_csv());
    atomic_write_file(txt, table.render_text());
    note_artifact(csv);
    note_artifact(txt);
  }

  void note_artifact(const std::filesystem::path& path) {
    artifacts_.push_back(std::filesystem::relative(path, config_.out_dir).string());
  }

  void note_warning(const std::string& message) { warnings_.push_back(message); }

  // Written last, atomically. Outcome files carry no timestamps; the manifest
  // is the only place wall-clock data lives.
  void write_manifest(const std::string& command) {
    std::sort(artifacts_.begin(), artifacts_.end());
    artifacts_.erase(std::unique(artifacts_.begin(), artifacts_.end()), artifacts_.end());
    Json manifest{{"command", command},
                  {"config_sha256", sha256_hex(config_to_json(config_).dump())},
                  {"started_at", started_at_},
                  {"finished_at", iso_utc_now()},
                  {"backend", Json{{"kind", backend_->kind()},
                                   {"network_calls", backend_->network_calls()}}},
                  {"generator_gateway", gateway_stats_json(gateway_->stats())},
                  {"judge_gateway", gateway_stats_json(judge_gateway_->stats())},
                  {"artifacts", artifacts_},
                  {"warnings", warnings_}};
    atomic_write_file(config_.out_dir / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  RunConfig config_;
  std::string started_at_;
  std::unique_ptr<PromptLibrary> prompts_;
  std::shared_ptr<ChatBackend> backend_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<Gateway> judge_gateway_;
  std::unique_ptr<OutDirLock> lock_;
  JudgeContext judge_ctx_;
  std::vector<std::string> artifacts_;
  std::vector<std::string> warnings_;
};

namespace detail {

// Accuracy table: tasks down, strategies across. Column order follows the
// preferred list, then any extras alphabetically; rows are sorted by task.
inline TextTable accuracy_table(const std::vector<AccuracyReport>& reports,
                                const std::vector<std::string>& preferred_strategies) {
  std::vector<std::string> strategies;
  auto add_strategy = [&](const std::string& s) {
    if (std::find(strategies.begin(), strategies.end(), s) == strategies.end()) {
      strategies.push_back(s);
    }
  };
  std::set<std::string> seen;
  for (const auto& r : reports) seen.insert(r.strategy_id);
  for (const auto& s : preferred_strategies) {
    if (seen.count(s)) add_strategy(s);
  }
  for (const auto& s : seen) add_strategy(s);

  std::map<std::string, std::map<std::string, Decimal>> cells;
  for (const auto& r : reports) cells[r.task][r.strategy_id] = r.accuracy;

  TextTable table;
  table.header.push_back("task");
  for (const auto& s : strategies) table.header.push_back(s);
  for (const auto& [task, row] : cells) {
    std::vector<std::string> cols{task};
    for (const auto& s : strategies) {
      auto it = row.find(s);
      cols.push_back(it == row.end() ? std::string("-") : it->second.to_fixed(3));
    }
    table.rows.push_back(std::move(cols));
  }
  return table;
}

inline const AccuracyReport* find_report(const std::vector<AccuracyReport>& reports,
                                         const std::string& task, const std::string& strategy) {
  for (const auto& r : reports) {
    if (r.task == task && r.strategy_id == strategy) return &r;
  }
  return nullptr;
}

}  // namespace detail

// Evaluate every configured dataset under every configured strategy.
inline std::vector<AccuracyReport> cmd_eval(Runner& runner) {
  std::vector<EvalOutcome> all;
  for (const auto& dataset : runner.config().datasets) {
    std::vector<TaskRecord> records = runner.load_dataset(dataset);
    for (const auto& id : runner.config().strategies) {
      StrategyVariant variant = parse_strategy_id(id);
      std::vector<EvalOutcome> outcomes = runner.run_pair(records, variant, dataset.task);
      all.insert(all.end(), outcomes.begin(), outcomes.end());
    }
  }
  std::vector<AccuracyReport> reports = aggregate(all);
  runner.write_table("eval_accuracy", detail::accuracy_table(reports, runner.config().strategies));
  runner.write_manifest("eval");
  return reports;
}

// Step-omission grid: absolute accuracy for the full protocol, signed
// percentage-point deltas for every ablated variant, plus row and column
// averages.
inline TextTable cmd_ablation(Runner& runner) {
  std::vector<StrategyVariant> variants = ablation_variants();
  std::vector<EvalOutcome> all;
  std::vector<std::string> tasks;
  for (const auto& dataset : runner.config().datasets) {
    tasks.push_back(dataset.task);
    std::vector<TaskRecord> records = runner.load_dataset(dataset);
    for (const auto& variant : variants) {
      std::vector<EvalOutcome> outcomes = runner.run_pair(records, variant, dataset.task);
      all.insert(all.end(), outcomes.begin(), outcomes.end());
    }
  }
  std::vector<AccuracyReport> reports = aggregate(all);

  TextTable table;
  table.header.push_back("variant");
  for (const auto& task : tasks) table.header.push_back(task);
  table.header.push_back("Avg.");

  const std::string full_id = StrategyVariant::quasar().id();
  std::vector<std::string> full_row{StrategyVariant::quasar().label()};
  std::vector<Decimal> full_accuracies;
  for (const auto& task : tasks) {
    const AccuracyReport* r = detail::find_report(reports, task, full_id);
    if (!r) throw ConfigError("missing full-protocol report for " + task);
    full_accuracies.push_back(r->accuracy);
    full_row.push_back(r->accuracy.to_fixed(3));
  }
  full_row.push_back(mean(full_accuracies).to_fixed(3));
  table.rows.push_back(std::move(full_row));

  std::map<std::string, std::vector<Decimal>> column_deltas;
  for (const auto& variant : variants) {
    if (variant.id() == full_id) continue;
    std::vector<std::string> row{variant.label()};
    std::vector<Decimal> deltas;
    for (size_t t = 0; t < tasks.size(); ++t) {
      const AccuracyReport* base = detail::find_report(reports, tasks[t], full_id);
      const AccuracyReport* ablated = detail::find_report(reports, tasks[t], variant.id());
      if (!base || !ablated) throw ConfigError("missing ablation report for " + tasks[t]);
      Decimal delta = (ablated->accuracy - base->accuracy) * Decimal(100);
      deltas.push_back(delta);
      column_deltas[tasks[t]].push_back(delta);
      row.push_back(format_delta(delta));
    }
    row.push_back(format_delta(mean(deltas)));
    table.rows.push_back(std::move(row));
  }

  std::vector<std::string> avg_row{"Avg."};
  std::vector<Decimal> grand;
  for (const auto& task : tasks) {
    Decimal m = mean(column_deltas[task]);
    grand.push_back(m);
    avg_row.push_back(format_delta(m));
  }
  avg_row.push_back(format_delta(mean(grand)));
  table.rows.push_back(std::move(avg_row));

  runner.write_table("ablation", table);
  runner.write_manifest("ablation");
  return table;
}

// Perturbed-input accuracy with the shift against the unperturbed run in
// brackets. Multiple-choice tasks get seeded option shuffles; numeric tasks
// get fresh template instantiations.
inline TextTable cmd_robustness(Runner& runner) {
  const RunConfig& config = runner.config();
  TextTable table;
  table.header.push_back("task");
  for (const auto& id : config.strategies) table.header.push_back(id);

  std::vector<EvalOutcome> all;
  for (const auto& dataset : config.datasets) {
    std::vector<TaskRecord> records = runner.load_dataset(dataset);
    if (records.empty()) {
      runner.note_warning(dataset.task + ": empty dataset, skipped");
      continue;
    }

    std::vector<TaskRecord> perturbed;
    if (records.front().kind == AnswerKind::kChoice) {
      perturbed = shuffle_choices(records, config.seed);
    } else {
      for (const auto& spec : config.robustness_templates) {
        if (spec.task != dataset.task) continue;
        ProblemTemplate tmpl = ProblemTemplate::load(spec.path);
        std::vector<TaskRecord> fresh = instantiate_records(tmpl, config.seed, spec.count);
        perturbed.insert(perturbed.end(), fresh.begin(), fresh.end());
      }
      if (perturbed.empty()) {
        runner.note_warning(dataset.task + ": no perturbation template configured, skipped");
        continue;
      }
    }
    std::string perturbed_task = dataset.task + "-perturbed";
    for (auto& r : perturbed) r.task = perturbed_task;

    std::vector<std::string> row{dataset.task};
    for (const auto& id : config.strategies) {
      StrategyVariant variant = parse_strategy_id(id);
      std::vector<EvalOutcome> base_outcomes = runner.run_pair(records, variant, dataset.task);
      std::vector<EvalOutcome> pert_outcomes = runner.run_pair(perturbed, variant, perturbed_task);
      AccuracyReport base = aggregate(base_outcomes).front();
      AccuracyReport pert = aggregate(pert_outcomes).front();
      pert.task = base.task;  // align the pair for the delta computation
      Decimal delta = robustness_delta(base, pert);
      row.push_back(pert.accuracy.to_fixed(3) + " (" + format_delta(delta) + ")");
      all.insert(all.end(), base_outcomes.begin(), base_outcomes.end());
      all.insert(all.end(), pert_outcomes.begin(), pert_outcomes.end());
    }
    table.rows.push_back(std::move(row));
  }
  if (all.empty()) throw ConfigError("robustness: nothing to perturb");

  runner.write_table("robustness", table);
  runner.write_manifest("robustness");
  return table;
}

// Teacher-demonstration pipeline: generate, gate, balance, export.
inline ExportResult cmd_annotate(Runner& runner) {
  const RunConfig& config = runner.config();
  std::vector<TaskRecord> records;
  for (const auto& dataset : config.datasets) {
    std::vector<TaskRecord> loaded = runner.load_dataset(dataset);
    records.insert(records.end(), loaded.begin(), loaded.end());
  }
  const ModelEndpoint& teacher = runner.endpoint(config.teacher);
  std::vector<Demonstration> demos = generate_demonstrations(
      records, teacher, StrategyVariant::quasar(), runner.gateway(), runner.prompts());

  FilterStats stats;
  stats.generated = demos.size();
  GatePartition exact = filter_exact(std::move(demos), config.numeric_eps);
  stats.exact_pass = exact.kept.size();
  StepGateResult steps = filter_steps(std::move(exact.kept), runner.judge_context());
  stats.step_pass = steps.kept.size();
  stats.undecided = steps.undecided.size();

  std::map<std::string, size_t> caps =
      config.demo_caps.empty() ? default_demo_caps() : config.demo_caps;
  ExportResult result =
      balance_and_export(steps.kept, caps, config.seed, config.out_dir / "demos.jsonl");
  result.stats.generated = stats.generated;
  result.stats.exact_pass = stats.exact_pass;
  result.stats.step_pass = stats.step_pass;
  result.stats.undecided = stats.undecided;
  for (const auto& w : result.stats.warnings) runner.note_warning(w);

  write_demo_manifest(config.out_dir / "demo_manifest.json", caps, config.seed, result.stats,
                      result);
  runner.note_artifact(result.export_path);
  runner.note_artifact(config.out_dir / "demo_manifest.json");
  runner.write_manifest("annotate");
  return result;
}

// Nested prefix subsets of the demonstration export, for data-scaling runs.
inline TextTable cmd_scaling(Runner& runner, std::vector<Decimal> fractions = {}) {
  const RunConfig& config = runner.config();
  if (fractions.empty()) fractions = config.scaling_fractions;
  std::filesystem::path export_path = config.out_dir / "demos.jsonl";
  if (!std::filesystem::exists(export_path)) {
    throw ConfigError("scaling needs an export; run annotate first (missing " +
                      export_path.string() + ")");
  }
  std::string content = read_text_file(export_path);
  std::vector<size_t> line_ends;
  for (size_t i = 0; i < content.size(); ++i) {
    if (content[i] == '\n') line_ends.push_back(i + 1);
  }
  if (!content.empty() && (line_ends.empty() || line_ends.back() != content.size())) {
    line_ends.push_back(content.size());
  }
  size_t total = line_ends.size();

  TextTable table;
  table.header = {"fraction", "rows", "file", "sha256"};
  for (const auto& f : fractions) {
    if (f.is_negative() || f.is_zero() || Decimal(1) < f) {
      throw ConfigError("scaling fraction must be in (0, 1], got " + f.to_string());
    }
    Decimal scaled = f * Decimal(static_cast<std::int64_t>(total));
    auto take = static_cast<size_t>(scaled.floor().to_double());
    std::string subset = take == 0 ? std::string() : content.substr(0, line_ends[take - 1]);
    std::filesystem::path path = config.out_dir / ("demos_scale_" + f.to_fixed(2) + ".jsonl");
    atomic_write_file(path, subset);
    runner.note_artifact(path);
    table.rows.push_back(
        {f.to_fixed(2), std::to_string(take), path.filename().string(), sha256_hex(subset)});
  }
  runner.write_table("scaling", table);
  runner.write_manifest("scaling");
  return table;
}

// Re-prompts every persisted failure through each corrector endpoint and
// reports the fraction repaired, one row per (task, strategy) run.
inline TextTable cmd_self_correct(Runner& runner) {
  const RunConfig& config = runner.config();
  std::vector<std::string> correctors = config.correctors;
  if (correctors.empty()) correctors.push_back(config.generator);

  std::map<std::string, TaskRecord> by_id;
  for (const auto& dataset : config.datasets) {
    for (auto& r : runner.load_dataset(dataset)) by_id.emplace(r.id, std::move(r));
  }

  std::vector<EvalOutcome> persisted = runner.read_all_outcomes();
  if (persisted.empty()) {
    throw ConfigError("self-correct needs persisted outcomes; run eval first");
  }
  std::map<std::pair<std::string, std::string>, std::vector<const EvalOutcome*>> failures;
  for (const auto& o : persisted) {
    if (!o.correct && by_id.count(o.record_id)) {
      failures[{o.task, o.strategy_id}].push_back(&o);
    }
  }
  if (failures.empty()) throw ConfigError("self-correct: no failed outcomes to correct");

  EvalOptions options;
  options.judge_enabled = config.judge_enabled;
  options.numeric_eps = config.numeric_eps;

  TextTable table;
  table.header.push_back("generator run");
  for (const auto& c : correctors) table.header.push_back(c);

  for (const auto& [key, failed] : failures) {
    std::vector<std::string> row{key.first + "/" + key.second};
    for (const auto& corrector_name : correctors) {
      const ModelEndpoint& corrector = runner.endpoint(corrector_name);
      size_t repaired = 0;
      std::vector<EvalOutcome> corrected_outcomes;
      for (const EvalOutcome* failure : failed) {
        EvalOutcome corrected;
        try {
          corrected = self_correct(by_id.at(failure->record_id), *failure, corrector,
                                   runner.gateway(), runner.prompts(), options,
                                   runner.judge_context());
        } catch (const GatewayError& e) {
          corrected = *failure;
          corrected.error = e.what();
        }
        if (corrected.correct) ++repaired;
        corrected_outcomes.push_back(std::move(corrected));
      }
      Decimal rate = Decimal(static_cast<std::int64_t>(repaired)) /
                     Decimal(static_cast<std::int64_t>(failed.size()));
      row.push_back(rate.to_fixed(3) + " (" + std::to_string(repaired) + "/" +
                    std::to_string(failed.size()) + ")");
      std::string content;
      for (const auto& o : corrected_outcomes) content += outcome_to_json(o).dump() + "\n";
      std::filesystem::path path =
          config.out_dir / ("corrected__" + sanitize_name(key.first) + "__" +
                            sanitize_name(key.second) + "__" + sanitize_name(corrector_name) +
                            ".jsonl");
      atomic_write_file(path, content);
      runner.note_artifact(path);
    }
    table.rows.push_back(std::move(row));
  }

  runner.write_table("self_correct", table);
  runner.write_manifest("self-correct");
  return table;
}

// Rebuilds the accuracy table purely from persisted outcome files.
inline std::vector<AccuracyReport> cmd_report(Runner& runner) {
  std::vector<EvalOutcome> outcomes = runner.read_all_outcomes();
  if (outcomes.empty()) throw ConfigError("report: no persisted outcomes under outcomes/");
  std::vector<AccuracyReport> reports = aggregate(outcomes);
  runner.write_table("report_accuracy",
                     detail::accuracy_table(reports, runner.config().strategies));
  runner.write_manifest("report");
  return reports;
}

}  // namespace quasar
