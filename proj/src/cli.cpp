#include "hopqa/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hopqa/agent.hpp"
#include "hopqa/config.hpp"
#include "hopqa/corpus.hpp"
#include "hopqa/embedding.hpp"
#include "hopqa/error.hpp"
#include "hopqa/kg.hpp"
#include "hopqa/metrics.hpp"
#include "hopqa/pipeline.hpp"
#include "hopqa/retrieval.hpp"
#include "hopqa/seed.hpp"
#include "hopqa/sft.hpp"
#include "hopqa/text.hpp"
#include "hopqa/theory.hpp"

namespace hopqa {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

struct Context {
  Globals g;
  std::ostream& out;
  std::ostream& err;
};

RunConfig config_for(const Globals& g) {
  if (g.config.empty()) throw Error(ErrorCode::ConfigError, "--config is required for this command");
  auto c = load_run_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (!g.out_dir.empty()) c.out_dir = g.out_dir;
  return c;
}

fs::path out_dir_for(const Globals& g, const std::optional<RunConfig>& c) {
  fs::path dir = !g.out_dir.empty() ? fs::path(g.out_dir) : c ? c->out_dir : fs::path("out");
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

// No timestamps, so reruns are byte-identical.
void write_manifest(const fs::path& dir, const std::string& command, const std::optional<RunConfig>& c,
                    std::uint64_t seed, ojson counts, ojson extra = ojson::object()) {
  ojson m;
  m["command"] = command;
  m["config_hash"] = c ? config_hash(*c) : "none";
  m["seed"] = seed;
  m["counts"] = std::move(counts);
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_json(dir / ("manifest_" + command + ".json"), m);
}

std::vector<QAInstance> load_questions(const RunConfig& c) {
  auto qs = load_dataset(c.env.dataset);
  if (qs.empty()) throw Error(ErrorCode::EmptySet, "dataset has no questions: " + c.env.dataset.string());
  return qs;
}

AgentOptions agent_options(const RunConfig& c) {
  AgentOptions o;
  o.model = c.backend.model;
  o.few_shot = c.few_shot;
  o.seed = c.seed;
  return o;
}

std::string format_aggregate(const AggregateScore& a) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << "EM " << a.em << "  F1 " << a.f1 << "  n=" << a.count;
  return s.str();
}

std::vector<Trajectory> load_trajectories(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open trajectories " + path.string());
  std::vector<Trajectory> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<Trajectory>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("trajectories: ") + e.what());
    }
  }
  return out;
}

// One scored episode per question at temperature 0, in dataset order.
std::vector<Trajectory> run_eval_episodes(const RunConfig& c, const std::vector<QAInstance>& qs) {
  auto llm = make_backend(c);
  auto envs = make_environments(c);
  auto opts = agent_options(c);
  opts.temperature = kEvalTemperature;
  std::vector<Trajectory> out;
  out.reserve(qs.size());
  for (const auto& q : qs) {
    auto q_opts = opts;
    q_opts.seed = derive_seed(c.seed, {fnv1a64(q.id)});
    auto env = envs->for_question(q);
    out.push_back(score_trajectory(run_episode(q, *env, *llm, c.limits, q_opts), q.answer()));
  }
  return out;
}

int cmd_index(const Context& ctx) {
  auto c = config_for(ctx.g);
  const auto dir = out_dir_for(ctx.g, c);
  ojson info;
  if (c.env.kind == EnvSource::kg) {
    auto store = load_kg(c.env.kg, c.env.labels);
    info = {{"kind", "kg"}, {"triples", store.triples().size()}, {"entities", store.entity_count()}};
  } else if (c.env.kind == EnvSource::text) {
    auto corpus = load_corpus(c.env.corpus);
    if (c.env.retriever == RetrieverKind::bm25) {
      Bm25Index idx(corpus);
      info = {{"kind", "bm25"},
              {"passages", corpus.size()},
              {"vocabulary", idx.vocabulary_size()},
              {"average_length", idx.average_length()}};
    } else {
      if (c.embedding.base_url.empty())
        throw Error(ErrorCode::ConfigError, "[embedding].base_url is required to build an index");
      auto embedder = std::make_shared<const HttpEmbedder>(
          EmbeddingServiceConfig{c.embedding.base_url, c.embedding.model, c.embedding.api_key_env});
      auto idx = EmbeddingIndex::build(corpus, embedder);
      const fs::path cache = c.env.embedding_cache.empty() ? dir / "embeddings.jsonl" : c.env.embedding_cache;
      save_embedding_cache(cache, idx.corpus(), idx.vectors());
      info = {{"kind", "embedding"}, {"passages", corpus.size()}, {"dimension", idx.dimension()},
              {"cache", cache.filename().string()}};
    }
  } else {
    auto qs = load_dataset(c.env.dataset);
    std::size_t passages = 0;
    for (const auto& q : qs) passages += q.context.size();
    info = {{"kind", "text-gold"}, {"questions", qs.size()}, {"passages", passages}};
  }
  write_json(dir / "index.json", info);
  write_manifest(dir, "index", c, c.seed, info);
  ctx.out << info.dump() << "\n";
  return 0;
}

int cmd_qa(const Context& ctx) {
  auto c = config_for(ctx.g);
  c.validate();
  const auto dir = out_dir_for(ctx.g, c);
  const auto qs = load_questions(c);
  const auto trajs = run_eval_episodes(c, qs);

  std::string preds;
  std::string traj_lines;
  std::vector<ScorePair> scores;
  for (const auto& t : trajs) {
    ScorePair s{t.em.value_or(0), t.reward.value_or(0.0)};
    scores.push_back(s);
    ojson line;
    line["_id"] = t.question_id;
    line["prediction"] = t.final_answer.value_or("");
    line["em"] = s.em;
    line["f1"] = s.f1;
    line["iterations"] = t.iterations_used;
    line["worker_calls"] = t.worker_calls.size();
    preds += line.dump() + "\n";
    traj_lines += nlohmann::json(t).dump() + "\n";
  }
  const auto agg = aggregate(scores);
  write_text(dir / "predictions.jsonl", preds);
  write_text(dir / "trajectories.jsonl", traj_lines);
  ojson summary = {{"em", agg.em}, {"f1", agg.f1}, {"count", agg.count}};
  write_json(dir / "scores.json", summary);
  write_manifest(dir, "qa", c, c.seed, {{"questions", qs.size()}}, {{"scores", summary}});
  ctx.out << format_aggregate(agg) << "\n";
  return 0;
}

struct SampleFlags {
  bool offline = false;
  std::optional<double> k_init;
  std::optional<std::size_t> batches;
  std::optional<std::string> hook;
  std::optional<std::size_t> concurrency;
};

int cmd_sample(const Context& ctx, const SampleFlags& f) {
  auto c = config_for(ctx.g);
  if (f.k_init) c.sampler.k_init = *f.k_init;
  if (f.batches) c.batches = *f.batches;
  if (f.hook) c.trainer_hook = *f.hook;
  if (f.concurrency) c.sampler.concurrency = *f.concurrency;
  c.validate();
  const auto dir = out_dir_for(ctx.g, c);
  const auto qs = load_dataset(c.env.dataset);
  auto llm = make_backend(c);
  auto envs = make_environments(c);
  PipelineOptions popts;
  popts.out_dir = dir;
  popts.seed = c.seed;
  popts.trainer_hook = c.trainer_hook;

  ojson reports = ojson::array();
  ojson k_trace = ojson::array();
  std::size_t records = 0;
  std::size_t accepted = 0;
  std::optional<std::string> failure;
  if (f.offline) {
    auto rep = run_offline(qs, *envs, *llm, c.limits, c.sampler, agent_options(c), popts);
    reports.push_back(ojson(rep));
    k_trace = {rep.k_before};
    records = rep.records;
    accepted = rep.accepted;
  } else {
    auto res = run_online(qs, c.batches, *envs, *llm, c.limits, c.sampler, agent_options(c), popts);
    k_trace.push_back(c.sampler.k_init);
    for (const auto& r : res.reports) {
      reports.push_back(ojson(r));
      k_trace.push_back(r.k_after);
      records += r.records;
      accepted += r.accepted;
    }
    if (res.aborted) failure = res.error;
  }
  write_json(dir / "report.json", reports);
  write_manifest(dir, "sample", c, c.seed,
                 {{"questions", qs.size()}, {"accepted", accepted}, {"records", records},
                  {"iterations", reports.size()}},
                 {{"mode", f.offline ? "offline" : "online"}, {"k_trace", k_trace}});
  if (failure) throw Error(ErrorCode::HookFailed, *failure);
  ctx.out << "accepted " << accepted << "  records " << records << "\n";
  return 0;
}

int cmd_warmup(const Context& ctx, const std::string& trajectories, std::size_t limit,
               const std::string& output) {
  std::optional<RunConfig> c;
  if (!ctx.g.config.empty()) c = config_for(ctx.g);
  std::vector<Trajectory> trajs;
  if (!trajectories.empty()) {
    trajs = load_trajectories(trajectories);
  } else {
    if (!c) throw Error(ErrorCode::ConfigError, "warmup needs --trajectories or --config");
    c->validate();
    trajs = run_eval_episodes(*c, load_questions(*c));
  }
  const std::uint64_t seed = ctx.g.seed.value_or(c ? c->seed : 0);
  const auto dir = out_dir_for(ctx.g, c);
  const fs::path path = output.empty() ? dir / "warmup.jsonl" : fs::path(output);
  const auto records = warmup_select(trajs, limit, seed);
  const auto written = emit_sft(records, path);
  write_manifest(dir, "warmup", c, seed,
                 {{"trajectories", trajs.size()}, {"records", written}}, {{"limit", limit}});
  ctx.out << "records " << written << "\n";
  return 0;
}

int cmd_emit(const Context& ctx, const std::string& trajectories, std::optional<double> k,
             const std::string& output) {
  std::optional<RunConfig> c;
  if (!ctx.g.config.empty()) c = config_for(ctx.g);
  const double threshold = k.value_or(c ? c->sampler.k_init : SamplerConfig{}.k_init);
  const auto trajs = load_trajectories(trajectories);
  std::vector<SftRecord> records;
  for (const auto& t : trajs) {
    auto units = select_training_units(t, threshold);
    records.insert(records.end(), units.begin(), units.end());
  }
  const auto dir = out_dir_for(ctx.g, c);
  const fs::path path = output.empty() ? dir / "sft.jsonl" : fs::path(output);
  const auto written = emit_sft(records, path);
  write_manifest(dir, "emit-sft", c, ctx.g.seed.value_or(c ? c->seed : 0),
                 {{"trajectories", trajs.size()}, {"records", written}}, {{"k", threshold}});
  ctx.out << "records " << written << "\n";
  return 0;
}

int cmd_eval(const Context& ctx, const std::string& pred_path, const std::string& gold_path) {
  const auto gold = load_dataset(gold_path);
  std::ifstream in(pred_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open predictions " + pred_path);
  std::map<std::string, std::string> preds;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      preds[j.at("_id").get<std::string>()] = j.at("prediction").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("predictions: ") + e.what());
    }
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t missing = 0;
  for (const auto& q : gold) {
    auto it = preds.find(q.id);
    if (it == preds.end()) ++missing;
    pairs.emplace_back(it == preds.end() ? "" : it->second, q.answer());
  }
  const auto agg = aggregate(pairs);
  const auto dir = out_dir_for(ctx.g, std::nullopt);
  ojson summary = {{"em", agg.em}, {"f1", agg.f1}, {"count", agg.count}, {"missing", missing}};
  write_json(dir / "eval.json", summary);
  write_manifest(dir, "eval", std::nullopt, ctx.g.seed.value_or(0),
                 {{"questions", gold.size()}, {"missing", missing}});
  ctx.out << format_aggregate(agg) << "\n";
  return 0;
}

std::vector<double> parse_grid(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = text::trim(item);
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(std::string(t), &used));
      if (used != t.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidInput, std::string("bad number in ") + what + ": " + std::string(t));
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidInput, std::string(what) + " is empty");
  return out;
}

int cmd_verify(const Context& ctx, const std::string& landscape_path, const std::string& alphas_s,
               const std::string& ks_s, std::optional<double> delta) {
  const auto land = theory::load_landscape(landscape_path);
  const auto alphas = parse_grid(alphas_s, "--alpha-grid");
  const auto ks = parse_grid(ks_s, "--k");
  const auto rows = theory::report(land, alphas, ks);

  std::ostringstream table;
  table << "alpha\tk\tlogZ\tlogZ_trunc\tKL\tVar\n" << std::setprecision(12);
  ojson jrows = ojson::array();
  for (const auto& r : rows) {
    table << r.alpha << '\t' << r.k << '\t' << r.log_z << '\t' << r.log_z_trunc << '\t' << r.kl << '\t'
          << r.variance << '\n';
    jrows.push_back({{"alpha", r.alpha}, {"k", r.k}, {"log_z", r.log_z}, {"log_z_trunc", r.log_z_trunc},
                     {"kl", r.kl}, {"variance", r.variance}});
  }
  ojson extra = {{"rows", jrows}};
  if (delta) {
    ojson th = ojson::array();
    for (double a : alphas) th.push_back({{"alpha", a}, {"k", theory::min_threshold_for_delta(land, a, *delta)}});
    extra["thresholds"] = th;
    // Boundaries sit one ulp below an atom, so k is printed at full precision.
    for (const auto& t : th)
      table << "# delta " << *delta << " alpha " << t["alpha"].get<double>() << " k " << std::setprecision(17)
            << t["k"].get<double>() << std::setprecision(12) << '\n';
  }
  const auto dir = out_dir_for(ctx.g, std::nullopt);
  write_text(dir / "verify.tsv", table.str());
  write_manifest(dir, "verify", std::nullopt, ctx.g.seed.value_or(0), {{"rows", rows.size()}}, extra);
  ctx.out << table.str();
  return 0;
}

void report_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << nlohmann::json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planner/worker multi-hop QA agents and trajectory sampling", "hopqa"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "TOML run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--out-dir", g.out_dir, "output directory");

  auto* index = app.add_subcommand("index", "build or inspect the retrieval index");
  auto* qa = app.add_subcommand("qa", "answer every dataset question at temperature 0");

  SampleFlags sf;
  auto* sample = app.add_subcommand("sample", "rejection-sample trajectories into SFT datasets");
  sample->add_flag("--offline", sf.offline, "single pass with a fixed threshold");
  sample->add_option("--k-init", sf.k_init, "initial threshold");
  sample->add_option("--batches", sf.batches, "online iterations T");
  sample->add_option("--trainer-hook", sf.hook, "command run after each online iteration");
  sample->add_option("--concurrency", sf.concurrency, "questions sampled in parallel");

  std::string w_traj, w_out;
  std::size_t w_limit = kWarmupLimitSmall;
  auto* warmup = app.add_subcommand("warmup", "select EM=1 trajectories for warmup");
  warmup->add_option("--trajectories", w_traj, "trajectory JSONL (default: run qa episodes)");
  auto* limit_opt = warmup->add_option("--limit", w_limit, "number of trajectories");
  std::string w_preset;
  warmup->add_option("--preset", w_preset, "small (300) or large (1000)")
      ->check(CLI::IsMember({"small", "large"}))
      ->excludes(limit_opt);
  warmup->add_option("--output", w_out, "SFT JSONL path");

  std::string e_traj, e_out;
  std::optional<double> e_k;
  auto* emit = app.add_subcommand("emit-sft", "turn scored trajectories into SFT records");
  emit->add_option("--trajectories", e_traj, "trajectory JSONL")->required();
  emit->add_option("--k", e_k, "selection threshold");
  emit->add_option("--output", e_out, "SFT JSONL path");

  std::string pred, gold;
  auto* eval = app.add_subcommand("eval", "score predictions against a dataset");
  eval->add_option("--pred", pred, "predictions JSONL")->required();
  eval->add_option("--gold", gold, "dataset JSON")->required();

  std::string landscape, alphas = "1,0.5,0.2,0.1,0.05", ks = "0.5";
  std::optional<double> delta;
  auto* verify = app.add_subcommand("verify", "tabulate partition, KL and variance on a landscape");
  verify->add_option("--landscape", landscape, "landscape JSON")->required();
  verify->add_option("--alpha-grid", alphas, "comma-separated temperatures");
  verify->add_option("--k", ks, "comma-separated thresholds");
  verify->add_option("--delta", delta, "also report the threshold reaching KL < delta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what());
    return 2;
  }
  if (*seed_opt) g.seed = seed;

  const Context ctx{g, out, err};
  try {
    if (*index) return cmd_index(ctx);
    if (*qa) return cmd_qa(ctx);
    if (*sample) return cmd_sample(ctx, sf);
    if (*warmup) {
      if (w_preset == "large") w_limit = kWarmupLimitLarge;
      return cmd_warmup(ctx, w_traj, w_limit, w_out);
    }
    if (*emit) return cmd_emit(ctx, e_traj, e_k, e_out);
    if (*eval) return cmd_eval(ctx, pred, gold);
    if (*verify) return cmd_verify(ctx, landscape, alphas, ks, delta);
  } catch (const Error& e) {
    report_error(err, e.name(), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
    return 1;
  }
  return 2;
}

}  // namespace hopqa
