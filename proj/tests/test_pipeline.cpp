#include <doctest.h>

#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "hopqa/error.hpp"
#include "hopqa/pipeline.hpp"
#include "hopqa/sampler.hpp"
#include "hopqa/sft.hpp"
#include "hopqa/threshold.hpp"
#include "oracles.hpp"

using namespace hopqa;

namespace {

std::vector<QAInstance> coin_questions(std::size_t n) {
  std::vector<QAInstance> out;
  for (std::size_t i = 0; i < n; ++i) {
    QAInstance q;
    q.id = "q" + std::to_string(i);
    q.question = "Who is the mother of the director, variant " + std::to_string(i) + "?";
    q.gold_answers = {"Małgorzata Braunek"};
    q.topic_entities = {"polish_russian_war"};
    out.push_back(std::move(q));
  }
  return out;
}

Trajectory fake_trajectory(double reward, std::size_t worker_calls, int em = 0) {
  Trajectory t;
  t.question_id = "x";
  t.messages = {system_message("sys"), user_message("shot q"), assistant_message("shot a"),
                user_message("Question: q"), assistant_message("<search>s</search>"),
                user_message("Obs: o"), assistant_message("<answer>a</answer>")};
  t.few_shot_messages = 2;
  t.final_answer = "a";
  t.reward = reward;
  t.em = em;
  for (std::size_t i = 0; i < worker_calls; ++i) {
    WorkerCall c;
    c.subquestion = "s";
    c.prompt = {system_message("worker sys"), user_message("Question: s\nContext:\n[0] p")};
    c.reply_raw = "<select>[0]</select><sentence>o</sentence>";
    c.selected = {0};
    c.sentence = "o";
    t.worker_calls.push_back(c);
  }
  return t;
}

// Forwards to a scripted backend and records what the pipeline asks of it.
class RecordingBackend final : public ChatBackend {
 public:
  explicit RecordingBackend(std::unique_ptr<ScriptedBackend> inner) : inner_(std::move(inner)) {}
  std::string chat(const ChatRequest& req) const override {
    std::lock_guard lock(mu_);
    models_.insert(req.model);
    return inner_->chat(req);
  }
  void rebind(const std::string& endpoint) override { endpoints_.push_back(endpoint); }

  std::vector<std::string> endpoints_;
  mutable std::set<std::string> models_;

 private:
  std::unique_ptr<ScriptedBackend> inner_;
  mutable std::mutex mu_;
};

std::filesystem::path write_hook(const std::filesystem::path& dir, const std::string& body) {
  const auto script = dir / "hook.sh";
  std::ofstream(script) << "#!/bin/sh\n" << body;
  std::filesystem::permissions(script, std::filesystem::perms::owner_all);
  return script;
}

bool masks_sound(const SftRecord& r) {
  bool any = false;
  for (const auto& m : r.messages) {
    if (m.train != (m.role == Role::assistant)) return false;
    any = any || m.train;
  }
  return any;
}

}  // namespace

TEST_CASE("threshold update examples") {
  ThresholdState s;
  s.k = 0.3;
  CHECK(update_threshold(s, {0.9}).k == doctest::Approx(0.45));
  s.k = 0.5;
  CHECK(update_threshold(s, {0.9}).k == 0.5);
  s.k = 0.2;
  CHECK(update_threshold(s, {0.0, 0.0}).k == 0.2);
  CHECK_THROWS_AS(update_threshold(s, {}), Error);
  const auto next = update_threshold(s, {1.0, 0.0});
  REQUIRE(next.history.size() == 1);
  CHECK(next.history[0].batch_mean == 0.5);
}

TEST_CASE("threshold update agrees with the direct formula") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    ThresholdState s;
    s.k = u(rng);
    s.r_sup = 0.5 + 2 * u(rng);
    const double mean = u(rng) * s.r_sup;
    const auto next = update_threshold(s, {mean});
    CHECK(std::abs(next.k - testing::threshold_formula(s.k, mean, s.r_sup)) <= 1e-12);
    CHECK(next.k >= s.k);
    CHECK(threshold_candidate(u(rng), 1.0) <= 0.5);
  }
}

TEST_CASE("threshold state persists") {
  ThresholdState s;
  s = update_threshold(s, {0.2, 0.4});
  s = update_threshold(s, {1.0});
  const auto dir = testing::scratch_dir("threshold");
  save_threshold(dir / "t.json", s);
  CHECK(load_threshold(dir / "t.json") == s);
}

TEST_CASE("sampler config") {
  SamplerConfig c;
  CHECK_NOTHROW(c.validate());
  c.m = 17;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.m = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.k_init = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("sampling with a backend that is always right") {
  auto llm = testing::toy_kg_backend();
  const auto& q = testing::toy_question("prw_mother");
  const auto out = sample_question(q, *testing::toy_kg_env(), *llm, {}, {}, {}, 0.5);
  CHECK(out.kept.size() == 3);
  CHECK(out.attempts == 3);
}

TEST_CASE("sampling with a backend that is always wrong") {
  ScriptedBackend llm({testing::rule("Question:", "<answer>Nobody</answer>")});
  const auto out = sample_question(testing::toy_question("prw_mother"), *testing::toy_kg_env(), llm, {}, {}, {}, 0.5);
  CHECK(out.kept.empty());
  CHECK(out.attempts == 16);
  CHECK(out.rewards.size() == 16);
}

TEST_CASE("episode errors count as failed attempts") {
  ScriptedBackend llm({testing::rule("nothing matches this", "x")});
  SamplerConfig cfg;
  cfg.max_attempts = 4;
  const auto out = sample_question(testing::toy_question("prw_mother"), *testing::toy_kg_env(), llm, {}, cfg, {}, 0.5);
  CHECK(out.attempts == 4);
  CHECK(out.kept.empty());
}

TEST_CASE("dedupe keeps one copy of identical trajectories") {
  auto llm = testing::toy_kg_backend();
  SamplerConfig cfg;
  cfg.dedupe = true;
  const auto out = sample_question(testing::toy_question("prw_mother"), *testing::toy_kg_env(), *llm, {}, cfg, {}, 0.5);
  CHECK(out.kept.size() == 1);
  CHECK(out.attempts == 16);
}

TEST_CASE("Bernoulli acceptance matches the simulation oracle") {
  auto llm = testing::coin_backend();
  const auto qs = coin_questions(1000);
  SamplerConfig cfg;
  cfg.concurrency = 4;
  AgentOptions opts;
  opts.seed = 2024;
  const auto outs = sample_batch(qs, SharedEnvironment(testing::toy_kg_env()), *llm, {}, cfg, opts, 0.5);
  double attempts = 0;
  for (const auto& o : outs) {
    CHECK(o.attempts <= 16);
    CHECK(o.kept.size() <= 3);
    attempts += static_cast<double>(o.attempts);
  }
  const double mean = attempts / static_cast<double>(outs.size());
  const double oracle = testing::simulate_mean_attempts(0.5, 3, 16, 200000, 1);
  CHECK(oracle == doctest::Approx(6.0).epsilon(0.01));
  CHECK(std::abs(mean - oracle) <= 0.1 * oracle);

  // independent of scheduling
  cfg.concurrency = 1;
  const auto serial = sample_batch(qs, SharedEnvironment(testing::toy_kg_env()), *llm, {}, cfg, opts, 0.5);
  for (std::size_t i = 0; i < outs.size(); ++i) CHECK(serial[i].rewards == outs[i].rewards);
}

TEST_CASE("selection produces one planner record plus one per worker call") {
  const auto records = select_training_units(fake_trajectory(1.0, 2), 0.5);
  REQUIRE(records.size() == 3);
  CHECK(records[0].source == RecordSource::planner);
  CHECK(records[1].source == RecordSource::worker);
  for (const auto& r : records) {
    CHECK(masks_sound(r));
    CHECK(r.reward == 1.0);
  }
  // few-shot dialogue is not part of the planner record
  CHECK(records[0].messages.size() == 5);
  CHECK(records[0].messages[1].content == "Question: q");
  CHECK(records[1].messages.size() == 3);
  CHECK(records[1].messages[2].content == "<select>[0]</select><sentence>o</sentence>");

  CHECK(select_training_units(fake_trajectory(0.4, 2), 0.5).empty());
  CHECK(select_training_units(fake_trajectory(0.5, 2), 0.5).empty());
  auto unscored = fake_trajectory(1.0, 0);
  unscored.reward.reset();
  CHECK_THROWS_AS(select_training_units(unscored, 0.5), Error);
}

TEST_CASE("fallback worker calls are not training data") {
  auto t = fake_trajectory(1.0, 2);
  t.worker_calls[1].status = WorkerStatus::unparsable;
  CHECK(select_training_units(t, 0.5).size() == 2);
}

TEST_CASE("warmup selection") {
  std::vector<Trajectory> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(fake_trajectory(1.0, 0, 1));
  CHECK(warmup_select(ten, kWarmupLimitSmall, 1).size() == 10);

  std::vector<Trajectory> many;
  for (int i = 0; i < 1000; ++i) {
    auto t = fake_trajectory(1.0, 0, 1);
    t.question_id = "q" + std::to_string(i);
    many.push_back(t);
  }
  many.push_back(fake_trajectory(0.9, 0, 0));
  const auto a = warmup_select(many, kWarmupLimitSmall, 42);
  const auto b = warmup_select(many, kWarmupLimitSmall, 42);
  CHECK(a.size() == 300);
  CHECK(a == b);
  std::set<std::string> ids;
  for (const auto& r : a) ids.insert(r.question_id);
  CHECK(ids.size() == 300);
  CHECK(warmup_select(many, kWarmupLimitLarge, 42).size() == 1000);

  std::vector<Trajectory> none = {fake_trajectory(0.9, 1, 0)};
  CHECK(warmup_select(none, 300, 1).empty());
}

TEST_CASE("SFT emission") {
  const auto dir = testing::scratch_dir("sft");
  auto records = select_training_units(fake_trajectory(1.0, 2), 0.5);
  CHECK(emit_sft(records, dir / "a.jsonl") == 3);
  CHECK(emit_sft(records, dir / "b.jsonl") == 3);
  const auto bytes = testing::read_file(dir / "a.jsonl");
  CHECK(bytes == testing::read_file(dir / "b.jsonl"));
  CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 3);
  CHECK(bytes.starts_with(R"({"source":"planner","question_id":"x","reward":1.0,"messages":[{"role":"system")"));
  CHECK(load_sft(dir / "a.jsonl") == records);
  CHECK_THROWS_AS(emit_sft(records, dir / "missing" / "x.jsonl"), Error);
}

TEST_CASE("contiguous batches") {
  const auto qs = coin_questions(20);
  const auto parts = partition_batches(qs, 4);
  REQUIRE(parts.size() == 4);
  for (std::size_t b = 0; b < 4; ++b) {
    REQUIRE(parts[b].size() == 5);
    CHECK(parts[b][0].id == qs[b * 5].id);
  }
  CHECK(partition_batches(coin_questions(7), 3)[0].size() == 3);
  CHECK_THROWS_AS(partition_batches(qs, 21), Error);
  CHECK_THROWS_AS(partition_batches(qs, 0), Error);
  CHECK(shuffled(qs, 3).size() == 20);
  CHECK(shuffled(qs, 3)[0].id == shuffled(qs, 3)[0].id);
}

TEST_CASE("online loop over four batches") {
  auto llm = testing::coin_backend();
  const auto dir = testing::scratch_dir("online");
  PipelineOptions popts;
  popts.out_dir = dir;
  popts.seed = 9;
  SamplerConfig cfg;
  cfg.k_init = 0.2;
  const auto res = run_online(coin_questions(20), 4, SharedEnvironment(testing::toy_kg_env()), *llm, {}, cfg, {}, popts);
  CHECK_FALSE(res.aborted);
  REQUIRE(res.reports.size() == 4);
  double k = cfg.k_init;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& r = res.reports[i];
    CHECK(r.questions == 5);
    CHECK(r.k_before == k);
    CHECK(r.k_after >= r.k_before);
    CHECK(r.k_after <= 0.5);
    CHECK(r.accepted <= r.attempted);
    CHECK(std::filesystem::exists(dir / ("iter_" + std::to_string(i) + ".jsonl")));
    for (const auto& rec : load_sft(r.dataset)) {
      CHECK(rec.reward > r.k_after);
      CHECK(masks_sound(rec));
    }
    k = r.k_after;
  }
  CHECK(load_threshold(dir / "threshold.json").k == k);
}

TEST_CASE("offline equals online with one batch") {
  auto llm = testing::coin_backend();
  const auto qs = coin_questions(12);
  PipelineOptions popts;
  popts.seed = 4;
  popts.out_dir = testing::scratch_dir("offline");
  const auto off = run_offline(qs, SharedEnvironment(testing::toy_kg_env()), *llm, {}, {}, {}, popts);
  popts.out_dir = testing::scratch_dir("online1");
  const auto on = run_online(qs, 1, SharedEnvironment(testing::toy_kg_env()), *llm, {}, {}, {}, popts);
  REQUIRE(on.reports.size() == 1);
  CHECK(off.accepted_ids == on.reports[0].accepted_ids);
  CHECK(off.accepted > 0);
  CHECK(testing::read_file(off.dataset) == testing::read_file(on.reports[0].dataset));
}

TEST_CASE("offline edge cases") {
  auto llm = testing::toy_kg_backend();
  PipelineOptions popts;
  popts.out_dir = testing::scratch_dir("offline-edge");
  const auto empty = run_offline({}, SharedEnvironment(testing::toy_kg_env()), *llm, {}, {}, {}, popts);
  CHECK(empty.attempted == 0);
  CHECK(empty.records == 0);
  CHECK(testing::read_file(empty.dataset).empty());

  SamplerConfig strict;
  strict.k_init = strict.r_sup;
  const auto none = run_offline(testing::toy_kg_questions(), SharedEnvironment(testing::toy_kg_env()), *llm, {},
                                strict, {}, popts);
  CHECK(none.accepted == 0);
  CHECK(none.attempted == 32);
}

TEST_CASE("full-size sampler settings validate") {
  SamplerConfig c;
  c.batch_size = 1000;
  c.m = 3;
  c.max_attempts = 16;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("trainer hook") {
  const auto dir = testing::scratch_dir("hook");
  const auto script = write_hook(dir, "echo \"$@\" >> \"" + (dir / "calls.txt").string() +
                                          "\"\n"
                                          "[ \"$4\" = \"2\" ] && exit 3\n"
                                          "echo training done\necho next-model\n");

  const auto r = run_trainer_hook(script.string(), dir / "it's.jsonl", 0);
  CHECK(r.exit_code == 0);
  CHECK(r.last_line == "next-model");

  auto llm = testing::coin_backend();
  PipelineOptions popts;
  popts.out_dir = dir / "out";
  popts.trainer_hook = script.string();
  const auto res = run_online(coin_questions(8), 4, SharedEnvironment(testing::toy_kg_env()), *llm, {}, {}, {}, popts);
  CHECK(res.aborted);
  CHECK(res.reports.size() == 3);
  CHECK(res.error.find("status 3") != std::string::npos);
  const auto calls = testing::read_file(dir / "calls.txt");
  CHECK(calls.find("--data " + (dir / "it's.jsonl").string() + " --iteration 0") != std::string::npos);
  CHECK(calls.find("--iteration 2") != std::string::npos);
}

TEST_CASE("trainer hook output rebinds the backend or renames the model") {
  const auto dir = testing::scratch_dir("hook-rebind");
  PipelineOptions popts;
  popts.out_dir = dir / "out";

  RecordingBackend url(testing::coin_backend());
  popts.trainer_hook = write_hook(dir, "echo http://127.0.0.1:9/v$4\n").string();
  const auto a = run_online(coin_questions(6), 3, SharedEnvironment(testing::toy_kg_env()), url, {}, {}, {}, popts);
  CHECK_FALSE(a.aborted);
  CHECK(url.endpoints_ == std::vector<std::string>{"http://127.0.0.1:9/v0", "http://127.0.0.1:9/v1",
                                                    "http://127.0.0.1:9/v2"});

  RecordingBackend named(testing::coin_backend());
  popts.trainer_hook = write_hook(dir, "echo policy-$4\n").string();
  const auto b = run_online(coin_questions(6), 3, SharedEnvironment(testing::toy_kg_env()), named, {}, {}, {}, popts);
  CHECK_FALSE(b.aborted);
  CHECK(named.endpoints_.empty());
  CHECK(named.models_ == std::set<std::string>{"default", "policy-0", "policy-1"});
}
