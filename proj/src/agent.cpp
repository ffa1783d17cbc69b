#include "hopqa/agent.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "hopqa/error.hpp"
#include "hopqa/metrics.hpp"
#include "hopqa/seed.hpp"

namespace hopqa {

namespace {

constexpr std::uint64_t kPlannerStream = 0;
constexpr std::uint64_t kWorkerStream = 1;

ChatRequest make_request(const AgentOptions& opts, std::vector<Message> messages,
                         std::uint64_t seed) {
  ChatRequest req;
  req.model = opts.model;
  req.messages = std::move(messages);
  req.temperature = opts.temperature;
  req.max_tokens = opts.max_tokens;
  req.seed = seed;
  return req;
}

bool selection_valid(const std::vector<int>& selected, std::size_t material_count) {
  for (int i : selected)
    if (i != -1 && (i < 0 || static_cast<std::size_t>(i) >= material_count)) return false;
  return true;
}

WorkerCall fallback_call(const WorkerTask& task, std::size_t iteration, WorkerStatus status,
                         std::string error) {
  WorkerCall call;
  call.iteration = iteration;
  call.subquestion = task.question;
  call.entity = task.entity;
  call.selected = {-1};
  call.sentence = std::string(kNoInformation);
  call.status = status;
  call.error = std::move(error);
  return call;
}

}  // namespace

void EpisodeLimits::validate() const {
  if (max_iterations < 1 || top_k < 1 || max_searches_per_turn < 1)
    throw Error(ErrorCode::InvalidInput, "episode limits must all be >= 1");
}

std::string_view worker_status_name(WorkerStatus s) noexcept {
  switch (s) {
    case WorkerStatus::ok: return "ok";
    case WorkerStatus::no_materials: return "no_materials";
    case WorkerStatus::unparsable: return "unparsable";
    case WorkerStatus::failed: return "failed";
  }
  return "failed";
}

std::string_view episode_status_name(EpisodeStatus s) noexcept {
  switch (s) {
    case EpisodeStatus::answered: return "answered";
    case EpisodeStatus::iteration_limit: return "iteration_limit";
    case EpisodeStatus::malformed: return "malformed";
    case EpisodeStatus::backend_error: return "backend_error";
  }
  return "backend_error";
}

WorkerCall run_worker(const WorkerTask& task, const Environment& env, const ChatBackend& llm,
                      const EpisodeLimits& limits, const AgentOptions& opts, std::uint64_t seed,
                      std::size_t iteration) {
  auto materials = env.fetch(task.question, task.entity, limits.top_k);
  if (materials.empty())
    return fallback_call(task, iteration, WorkerStatus::no_materials, "retrieval returned nothing");

  const auto& tpl = opts.prompts.worker(env.kind());
  const auto block = format_materials(materials);
  auto user = worker_question(tpl, task.question, block);

  WorkerCall call;
  call.iteration = iteration;
  call.subquestion = task.question;
  call.entity = task.entity;
  call.materials = std::move(materials);
  call.prompt = {system_message(tpl.system), user_message(user)};

  auto messages = build_prompt(tpl, opts.few_shot, user);
  std::string reply = llm.chat(make_request(opts, messages, derive_seed(seed, {0})));
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      auto parsed = parse_worker_reply(reply);
      if (!selection_valid(parsed.selected, call.materials.size()))
        throw Error(ErrorCode::MalformedReply, "selected index outside the materials list");
      call.reply_raw = reply;
      call.selected = std::move(parsed.selected);
      call.sentence = std::move(parsed.sentence);
      call.status = WorkerStatus::ok;
      return call;
    } catch (const Error& e) {
      if (attempt == 1) {
        call.reply_raw = reply;
        call.selected = {-1};
        call.sentence = std::string(kNoInformation);
        call.status = WorkerStatus::unparsable;
        call.error = e.what();
        return call;
      }
      auto repair = messages;
      repair.push_back(assistant_message(reply));
      repair.push_back(user_message(tpl.format_reminder));
      reply = llm.chat(make_request(opts, std::move(repair), derive_seed(seed, {1})));
    }
  }
  return call;
}

Observation dispatch_iteration(const std::vector<WorkerTask>& tasks, const Environment& env,
                               const ChatBackend& llm, const EpisodeLimits& limits,
                               const AgentOptions& opts, std::size_t iteration) {
  if (tasks.empty() || tasks.size() > limits.max_searches_per_turn)
    throw Error(ErrorCode::InvalidInput, "an iteration dispatches between 1 and " +
                                             std::to_string(limits.max_searches_per_turn) +
                                             " subquestions, got " + std::to_string(tasks.size()));

  auto one = [&](std::size_t slot) {
    const auto seed = derive_seed(opts.seed, {kWorkerStream, iteration, slot});
    try {
      return run_worker(tasks[slot], env, llm, limits, opts, seed, iteration);
    } catch (const std::exception& e) {
      return fallback_call(tasks[slot], iteration, WorkerStatus::failed, e.what());
    }
  };

  Observation obs;
  obs.calls.reserve(tasks.size());
  if (opts.parallel_workers && tasks.size() > 1) {
    std::vector<std::future<WorkerCall>> pending;
    pending.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i)
      pending.push_back(std::async(std::launch::async, one, i));
    for (auto& f : pending) obs.calls.push_back(f.get());
  } else {
    for (std::size_t i = 0; i < tasks.size(); ++i) obs.calls.push_back(one(i));
  }

  obs.text = "Obs:";
  for (const auto& c : obs.calls) obs.text += " " + c.sentence;
  return obs;
}

Trajectory run_episode(const QAInstance& question, const Environment& env, const ChatBackend& llm,
                       const EpisodeLimits& limits, const AgentOptions& opts) {
  limits.validate();
  const EnvKind kind = env.kind();
  const auto& tpl = opts.prompts.planner(kind);

  Trajectory t;
  t.question_id = question.id;
  t.question = question.question;
  std::vector<std::string> labels;
  if (kind == EnvKind::kg) {
    t.candidates = question.topic_entities;
    for (const auto& h : t.candidates) labels.push_back(env.entity_label(h));
  }
  t.messages = build_prompt(tpl, opts.few_shot, planner_question(tpl, question.question, labels));
  t.few_shot_messages = opts.few_shot ? tpl.few_shot.size() : 0;

  auto ask = [&](std::vector<Message> messages, std::size_t turn, std::uint64_t attempt) {
    return llm.chat(
        make_request(opts, std::move(messages), derive_seed(opts.seed, {kPlannerStream, turn, attempt})));
  };

  for (std::size_t turn = 0;; ++turn) {
    std::string reply;
    PlannerAction action;
    try {
      reply = ask(t.messages, turn, 0);
      try {
        action = parse_planner_action(reply, kind, t.candidates.size());
      } catch (const Error& first) {
        if (first.code() != ErrorCode::MalformedAction && first.code() != ErrorCode::IndexOutOfRange)
          throw;
        auto repair = t.messages;
        repair.push_back(assistant_message(reply));
        repair.push_back(user_message(tpl.format_reminder));
        reply = ask(std::move(repair), turn, 1);
        ++t.repairs;
        try {
          action = parse_planner_action(reply, kind, t.candidates.size());
        } catch (const Error& second) {
          t.messages.push_back(assistant_message(reply));
          ++t.planner_turns;
          t.status = EpisodeStatus::malformed;
          t.error = second.what();
          return t;
        }
      }
    } catch (const std::exception& e) {
      t.status = EpisodeStatus::backend_error;
      t.error = e.what();
      return t;
    }

    t.messages.push_back(assistant_message(reply));
    ++t.planner_turns;

    if (action.kind == ActionKind::Answer) {
      t.final_answer = action.answer;
      t.status = EpisodeStatus::answered;
      return t;
    }

    auto& subqs = action.subquestions;
    if (subqs.size() > limits.max_searches_per_turn) subqs.resize(limits.max_searches_per_turn);
    std::vector<WorkerTask> tasks;
    tasks.reserve(subqs.size());
    for (const auto& sq : subqs) {
      WorkerTask task{sq.question, std::nullopt};
      if (sq.candidate) task.entity = t.candidates.at(*sq.candidate);
      tasks.push_back(std::move(task));
    }

    auto obs = dispatch_iteration(tasks, env, llm, limits, opts, t.iterations_used);
    ++t.iterations_used;

    std::string text = std::move(obs.text);
    if (kind == EnvKind::kg) {
      // Tails of selected triples become addressable candidates.
      std::set<std::string> known(t.candidates.begin(), t.candidates.end());
      std::string line;
      for (const auto& call : obs.calls) {
        for (int idx : call.selected) {
          if (idx < 0 || static_cast<std::size_t>(idx) >= call.materials.size()) continue;
          const auto& entity = call.materials[static_cast<std::size_t>(idx)].entity;
          if (!entity || known.count(*entity) || !env.traversable(*entity)) continue;
          known.insert(*entity);
          line += " [" + std::to_string(t.candidates.size()) + "] " + env.entity_label(*entity);
          t.candidates.push_back(*entity);
        }
      }
      if (!line.empty()) text += "\nCandidate:" + line;
    }
    for (auto& c : obs.calls) t.worker_calls.push_back(std::move(c));
    t.messages.push_back(user_message(std::move(text)));
    // Search budget spent; the planner gets no further turn.
    if (t.iterations_used >= limits.max_iterations) {
      t.status = EpisodeStatus::iteration_limit;
      return t;
    }
  }
}

Trajectory score_trajectory(Trajectory t, std::string_view gold) {
  if (t.final_answer) {
    const auto s = score(*t.final_answer, gold);
    t.reward = s.f1;
    t.em = s.em;
  } else {
    t.reward = 0.0;
    t.em = 0;
  }
  return t;
}

void to_json(nlohmann::json& j, const WorkerCall& c) {
  auto mats = nlohmann::json::array();
  for (const auto& m : c.materials) {
    nlohmann::json mj = {{"text", m.text}};
    if (m.entity) mj["entity"] = *m.entity;
    mats.push_back(std::move(mj));
  }
  j = nlohmann::json{{"iteration", c.iteration},
                     {"subquestion", c.subquestion},
                     {"materials", std::move(mats)},
                     {"prompt", c.prompt},
                     {"reply", c.reply_raw},
                     {"selected", c.selected},
                     {"sentence", c.sentence},
                     {"status", worker_status_name(c.status)}};
  if (c.entity) j["entity"] = *c.entity;
  if (!c.error.empty()) j["error"] = c.error;
}

void from_json(const nlohmann::json& j, WorkerCall& c) {
  c.iteration = j.at("iteration").get<std::size_t>();
  c.subquestion = j.at("subquestion").get<std::string>();
  c.entity.reset();
  if (j.contains("entity")) c.entity = j.at("entity").get<std::string>();
  c.materials.clear();
  for (const auto& m : j.at("materials")) {
    Material mat{m.at("text").get<std::string>(), std::nullopt};
    if (m.contains("entity")) mat.entity = m.at("entity").get<std::string>();
    c.materials.push_back(std::move(mat));
  }
  c.prompt = j.at("prompt").get<std::vector<Message>>();
  c.reply_raw = j.at("reply").get<std::string>();
  c.selected = j.at("selected").get<std::vector<int>>();
  c.sentence = j.at("sentence").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  c.status = status == "ok"             ? WorkerStatus::ok
             : status == "no_materials" ? WorkerStatus::no_materials
             : status == "unparsable"   ? WorkerStatus::unparsable
                                        : WorkerStatus::failed;
  c.error = j.value("error", "");
}

void to_json(nlohmann::json& j, const Trajectory& t) {
  j = nlohmann::json{{"question_id", t.question_id},
                     {"question", t.question},
                     {"messages", t.messages},
                     {"few_shot_messages", t.few_shot_messages},
                     {"worker_calls", t.worker_calls},
                     {"iterations_used", t.iterations_used},
                     {"planner_turns", t.planner_turns},
                     {"repairs", t.repairs},
                     {"status", episode_status_name(t.status)},
                     {"candidates", t.candidates}};
  j["final_answer"] = t.final_answer ? nlohmann::json(*t.final_answer) : nlohmann::json(nullptr);
  j["reward"] = t.reward ? nlohmann::json(*t.reward) : nlohmann::json(nullptr);
  j["em"] = t.em ? nlohmann::json(*t.em) : nlohmann::json(nullptr);
  if (!t.error.empty()) j["error"] = t.error;
}

void from_json(const nlohmann::json& j, Trajectory& t) {
  t.question_id = j.at("question_id").get<std::string>();
  t.question = j.at("question").get<std::string>();
  t.messages = j.at("messages").get<std::vector<Message>>();
  t.few_shot_messages = j.value("few_shot_messages", std::size_t{0});
  t.worker_calls = j.at("worker_calls").get<std::vector<WorkerCall>>();
  t.iterations_used = j.at("iterations_used").get<std::size_t>();
  t.planner_turns = j.at("planner_turns").get<std::size_t>();
  t.repairs = j.value("repairs", std::size_t{0});
  const auto status = j.at("status").get<std::string>();
  t.status = status == "answered"          ? EpisodeStatus::answered
             : status == "iteration_limit" ? EpisodeStatus::iteration_limit
             : status == "malformed"       ? EpisodeStatus::malformed
                                           : EpisodeStatus::backend_error;
  t.candidates = j.value("candidates", std::vector<std::string>{});
  t.final_answer.reset();
  t.reward.reset();
  t.em.reset();
  if (!j.at("final_answer").is_null()) t.final_answer = j.at("final_answer").get<std::string>();
  if (j.contains("reward") && !j.at("reward").is_null()) t.reward = j.at("reward").get<double>();
  if (j.contains("em") && !j.at("em").is_null()) t.em = j.at("em").get<int>();
  t.error = j.value("error", "");
}

}  // namespace hopqa
