// Copyright 2026 The Stylecast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stylecast/chat_engine.hpp"
#include "stylecast/corpus.hpp"
#include "stylecast/eval_harness.hpp"
#include "stylecast/generation.hpp"
#include "stylecast/llm_gateway.hpp"
#include "stylecast/logging.hpp"
#include "stylecast/prompt_kit.hpp"
#include "stylecast/run_store.hpp"
#include "stylecast/service_api.hpp"

namespace sc = stylecast;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Globals {
    std::string endpoints = "config/endpoints.json";
    std::string mode; // empty: STYLECAST_MODE, else live
    std::string cassette;
    std::string templates;
    std::string data_dir = "data";
    bool verbose = false;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sc::Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw sc::Error("cannot write " + path.string());
    out << content;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

sc::prompt::PromptKit make_prompts(const Globals& g) {
    if (g.templates.empty()) return sc::prompt::PromptKit();
    return sc::prompt::PromptKit(sc::prompt::TemplateLibrary::load_dir(g.templates));
}

sc::llm::Mode mode_of(const Globals& g) {
    return g.mode.empty() ? sc::llm::mode_from_env(sc::llm::Mode::live) : sc::llm::parse_mode(g.mode);
}

std::unique_ptr<sc::llm::Gateway> make_gateway(const Globals& g, const fs::path& default_cassette) {
    const auto mode = mode_of(g);
    const fs::path cassette = g.cassette.empty() ? default_cassette : fs::path(g.cassette);
    if (mode != sc::llm::Mode::live) sc::logger()->info("{} mode, cassette {}", sc::llm::to_string(mode), cassette.string());
    return sc::llm::make_gateway(mode, cassette);
}

// A dataset argument is a transcript path, or a name looked up as <data-dir>/<name>.jsonl.
sc::corpus::Transcript load_dataset(const Globals& g, const std::string& dataset) {
    if (fs::is_regular_file(dataset)) return sc::corpus::load_transcript(dataset);
    const auto named = fs::path(g.data_dir) / (dataset + ".jsonl");
    if (fs::is_regular_file(named)) return sc::corpus::load_transcript(named.string());
    throw sc::Error("dataset not found: " + dataset + " (tried " + named.string() + ")");
}

std::string dataset_label(const std::string& dataset) {
    return fs::is_regular_file(dataset) ? fs::path(dataset).stem().string() : dataset;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------------------
// corpus

void cmd_ingest(const std::string& file, const std::string& format, const std::string& map_file,
                const std::string& out_dir) {
    auto t = format.empty() ? sc::corpus::load_transcript(file)
                            : sc::corpus::load_transcript(file, sc::corpus::parse_format(format));
    if (!map_file.empty()) {
        const auto map = json::parse(slurp(map_file)).get<std::map<std::string, std::string>>();
        t = sc::corpus::anonymize(t, map);
    }
    const auto out = fs::path(out_dir) / (t.id() + ".jsonl");
    spit(out, sc::corpus::to_jsonl(t));
    print_json({{"id", t.id()}, {"utterances", t.size()}, {"roles", t.roles()}, {"out", out.string()}});
}

void cmd_split(const std::string& file, double fraction, const std::string& out_dir) {
    const auto t = sc::corpus::load_transcript(file);
    const auto s = sc::corpus::split(t, fraction);
    json summary = {{"id", t.id()}, {"train", s.train.size()}, {"test", s.test.size()}, {"train_fraction", fraction}};
    if (!out_dir.empty()) {
        const auto train = fs::path(out_dir) / (t.id() + ".train.jsonl");
        const auto test = fs::path(out_dir) / (t.id() + ".test.jsonl");
        spit(train, sc::corpus::to_jsonl(s.train));
        spit(test, sc::corpus::to_jsonl(s.test));
        summary["train_file"] = train.string();
        summary["test_file"] = test.string();
    }
    print_json(summary);
}

void cmd_segment(const std::string& file, std::size_t window, std::size_t stride, const std::string& out_dir) {
    const auto ext = fs::path(file).extension().string();
    const std::string text = ext == ".jsonl" || ext == ".script" ? sc::corpus::to_script(sc::corpus::load_transcript(file))
                                                                 : slurp(file);
    json rows = json::array();
    for (const auto& seg : sc::corpus::segment(text, window, stride)) {
        json row = {{"ordinal", seg.ordinal}, {"start_word", seg.start_word}, {"end_word", seg.end_word},
                    {"words", seg.word_count()}};
        if (!out_dir.empty()) {
            const auto path = fs::path(out_dir) / ("segment_" + std::to_string(seg.ordinal) + ".txt");
            spit(path, seg.text);
            row["file"] = path.string();
        }
        rows.push_back(row);
    }
    print_json(rows);
}

// ---------------------------------------------------------------------------
// prompt_kit

struct RenderArgs {
    std::string family;
    std::string role = "Mark2";
    std::string given_text;
    std::string generation_mode = "new";
    int n = 3;
    int paragraphs = 10;
    std::string plan;
    std::vector<std::string> candidates;
    std::string reference;
    std::string description;
    std::string message;
    std::string criterion = "style_match";
};

void cmd_prompt_render(const Globals& g, const RenderArgs& a) {
    using sc::prompt::Family;
    const auto prompts = make_prompts(g);
    std::string given;
    if (fs::path(a.given_text).extension() == ".jsonl")
        given = sc::corpus::to_script(sc::corpus::load_transcript(a.given_text));
    else if (!a.given_text.empty())
        given = slurp(a.given_text);
    const auto family = sc::prompt::family_from_string(a.family);
    auto optional_reference = [&]() -> std::optional<std::string> {
        if (a.reference.empty()) return std::nullopt;
        return slurp(a.reference);
    };
    sc::prompt::RenderedPrompt r;
    switch (family) {
    case Family::zero_shot:
        r = prompts.zero_shot(a.role, given, a.paragraphs,
                              a.generation_mode == "continuation" ? sc::prompt::GenerationMode::continuation
                                                                  : sc::prompt::GenerationMode::new_conversation);
        break;
    case Family::cot: r = prompts.cot(a.role, given, a.paragraphs); break;
    case Family::tot_plan: r = prompts.tot_plan(a.role, given, a.n, a.paragraphs); break;
    case Family::tot_conversation: r = prompts.tot_conversation(a.role, given, a.plan, a.n, a.paragraphs); break;
    case Family::tot_vote_plan:
        r = prompts.tot_vote(a.candidates, sc::prompt::VoteCriterion::task_fit, optional_reference(), a.role);
        break;
    case Family::tot_vote_conversation:
        r = prompts.tot_vote(a.candidates,
                             a.criterion == "task_fit" ? sc::prompt::VoteCriterion::task_fit
                                                       : sc::prompt::VoteCriterion::style_match,
                             optional_reference(), a.role);
        break;
    case Family::chat_style_description: r = prompts.chat_style_description(given, a.n); break;
    case Family::chat_response: {
        std::optional<std::string> description;
        if (!a.description.empty()) description = a.description;
        r = prompts.chat_response(description, {}, a.message, a.n);
        break;
    }
    case Family::chat_vote_description: r = prompts.chat_vote_description(a.candidates, given); break;
    case Family::chat_vote_response:
        r = prompts.chat_vote_response(a.candidates, optional_reference().value_or(given), a.message);
        break;
    case Family::judge: {
        std::vector<std::string> reference;
        if (!a.reference.empty()) reference = {slurp(a.reference)};
        r = prompts.judge(given, reference);
        break;
    }
    }
    std::cout << r.text;
    if (!r.text.empty() && r.text.back() != '\n') std::cout << '\n';
    std::cerr << "fingerprint " << r.fingerprint << "  template " << r.template_version << "\n";
}

// ---------------------------------------------------------------------------
// generation

struct TaskArgs {
    std::string models = "gpt4,gemini15,llama3";
    std::string model = "gpt4";
    std::string dataset;
    std::string role;
    std::string prompt = "tot";
    int repeats = 10;
    double train_fraction = 0.5;
    std::size_t window = 4400;
    std::size_t stride = 2200;
    std::string out = "runs";
    std::string run_id;
};

void finish_run(const Globals& g, const TaskArgs& a, sc::generation::RunArtifacts run, const sc::llm::Gateway& gateway,
                const sc::prompt::PromptKit& prompts) {
    run.template_versions = prompts.templates().versions();
    run.gateway_calls = gateway.call_count();
    run.config["mode"] = std::string(sc::llm::to_string(mode_of(g)));
    const auto dir = sc::generation::write_run(a.out, run);
    print_json({{"run_id", run.run_id},
                {"dir", dir.string()},
                {"conversations", run.conversations.size()},
                {"gateway_calls", run.gateway_calls}});
}

void cmd_run_task1(const Globals& g, const TaskArgs& a) {
    const auto endpoints = sc::llm::load_endpoints(g.endpoints);
    std::vector<sc::llm::ModelEndpoint> models;
    for (const auto& name : split_csv(a.models)) models.push_back(sc::llm::find_endpoint(endpoints, name));
    const auto label = dataset_label(a.dataset);
    const auto data = sc::corpus::split(load_dataset(g, a.dataset), a.train_fraction);

    sc::generation::RunArtifacts run;
    run.run_id = a.run_id.empty() ? "task1-" + label + "-" + a.role : a.run_id;
    run.task = "task1";
    run.endpoints = models;
    run.config = {{"dataset", label}, {"role", a.role}, {"repeats", a.repeats}, {"train_fraction", a.train_fraction}};

    const auto prompts = make_prompts(g);
    auto gateway = make_gateway(g, fs::path(a.out) / run.run_id / "cassette.jsonl");
    sc::generation::PipelineContext ctx{*gateway, prompts};
    sc::generation::Task1Options options;
    options.repeats = a.repeats;
    options.dataset = label;
    run.conversations = sc::generation::run_task1(ctx, models, data, a.role, options);
    finish_run(g, a, std::move(run), *gateway, prompts);
}

void cmd_run_task2(const Globals& g, const TaskArgs& a) {
    const auto endpoint = sc::llm::find_endpoint(sc::llm::load_endpoints(g.endpoints), a.model);
    const auto family = sc::generation::task2_prompt_from_string(a.prompt);
    const auto label = dataset_label(a.dataset);
    const auto data = sc::corpus::split(load_dataset(g, a.dataset), a.train_fraction);

    sc::generation::RunArtifacts run;
    run.run_id = a.run_id.empty() ? "task2-" + label + "-" + a.prompt : a.run_id;
    run.task = "task2";
    run.endpoints = {endpoint};
    run.config = {{"dataset", label},     {"role", a.role},     {"prompt", a.prompt},
                  {"window", a.window},   {"stride", a.stride}, {"train_fraction", a.train_fraction}};

    const auto prompts = make_prompts(g);
    auto gateway = make_gateway(g, fs::path(a.out) / run.run_id / "cassette.jsonl");
    sc::generation::PipelineContext ctx{*gateway, prompts};
    sc::generation::Task2Options options;
    options.window = a.window;
    options.stride = a.stride;
    options.dataset = label;
    auto result = sc::generation::run_task2(ctx, endpoint, family, data, a.role, options);
    run.conversations = std::move(result.conversations);
    run.traces = std::move(result.traces);
    finish_run(g, a, std::move(run), *gateway, prompts);
}

// ---------------------------------------------------------------------------
// chat_engine

void print_trace(const sc::generation::CandidateSet& set) {
    for (std::size_t i = 0; i < set.candidates.size(); ++i)
        std::cout << "  [" << (static_cast<int>(i + 1) == set.winner_index ? '*' : ' ') << "] candidate " << i + 1
                  << ": " << set.candidates[i] << "\n";
    for (std::size_t i = 0; i < set.ballots.size(); ++i)
        std::cout << "  ballot " << i + 1 << ": "
                  << (set.ballots[i].valid() ? std::to_string(set.ballots[i].chosen_index) : std::string("invalid"))
                  << "\n";
}

void cmd_chat(const Globals& g, const std::string& persona_file, const std::string& model, bool show_trace) {
    const auto endpoint = sc::llm::find_endpoint(sc::llm::load_endpoints(g.endpoints), model);
    const auto prompts = make_prompts(g);
    auto gateway = make_gateway(g, "chat_cassette.jsonl");
    const sc::chat::ChatEngine engine(*gateway, prompts, endpoint);

    std::cout << "building persona from " << persona_file << " ..." << std::endl;
    auto profile = engine.init_persona(slurp(persona_file));
    if (show_trace) {
        std::cout << "style descriptions:\n";
        print_trace(profile.description_set);
    }
    const auto persona = fs::path(persona_file).stem().string();
    sc::chat::ChatSession session("cli", persona, std::move(profile), sc::chat::utc_timestamp());
    std::cout << "chatting with " << persona << "; empty line or /quit to exit\n";
    std::string line;
    while (std::cout << "you> " << std::flush && std::getline(std::cin, line)) {
        if (line.empty() || line == "/quit") break;
        const auto turn = engine.respond(session, line);
        if (show_trace) print_trace(turn.trace);
        std::cout << persona << "> " << turn.reply << "\n";
    }
}

// ---------------------------------------------------------------------------
// eval_harness

void cmd_judge(const Globals& g, const std::string& runs_dir, const std::string& run_id, const std::string& reference,
               int passes, const std::string& judge_model) {
    const auto run = sc::generation::load_run(fs::path(runs_dir) / run_id);
    const auto test = sc::corpus::load_transcript(reference);
    const auto endpoint = sc::llm::find_endpoint(sc::llm::load_endpoints(g.endpoints), judge_model);
    const auto prompts = make_prompts(g);
    auto gateway = make_gateway(g, run.dir / "judge_cassette.jsonl");
    sc::eval::JudgeOptions options;
    options.passes = passes;

    std::string out;
    std::size_t n = 0;
    for (const auto& stored : run.conversations) {
        const auto paragraphs = sc::corpus::paragraphs_of(test, stored.conversation.provenance.target_role);
        for (const auto& s : sc::eval::judge(*gateway, prompts, endpoint, stored.id, stored.conversation.text(),
                                             paragraphs, options)) {
            out += sc::eval::to_json(s).dump() + "\n";
            ++n;
        }
    }
    spit(run.dir / "judge_scores.jsonl", out);
    print_json({{"run_id", run.run_id}, {"scores", n}, {"out", (run.dir / "judge_scores.jsonl").string()}});
}

void cmd_attribution_corpus(const std::vector<std::string>& transcripts, const std::string& target, std::size_t per_role,
                            const std::vector<std::string>& exclude, const std::string& replace_role,
                            const std::string& replacement, const std::string& out) {
    std::vector<sc::corpus::Transcript> ts;
    for (const auto& t : transcripts) ts.push_back(sc::corpus::load_transcript(t));
    sc::eval::AttributionOptions options;
    options.per_role = per_role;
    options.exclude_roles = exclude;
    auto corpus = sc::eval::build_attribution_corpus(ts, target, options);
    if (!replace_role.empty()) {
        if (replacement.empty()) throw CLI::ValidationError("--replace-role needs --replacement");
        const auto r = sc::corpus::load_transcript(replacement);
        corpus = sc::eval::replace_role(corpus, replace_role, target, sc::corpus::paragraphs_of(r, target), per_role);
    }
    spit(out, sc::eval::to_jsonl(corpus));
    json counts = json::object();
    for (const auto& role : corpus.roles()) counts[role] = corpus.count(role);
    print_json({{"rows", corpus.rows.size()}, {"roles", counts}, {"warnings", corpus.warnings}, {"out", out}});
}

void cmd_classify(const std::string& train, const std::string& target, std::uint64_t seed, double validation_fraction,
                  const std::string& model_out, const std::string& runs_dir, const std::string& run_id) {
    const auto corpus = sc::eval::load_attribution_corpus(train);
    sc::eval::TrainOptions options;
    options.seed = seed;
    options.validation_fraction = validation_fraction;
    const auto clf = sc::eval::train_classifier(corpus, target, options);
    spit(model_out, clf.to_json().dump() + "\n");
    json summary = {{"kind", std::string(sc::eval::StyleClassifier::kind)},
                    {"target_role", target},
                    {"validation_accuracy", clf.validation_accuracy()},
                    {"vocabulary", clf.vocabulary_size()},
                    {"model", model_out}};
    if (!run_id.empty()) {
        const auto run = sc::generation::load_run(fs::path(runs_dir) / run_id);
        json counts = json::array();
        sc::eval::SuccessRate all;
        for (const auto& stored : run.conversations) {
            const auto r = sc::eval::success_rate(std::span(&stored.conversation, 1), clf);
            counts.push_back({{"conversation_id", stored.id}, {"predicted_target", r.predicted_target}, {"total", r.total}});
            all.predicted_target += r.predicted_target;
            all.total += r.total;
        }
        const json attribution = {{"classifier",
                                   {{"kind", std::string(sc::eval::StyleClassifier::kind)},
                                    {"target_role", target},
                                    {"validation_accuracy", clf.validation_accuracy()}}},
                                  {"conversations", counts}};
        spit(run.dir / "attribution.json", attribution.dump(2) + "\n");
        summary["success_rate"] = all.rate();
        summary["paragraphs"] = all.total;
    }
    print_json(summary);
}

void cmd_report(const std::string& runs_dir, const std::string& run_id, const std::vector<std::string>& human,
                std::string out) {
    const auto run = sc::generation::load_run(fs::path(runs_dir) / run_id);
    sc::eval::ReportInputs inputs;
    for (const auto& entry : run.manifest.at("conversations"))
        inputs.conversations.push_back({entry.at("id").get<std::string>(), entry.at("group").get<std::string>()});

    if (const auto path = run.dir / "judge_scores.jsonl"; fs::exists(path)) {
        std::istringstream lines(slurp(path));
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) inputs.judge_scores.push_back(sc::eval::judge_score_from_json(json::parse(line)));
    }
    auto sheets = human;
    if (fs::exists(run.dir / "human_scores.csv")) sheets.push_back((run.dir / "human_scores.csv").string());
    for (const auto& file : sheets) {
        std::ifstream in(file);
        if (!in) throw sc::Error("cannot read " + file);
        auto rows = sc::eval::ingest_human_sheet(in);
        inputs.human_sheets.insert(inputs.human_sheets.end(), rows.begin(), rows.end());
    }
    if (const auto path = run.dir / "attribution.json"; fs::exists(path)) {
        const auto j = json::parse(slurp(path));
        for (const auto& c : j.at("conversations"))
            inputs.attribution.push_back({c.at("conversation_id").get<std::string>(),
                                          c.at("predicted_target").get<std::size_t>(), c.at("total").get<std::size_t>()});
        const auto& info = j.at("classifier");
        inputs.classifier = sc::eval::ClassifierInfo{info.at("kind").get<std::string>(),
                                                     info.at("target_role").get<std::string>(),
                                                     info.at("validation_accuracy").get<double>()};
    }
    if (inputs.judge_scores.empty() && inputs.human_sheets.empty() && inputs.attribution.empty())
        throw sc::Error("run " + run_id + " has no judge scores, human sheets or attribution results");

    const auto report = sc::eval::to_json(sc::eval::build_report(inputs));
    if (out.empty()) out = (run.dir / "report.json").string();
    spit(out, report.dump(2) + "\n");
    print_json(report);
}

// ---------------------------------------------------------------------------
// service_api

std::atomic<sc::service::HttpServer*> g_server{nullptr};

void on_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

void cmd_serve(const Globals& g, const std::string& config_path) {
    auto config = config_path.empty() ? sc::service::ServiceConfig{} : sc::service::load_service_config(config_path);
    if (!g.mode.empty()) config.mode = g.mode;
    if (!g.cassette.empty()) config.cassette = g.cassette;
    const auto endpoint = sc::llm::find_endpoint(sc::llm::load_endpoints(config.endpoints), config.model);
    const auto prompts = make_prompts(g);
    auto gateway = sc::llm::make_gateway(sc::llm::parse_mode(config.mode), config.cassette);
    const sc::chat::ChatEngine engine(*gateway, prompts, endpoint);
    sc::service::SessionStore store(config.data_dir / "sessions.jsonl");
    sc::service::ChatService service(engine, config.persona_dir, config.runs_dir, store);
    sc::service::HttpServer server(service, config.cors_origin);
    const int port = server.bind(config.host, config.port);
    sc::logger()->info("listening on http://{}:{} ({} mode, model {})", config.host, port, config.mode, config.model);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen();
    g_server = nullptr;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stylecast: persona imitation experiments with LLMs"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--endpoints", g.endpoints, "Model endpoint registry (JSON)")->capture_default_str();
    app.add_option("--mode", g.mode, "live | record | replay (default: $STYLECAST_MODE or live)")
        ->check(CLI::IsMember({"live", "record", "replay"}));
    app.add_option("--cassette", g.cassette, "Cassette file for record/replay");
    app.add_option("--templates", g.templates, "Directory of prompt template overrides");
    app.add_option("--data-dir", g.data_dir, "Where named datasets live")->capture_default_str();
    app.add_flag("-v,--verbose", g.verbose, "Debug logging");

    // corpus
    std::string file, format, map_file, out_dir = ".";
    auto* ingest = app.add_subcommand("ingest", "Parse, anonymize and store a transcript as jsonl");
    ingest->add_option("file", file)->required()->check(CLI::ExistingFile);
    ingest->add_option("--format", format)->check(CLI::IsMember({"jsonl", "script"}));
    ingest->add_option("--anonymize", map_file, "JSON object of name -> replacement")->check(CLI::ExistingFile);
    ingest->add_option("--out", out_dir)->capture_default_str();

    double fraction = 0.5;
    std::string split_out;
    auto* split = app.add_subcommand("split", "Contiguous train/test split");
    split->add_option("file", file)->required()->check(CLI::ExistingFile);
    split->add_option("--train-fraction", fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    split->add_option("--out", split_out, "Write <id>.train.jsonl and <id>.test.jsonl here");

    std::size_t window = 4400, stride = 2200;
    std::string segment_out;
    auto* segment = app.add_subcommand("segment", "Sliding-window word segmentation");
    segment->add_option("file", file)->required()->check(CLI::ExistingFile);
    segment->add_option("--window", window)->capture_default_str();
    segment->add_option("--stride", stride)->capture_default_str();
    segment->add_option("--out", segment_out, "Write segment_<n>.txt files here");

    // prompt_kit
    RenderArgs render;
    auto* prompt = app.add_subcommand("prompt", "Prompt inspection");
    prompt->require_subcommand(1);
    prompt->fallthrough();
    auto* prompt_render = prompt->add_subcommand("render", "Print a rendered prompt");
    prompt_render->add_option("--family", render.family)->required();
    prompt_render->add_option("--role", render.role)->capture_default_str();
    prompt_render->add_option("--given-text", render.given_text)->check(CLI::ExistingFile);
    prompt_render->add_option("--generation-mode", render.generation_mode)->check(CLI::IsMember({"new", "continuation"}));
    prompt_render->add_option("-n,--candidates-count", render.n, "Plans, candidates or descriptions")->capture_default_str();
    prompt_render->add_option("--paragraphs", render.paragraphs)->capture_default_str();
    prompt_render->add_option("--plan", render.plan);
    prompt_render->add_option("--candidate", render.candidates, "Repeat per candidate");
    prompt_render->add_option("--reference", render.reference)->check(CLI::ExistingFile);
    prompt_render->add_option("--description", render.description);
    prompt_render->add_option("--message", render.message);
    prompt_render->add_option("--criterion", render.criterion)->check(CLI::IsMember({"task_fit", "style_match"}));

    // generation
    TaskArgs t1;
    auto* task1 = app.add_subcommand("run-task1", "Cross-model imitation runs");
    task1->add_option("--models", t1.models)->capture_default_str();
    task1->add_option("--dataset", t1.dataset)->required();
    task1->add_option("--role", t1.role)->required();
    task1->add_option("--repeats", t1.repeats)->capture_default_str();
    task1->add_option("--train-fraction", t1.train_fraction)->capture_default_str();
    task1->add_option("--out", t1.out)->capture_default_str();
    task1->add_option("--run-id", t1.run_id);

    TaskArgs t2;
    t2.role = "Mark2";
    t2.train_fraction = 0.7;
    auto* task2 = app.add_subcommand("run-task2", "Prompt comparison over a segmented training text");
    task2->add_option("--prompt", t2.prompt)->capture_default_str()->check(CLI::IsMember({"standard", "cot", "tot"}));
    task2->add_option("--model", t2.model)->capture_default_str();
    task2->add_option("--dataset", t2.dataset)->required();
    task2->add_option("--role", t2.role)->capture_default_str();
    task2->add_option("--train-fraction", t2.train_fraction)->capture_default_str();
    task2->add_option("--window", t2.window)->capture_default_str();
    task2->add_option("--stride", t2.stride)->capture_default_str();
    task2->add_option("--out", t2.out)->capture_default_str();
    task2->add_option("--run-id", t2.run_id);

    // chat_engine
    std::string persona, chat_model = "gpt4";
    bool show_trace = false;
    auto* chat = app.add_subcommand("chat", "Interactive persona chat in the terminal");
    chat->add_option("--persona", persona, "Text of the persona to imitate")->required()->check(CLI::ExistingFile);
    chat->add_option("--model", chat_model)->capture_default_str();
    chat->add_flag("--show-trace", show_trace, "Print candidates and ballots");

    // eval_harness
    std::string runs_dir = "runs", run_id, reference, judge_model = "claude35";
    int passes = 3;
    auto* judge = app.add_subcommand("judge", "Score a run's conversations with an LLM judge");
    judge->add_option("--run", run_id)->required();
    judge->add_option("--runs-dir", runs_dir)->capture_default_str();
    judge->add_option("--reference", reference, "Test-set transcript")->required()->check(CLI::ExistingFile);
    judge->add_option("--passes", passes)->capture_default_str()->check(CLI::PositiveNumber);
    judge->add_option("--judge-model", judge_model)->capture_default_str();

    std::vector<std::string> transcripts, exclude;
    std::string target = "Mark2", replace, replacement, corpus_out = "attribution.jsonl";
    std::size_t per_role = 100;
    auto* build_corpus = app.add_subcommand("attribution-corpus", "Build the role-labelled classifier corpus");
    build_corpus->add_option("--transcript", transcripts, "Repeat per transcript")->required()->check(CLI::ExistingFile);
    build_corpus->add_option("--target", target)->capture_default_str();
    build_corpus->add_option("--per-role", per_role)->capture_default_str();
    build_corpus->add_option("--exclude", exclude, "Roles to leave out");
    build_corpus->add_option("--replace-role", replace, "Role whose rows are swapped for target rows");
    build_corpus->add_option("--replacement", replacement, "Transcript supplying the target rows")
        ->check(CLI::ExistingFile);
    build_corpus->add_option("--out", corpus_out)->capture_default_str();

    std::string train, model_out = "classifier.json";
    std::uint64_t seed = 7;
    double validation_fraction = 0.2;
    auto* classify = app.add_subcommand("classify", "Train the stylometric classifier");
    classify->add_option("--train", train)->required()->check(CLI::ExistingFile);
    classify->add_option("--target", target)->capture_default_str();
    classify->add_option("--seed", seed)->capture_default_str();
    classify->add_option("--validation-fraction", validation_fraction)->capture_default_str();
    classify->add_option("--model-out", model_out)->capture_default_str();
    classify->add_option("--run", run_id, "Also score this run's paragraphs");
    classify->add_option("--runs-dir", runs_dir)->capture_default_str();

    std::vector<std::string> human;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Aggregate a run's evaluation tracks");
    report->add_option("--run", run_id)->required();
    report->add_option("--runs-dir", runs_dir)->capture_default_str();
    report->add_option("--human", human, "Human score sheet csv (repeatable)")->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "Default: <runs-dir>/<run>/report.json");

    // service_api
    std::string config_path;
    auto* serve = app.add_subcommand("serve", "HTTP service for the web UI");
    serve->add_option("--config", config_path)->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    if (g.verbose) sc::logger()->set_level(spdlog::level::debug);

    try {
        if (*ingest) cmd_ingest(file, format, map_file, out_dir);
        else if (*split) cmd_split(file, fraction, split_out);
        else if (*segment) cmd_segment(file, window, stride, segment_out);
        else if (*prompt_render) cmd_prompt_render(g, render);
        else if (*task1) cmd_run_task1(g, t1);
        else if (*task2) cmd_run_task2(g, t2);
        else if (*chat) cmd_chat(g, persona, chat_model, show_trace);
        else if (*judge) cmd_judge(g, runs_dir, run_id, reference, passes, judge_model);
        else if (*build_corpus) cmd_attribution_corpus(transcripts, target, per_role, exclude, replace, replacement, corpus_out);
        else if (*classify) cmd_classify(train, target, seed, validation_fraction, model_out, runs_dir, run_id);
        else if (*report) cmd_report(runs_dir, run_id, human, report_out);
        else if (*serve) cmd_serve(g, config_path);
    } catch (const std::exception& e) {
        sc::logger()->error("{}", e.what());
        return 1;
    }
    return 0;
}
