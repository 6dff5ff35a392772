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

// Acceptance suite: one [PASS]/[FAIL] line per criterion, non-zero exit on
// any failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <sstream>

#include <httplib.h>

#include "fakes.hpp"
#include "stylecast/chat_engine.hpp"
#include "stylecast/corpus.hpp"
#include "stylecast/eval_harness.hpp"
#include "stylecast/generation.hpp"
#include "stylecast/logging.hpp"
#include "stylecast/run_store.hpp"
#include "stylecast/service_api.hpp"

namespace sc = stylecast;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Failure {
    std::string message;
};

void check(bool ok, const std::string& message) {
    if (!ok) throw Failure{message};
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Criterion {
    std::string name;
    double limit_seconds; // 0 = untimed
    std::function<std::string()> body; // returns a short detail line
};

const std::string kPersonaText =
    "Mark2: you know, I mean, the thing is we just kept going.\nMark2: I mean, you know, it was fun.";

// ---------------------------------------------------------------------------

std::string segmentation() {
    std::string text;
    for (int i = 0; i < 13000; ++i) text += "w" + std::to_string(i) + (i % 17 == 16 ? "\n" : " ");
    const auto segs = sc::corpus::segment(text, 4400, 2200);
    check(segs.size() == 5, "expected 5 segments, got " + std::to_string(segs.size()));
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const std::size_t start = 2200 * k;
        check(segs[k].start_word == start, "segment " + std::to_string(k + 1) + " starts at " +
                                               std::to_string(segs[k].start_word));
        check(segs[k].end_word == std::min<std::size_t>(start + 4400, 13000), "segment end mismatch");
        // First word of each segment is literally "w<start>".
        check(segs[k].text.rfind("w" + std::to_string(start) + " ", 0) == 0, "segment text misaligned");
    }
    for (std::size_t k = 0; k + 1 < segs.size(); ++k) {
        if (segs[k + 1].word_count() != 4400) continue;
        const auto overlap = segs[k].end_word - segs[k + 1].start_word;
        check(overlap * 2 == segs[k].word_count(), "consecutive full segments do not overlap by half");
    }
    return "starts 0/2200/4400/6600/8800";
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = sc::testing::read_file(e.path());
    return files;
}

std::string tot_call_plan() {
    sc::testing::TempDir dir;
    const auto data = sc::testing::task2_dataset(13000);
    const auto endpoint = sc::testing::test_endpoint("gpt4");
    const auto cassette = dir.path() / "cassette.jsonl";
    sc::prompt::PromptKit prompts;

    auto run_once = [&](sc::llm::Gateway& gateway, const fs::path& runs) {
        sc::generation::PipelineContext ctx{gateway, prompts};
        const auto result = sc::generation::run_task2(ctx, endpoint, sc::generation::Task2Prompt::tot, data);
        sc::generation::RunArtifacts run;
        run.run_id = "task2-tot";
        run.task = "task2";
        run.endpoints = {endpoint};
        run.template_versions = prompts.templates().versions();
        run.conversations = result.conversations;
        run.traces = result.traces;
        run.gateway_calls = gateway.call_count();
        return std::make_pair(result, sc::generation::write_run(runs, run));
    };

    {
        sc::llm::Gateway recorder(std::make_shared<sc::llm::LiveBackend>(std::make_shared<sc::testing::FakeProvider>()));
        recorder.record_to(cassette);
        run_once(recorder, dir.path() / "recorded");
    }

    const auto t0 = Clock::now();
    std::vector<std::map<std::string, std::string>> trees;
    for (int replay = 0; replay < 2; ++replay) {
        sc::llm::Gateway gateway(std::make_shared<sc::llm::ReplayBackend>(sc::llm::Cassette::load(cassette)));
        const auto runs = dir.path() / ("replay" + std::to_string(replay));
        const auto [result, run_dir] = run_once(gateway, runs);
        check(gateway.call_count() == 60, "replay issued " + std::to_string(gateway.call_count()) + " calls");
        check(result.conversations.size() == 5, "expected 5 conversations");
        for (const auto& c : result.conversations) {
            check(c.paragraphs.size() == 10, "conversation without 10 paragraphs");
            for (std::size_t i = 0; i < c.paragraphs.size(); ++i)
                check(c.paragraphs[i].speaker == (i % 2 ? 'B' : 'A'), "speakers do not alternate");
        }
        trees.push_back(read_tree(run_dir));
    }
    const double elapsed = seconds_since(t0);
    check(!trees[0].empty() && trees[0] == trees[1], "replayed run artifacts differ");
    check(trees[0] == read_tree(dir.path() / "recorded" / "task2-tot"), "replay differs from recorded run");
    check(elapsed < 5.0, "two replays took " + std::to_string(elapsed) + " s");
    return "60 calls, 5x10 paragraphs, " + std::to_string(trees[0].size()) + " identical files";
}

std::string voting_oracle() {
    std::mt19937_64 rng(2024);
    std::size_t ties = 0, invalid = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        std::vector<sc::prompt::VoteBallot> ballots(rng() % 8);
        for (auto& b : ballots) b.chosen_index = static_cast<int>(rng() % static_cast<std::uint64_t>(n + 1));
        std::vector<int> count(static_cast<std::size_t>(n) + 1, 0);
        for (const auto& b : ballots)
            if (b.chosen_index >= 1 && b.chosen_index <= n) ++count[static_cast<std::size_t>(b.chosen_index)];
            else ++invalid;
        int expected = 1;
        for (int k = 2; k <= n; ++k)
            if (count[static_cast<std::size_t>(k)] > count[static_cast<std::size_t>(expected)]) expected = k;
        if (std::count(count.begin() + 1, count.end(), count[static_cast<std::size_t>(expected)]) > 1) ++ties;
        const int got = sc::generation::tally(ballots, n);
        check(got == expected, "trial " + std::to_string(trial) + ": tally " + std::to_string(got) + " vs " +
                                   std::to_string(expected));
    }
    check(ties > 0 && invalid > 0, "generator produced no ties or no invalid ballots");
    return "0 mismatches (" + std::to_string(ties) + " ties, " + std::to_string(invalid) + " invalid ballots)";
}

std::string evaluation_aggregation() {
    auto provider = std::make_shared<sc::testing::FakeProvider>();
    sc::llm::Gateway gateway(std::make_shared<sc::llm::LiveBackend>(provider));
    sc::prompt::PromptKit prompts;
    sc::generation::PipelineContext ctx{gateway, prompts};
    const auto data = sc::corpus::split(sc::testing::interview({"Mark1", "Tony"}, 40, 20), 0.5);
    const std::vector<sc::llm::ModelEndpoint> models = {sc::testing::test_endpoint("gpt4"),
                                                        sc::testing::test_endpoint("gemini15"),
                                                        sc::testing::test_endpoint("llama3")};
    const auto judge_endpoint = sc::testing::test_endpoint("claude35");

    sc::eval::ReportInputs inputs;
    std::map<std::string, std::vector<int>> oracle;
    int next_id = 1;
    for (const char* role : {"Mark1", "Tony"}) {
        const auto reference = sc::corpus::paragraphs_of(data.test, role);
        for (const auto& c : sc::generation::run_task1(ctx, models, data, role)) {
            const auto id = std::to_string(next_id++);
            const auto group = sc::generation::group_key(c.provenance);
            inputs.conversations.push_back({id, group});
            for (const auto& s : sc::eval::judge(gateway, prompts, judge_endpoint, id, c.text(), reference)) {
                inputs.judge_scores.push_back(s);
                oracle[group].push_back(s.score);
            }
        }
    }
    const auto rows = sc::eval::build_report(inputs);
    check(rows.size() == 6, "expected 6 rows, got " + std::to_string(rows.size()));
    for (const auto& row : rows) {
        check(row.judge.has_value(), row.group + " has no judge track");
        const auto& scores = oracle.at(row.group);
        check(row.judge->n_scores == 30 && scores.size() == 30, row.group + " is not averaged over 30 scores");
        long sum = 0;
        for (int s : scores) sum += s;
        const double brute = static_cast<double>(sum) / 30.0;
        check(std::abs(row.judge->mean - brute) <= 1e-9, row.group + " mean differs from brute force");
        const long cents = (200 * sum + 30) / 60; // half-up at 2 decimals
        check(std::abs(row.judge->rounded() - static_cast<double>(cents) / 100.0) < 1e-12, row.group + " rounding");
    }
    return "6 rows x 30 scores";
}

std::string human_sheets() {
    std::mt19937_64 rng(17);
    std::string csv =
        "evaluator_id,conversation_id,word_choice,sentence_structure,figurative_language,sentence_arrangement\n";
    for (int i = 0; i < 2000; ++i) {
        csv += "e" + std::to_string(i % 3) + "," + std::to_string(i);
        for (int k = 0; k < 4; ++k) csv += "," + std::to_string(1 + rng() % 5);
        csv += "\n";
    }
    std::istringstream random_in(csv);
    for (const auto& s : sc::eval::ingest_human_sheet(random_in))
        check(s.total() >= 4 && s.total() <= 20, "sheet total out of range");

    const std::string fixture = std::string(STYLECAST_FIXTURE_DIR) + "/task2_human_scores.csv";
    std::ifstream in(fixture);
    check(static_cast<bool>(in), "cannot open " + fixture);
    const auto sheets = sc::eval::ingest_human_sheet(in);

    // Independent parse of the fixture: conversations 1-5/6-10/11-15 per prompt.
    const char* families[] = {"standard", "cot", "tot"};
    std::map<std::string, std::pair<long, long>> oracle;
    std::ifstream raw(fixture);
    std::string line;
    std::getline(raw, line);
    while (std::getline(raw, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        long total = 0;
        for (std::size_t k = 2; k < 6; ++k) total += std::stol(cells.at(k));
        auto& o = oracle[families[(std::stoi(cells.at(1)) - 1) / 5]];
        o.first += total;
        ++o.second;
    }

    sc::eval::ReportInputs inputs;
    for (int c = 1; c <= 15; ++c) inputs.conversations.push_back({std::to_string(c), families[(c - 1) / 5]});
    inputs.human_sheets = sheets;
    const auto rows = sc::eval::build_report(inputs);
    check(rows.size() == 3, "expected one row per prompt");
    std::string detail;
    for (const auto& row : rows) {
        check(row.human && row.human->n_scores == 15, row.group + " does not aggregate 15 scores");
        const auto& o = oracle.at(row.group);
        check(o.second == 15, "fixture oracle count");
        check(std::abs(row.human->mean - static_cast<double>(o.first) / 15.0) <= 1e-9, row.group + " mean");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%s=%.2f", detail.empty() ? "" : " ", row.group.c_str(), row.human->rounded());
        detail += buf;
    }
    return detail;
}

sc::eval::AttributionCorpus synthetic_corpus(std::size_t per_role, std::uint64_t seed) {
    const std::vector<std::string> roles = {"Mark1", "Tony", "Mark2", "Host1", "Host2"};
    sc::eval::AttributionCorpus c;
    for (std::size_t r = 0; r < roles.size(); ++r)
        for (std::size_t i = 0; i < per_role; ++i)
            c.rows.push_back({roles[r], sc::testing::filler(12 + i % 9, sc::testing::role_vocabulary(r),
                                                            seed + r * 7919 + i)});
    return c;
}

std::string classifier() {
    const auto t0 = Clock::now();
    const auto corpus = synthetic_corpus(100, 1);
    check(corpus.rows.size() == 500, "corpus is not 5 x 100");
    const auto a = sc::eval::train_classifier(corpus, "Mark2");
    const auto b = sc::eval::train_classifier(corpus, "Mark2");
    check(a.validation_accuracy() >= 0.95, "validation accuracy " + std::to_string(a.validation_accuracy()));

    // Held-out Mark2 paragraphs (new seed) packed into conversations.
    std::vector<sc::generation::Conversation> held_out(10);
    for (std::size_t k = 0; k < held_out.size(); ++k)
        for (std::size_t p = 0; p < 10; ++p)
            held_out[k].paragraphs.push_back(
                {p % 2 ? 'B' : 'A', sc::testing::filler(15, sc::testing::role_vocabulary(2), 100000 + k * 10 + p)});
    const auto rate = sc::eval::success_rate(held_out, a);
    check(rate.rate() >= 0.90, "held-out success rate " + std::to_string(rate.rate()));

    const auto probe = synthetic_corpus(40, 555);
    for (const auto& row : probe.rows)
        check(a.predict(row.paragraph) == b.predict(row.paragraph) &&
                  a.probability(row.paragraph) == b.probability(row.paragraph),
              "two training runs disagree");
    const double elapsed = seconds_since(t0);
    check(elapsed < 30.0, "took " + std::to_string(elapsed) + " s");
    char buf[96];
    std::snprintf(buf, sizeof buf, "validation %.3f, held-out success %.3f", a.validation_accuracy(), rate.rate());
    return buf;
}

std::string chat_visibility() {
    sc::testing::TempDir dir;
    const auto cassette = dir.path() / "chat.jsonl";
    sc::prompt::PromptKit prompts;
    const std::vector<std::string> questions = {"how did it start?", "what was hard?", "any regrets?"};
    std::vector<std::string> recorded;
    {
        sc::llm::Gateway gateway(std::make_shared<sc::llm::LiveBackend>(std::make_shared<sc::testing::FakeProvider>()));
        gateway.record_to(cassette);
        sc::chat::ChatEngine engine(gateway, prompts, sc::testing::test_endpoint());
        sc::chat::ChatSession session("s1", "Mark2", engine.init_persona(kPersonaText), "t0");
        for (const auto& q : questions) recorded.push_back(engine.respond(session, q).reply);
    }

    sc::llm::Gateway gateway(std::make_shared<sc::llm::ReplayBackend>(sc::llm::Cassette::load(cassette)));
    sc::chat::ChatEngine engine(gateway, prompts, sc::testing::test_endpoint());
    sc::chat::ChatSession session("s1", "Mark2", engine.init_persona(kPersonaText), "t0");
    for (const auto& q : questions) engine.respond(session, q);

    const auto turns = session.turns();
    check(turns.size() == 3, "expected 3 turns");
    std::string transcript;
    for (const auto& t : turns) transcript += "User: " + t.user_msg + "\nPersona: " + t.reply + "\n";
    for (std::size_t i = 0; i < turns.size(); ++i) {
        const auto& t = turns[i];
        check(t.ordinal == static_cast<int>(i + 1), "ordinals are not 1..3");
        check(t.reply == recorded[i], "replay reply differs from recording");
        check(t.trace.candidates.size() == 3, "trace does not hold 3 candidates");
        check(t.trace.ballots.size() == 5, "trace does not hold 5 ballots");
        check(t.reply == t.trace.winner(), "reply is not the winning candidate");
        for (std::size_t c = 0; c < t.trace.candidates.size(); ++c) {
            if (static_cast<int>(c + 1) == t.trace.winner_index || t.trace.candidates[c] == t.reply) continue;
            check(transcript.find(t.trace.candidates[c]) == std::string::npos, "losing candidate leaked");
        }
    }
    return "3 turns, 3 candidates + 5 ballots each";
}

struct ServiceStack {
    ServiceStack(const fs::path& root, std::shared_ptr<sc::llm::CompletionBackend> backend)
        : gateway(std::move(backend)),
          engine(gateway, prompts, sc::testing::test_endpoint()),
          store(root / "sessions.jsonl"),
          service(engine, root / "personas", root / "runs", store),
          server(service, "http://localhost:5173") {
        port = server.bind("127.0.0.1", 0);
        server.start();
    }
    ~ServiceStack() { server.stop(); }

    std::pair<int, json> post(const std::string& path, const json& body) const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(10, 0);
        const auto r = c.Post(path, body.dump(), "application/json");
        if (!r) throw Failure{"no response from POST " + path};
        return {r->status, json::parse(r->body)};
    }
    std::pair<int, json> get(const std::string& path) const {
        httplib::Client c("127.0.0.1", port);
        const auto r = c.Get(path);
        if (!r) throw Failure{"no response from GET " + path};
        return {r->status, json::parse(r->body)};
    }

    sc::llm::Gateway gateway;
    sc::prompt::PromptKit prompts;
    sc::chat::ChatEngine engine;
    sc::service::SessionStore store;
    sc::service::ChatService service;
    sc::service::HttpServer server;
    int port = 0;
};

std::string service_contract() {
    sc::testing::TempDir dir;
    fs::create_directories(dir.path() / "personas");
    sc::testing::write_file(dir.path() / "personas" / "Mark2.txt", kPersonaText);
    const auto cassette = dir.path() / "service.jsonl";
    const std::vector<std::string> messages = {"hello there", "tell me more", "and then?", "one more"};

    for (const char* stage : {"live", "replay"}) {
        fs::create_directories(dir.path() / stage);
        fs::copy(dir.path() / "personas", dir.path() / stage / "personas");
    }
    {
        ServiceStack live(dir.path() / "live",
                          std::make_shared<sc::llm::LiveBackend>(std::make_shared<sc::testing::FakeProvider>()));
        live.gateway.record_to(cassette);
        const std::string id = live.post("/sessions", {{"persona_id", "Mark2"}}).second.at("session_id");
        for (const auto& m : messages) live.post("/sessions/" + id + "/messages", {{"text", m}});
    }

    const auto t0 = Clock::now();
    auto blocking = std::make_shared<sc::testing::BlockingBackend>(
        std::make_shared<sc::llm::ReplayBackend>(sc::llm::Cassette::load(cassette)));
    ServiceStack s(dir.path() / "replay", blocking);

    const auto [created_status, created] = s.post("/sessions", {{"persona_id", "Mark2"}});
    check(created_status == 201, "create session returned " + std::to_string(created_status));
    const std::string id = created.at("session_id");
    for (int i = 0; i < 3; ++i) {
        const auto [status, ex] = s.post("/sessions/" + id + "/messages", {{"text", messages[static_cast<std::size_t>(i)]}});
        check(status == 200, "message returned " + std::to_string(status));
        check(ex.at("ordinal") == i + 1, "ordinal mismatch");
        check(!ex.contains("trace"), "message exchange exposes a trace");
    }

    const auto [plain_status, plain] = s.get("/sessions/" + id);
    check(plain_status == 200 && plain.at("turns").size() == 3, "transcript does not hold 3 turns");
    for (std::size_t i = 0; i < 3; ++i) {
        check(plain["turns"][i].at("ordinal") == static_cast<int>(i + 1), "transcript ordinals");
        check(!plain["turns"][i].contains("trace"), "trace visible without include_trace");
    }
    const auto [traced_status, traced] = s.get("/sessions/" + id + "?include_trace=true");
    check(traced_status == 200, "traced transcript returned " + std::to_string(traced_status));
    for (const auto& t : traced.at("turns")) {
        const auto& trace = t.at("trace");
        check(trace.at("candidates").size() == 3 && trace.at("ballots").size() == 5, "trace shape");
        const int w = trace.at("winner_index");
        check(t.at("reply") == trace["candidates"][static_cast<std::size_t>(w - 1)], "reply is not the winner");
    }

    blocking->arm();
    auto first = std::async(std::launch::async, [&] { return s.post("/sessions/" + id + "/messages", {{"text", messages[3]}}).first; });
    blocking->wait_until_blocked();
    const auto second = s.post("/sessions/" + id + "/messages", {{"text", "interrupting"}}).first;
    blocking->release();
    check(second == 409, "concurrent message returned " + std::to_string(second));
    check(first.get() == 200, "blocked message did not complete");
    check(s.get("/sessions/" + id).second.at("turns").size() == 4, "rejected message changed the transcript");

    const double elapsed = seconds_since(t0);
    check(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
    return "3 messages, traces hidden by default, 409 on overlap";
}

} // namespace

int main() {
    sc::logger()->set_level(spdlog::level::err);
    const std::vector<Criterion> criteria = {
        {"segmentation oracle", 1.0, segmentation},
        {"tree-of-thoughts call plan", 0.0, tot_call_plan},
        {"voting oracle", 0.0, voting_oracle},
        {"evaluation aggregation", 0.0, evaluation_aggregation},
        {"human sheet protocol", 0.0, human_sheets},
        {"classifier", 0.0, classifier},
        {"chat visibility", 0.0, chat_visibility},
        {"service contract", 0.0, service_contract},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.body();
        } catch (const Failure& f) {
            ok = false;
            detail = f.message;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed = seconds_since(t0);
        if (ok && c.limit_seconds > 0 && elapsed >= c.limit_seconds) {
            ok = false;
            detail = "took " + std::to_string(elapsed) + " s";
        }
        std::printf("[%s] %s (%.3f s): %s\n", ok ? "PASS" : "FAIL", c.name.c_str(), elapsed, detail.c_str());
        failures += ok ? 0 : 1;
    }
    std::fflush(stdout);
    return failures == 0 ? 0 : 1;
}
