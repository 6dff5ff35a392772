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

#include "stylecast/prompt_kit.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace stylecast::prompt {

namespace detail {
const std::map<std::string, std::string_view>& builtin_template_sources();
}

namespace {

constexpr std::array kFamilyNames = {
    std::pair{Family::zero_shot, "zero_shot"},
    std::pair{Family::cot, "cot"},
    std::pair{Family::tot_plan, "tot_plan"},
    std::pair{Family::tot_conversation, "tot_conversation"},
    std::pair{Family::tot_vote_plan, "tot_vote_plan"},
    std::pair{Family::tot_vote_conversation, "tot_vote_conversation"},
    std::pair{Family::chat_style_description, "chat_style_description"},
    std::pair{Family::chat_response, "chat_response"},
    std::pair{Family::chat_vote_description, "chat_vote_description"},
    std::pair{Family::chat_vote_response, "chat_vote_response"},
    std::pair{Family::judge, "judge"},
};

const std::vector<std::string> kFourElements = {"task_description", "instruction", "given_text", "output_format"};

// Slots that must appear somewhere in a family's template; the rest of
// declared_slots() are optional.
const std::vector<std::string>& required_slots(Family family) {
    static const std::map<Family, std::vector<std::string>> required = {
        {Family::zero_shot, {"given_text", "target_role", "n_paragraphs"}},
        {Family::cot, {"given_text", "target_role", "n_paragraphs"}},
        {Family::tot_plan, {"given_text", "n_plans"}},
        {Family::tot_conversation, {"given_text", "plan"}},
        {Family::tot_vote_plan, {"candidates"}},
        {Family::tot_vote_conversation, {"candidates", "reference"}},
        {Family::chat_style_description, {"given_text"}},
        {Family::chat_response, {"style_description", "user_msg", "history"}},
        {Family::chat_vote_description, {"candidates", "given_text"}},
        {Family::chat_vote_response, {"candidates", "reference"}},
        {Family::judge, {"conversation", "reference"}},
    };
    return required.at(family);
}

bool is_slot_char(char c, bool first) {
    return c == '_' || (c >= 'a' && c <= 'z') || (!first && c >= '0' && c <= '9');
}

// Calls on_slot(name) for every {slot} marker and on_text(chunk) for the text
// in between.
template <typename OnText, typename OnSlot>
void scan_slots(std::string_view text, OnText on_text, OnSlot on_slot) {
    std::size_t pos = 0;
    std::size_t emitted = 0;
    while ((pos = text.find('{', pos)) != std::string_view::npos) {
        std::size_t end = pos + 1;
        while (end < text.size() && is_slot_char(text[end], end == pos + 1)) ++end;
        if (end > pos + 1 && end < text.size() && text[end] == '}') {
            on_text(text.substr(emitted, pos - emitted));
            on_slot(std::string(text.substr(pos + 1, end - pos - 1)));
            emitted = pos = end + 1;
        } else {
            ++pos;
        }
    }
    on_text(text.substr(emitted));
}

std::string trim_copy(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Case-insensitive search for `word` starting at a word boundary.
std::vector<std::size_t> find_words_ci(std::string_view text, std::string_view word) {
    std::vector<std::size_t> hits;
    if (word.empty() || text.size() < word.size()) return hits;
    for (std::size_t i = 0; i + word.size() <= text.size(); ++i) {
        if (i > 0 && alnum(text[i - 1])) continue;
        bool match = true;
        for (std::size_t j = 0; j < word.size() && match; ++j) match = lower(text[i + j]) == lower(word[j]);
        if (match) hits.push_back(i);
    }
    return hits;
}

// Parses digits at `pos`; returns the value and advances pos, or nullopt.
std::optional<long> read_number(std::string_view text, std::size_t& pos) {
    const std::size_t start = pos;
    while (pos < text.size() && digit(text[pos])) ++pos;
    if (pos == start || pos - start > 6) return std::nullopt;
    return std::stol(std::string(text.substr(start, pos - start)));
}

// Number following a keyword, skipping separators such as ':', '=', '*', '#'
// and an optional "is".
std::optional<long> number_after(std::string_view text, std::size_t pos) {
    const auto skip = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == ':' || text[pos] == '=' ||
                                     text[pos] == '*' || text[pos] == '#' || text[pos] == '(' || text[pos] == '-'))
            ++pos;
    };
    skip();
    if (pos + 2 < text.size() && lower(text[pos]) == 'i' && lower(text[pos + 1]) == 's' && !alnum(text[pos + 2])) {
        pos += 2;
        skip();
    }
    return read_number(text, pos);
}

std::string strip_markup(std::string_view s) {
    std::string out = trim_copy(s);
    while (!out.empty() && (out.back() == '*' || out.back() == '#' || std::isspace(static_cast<unsigned char>(out.back()))))
        out.pop_back();
    std::size_t lead = 0;
    while (lead < out.size() && (out[lead] == '*' || std::isspace(static_cast<unsigned char>(out[lead])))) ++lead;
    return out.substr(lead);
}

std::string plural(int n, std::string_view singular) {
    return std::string(singular) + (n == 1 ? "" : "s");
}

std::string marker_list(std::string_view label, int n, std::string_view placeholder, bool own_line) {
    std::string out;
    for (int k = 1; k <= n; ++k) {
        if (k > 1) out += '\n';
        out += std::string(label) + " " + std::to_string(k) + ":" + (own_line ? "\n" : " ") + std::string(placeholder);
    }
    return out;
}

std::string numbered_block(std::string_view label, const std::vector<std::string>& candidates) {
    std::string out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += std::string(label) + " " + std::to_string(i + 1) + ":\n" + trim_copy(candidates[i]);
    }
    return out;
}

void require_positive(int n, const char* what) {
    if (n < 1) throw std::invalid_argument(std::string(what) + " must be at least 1");
}

std::string require_given_text(std::string_view given_text) {
    if (blank(given_text)) throw EmptyGivenText();
    return std::string(given_text);
}

void require_candidates(const std::vector<std::string>& candidates) {
    if (candidates.size() < 2) throw TooFewCandidates(candidates.size());
}

struct Marker {
    std::size_t begin; // first byte of the marker
    std::size_t end;   // first byte of the item text
    long number;
};

std::vector<Marker> labelled_markers(std::string_view raw) {
    static const std::array<std::string_view, 8> labels = {"plan", "conversation", "description", "response",
                                                            "reply", "version", "option", "candidate"};
    std::vector<Marker> all;
    for (const auto label : labels) {
        for (const std::size_t at : find_words_ci(raw, label)) {
            std::size_t pos = at + label.size();
            while (pos < raw.size() && (raw[pos] == ' ' || raw[pos] == '#')) ++pos;
            const auto number = read_number(raw, pos);
            if (!number) continue;
            while (pos < raw.size() && raw[pos] == '*') ++pos;
            if (pos < raw.size() && (raw[pos] == ':' || raw[pos] == '.' || raw[pos] == ')' || raw[pos] == '-')) {
                ++pos;
            } else if (!(pos == raw.size() || raw[pos] == '\n' || raw[pos] == '\r')) {
                continue;
            }
            while (pos < raw.size() && raw[pos] == '*') ++pos;
            all.push_back({at, pos, *number});
        }
    }
    std::sort(all.begin(), all.end(), [](const Marker& a, const Marker& b) { return a.begin < b.begin; });
    return all;
}

std::vector<Marker> line_number_markers(std::string_view raw) {
    std::vector<Marker> all;
    std::size_t line_start = 0;
    while (line_start <= raw.size()) {
        std::size_t pos = line_start;
        while (pos < raw.size() && (raw[pos] == ' ' || raw[pos] == '\t' || raw[pos] == '*' || raw[pos] == '#')) ++pos;
        const std::size_t begin = pos;
        if (auto number = read_number(raw, pos)) {
            while (pos < raw.size() && raw[pos] == '*') ++pos;
            if (pos < raw.size() && (raw[pos] == '.' || raw[pos] == ')')) {
                ++pos;
                while (pos < raw.size() && raw[pos] == '*') ++pos;
                if (pos == raw.size() || std::isspace(static_cast<unsigned char>(raw[pos])))
                    all.push_back({begin, pos, *number});
            }
        }
        const std::size_t nl = raw.find('\n', line_start);
        if (nl == std::string_view::npos) break;
        line_start = nl + 1;
    }
    return all;
}

std::vector<Marker> sequential(const std::vector<Marker>& markers) {
    std::vector<Marker> kept;
    for (const auto& m : markers)
        if (m.number == static_cast<long>(kept.size()) + 1) kept.push_back(m);
    return kept;
}

} // namespace

std::string_view to_string(Family family) {
    for (const auto& [f, name] : kFamilyNames)
        if (f == family) return name;
    throw std::invalid_argument("unknown family");
}

Family family_from_string(std::string_view name) {
    for (const auto& [f, n] : kFamilyNames)
        if (n == name) return f;
    throw std::invalid_argument("unknown prompt family: " + std::string(name));
}

const std::vector<Family>& all_families() {
    static const std::vector<Family> families = [] {
        std::vector<Family> out;
        for (const auto& [f, name] : kFamilyNames) out.push_back(f);
        return out;
    }();
    return families;
}

const std::vector<std::string>& declared_slots(Family family) {
    static const std::map<Family, std::vector<std::string>> slots = {
        {Family::zero_shot, {"target_role", "task", "given_text", "n_paragraphs", "paragraph_noun"}},
        {Family::cot, {"target_role", "task", "given_text", "n_paragraphs", "paragraph_noun"}},
        {Family::tot_plan, {"target_role", "given_text", "n_plans", "plan_markers", "n_paragraphs", "paragraph_noun"}},
        {Family::tot_conversation,
         {"target_role", "given_text", "plan", "n_candidates", "candidate_markers", "n_paragraphs", "paragraph_noun"}},
        {Family::tot_vote_plan, {"target_role", "candidates", "n_candidates"}},
        {Family::tot_vote_conversation, {"target_role", "candidates", "n_candidates", "reference"}},
        {Family::chat_style_description, {"given_text", "n_candidates", "candidate_markers"}},
        {Family::chat_response, {"style_description", "history", "user_msg", "n_candidates", "candidate_markers"}},
        {Family::chat_vote_description, {"given_text", "candidates", "n_candidates"}},
        {Family::chat_vote_response, {"reference", "user_msg", "candidates", "n_candidates"}},
        {Family::judge, {"conversation", "reference"}},
    };
    return slots.at(family);
}

std::string fingerprint(std::string_view text) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0x0f];
    }
    return out;
}

PromptTemplate PromptTemplate::parse(Family family, std::string_view source) {
    PromptTemplate t;
    t.family_ = family;
    t.version_ = fingerprint(source).substr(0, 12);
    const std::string family_name(to_string(family));

    std::string* current = nullptr;
    std::istringstream in{std::string(source)};
    std::string line;
    std::set<std::string> names;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("### ", 0) == 0) {
            const std::string name = trim_copy(std::string_view(line).substr(4));
            if (name.empty()) throw TemplateError(family_name + ": empty section header");
            if (!names.insert(name).second) throw TemplateError(family_name + ": duplicate section " + name);
            if (name.front() == '@') {
                current = &t.fragments_[name.substr(1)];
            } else {
                if (!std::all_of(name.begin(), name.end(), [](char c) { return is_slot_char(c, false); }))
                    throw TemplateError(family_name + ": invalid element name '" + name + "'");
                t.elements_.push_back({name, ""});
                current = &t.elements_.back().text;
            }
            continue;
        }
        if (current == nullptr) {
            if (!blank(line)) throw TemplateError(family_name + ": text before the first section header");
            continue;
        }
        if (!current->empty()) *current += '\n';
        *current += line;
    }
    for (auto& e : t.elements_) e.text = trim_copy(e.text);
    for (auto& [name, text] : t.fragments_) text = trim_copy(text);
    if (t.elements_.empty()) throw TemplateError(family_name + ": no elements");

    if (family == Family::zero_shot || family == Family::cot) {
        std::vector<std::string> element_names;
        for (const auto& e : t.elements_) element_names.push_back(e.name);
        if (element_names != kFourElements)
            throw TemplateError(family_name +
                                ": expected elements task_description, instruction, given_text, output_format");
    }

    const auto& declared = declared_slots(family);
    const auto referenced = t.referenced_slots();
    for (const auto& slot : referenced)
        if (std::find(declared.begin(), declared.end(), slot) == declared.end())
            throw TemplateError(family_name + ": undeclared slot {" + slot + "}");
    for (const auto& slot : required_slots(family))
        if (std::find(referenced.begin(), referenced.end(), slot) == referenced.end())
            throw TemplateError(family_name + ": template never uses slot {" + slot + "}");
    return t;
}

const std::string& PromptTemplate::fragment(const std::string& name) const {
    const auto it = fragments_.find(name);
    if (it == fragments_.end())
        throw TemplateError(std::string(to_string(family_)) + ": missing fragment @" + name);
    return it->second;
}

std::vector<std::string> PromptTemplate::referenced_slots() const {
    std::vector<std::string> out;
    const auto collect = [&](std::string_view text) {
        scan_slots(text, [](std::string_view) {}, [&](const std::string& slot) {
            if (std::find(out.begin(), out.end(), slot) == out.end()) out.push_back(slot);
        });
    };
    for (const auto& e : elements_) collect(e.text);
    for (const auto& [name, text] : fragments_) collect(text);
    return out;
}

TemplateLibrary TemplateLibrary::builtin() {
    TemplateLibrary lib;
    const auto& sources = detail::builtin_template_sources();
    for (const Family family : all_families()) {
        const auto it = sources.find(std::string(to_string(family)));
        if (it == sources.end()) throw TemplateError("no builtin template for " + std::string(to_string(family)));
        lib.templates_.emplace(family, PromptTemplate::parse(family, it->second));
    }
    return lib;
}

TemplateLibrary TemplateLibrary::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw TemplateError("template directory not found: " + dir.string());
    TemplateLibrary lib = builtin();
    for (const Family family : all_families()) {
        const auto path = dir / (std::string(to_string(family)) + ".txt");
        if (!std::filesystem::exists(path)) continue;
        std::ifstream in(path, std::ios::binary);
        std::ostringstream source;
        source << in.rdbuf();
        lib.templates_.insert_or_assign(family, PromptTemplate::parse(family, source.str()));
    }
    return lib;
}

const PromptTemplate& TemplateLibrary::get(Family family) const { return templates_.at(family); }

std::map<std::string, std::string> TemplateLibrary::versions() const {
    std::map<std::string, std::string> out;
    for (const auto& [family, t] : templates_) out.emplace(to_string(family), t.version());
    return out;
}

std::string element_header(std::string_view element_name) {
    std::string out;
    bool start = true;
    for (const char c : element_name) {
        if (c == '_') {
            out += ' ';
            start = true;
        } else {
            out += start ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
            start = false;
        }
    }
    return out;
}

PromptKit::PromptKit() : templates_(TemplateLibrary::builtin()) {}

PromptKit::PromptKit(TemplateLibrary templates) : templates_(std::move(templates)) {}

RenderedPrompt PromptKit::render(Family family, std::map<std::string, std::string> slots) const {
    const auto& t = templates_.get(family);
    std::string text;
    for (const auto& element : t.elements()) {
        if (!text.empty()) text += "\n\n";
        text += "### " + element_header(element.name) + "\n";
        scan_slots(element.text, [&](std::string_view chunk) { text += chunk; },
                   [&](const std::string& slot) {
                       const auto it = slots.find(slot);
                       if (it == slots.end())
                           throw std::logic_error("no value for slot {" + slot + "} in " +
                                                  std::string(to_string(family)));
                       text += it->second;
                   });
    }
    RenderedPrompt out;
    out.family = family;
    out.fingerprint = fingerprint(text);
    out.text = std::move(text);
    out.slots = std::move(slots);
    out.template_version = t.version();
    return out;
}

RenderedPrompt PromptKit::zero_shot(std::string_view target_role, std::string_view given_text, int n_paragraphs,
                                    GenerationMode mode) const {
    require_positive(n_paragraphs, "n_paragraphs");
    auto text = require_given_text(given_text);
    const auto& t = templates_.get(Family::zero_shot);
    return render(Family::zero_shot,
                  {{"target_role", std::string(target_role)},
                   {"task", t.fragment(mode == GenerationMode::new_conversation ? "task.new_conversation"
                                                                                : "task.continuation")},
                   {"given_text", std::move(text)},
                   {"n_paragraphs", std::to_string(n_paragraphs)},
                   {"paragraph_noun", plural(n_paragraphs, "paragraph")}});
}

RenderedPrompt PromptKit::cot(std::string_view target_role, std::string_view given_text, int n_paragraphs) const {
    require_positive(n_paragraphs, "n_paragraphs");
    auto text = require_given_text(given_text);
    return render(Family::cot, {{"target_role", std::string(target_role)},
                                {"task", templates_.get(Family::cot).fragment("task.continuation")},
                                {"given_text", std::move(text)},
                                {"n_paragraphs", std::to_string(n_paragraphs)},
                                {"paragraph_noun", plural(n_paragraphs, "paragraph")}});
}

RenderedPrompt PromptKit::tot_plan(std::string_view target_role, std::string_view given_text, int n_plans,
                                   int n_paragraphs) const {
    if (n_plans < 2) throw std::invalid_argument("n_plans must be at least 2");
    require_positive(n_paragraphs, "n_paragraphs");
    auto text = require_given_text(given_text);
    return render(Family::tot_plan, {{"target_role", std::string(target_role)},
                                     {"given_text", std::move(text)},
                                     {"n_plans", std::to_string(n_plans)},
                                     {"plan_markers", marker_list("Plan", n_plans, "<plan>", false)},
                                     {"n_paragraphs", std::to_string(n_paragraphs)},
                                     {"paragraph_noun", plural(n_paragraphs, "paragraph")}});
}

RenderedPrompt PromptKit::tot_conversation(std::string_view target_role, std::string_view given_text,
                                           std::string_view plan, int n_candidates, int n_paragraphs) const {
    if (n_candidates < 2) throw std::invalid_argument("n_candidates must be at least 2");
    require_positive(n_paragraphs, "n_paragraphs");
    auto text = require_given_text(given_text);
    if (blank(plan)) throw EmptyInput("plan");
    return render(Family::tot_conversation,
                  {{"target_role", std::string(target_role)},
                   {"given_text", std::move(text)},
                   {"plan", trim_copy(plan)},
                   {"n_candidates", std::to_string(n_candidates)},
                   {"candidate_markers", marker_list("Conversation", n_candidates, "<conversation>", true)},
                   {"n_paragraphs", std::to_string(n_paragraphs)},
                   {"paragraph_noun", plural(n_paragraphs, "paragraph")}});
}

RenderedPrompt PromptKit::tot_vote(const std::vector<std::string>& candidates, VoteCriterion criterion,
                                   const std::optional<std::string>& reference, std::string_view target_role) const {
    require_candidates(candidates);
    const std::string n = std::to_string(candidates.size());
    if (criterion == VoteCriterion::task_fit) {
        return render(Family::tot_vote_plan, {{"target_role", std::string(target_role)},
                                              {"candidates", numbered_block("Plan", candidates)},
                                              {"n_candidates", n}});
    }
    if (!reference || blank(*reference)) throw MissingReference();
    return render(Family::tot_vote_conversation, {{"target_role", std::string(target_role)},
                                                  {"candidates", numbered_block("Conversation", candidates)},
                                                  {"n_candidates", n},
                                                  {"reference", trim_copy(*reference)}});
}

RenderedPrompt PromptKit::chat_style_description(std::string_view given_text, int n_candidates) const {
    if (n_candidates < 2) throw std::invalid_argument("n_candidates must be at least 2");
    auto text = require_given_text(given_text);
    return render(Family::chat_style_description,
                  {{"given_text", std::move(text)},
                   {"n_candidates", std::to_string(n_candidates)},
                   {"candidate_markers", marker_list("Description", n_candidates, "<description>", false)}});
}

RenderedPrompt PromptKit::chat_response(const std::optional<std::string>& style_description,
                                        const std::vector<HistoryTurn>& history, std::string_view user_msg,
                                        int n_candidates) const {
    if (!style_description || blank(*style_description)) throw MissingStyleDescription();
    if (blank(user_msg)) throw EmptyInput("user message");
    if (n_candidates < 2) throw std::invalid_argument("n_candidates must be at least 2");
    std::string rendered_history;
    for (const auto& turn : history) {
        if (!rendered_history.empty()) rendered_history += '\n';
        rendered_history += "User: " + trim_copy(turn.user_msg) + "\nYou: " + trim_copy(turn.reply);
    }
    if (rendered_history.empty()) rendered_history = templates_.get(Family::chat_response).fragment("history.empty");
    return render(Family::chat_response,
                  {{"style_description", trim_copy(*style_description)},
                   {"history", std::move(rendered_history)},
                   {"user_msg", trim_copy(user_msg)},
                   {"n_candidates", std::to_string(n_candidates)},
                   {"candidate_markers", marker_list("Response", n_candidates, "<reply>", false)}});
}

RenderedPrompt PromptKit::chat_vote_description(const std::vector<std::string>& candidates,
                                                std::string_view given_text) const {
    require_candidates(candidates);
    auto text = require_given_text(given_text);
    return render(Family::chat_vote_description, {{"given_text", std::move(text)},
                                                  {"candidates", numbered_block("Description", candidates)},
                                                  {"n_candidates", std::to_string(candidates.size())}});
}

RenderedPrompt PromptKit::chat_vote_response(const std::vector<std::string>& candidates, std::string_view reference,
                                             std::string_view user_msg) const {
    require_candidates(candidates);
    if (blank(reference)) throw MissingReference();
    return render(Family::chat_vote_response, {{"reference", trim_copy(reference)},
                                               {"user_msg", trim_copy(user_msg)},
                                               {"candidates", numbered_block("Response", candidates)},
                                               {"n_candidates", std::to_string(candidates.size())}});
}

RenderedPrompt PromptKit::judge(std::string_view conversation,
                                const std::vector<std::string>& reference_paragraphs) const {
    if (blank(conversation)) throw EmptyInput("conversation");
    std::string reference;
    for (const auto& p : reference_paragraphs) {
        if (blank(p)) continue;
        if (!reference.empty()) reference += "\n\n";
        reference += trim_copy(p);
    }
    if (reference.empty()) throw EmptyInput("reference paragraphs");
    return render(Family::judge, {{"conversation", trim_copy(conversation)}, {"reference", std::move(reference)}});
}

VoteBallot parse_vote(std::string_view raw, int n_candidates) {
    VoteBallot ballot;
    ballot.raw_response = std::string(raw);

    std::optional<long> choice;
    for (const std::size_t at : find_words_ci(raw, "choice"))
        if (auto k = number_after(raw, at + 6)) choice = k;

    if (!choice) {
        std::size_t end = raw.size();
        while (end > 0 && (std::isspace(static_cast<unsigned char>(raw[end - 1])) || raw[end - 1] == '.' ||
                           raw[end - 1] == '*' || raw[end - 1] == ')'))
            --end;
        std::size_t begin = end;
        while (begin > 0 && digit(raw[begin - 1])) --begin;
        if (begin < end && end - begin <= 6 && (begin == 0 || !alnum(raw[begin - 1])))
            choice = std::stol(std::string(raw.substr(begin, end - begin)));
    }
    if (choice && *choice >= 1 && *choice <= n_candidates) ballot.chosen_index = static_cast<int>(*choice);
    return ballot;
}

int parse_judge_score(std::string_view raw) {
    std::optional<long> score;
    for (const std::size_t at : find_words_ci(raw, "score"))
        if (auto k = number_after(raw, at + 5)) score = k;
    if (!score) throw UnparseableScore("no 'score: <n>' line");
    if (*score < 1 || *score > 10) throw UnparseableScore("score " + std::to_string(*score) + " outside 1..10");
    return static_cast<int>(*score);
}

std::vector<std::string> parse_numbered_list(std::string_view raw, std::size_t expected) {
    if (expected < 1) throw std::invalid_argument("expected must be at least 1");
    auto markers = sequential(labelled_markers(raw));
    if (markers.empty()) markers = sequential(line_number_markers(raw));

    std::vector<std::string> items;
    for (std::size_t i = 0; i < markers.size(); ++i) {
        const std::size_t end = i + 1 < markers.size() ? markers[i + 1].begin : raw.size();
        items.push_back(strip_markup(raw.substr(markers[i].end, end - markers[i].end)));
    }
    if (items.size() != expected) throw CountMismatch(items.size(), expected);
    return items;
}

} // namespace stylecast::prompt
