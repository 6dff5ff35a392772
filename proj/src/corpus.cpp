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

#include "stylecast/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stylecast::corpus {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    // Bytes >= 0x80 belong to multi-byte UTF-8 letters.
    return std::isalnum(u) != 0 || c == '_' || u >= 0x80;
}

void strip_bom(std::string& line) {
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
}

std::pair<std::string, std::string> parse_jsonl_line(const std::string& line, std::size_t line_no) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedLine(line_no, e.what());
    }
    if (!obj.is_object()) throw MalformedLine(line_no, "expected a JSON object");
    const auto speaker = obj.find("speaker");
    const auto text = obj.find("text");
    if (speaker == obj.end() || !speaker->is_string())
        throw MalformedLine(line_no, "missing string field 'speaker'");
    if (text == obj.end() || !text->is_string())
        throw MalformedLine(line_no, "missing string field 'text'");
    return {speaker->get<std::string>(), text->get<std::string>()};
}

std::pair<std::string, std::string> parse_script_line(std::string_view line, std::size_t line_no) {
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw MalformedLine(line_no, "expected 'Speaker: text'");
    return {std::string(line.substr(0, colon)), std::string(line.substr(colon + 1))};
}

// Replaces whole-word occurrences of any key in one pass; keys that matched are
// added to `seen`.
std::string replace_names(std::string_view text,
                          const std::vector<std::pair<std::string, std::string>>& by_length,
                          std::set<std::string>& seen) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const bool at_boundary = i == 0 || !is_word_char(text[i - 1]);
        bool replaced = false;
        if (at_boundary) {
            for (const auto& [from, to] : by_length) {
                if (text.compare(i, from.size(), from) != 0) continue;
                const std::size_t end = i + from.size();
                if (end < text.size() && is_word_char(text[end])) continue;
                out += to;
                seen.insert(from);
                i = end;
                replaced = true;
                break;
            }
        }
        if (!replaced) out += text[i++];
    }
    return out;
}

bool contains_word(std::string_view text, std::string_view word) {
    for (std::size_t pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
        const bool left = pos == 0 || !is_word_char(text[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right = end >= text.size() || !is_word_char(text[end]);
        if (left && right) return true;
    }
    return false;
}

} // namespace

Format parse_format(std::string_view name) {
    if (name == "jsonl") return Format::jsonl;
    if (name == "script") return Format::script;
    throw std::invalid_argument("unknown transcript format: " + std::string(name));
}

Transcript::Transcript(std::string id, std::vector<Utterance> utterances)
    : id_(std::move(id)), utterances_(std::move(utterances)) {
    if (utterances_.empty()) throw EmptyTranscript();
    const std::size_t base = utterances_.front().index;
    for (std::size_t i = 0; i < utterances_.size(); ++i) {
        auto& u = utterances_[i];
        if (u.index != base + i) throw std::invalid_argument("utterance indices must be contiguous");
        if (trim(u.text).empty()) throw std::invalid_argument("utterance text must not be blank");
        if (trim(u.speaker).empty()) throw std::invalid_argument("utterance speaker must not be blank");
        if (std::find(roles_.begin(), roles_.end(), u.speaker) == roles_.end()) roles_.push_back(u.speaker);
    }
}

Transcript Transcript::from_pairs(std::string id,
                                  const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<Utterance> utterances;
    utterances.reserve(pairs.size());
    for (const auto& [speaker, text] : pairs)
        utterances.push_back({speaker, text, utterances.size()});
    return Transcript(std::move(id), std::move(utterances));
}

bool Transcript::has_role(std::string_view role) const {
    return std::find(roles_.begin(), roles_.end(), role) != roles_.end();
}

Transcript parse_transcript(std::istream& in, Format format, std::string id) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) strip_bom(line);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto body = trim(line);
        if (body.empty()) continue;
        if (format == Format::script && body.front() == '#') continue;

        auto [speaker, text] = format == Format::jsonl ? parse_jsonl_line(line, line_no)
                                                       : parse_script_line(body, line_no);
        const auto speaker_trimmed = trim(speaker);
        const auto text_trimmed = trim(text);
        if (speaker_trimmed.empty()) throw MalformedLine(line_no, "empty speaker");
        if (text_trimmed.empty()) throw MalformedLine(line_no, "empty text");
        pairs.emplace_back(std::string(speaker_trimmed), std::string(text_trimmed));
    }
    if (pairs.empty()) throw EmptyTranscript();
    return Transcript::from_pairs(std::move(id), pairs);
}

Transcript parse_transcript(std::string_view raw, Format format, std::string id) {
    std::istringstream in{std::string(raw)};
    return parse_transcript(in, format, std::move(id));
}

Transcript load_transcript(const std::string& path, Format format) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open transcript: " + path);
    return parse_transcript(in, format, std::filesystem::path(path).stem().string());
}

Transcript load_transcript(const std::string& path) {
    const auto ext = std::filesystem::path(path).extension().string();
    return load_transcript(path, ext == ".jsonl" || ext == ".json" ? Format::jsonl : Format::script);
}

std::string to_jsonl(const Transcript& t) {
    std::string out;
    for (const auto& u : t.utterances()) {
        out += nlohmann::json{{"speaker", u.speaker}, {"text", u.text}}.dump();
        out += '\n';
    }
    return out;
}

std::string to_script(const Transcript& t) {
    std::string out;
    for (const auto& u : t.utterances()) {
        if (!out.empty()) out += '\n';
        out += u.speaker;
        out += ": ";
        out += u.text;
    }
    return out;
}

Transcript anonymize(const Transcript& t, const std::map<std::string, std::string>& name_map) {
    if (name_map.empty()) return t;

    std::vector<std::pair<std::string, std::string>> by_length(name_map.begin(), name_map.end());
    std::stable_sort(by_length.begin(), by_length.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });

    std::set<std::string> seen;
    std::vector<Utterance> out;
    out.reserve(t.size());
    for (const auto& u : t.utterances())
        out.push_back({replace_names(u.speaker, by_length, seen), replace_names(u.text, by_length, seen), u.index});

    for (const auto& [from, to] : name_map) {
        if (seen.count(from) != 0) continue;
        const bool already_applied = std::any_of(t.utterances().begin(), t.utterances().end(), [&](const Utterance& u) {
            return contains_word(u.speaker, to) || contains_word(u.text, to);
        });
        if (!already_applied) throw UnusedMapping(from);
    }
    return Transcript(t.id(), std::move(out));
}

std::size_t train_size(std::size_t n, double train_fraction) {
    // The epsilon keeps exact halves (e.g. 0.35 * 10) rounding up despite
    // binary representation error.
    return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5 + 1e-9));
}

CorpusSplit split(const Transcript& t, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    const std::size_t n = t.size();
    if (n < 2) throw TooFewUtterances("split needs at least 2 utterances, got " + std::to_string(n));
    const std::size_t k = train_size(n, train_fraction);
    if (k == 0 || k >= n)
        throw TooFewUtterances("split of " + std::to_string(n) + " utterances at " +
                               std::to_string(train_fraction) + " leaves one side empty");

    const auto& all = t.utterances();
    std::vector<Utterance> train(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<Utterance> test(all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    return {Transcript(t.id() + ".train", std::move(train)), Transcript(t.id() + ".test", std::move(test)),
            train_fraction};
}

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) words.emplace_back(text.substr(start, i - start));
    }
    return words;
}

std::string join_words(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out += ' ';
        out += words[i];
    }
    return out;
}

std::vector<Segment> segment(std::string_view text, std::size_t window, std::size_t stride) {
    if (window == 0) throw std::invalid_argument("window must be positive");
    if (stride == 0 || stride > window) throw std::invalid_argument("stride must lie in (0, window]");
    const auto words = words_of(text);
    if (words.empty()) throw EmptyText();

    std::vector<Segment> segments;
    const std::size_t total = words.size();
    for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + window, total);
        segments.push_back({segments.size() + 1, start, end, join_words(words, start, end)});
        if (end == total) break;
    }
    return segments;
}

std::vector<std::string> paragraphs_of(const Transcript& t, std::string_view role) {
    if (!t.has_role(role)) throw UnknownRole(std::string(role));
    std::vector<std::string> out;
    for (const auto& u : t.utterances())
        if (u.speaker == role) out.push_back(u.text);
    return out;
}

} // namespace stylecast::corpus
