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

#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stylecast/error.hpp"

namespace stylecast::corpus {

class MalformedLine : public Error {
public:
    MalformedLine(std::size_t line_no, const std::string& reason)
        : Error("malformed line " + std::to_string(line_no) + ": " + reason), line_no_(line_no) {}
    std::size_t line_no() const { return line_no_; }

private:
    std::size_t line_no_;
};

class EmptyTranscript : public Error {
public:
    EmptyTranscript() : Error("transcript contains no utterances") {}
};

class UnusedMapping : public Error {
public:
    explicit UnusedMapping(std::string name)
        : Error("name mapping matches nothing: " + name), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class TooFewUtterances : public Error {
public:
    using Error::Error;
};

class EmptyText : public Error {
public:
    EmptyText() : Error("text contains no words") {}
};

class UnknownRole : public Error {
public:
    explicit UnknownRole(const std::string& role) : Error("unknown role: " + role) {}
};

struct Utterance {
    std::string speaker;
    std::string text;
    std::size_t index = 0;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

enum class Format { jsonl, script };

Format parse_format(std::string_view name);

/// Ordered, speaker-labelled paragraphs of one interview.
///
/// Immutable once built. Utterance indices are contiguous but need not start
/// at zero: the halves of a split keep the indices of their source.
class Transcript {
public:
    /// Validates and adopts `utterances`. Throws EmptyTranscript when empty and
    /// std::invalid_argument when an invariant does not hold.
    Transcript(std::string id, std::vector<Utterance> utterances);

    /// Builds a transcript from (speaker, text) pairs, numbering them from 0.
    static Transcript from_pairs(std::string id,
                                 const std::vector<std::pair<std::string, std::string>>& pairs);

    const std::string& id() const { return id_; }
    const std::vector<Utterance>& utterances() const { return utterances_; }
    /// Distinct speakers in order of first appearance.
    const std::vector<std::string>& roles() const { return roles_; }
    bool has_role(std::string_view role) const;
    std::size_t size() const { return utterances_.size(); }

    friend bool operator==(const Transcript&, const Transcript&) = default;

private:
    std::string id_;
    std::vector<Utterance> utterances_;
    std::vector<std::string> roles_;
};

struct CorpusSplit {
    Transcript train;
    Transcript test;
    double train_fraction;
};

struct Segment {
    std::size_t ordinal = 0;    // 1-based
    std::size_t start_word = 0; // inclusive
    std::size_t end_word = 0;   // exclusive
    std::string text;

    std::size_t word_count() const { return end_word - start_word; }
};

Transcript parse_transcript(std::istream& in, Format format, std::string id = "transcript");
Transcript parse_transcript(std::string_view raw, Format format, std::string id = "transcript");
Transcript load_transcript(const std::string& path);
Transcript load_transcript(const std::string& path, Format format);

/// Canonical jsonl form: one {"speaker","text"} object per line.
std::string to_jsonl(const Transcript& t);
/// "Speaker: text" lines. This is also the text placed in prompts.
std::string to_script(const Transcript& t);

/// Replaces every mapped name, whole-word and case-sensitive, in speaker
/// labels and utterance text. All keys are applied in one left-to-right pass,
/// longest key first at each position.
///
/// A key is unused (UnusedMapping) only when neither it nor its replacement
/// occurs anywhere, so re-applying a map to its own output is a no-op.
Transcript anonymize(const Transcript& t, const std::map<std::string, std::string>& name_map);

/// Contiguous prefix of round_half_up(train_fraction * n) utterances becomes
/// the training half.
CorpusSplit split(const Transcript& t, double train_fraction);

/// Number of training utterances split() takes for n utterances.
std::size_t train_size(std::size_t n, double train_fraction);

std::vector<std::string> words_of(std::string_view text);
std::string join_words(const std::vector<std::string>& words, std::size_t begin, std::size_t end);

/// Sliding-window segmentation over whitespace-delimited words.
std::vector<Segment> segment(std::string_view text, std::size_t window, std::size_t stride);

std::vector<std::string> paragraphs_of(const Transcript& t, std::string_view role);

} // namespace stylecast::corpus
