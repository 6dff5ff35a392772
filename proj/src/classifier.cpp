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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "stylecast/eval_harness.hpp"
#include "stylecast/logging.hpp"

namespace stylecast::eval {

using nlohmann::json;

namespace {

using SparseVector = std::vector<std::pair<std::size_t, double>>;

// Byte offsets where a UTF-8 code point starts, plus the end offset.
std::vector<std::size_t> code_point_starts(std::string_view text) {
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < text.size(); ++i)
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) starts.push_back(i);
    starts.push_back(text.size());
    return starts;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double dot(const SparseVector& x, const std::vector<double>& w) {
    double s = 0.0;
    for (const auto& [i, v] : x) s += v * w[i];
    return s;
}

} // namespace

std::unordered_map<std::string, double> extract_features(std::string_view paragraph, const FeatureSpec& spec) {
    if (spec.min_char_n < 1 || spec.max_char_n < spec.min_char_n)
        throw std::invalid_argument("invalid character n-gram range");
    std::unordered_map<std::string, double> counts;

    const auto starts = code_point_starts(paragraph);
    const std::size_t n_chars = starts.size() - 1;
    for (int n = spec.min_char_n; n <= spec.max_char_n; ++n) {
        const auto un = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i + un <= n_chars; ++i) {
            std::string key = "c:";
            key.append(paragraph.substr(starts[i], starts[i + un] - starts[i]));
            counts[key] += 1.0;
        }
    }

    if (spec.word_unigrams) {
        std::string word;
        const auto flush = [&] {
            if (!word.empty()) counts["w:" + word] += 1.0;
            word.clear();
        };
        for (const char ch : paragraph) {
            const auto c = static_cast<unsigned char>(ch);
            if (std::isalnum(c) || c == '\'' || c >= 0x80)
                word += static_cast<char>(std::tolower(c));
            else
                flush();
        }
        flush();
    }

    double norm = 0.0;
    for (const auto& [_, v] : counts) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0)
        for (auto& [_, v] : counts) v /= norm;
    return counts;
}

double StyleClassifier::probability(std::string_view paragraph) const {
    double z = bias_;
    for (const auto& [key, value] : extract_features(paragraph, features_)) {
        const auto it = vocabulary_.find(key);
        if (it != vocabulary_.end()) z += value * weights_[it->second];
    }
    return sigmoid(z);
}

int StyleClassifier::predict(std::string_view paragraph) const { return probability(paragraph) >= 0.5 ? 1 : 0; }

json StyleClassifier::to_json() const {
    std::vector<std::string> vocabulary(vocabulary_.size());
    for (const auto& [key, index] : vocabulary_) vocabulary[index] = key;
    return {{"kind", kind},
            {"target_role", target_role_},
            {"features",
             {{"min_char_n", features_.min_char_n},
              {"max_char_n", features_.max_char_n},
              {"word_unigrams", features_.word_unigrams}}},
            {"vocabulary", vocabulary},
            {"weights", weights_},
            {"bias", bias_},
            {"validation_accuracy", validation_accuracy_},
            {"iterations", iterations_}};
}

StyleClassifier StyleClassifier::from_json(const json& j) {
    if (j.at("kind").get<std::string>() != kind)
        throw std::invalid_argument("unsupported classifier kind: " + j.at("kind").get<std::string>());
    StyleClassifier clf;
    clf.target_role_ = j.at("target_role").get<std::string>();
    const auto& f = j.at("features");
    clf.features_ = {f.at("min_char_n").get<int>(), f.at("max_char_n").get<int>(), f.at("word_unigrams").get<bool>()};
    const auto vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    clf.weights_ = j.at("weights").get<std::vector<double>>();
    if (vocabulary.size() != clf.weights_.size())
        throw std::invalid_argument("classifier vocabulary and weights differ in size");
    for (std::size_t i = 0; i < vocabulary.size(); ++i) clf.vocabulary_.emplace(vocabulary[i], i);
    clf.bias_ = j.at("bias").get<double>();
    clf.validation_accuracy_ = j.value("validation_accuracy", 0.0);
    clf.iterations_ = j.value("iterations", std::size_t{0});
    return clf;
}

StyleClassifier train_classifier(const AttributionCorpus& corpus, std::string_view target_role,
                                 const TrainOptions& options) {
    if (options.validation_fraction < 0.0 || options.validation_fraction >= 1.0)
        throw std::invalid_argument("validation_fraction must be in [0, 1)");

    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < corpus.rows.size(); ++i)
        (corpus.rows[i].role == target_role ? positives : negatives).push_back(i);
    if (positives.empty() || negatives.empty()) throw SingleClassCorpus(std::string(target_role));

    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> validation_rows;
    for (auto* cls : {&positives, &negatives}) {
        std::shuffle(cls->begin(), cls->end(), rng);
        auto n_val = static_cast<std::size_t>(std::llround(options.validation_fraction * static_cast<double>(cls->size())));
        n_val = std::min(n_val, cls->size() - 1); // keep one row of each class for training
        validation_rows.insert(validation_rows.end(), cls->begin(), cls->begin() + static_cast<std::ptrdiff_t>(n_val));
        train_rows.insert(train_rows.end(), cls->begin() + static_cast<std::ptrdiff_t>(n_val), cls->end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(validation_rows.begin(), validation_rows.end());

    StyleClassifier clf;
    clf.target_role_ = std::string(target_role);
    clf.features_ = options.features;

    // Vocabulary from training rows only, indexed in sorted key order.
    std::vector<std::unordered_map<std::string, double>> raw;
    raw.reserve(train_rows.size());
    for (const auto r : train_rows) {
        raw.push_back(extract_features(corpus.rows[r].paragraph, options.features));
        for (const auto& [key, _] : raw.back()) clf.vocabulary_.emplace(key, 0);
    }
    std::size_t next = 0;
    for (auto& [_, index] : clf.vocabulary_) index = next++;

    const std::size_t n = train_rows.size();
    std::vector<SparseVector> x(n);
    std::vector<double> y(n);
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [key, value] : raw[i]) x[i].emplace_back(clf.vocabulary_.at(key), value);
        std::sort(x[i].begin(), x[i].end());
        y[i] = corpus.rows[train_rows[i]].role == target_role ? 1.0 : 0.0;
        n_pos += static_cast<std::size_t>(y[i]);
    }
    raw.clear();

    const double w_pos = static_cast<double>(n) / (2.0 * static_cast<double>(n_pos));
    const double w_neg = static_cast<double>(n) / (2.0 * static_cast<double>(n - n_pos));
    std::vector<double> cost(n);
    for (std::size_t i = 0; i < n; ++i) cost[i] = (y[i] > 0.5 ? w_pos : w_neg) / static_cast<double>(n);

    // Step size bounded by the inverse Lipschitz constant of the loss.
    double max_sq_norm = 1.0; // the bias feature
    for (const auto& xi : x) {
        double s = 1.0;
        for (const auto& [_, v] : xi) s += v * v;
        max_sq_norm = std::max(max_sq_norm, s);
    }
    const double lipschitz = 0.25 * std::max(w_pos, w_neg) * max_sq_norm + options.l2;
    const double step = std::min(options.learning_rate, 1.0 / lipschitz);

    const std::size_t d = clf.vocabulary_.size();
    std::vector<double> w(d + 1, 0.0); // last entry is the bias
    std::vector<double> w_prev = w;
    std::vector<double> lookahead(d + 1);
    std::vector<double> grad(d + 1);
    double t = 1.0;

    int iteration = 0;
    for (; iteration < options.max_iterations; ++iteration) {
        const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
        const double momentum = (t - 1.0) / t_next;
        for (std::size_t k = 0; k <= d; ++k) lookahead[k] = w[k] + momentum * (w[k] - w_prev[k]);

        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double err = cost[i] * (sigmoid(dot(x[i], lookahead) + lookahead[d]) - y[i]);
            for (const auto& [k, v] : x[i]) grad[k] += err * v;
            grad[d] += err;
        }
        for (std::size_t k = 0; k < d; ++k) grad[k] += options.l2 * lookahead[k];

        double grad_norm = 0.0;
        for (const double g : grad) grad_norm += g * g;
        if (std::sqrt(grad_norm) < options.tolerance) {
            w = lookahead;
            break;
        }
        w_prev = w;
        for (std::size_t k = 0; k <= d; ++k) w[k] = lookahead[k] - step * grad[k];
        t = t_next;
    }

    clf.bias_ = w[d];
    w.pop_back();
    clf.weights_ = std::move(w);
    clf.iterations_ = static_cast<std::size_t>(iteration);

    const auto& scored = validation_rows.empty() ? train_rows : validation_rows;
    if (validation_rows.empty()) logger()->warn("classifier: no validation rows; reporting training accuracy");
    std::size_t correct = 0;
    for (const auto r : scored) {
        const int truth = corpus.rows[r].role == target_role ? 1 : 0;
        correct += static_cast<std::size_t>(clf.predict(corpus.rows[r].paragraph) == truth);
    }
    clf.validation_accuracy_ = static_cast<double>(correct) / static_cast<double>(scored.size());
    logger()->info("classifier for {}: {} features, {} iterations, validation accuracy {:.4f}", clf.target_role_, d,
                   clf.iterations_, clf.validation_accuracy_);
    return clf;
}

} // namespace stylecast::eval
