#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pdhp {

// One document: a timestamp and a sparse bag of words, (vocab id, count)
// pairs sorted by id. true_* labels carry ground truth on synthetic data and
// stay -1 on real streams.
struct Document {
    double time = 0.0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> words;
    std::uint32_t total = 0;
    std::int64_t true_temporal = -1;
    std::int64_t true_textual = -1;
};

inline Document make_document(double time, std::span<const std::uint32_t> tokens) {
    if (!std::isfinite(time)) throw std::invalid_argument("make_document: non-finite time");
    if (tokens.empty()) throw std::invalid_argument("make_document: empty token list");
    std::vector<std::uint32_t> sorted(tokens.begin(), tokens.end());
    std::sort(sorted.begin(), sorted.end());
    Document doc;
    doc.time = time;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        doc.words.emplace_back(sorted[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    doc.total = static_cast<std::uint32_t>(sorted.size());
    return doc;
}

// Running word counts of one cluster. Dense over the vocabulary; V is small
// enough (~1e3) that this beats a hash map for the access pattern here.
class ClusterTextStats {
public:
    ClusterTextStats() = default;
    explicit ClusterTextStats(std::uint32_t vocab_size) : counts_(vocab_size, 0) {}

    std::uint32_t vocab_size() const { return static_cast<std::uint32_t>(counts_.size()); }
    std::uint64_t total() const { return total_; }
    std::uint32_t n_docs() const { return n_docs_; }
    std::uint32_t count(std::uint32_t v) const { return counts_.at(v); }

    void add(const Document& doc) {
        for (auto [v, k] : doc.words) {
            if (v >= counts_.size()) throw std::out_of_range("ClusterTextStats: word id outside vocabulary");
            counts_[v] += k;
        }
        total_ += doc.total;
        ++n_docs_;
    }

    void remove(const Document& doc) {
        if (n_docs_ == 0) throw std::logic_error("ClusterTextStats: remove from empty cluster");
        for (auto [v, k] : doc.words) {
            if (v >= counts_.size() || counts_[v] < k)
                throw std::logic_error("ClusterTextStats: removing words that were never added");
            counts_[v] -= k;
        }
        total_ -= doc.total;
        --n_docs_;
    }

private:
    std::vector<std::uint32_t> counts_;
    std::uint64_t total_ = 0;
    std::uint32_t n_docs_ = 0;
};

// Log predictive probability of the document's token sequence under the
// cluster's collapsed Dirichlet-Multinomial posterior with symmetric
// concentration theta0. Equals the sequential urn product, so it is exact for
// any document order within the cluster.
inline double log_predictive(const Document& doc, const ClusterTextStats& stats, double theta0) {
    if (!(theta0 > 0.0) || !std::isfinite(theta0))
        throw std::invalid_argument("log_predictive: theta0 must be positive and finite");
    if (doc.total == 0) throw std::invalid_argument("log_predictive: empty document");
    const double v_total = static_cast<double>(stats.vocab_size()) * theta0;
    double lp = 0.0;
    for (auto [v, k] : doc.words) {
        const double base = static_cast<double>(stats.count(v)) + theta0;
        lp += std::lgamma(base + static_cast<double>(k)) - std::lgamma(base);
    }
    const double denom_base = static_cast<double>(stats.total()) + v_total;
    lp -= std::lgamma(denom_base + static_cast<double>(doc.total)) - std::lgamma(denom_base);
    return lp;
}

} // namespace pdhp
