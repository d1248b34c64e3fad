#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace lsta::engine {

/// Post-softmax class scores per sample, in insertion order.
struct ScoreFile {
    std::vector<std::string> sample_ids;
    std::vector<std::vector<double>> rows;

    std::size_t size() const { return rows.size(); }
    std::size_t class_count() const { return rows.empty() ? 0 : rows.front().size(); }
    void add(std::string sample_id, std::vector<double> scores);
    const std::vector<double>& row(const std::string& sample_id) const;

    /// Header sample_id,score_0..score_{L-1}; 9 significant digits.
    void write_csv(std::ostream& out) const;
    void save(const std::string& path) const;
    static ScoreFile read_csv(std::istream& in);
    static ScoreFile load(const std::string& path);
};

std::size_t argmax(const std::vector<double>& scores);

/// Fraction of rows whose label is among the k highest scores (ties
/// resolved toward the lower class index).
double top_k_accuracy(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels, std::size_t k);
double top_k_accuracy(const ScoreFile& scores, const std::map<std::string, int>& labels, std::size_t k);

/// Weighted sum of score files (default weights 1) renormalized per row.
/// Rows are matched by sample id; the sets must be identical.
ScoreFile fuse_scores(const std::vector<ScoreFile>& files, std::vector<double> weights = {});

} // namespace lsta::engine
