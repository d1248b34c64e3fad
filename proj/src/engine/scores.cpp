#include "lsta/engine/scores.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lsta::engine {

void ScoreFile::add(std::string sample_id, std::vector<double> scores)
{
    if (!rows.empty() && scores.size() != class_count()) {
        throw std::invalid_argument("sample " + sample_id + " has " + std::to_string(scores.size()) +
                                    " scores, expected " + std::to_string(class_count()));
    }
    sample_ids.push_back(std::move(sample_id));
    rows.push_back(std::move(scores));
}

const std::vector<double>& ScoreFile::row(const std::string& sample_id) const
{
    auto it = std::find(sample_ids.begin(), sample_ids.end(), sample_id);
    if (it == sample_ids.end()) throw std::out_of_range("no scores for sample " + sample_id);
    return rows[static_cast<std::size_t>(it - sample_ids.begin())];
}

void ScoreFile::write_csv(std::ostream& out) const
{
    out << "sample_id";
    for (std::size_t c = 0; c < class_count(); ++c) out << ",score_" << c;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << sample_ids[i];
        for (double v : rows[i]) {
            std::snprintf(buf, sizeof buf, "%.9g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

void ScoreFile::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write score file " + path);
    write_csv(out);
}

ScoreFile ScoreFile::read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("sample_id", 0) != 0) {
        throw std::invalid_argument("score file must start with a sample_id header");
    }
    const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    ScoreFile file;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, cell;
        std::getline(ss, id, ',');
        std::vector<double> scores;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                scores.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::invalid_argument("score file line " + std::to_string(number) + ": bad value '" + cell + "'");
            }
        }
        if (scores.size() != columns) {
            throw std::invalid_argument("score file line " + std::to_string(number) + ": expected " +
                                        std::to_string(columns) + " scores");
        }
        file.add(id, std::move(scores));
    }
    return file;
}

ScoreFile ScoreFile::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open score file " + path);
    return read_csv(in);
}

std::size_t argmax(const std::vector<double>& scores)
{
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

double top_k_accuracy(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels, std::size_t k)
{
    if (rows.empty()) throw std::invalid_argument("accuracy of an empty dataset");
    if (rows.size() != labels.size()) throw std::invalid_argument("score and label counts differ");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto label = static_cast<std::size_t>(labels[i]);
        if (label >= r.size()) throw std::invalid_argument("label outside the score range");
        std::size_t better = 0;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (r[c] > r[label] || (r[c] == r[label] && c < label)) ++better;
        }
        if (better < k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double top_k_accuracy(const ScoreFile& scores, const std::map<std::string, int>& labels, std::size_t k)
{
    std::vector<int> ordered;
    for (const auto& id : scores.sample_ids) {
        auto it = labels.find(id);
        if (it == labels.end()) throw std::invalid_argument("no label for sample " + id);
        ordered.push_back(it->second);
    }
    return top_k_accuracy(scores.rows, ordered, k);
}

ScoreFile fuse_scores(const std::vector<ScoreFile>& files, std::vector<double> weights)
{
    if (files.empty()) throw std::invalid_argument("nothing to fuse");
    if (weights.empty()) weights.assign(files.size(), 1.0);
    if (weights.size() != files.size()) throw std::invalid_argument("one weight per score file is required");
    const auto& first = files.front();
    const std::set<std::string> ids(first.sample_ids.begin(), first.sample_ids.end());
    for (std::size_t f = 1; f < files.size(); ++f) {
        if (std::set<std::string>(files[f].sample_ids.begin(), files[f].sample_ids.end()) != ids ||
            files[f].size() != first.size()) {
            throw std::invalid_argument("score file " + std::to_string(f) + " covers different samples");
        }
        if (files[f].class_count() != first.class_count()) {
            throw std::invalid_argument("score file " + std::to_string(f) + " has a different class count");
        }
    }
    ScoreFile fused;
    for (std::size_t i = 0; i < first.size(); ++i) {
        const auto& id = first.sample_ids[i];
        std::vector<double> sum(first.class_count(), 0.0);
        for (std::size_t f = 0; f < files.size(); ++f) {
            const auto& r = f == 0 ? first.rows[i] : files[f].row(id);
            for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += weights[f] * r[c];
        }
        const double total = std::accumulate(sum.begin(), sum.end(), 0.0);
        if (!(total > 0.0)) throw std::invalid_argument("fused scores of " + id + " do not have a positive sum");
        for (auto& v : sum) v /= total;
        fused.add(id, std::move(sum));
    }
    return fused;
}

} // namespace lsta::engine
