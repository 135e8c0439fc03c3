#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cascadeopt/common.hpp"

namespace cascadeopt {

/// Dense per-(model, image) scores in [0,1] on one named split. Row-major by model.
class ScoreMatrix {
public:
    ScoreMatrix() = default;

    ScoreMatrix(std::string split_name, std::vector<std::string> model_ids, std::vector<std::uint64_t> image_ids)
        : split_name_(std::move(split_name)), model_ids_(std::move(model_ids)), image_ids_(std::move(image_ids)),
          scores_(model_ids_.size() * image_ids_.size(), 0.0) {
        index();
    }

    const std::string& split_name() const noexcept { return split_name_; }
    const std::vector<std::string>& model_ids() const noexcept { return model_ids_; }
    const std::vector<std::uint64_t>& image_ids() const noexcept { return image_ids_; }
    std::size_t model_count() const noexcept { return model_ids_.size(); }
    std::size_t image_count() const noexcept { return image_ids_.size(); }

    double at(std::size_t model_row, std::size_t image_col) const { return scores_[model_row * image_ids_.size() + image_col]; }

    void set(std::size_t model_row, std::size_t image_col, double score) {
        require(std::isfinite(score) && score >= 0.0 && score <= 1.0,
                "score for model '" + model_ids_[model_row] + "', image " + std::to_string(image_ids_[image_col]) +
                    " is outside [0,1]");
        scores_[model_row * image_ids_.size() + image_col] = score;
    }

    const double* row(std::size_t model_row) const { return scores_.data() + model_row * image_ids_.size(); }

    std::size_t model_row(const std::string& model_id) const {
        auto it = model_index_.find(model_id);
        if (it == model_index_.end()) fail("score matrix '" + split_name_ + "' has no row for model '" + model_id + "'");
        return it->second;
    }

    bool has_model(const std::string& model_id) const { return model_index_.count(model_id) != 0; }

    std::size_t image_col(std::uint64_t image_id) const {
        auto it = image_index_.find(image_id);
        if (it == image_index_.end())
            fail("score matrix '" + split_name_ + "' has no column for image " + std::to_string(image_id));
        return it->second;
    }

    bool has_image(std::uint64_t image_id) const { return image_index_.count(image_id) != 0; }

    friend bool operator==(const ScoreMatrix& a, const ScoreMatrix& b) {
        return a.split_name_ == b.split_name_ && a.model_ids_ == b.model_ids_ && a.image_ids_ == b.image_ids_ &&
               a.scores_ == b.scores_;
    }

private:
    void index() {
        model_index_.clear();
        image_index_.clear();
        for (std::size_t i = 0; i < model_ids_.size(); ++i)
            require(model_index_.emplace(model_ids_[i], i).second, "duplicate model id '" + model_ids_[i] + "'");
        for (std::size_t j = 0; j < image_ids_.size(); ++j)
            require(image_index_.emplace(image_ids_[j], j).second,
                    "duplicate image id " + std::to_string(image_ids_[j]));
    }

    std::string split_name_;
    std::vector<std::string> model_ids_;
    std::vector<std::uint64_t> image_ids_;
    std::vector<double> scores_;
    std::unordered_map<std::string, std::size_t> model_index_;
    std::unordered_map<std::uint64_t, std::size_t> image_index_;
};

// File format:
//   split,<name>
//   <image id>,<image id>,...
//   <model id>,<score>,<score>,...
// UTF-8, LF line endings, scores with 17 significant digits.

inline void write_score_matrix(const ScoreMatrix& m, std::ostream& out) {
    out << "split," << m.split_name() << '\n';
    for (std::size_t j = 0; j < m.image_count(); ++j) out << (j ? "," : "") << m.image_ids()[j];
    out << '\n';
    for (std::size_t i = 0; i < m.model_count(); ++i) {
        out << m.model_ids()[i];
        for (std::size_t j = 0; j < m.image_count(); ++j) out << ',' << format_double(m.at(i, j));
        out << '\n';
    }
}

inline void write_score_matrix(const ScoreMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot write score matrix " + path.string());
    write_score_matrix(m, out);
    if (!out) fail_io("short write to " + path.string());
}

inline ScoreMatrix read_score_matrix(std::istream& in, const std::string& what) {
    std::string line;
    std::size_t line_no = 0;
    auto where = [&] { return what + ":" + std::to_string(line_no) + ": "; };

    if (!std::getline(in, line)) fail(what + ": empty score file");
    ++line_no;
    std::string_view header = trim(line);
    if (header.substr(0, 6) != "split," || header.size() == 6) fail(where() + "malformed header, expected 'split,<name>'");
    std::string split(header.substr(6));

    if (!std::getline(in, line)) fail(where() + "missing image id line");
    ++line_no;
    std::vector<std::uint64_t> image_ids;
    for (auto tok : split_view(trim(line), ',')) {
        std::uint64_t id = 0;
        if (!parse_int(trim(tok), id)) fail(where() + "malformed image id '" + std::string(tok) + "'");
        image_ids.push_back(id);
    }
    {
        std::unordered_set<std::uint64_t> seen;
        for (auto id : image_ids)
            if (!seen.insert(id).second) fail(where() + "duplicate image id " + std::to_string(id));
    }

    std::vector<std::string> model_ids;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = trim(line);
        if (body.empty()) continue;
        auto cells = split_view(body, ',');
        if (cells.size() != image_ids.size() + 1)
            fail(where() + "row has " + std::to_string(cells.size() - 1) + " scores, expected " +
                 std::to_string(image_ids.size()));
        std::string model_id(trim(cells[0]));
        if (model_id.empty()) fail(where() + "empty model id");
        std::vector<double> row(image_ids.size());
        for (std::size_t j = 0; j < image_ids.size(); ++j) {
            double v = 0;
            const std::string cell_ref = "row '" + model_id + "', column " + std::to_string(j + 1) + " (image " +
                                         std::to_string(image_ids[j]) + ")";
            if (!parse_double(trim(cells[j + 1]), v)) fail(where() + "malformed score at " + cell_ref);
            if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0))
                fail(where() + "score " + std::string(trim(cells[j + 1])) + " outside [0,1] at " + cell_ref);
            row[j] = v;
        }
        model_ids.push_back(std::move(model_id));
        rows.push_back(std::move(row));
    }
    if (model_ids.empty()) fail(what + ": no model rows");

    ScoreMatrix m;
    try {
        m = ScoreMatrix(split, model_ids, image_ids);
    } catch (const Error& e) {
        fail(what + ": " + e.what());
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < image_ids.size(); ++j) m.set(i, j, rows[i][j]);
    return m;
}

inline ScoreMatrix read_score_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open score matrix " + path.string());
    return read_score_matrix(in, path.string());
}

}  // namespace cascadeopt
