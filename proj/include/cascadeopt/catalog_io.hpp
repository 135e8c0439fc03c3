#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cascadeopt/common.hpp"
#include "cascadeopt/costs.hpp"
#include "cascadeopt/evaluator.hpp"
#include "cascadeopt/pareto.hpp"

namespace cascadeopt {

// Catalog CSV:  cascade_id,depth,levels,terminal,accuracy,expected_time_s,throughput_fps,scenario
// `levels` is "model@precision;model@precision", empty for single-model cascades.
inline constexpr const char* kCatalogHeader = "cascade_id,depth,levels,terminal,accuracy,expected_time_s,throughput_fps,scenario";
// Frontier CSV: accuracy,throughput_fps,cascade_id,depth,scenario
inline constexpr const char* kFrontierHeader = "accuracy,throughput_fps,cascade_id,depth,scenario";

inline void write_catalog_row(std::ostream& out, const CascadeSpace& space, const CatalogRecord& r, Scenario s) {
    const auto& t = r.eval.in(s);
    out << r.id.str() << ',' << r.spec.depth() << ',' << space.describe_levels(r.spec) << ','
        << space.model_id(r.spec.terminal) << ',' << format_double(r.eval.accuracy) << ','
        << format_double(t.expected_time_s) << ',' << format_double(1.0 / t.expected_time_s) << ',' << to_string(s)
        << '\n';
}

struct CatalogRow {
    CascadeId id;
    int depth = 1;
    std::string levels;
    std::string terminal;
    double accuracy = 0;
    double expected_time_s = 0;
    double throughput_fps = 0;
    Scenario scenario = Scenario::InferOnly;

    EvalPoint point(std::uint64_t ordinal = 0) const { return {id, accuracy, throughput_fps, depth, ordinal}; }
};

/// Streams catalog rows to fn(const CatalogRow&), validating each line.
template <typename Fn>
void read_catalog(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open catalog " + path.string());
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || trim(line) != kCatalogHeader) fail(path.string() + ":1: not a catalog file (bad header)");
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
        auto cells = split_view(trim(line), ',');
        if (cells.size() != 8) fail(where + "expected 8 columns");
        CatalogRow r;
        try {
            r.id = parse_cascade_id(cells[0]);
            r.scenario = parse_scenario(cells[7]);
        } catch (const Error& e) {
            fail(where + e.what());
        }
        if (!parse_int(cells[1], r.depth) || r.depth < 1 || r.depth > kMaxCascadeDepth) fail(where + "bad depth");
        r.levels = std::string(cells[2]);
        r.terminal = std::string(cells[3]);
        if (!parse_double(cells[4], r.accuracy) || !parse_double(cells[5], r.expected_time_s) ||
            !parse_double(cells[6], r.throughput_fps))
            fail(where + "malformed number");
        fn(r);
    }
}

inline void write_frontier(const ParetoFrontier& f, Scenario s, std::ostream& out) {
    out << kFrontierHeader << '\n';
    for (const auto& p : f.points)
        out << format_double(p.accuracy) << ',' << format_double(p.throughput_fps) << ',' << p.cascade_id.str() << ','
            << p.depth << ',' << to_string(s) << '\n';
}

inline void write_frontier(const ParetoFrontier& f, Scenario s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot write " + path.string());
    write_frontier(f, s, out);
}

struct FrontierFile {
    ParetoFrontier frontier;
    Scenario scenario = Scenario::InferOnly;
};

/// Reads a frontier CSV. The rows are re-reduced, so any point set in this
/// format is accepted.
inline FrontierFile read_frontier(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open frontier " + path.string());
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || trim(line) != kFrontierHeader)
        fail(path.string() + ":1: not a frontier file (bad header)");
    FrontierFile out;
    std::vector<EvalPoint> pts;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
        auto cells = split_view(trim(line), ',');
        if (cells.size() != 5) fail(where + "expected 5 columns");
        EvalPoint p;
        if (!parse_double(cells[0], p.accuracy) || !parse_double(cells[1], p.throughput_fps))
            fail(where + "malformed number");
        if (!parse_int(cells[3], p.depth)) fail(where + "bad depth");
        try {
            p.cascade_id = parse_cascade_id(cells[2]);
            out.scenario = parse_scenario(cells[4]);
        } catch (const Error& e) {
            fail(where + e.what());
        }
        pts.push_back(p);
    }
    require(!pts.empty(), path.string() + ": frontier has no rows");
    out.frontier = pareto_frontier(pts);
    return out;
}

}  // namespace cascadeopt
