#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cascadeopt/common.hpp"

namespace cascadeopt {

struct EvalPoint {
    CascadeId cascade_id;
    double accuracy = 0.0;
    double throughput_fps = 0.0;
    int depth = 1;
    /// Catalog position of the cascade, for re-costing a chosen point.
    std::uint64_t ordinal = 0;

    friend bool operator==(const EvalPoint&, const EvalPoint&) = default;
};

inline void validate(const EvalPoint& p) {
    require(std::isfinite(p.accuracy) && p.accuracy >= 0.0 && p.accuracy <= 1.0,
            "cascade " + p.cascade_id.str() + ": accuracy outside [0,1]");
    require(std::isfinite(p.throughput_fps) && p.throughput_fps > 0.0,
            "cascade " + p.cascade_id.str() + ": throughput must be finite and positive");
}

/// a dominates b: at least as good on both axes and strictly better on one.
inline bool dominates(const EvalPoint& a, const EvalPoint& b) noexcept {
    return a.accuracy >= b.accuracy && a.throughput_fps >= b.throughput_fps &&
           (a.accuracy > b.accuracy || a.throughput_fps > b.throughput_fps);
}

/// Non-dominated points, accuracy strictly decreasing and throughput strictly
/// increasing along `points`.
struct ParetoFrontier {
    std::vector<EvalPoint> points;

    const EvalPoint& most_accurate() const { return points.front(); }
    const EvalPoint& fastest() const { return points.back(); }
    double max_accuracy() const { return points.front().accuracy; }
    double max_throughput() const { return points.back().throughput_fps; }
};

/// Staircase sweep: sort by throughput descending (accuracy descending, then
/// cascade id ascending on ties) and keep each point that raises the best
/// accuracy seen so far. O(n log n).
inline ParetoFrontier pareto_frontier(std::span<const EvalPoint> points) {
    require(!points.empty(), "pareto_frontier: empty point set");
    std::vector<EvalPoint> sorted(points.begin(), points.end());
    for (const auto& p : sorted) validate(p);
    std::sort(sorted.begin(), sorted.end(), [](const EvalPoint& a, const EvalPoint& b) {
        if (a.throughput_fps != b.throughput_fps) return a.throughput_fps > b.throughput_fps;
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.cascade_id < b.cascade_id;
    });
    ParetoFrontier f;
    double best = -1.0;
    for (const auto& p : sorted) {
        if (p.accuracy > best) {
            f.points.push_back(p);
            best = p.accuracy;
        }
    }
    std::reverse(f.points.begin(), f.points.end());
    return f;
}

/// Frontier of the union of several frontiers (or point sets).
inline ParetoFrontier merge_frontiers(std::span<const ParetoFrontier> parts) {
    std::vector<EvalPoint> all;
    for (const auto& f : parts) all.insert(all.end(), f.points.begin(), f.points.end());
    return pareto_frontier(all);
}

/// Builds a frontier from a stream of points in bounded memory by reducing
/// the buffer whenever it fills.
class FrontierAccumulator {
public:
    explicit FrontierAccumulator(std::size_t buffer_limit = std::size_t{1} << 20) : limit_(buffer_limit) {}

    void add(const EvalPoint& p) {
        buf_.push_back(p);
        if (buf_.size() >= limit_) reduce();
    }
    bool empty() const noexcept { return buf_.empty(); }
    ParetoFrontier finish() {
        reduce();
        return pareto_frontier(buf_);
    }

private:
    void reduce() {
        if (buf_.empty()) return;
        auto f = pareto_frontier(buf_);
        buf_ = std::move(f.points);
    }
    std::size_t limit_;
    std::vector<EvalPoint> buf_;
};

/// What T(a) is above the frontier's highest accuracy.
enum class AboveMaxAccuracy {
    Error,  // T is undefined there
    Zero,   // no cascade reaches that accuracy, so it contributes nothing
};

/// Area left of the frontier's step curve: the integral over [a_lo, a_hi] of
/// T(a) = max throughput among points with accuracy >= a.
inline double alc(const ParetoFrontier& f, double a_lo, double a_hi, AboveMaxAccuracy above = AboveMaxAccuracy::Error) {
    require(!f.points.empty(), "alc: empty frontier");
    require(std::isfinite(a_lo) && std::isfinite(a_hi) && a_lo < a_hi, "alc: need a_lo < a_hi");
    if (above == AboveMaxAccuracy::Error)
        require(a_hi <= f.max_accuracy(), "alc: a_hi " + format_double(a_hi) + " above the frontier's maximum accuracy " +
                                              format_double(f.max_accuracy()));
    double area = 0.0;
    const auto& pts = f.points;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        // T(a) = pts[k].throughput on (acc[k+1], acc[k]]
        const double top = std::min(pts[k].accuracy, a_hi);
        const double bottom = k + 1 < pts.size() ? std::max(pts[k + 1].accuracy, a_lo) : a_lo;
        if (top > bottom) area += pts[k].throughput_fps * (top - bottom);
    }
    return area;
}

inline double average_throughput(const ParetoFrontier& f, double a_lo, double a_hi,
                                 AboveMaxAccuracy above = AboveMaxAccuracy::Error) {
    return alc(f, a_lo, a_hi, above) / (a_hi - a_lo);
}

/// [lowest, highest] accuracy among the given points.
inline std::pair<double, double> accuracy_span(const ParetoFrontier& f) {
    require(!f.points.empty(), "accuracy_span: empty frontier");
    return {f.points.back().accuracy, f.points.front().accuracy};
}

/// ALC(a) / ALC(b) over the given range, or by default over the intersection
/// of both accuracy spans. Inputs need not be strict frontiers.
inline double speedup(std::span<const EvalPoint> a, std::span<const EvalPoint> b,
                      std::optional<std::pair<double, double>> range = std::nullopt) {
    const auto fa = pareto_frontier(a);
    const auto fb = pareto_frontier(b);
    if (!range) {
        auto [lo_a, hi_a] = accuracy_span(fa);
        auto [lo_b, hi_b] = accuracy_span(fb);
        range = {std::max(lo_a, lo_b), std::min(hi_a, hi_b)};
    }
    require(range->first < range->second, "speedup: the two point sets share no accuracy range");
    return alc(fa, range->first, range->second) / alc(fb, range->first, range->second);
}

inline double speedup(const ParetoFrontier& a, const ParetoFrontier& b,
                      std::optional<std::pair<double, double>> range = std::nullopt) {
    return speedup(std::span<const EvalPoint>(a.points), std::span<const EvalPoint>(b.points), range);
}

/// Relative loss bounds against the frontier's best accuracy / throughput.
struct SelectionConstraint {
    std::optional<double> max_accuracy_loss;
    std::optional<double> max_throughput_loss;
};

/// Constraint-driven choice of a frontier point. With only an accuracy bound
/// the least accurate qualifying point is returned (the fastest, given the
/// frontier's ordering); with only a throughput bound the slowest qualifying
/// point (the most accurate); with both, the fastest point meeting both floors.
inline EvalPoint select(const ParetoFrontier& f, const SelectionConstraint& c) {
    require(!f.points.empty(), "select: empty frontier");
    require(c.max_accuracy_loss || c.max_throughput_loss, "select: need an accuracy or throughput bound");
    for (auto bound : {c.max_accuracy_loss, c.max_throughput_loss})
        if (bound) require(*bound >= 0.0 && *bound <= 1.0, "select: loss bounds must lie in [0,1]");

    const double acc_floor = c.max_accuracy_loss ? (1.0 - *c.max_accuracy_loss) * f.max_accuracy() : 0.0;
    const double thr_floor = c.max_throughput_loss ? (1.0 - *c.max_throughput_loss) * f.max_throughput() : 0.0;
    const EvalPoint* best = nullptr;
    for (const auto& p : f.points) {
        if (p.accuracy < acc_floor || p.throughput_fps < thr_floor) continue;
        if (c.max_accuracy_loss && !c.max_throughput_loss) {
            if (!best || p.accuracy < best->accuracy) best = &p;
        } else if (!c.max_accuracy_loss) {
            if (!best || p.throughput_fps < best->throughput_fps) best = &p;
        } else {
            if (!best || p.throughput_fps > best->throughput_fps) best = &p;
        }
    }
    if (!best)
        fail_infeasible("no frontier cascade meets accuracy floor " + format_double(acc_floor) + " and throughput floor " +
                        format_double(thr_floor));
    return *best;
}

/// The least accurate frontier point whose accuracy is at least the reference.
inline EvalPoint select_vs_reference(const ParetoFrontier& f, double reference_accuracy) {
    require(!f.points.empty(), "select_vs_reference: empty frontier");
    const EvalPoint* best = nullptr;
    for (const auto& p : f.points)
        if (p.accuracy >= reference_accuracy && (!best || p.accuracy < best->accuracy)) best = &p;
    if (!best)
        fail_infeasible("no frontier cascade reaches reference accuracy " + format_double(reference_accuracy) +
                        " (maximum " + format_double(f.max_accuracy()) + ")");
    return *best;
}

}  // namespace cascadeopt
