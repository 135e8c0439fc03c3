#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cascadeopt/cascade.hpp"
#include "cascadeopt/costs.hpp"
#include "cascadeopt/pareto.hpp"
#include "cascadeopt/parallel.hpp"

namespace cascadeopt {

struct CascadeEvaluation {
    double accuracy = 0.0;
    std::uint8_t level_count = 0;
    /// hits[l] = images reaching level l; the terminal is slot level_count.
    std::array<std::uint64_t, kMaxCascadeDepth> hits{};
    std::array<ClassifyTime, kAllScenarios.size()> time{};

    const ClassifyTime& in(Scenario s) const { return time[static_cast<std::size_t>(s)]; }
    double throughput(Scenario s) const { return 1.0 / in(s).expected_time_s; }
};

/// Evaluates cascades against a shared outcome table with word-parallel
/// bitset walks. Since the images reaching level l are a subset of those
/// reaching every earlier level, whether a representation is new at level l
/// is the same for every image, so expected time follows from hit counts:
/// sum over levels of hits[l] * charge(l) / n.
class CatalogEvaluator {
public:
    CatalogEvaluator(const OutcomeTable& table, std::span<const Label> labels, const std::vector<ModelSpec>& models,
                     const CostProfile& profile)
        : table_(table), words_(table.word_count()), n_(static_cast<double>(table.image_count())) {
        require(labels.size() == table.image_count(), "evaluator: label count does not match evaluation images");
        require(models.size() == table.model_count(), "evaluator: model list does not match outcome table");
        validate_profile(profile);
        labels_.assign(words_, 0);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (is_positive(labels[i])) labels_[i / 64] |= OutcomeTable::Word{1} << (i % 64);

        std::map<std::string, std::uint32_t> key_index;
        for (std::size_t m = 0; m < models.size(); ++m) {
            require(models[m].model_id == table.model_id(m), "evaluator: model order differs from outcome table");
            const auto key = representation_key(models[m].transform).value;
            auto [it, inserted] = key_index.emplace(key, static_cast<std::uint32_t>(repr_transform_.size()));
            if (inserted) {
                repr_transform_.push_back(detail::lookup_cost(profile.transform_s, key, "transform_s"));
                repr_load_.push_back(detail::lookup_cost(profile.load_repr_s, key, "load_repr_s"));
            }
            model_repr_.push_back(it->second);
            model_infer_.push_back(detail::lookup_cost(profile.infer_s, models[m].model_id, "infer_s"));
        }
        load_full_ = profile.load_full_s;
    }

    std::size_t image_count() const noexcept { return table_.image_count(); }

    CascadeEvaluation evaluate(const CascadeSpec& c) const {
        CascadeEvaluation r;
        r.level_count = c.level_count;
        const std::size_t L = c.level_count;
        std::array<const OutcomeTable::Word*, kMaxCascadeDepth - 1> dpos{}, dneg{};
        for (std::size_t l = 0; l < L; ++l) {
            dpos[l] = table_.decided_pos(c.levels[l]).data();
            dneg[l] = table_.decided_neg(c.levels[l]).data();
        }
        const auto* tpos = table_.terminal_pos(c.terminal).data();
        const auto* valid = table_.valid_mask().data();
        const auto* lab = labels_.data();

        std::uint64_t correct = 0;
        std::array<std::uint64_t, kMaxCascadeDepth> hits{};
        for (std::size_t w = 0; w < words_; ++w) {
            auto reach = valid[w];
            const auto y = lab[w];
            for (std::size_t l = 0; l < L; ++l) {
                hits[l] += static_cast<std::uint64_t>(std::popcount(reach));
                const auto p = reach & dpos[l][w];
                const auto q = reach & dneg[l][w];
                correct += static_cast<std::uint64_t>(std::popcount(p & y) + std::popcount(q & ~y));
                reach &= ~(p | q);
            }
            hits[L] += static_cast<std::uint64_t>(std::popcount(reach));
            const auto t = tpos[w];
            correct += static_cast<std::uint64_t>(std::popcount(reach & t & y) + std::popcount(reach & ~t & ~y));
        }
        r.hits = hits;
        r.accuracy = static_cast<double>(correct) / n_;

        // per-level models and whether each level's representation is new
        std::array<std::uint32_t, kMaxCascadeDepth> level_model{};
        std::array<bool, kMaxCascadeDepth> first_use{};
        for (std::size_t l = 0; l < L; ++l) level_model[l] = static_cast<std::uint32_t>(table_.entry_model(c.levels[l]));
        level_model[L] = c.terminal;
        for (std::size_t l = 0; l <= L; ++l) {
            first_use[l] = true;
            for (std::size_t k = 0; k < l; ++k)
                if (model_repr_[level_model[k]] == model_repr_[level_model[l]]) first_use[l] = false;
        }

        double infer = 0, transform = 0, load_repr = 0;
        for (std::size_t l = 0; l <= L; ++l) {
            const double h = static_cast<double>(hits[l]);
            infer += h * model_infer_[level_model[l]];
            if (first_use[l]) {
                transform += h * repr_transform_[model_repr_[level_model[l]]];
                load_repr += h * repr_load_[model_repr_[level_model[l]]];
            }
        }
        infer /= n_;
        transform /= n_;
        load_repr /= n_;
        auto set = [&](Scenario s, double load, double xform) {
            auto& t = r.time[static_cast<std::size_t>(s)];
            t.breakdown = {load, xform, infer, load + xform + infer};
            t.expected_time_s = t.breakdown.total_s;
        };
        set(Scenario::InferOnly, 0.0, 0.0);
        set(Scenario::Archive, load_full_, transform);  // every image reaches level 0
        set(Scenario::Ongoing, load_repr, 0.0);
        set(Scenario::Camera, 0.0, transform);
        return r;
    }

private:
    const OutcomeTable& table_;
    std::size_t words_;
    double n_;
    std::vector<OutcomeTable::Word> labels_;
    std::vector<std::uint32_t> model_repr_;
    std::vector<double> model_infer_, repr_transform_, repr_load_;
    double load_full_ = 0.0;
};

struct CatalogRecord {
    std::uint64_t ordinal = 0;
    CascadeSpec spec;
    CascadeId id;
    CascadeEvaluation eval;
};

/// Evaluates the whole space and hands records to sink(const CatalogRecord&)
/// in catalog order. Blocks are evaluated in parallel windows of bounded size.
template <typename Sink>
void evaluate_catalog(const CascadeSpace& space, const CatalogEvaluator& evaluator, Sink&& sink,
                      unsigned threads = worker_count()) {
    constexpr std::uint64_t kWindowRecords = std::uint64_t{1} << 18;
    std::size_t b = 0;
    while (b < space.block_count()) {
        std::size_t end = b;
        std::uint64_t records = 0;
        while (end < space.block_count() && (end == b || records + space.block_size(end) <= kWindowRecords) &&
               end - b < std::max<std::size_t>(4 * threads, 16)) {
            records += space.block_size(end);
            ++end;
        }
        std::vector<std::vector<CatalogRecord>> out(end - b);
        parallel_for(
            end - b,
            [&](std::size_t k) {
                const std::size_t blk = b + k;
                auto& v = out[k];
                v.reserve(space.block_size(blk));
                std::uint64_t ordinal = space.block_start(blk);
                space.for_each_in_block(blk, [&](const CascadeSpec& spec) {
                    v.push_back({ordinal++, spec, space.id(spec), evaluator.evaluate(spec)});
                });
            },
            threads);
        for (const auto& v : out)
            for (const auto& rec : v) sink(rec);
        b = end;
    }
}

inline EvalPoint to_eval_point(const CatalogRecord& r, Scenario s) {
    return {r.id, r.eval.accuracy, r.eval.throughput(s), r.eval.level_count + 1, r.ordinal};
}

/// Frontier per scenario plus the accuracy span of the whole catalog.
struct CatalogSummary {
    std::uint64_t cascade_count = 0;
    double min_accuracy = 1.0;
    double max_accuracy = 0.0;
    std::array<ParetoFrontier, kAllScenarios.size()> frontier;

    const ParetoFrontier& in(Scenario s) const { return frontier[static_cast<std::size_t>(s)]; }
};

/// Reduces the catalog to per-scenario frontiers without storing it: each block
/// is reduced to its own frontier and the block frontiers are merged, which is
/// exact because a point dominated within a block is dominated overall.
inline CatalogSummary summarize_catalog(const CascadeSpace& space, const CatalogEvaluator& evaluator,
                                        unsigned threads = worker_count()) {
    require(space.size() > 0, "summarize_catalog: empty cascade space");
    constexpr std::size_t S = kAllScenarios.size();
    struct Partial {
        std::array<ParetoFrontier, S> frontier;
        double lo = 1.0, hi = 0.0;
    };
    std::vector<Partial> parts(space.block_count());
    parallel_for(
        space.block_count(),
        [&](std::size_t blk) {
            std::array<std::vector<EvalPoint>, S> pts;
            auto& part = parts[blk];
            std::uint64_t ordinal = space.block_start(blk);
            space.for_each_in_block(blk, [&](const CascadeSpec& spec) {
                CatalogRecord rec{ordinal++, spec, space.id(spec), evaluator.evaluate(spec)};
                part.lo = std::min(part.lo, rec.eval.accuracy);
                part.hi = std::max(part.hi, rec.eval.accuracy);
                for (std::size_t s = 0; s < S; ++s) pts[s].push_back(to_eval_point(rec, kAllScenarios[s]));
            });
            for (std::size_t s = 0; s < S; ++s) part.frontier[s] = pareto_frontier(pts[s]);
        },
        threads);

    CatalogSummary out;
    out.cascade_count = space.size();
    for (std::size_t s = 0; s < S; ++s) {
        std::vector<ParetoFrontier> fs;
        fs.reserve(parts.size());
        for (auto& p : parts) fs.push_back(std::move(p.frontier[s]));
        out.frontier[s] = merge_frontiers(fs);
    }
    for (const auto& p : parts) {
        out.min_accuracy = std::min(out.min_accuracy, p.lo);
        out.max_accuracy = std::max(out.max_accuracy, p.hi);
    }
    return out;
}

}  // namespace cascadeopt
