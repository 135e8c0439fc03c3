#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cascadeopt/calibration.hpp"
#include "cascadeopt/common.hpp"
#include "cascadeopt/models.hpp"
#include "cascadeopt/score_matrix.hpp"

namespace cascadeopt {

inline constexpr int kMaxCascadeDepth = 3;
inline constexpr double kTerminalCutoff = 0.5;

/// Per-image outcomes of every calibrated entry and terminal label of every
/// model on the evaluation split, stored as bitsets over images. Built once;
/// every cascade is then simulated from it without re-scoring.
class OutcomeTable {
public:
    using Word = std::uint64_t;

    OutcomeTable() = default;

    std::size_t image_count() const noexcept { return images_; }
    std::size_t word_count() const noexcept { return words_; }
    std::size_t model_count() const noexcept { return model_ids_.size(); }
    std::size_t entry_count() const noexcept { return entry_model_.size(); }

    const std::string& model_id(std::size_t m) const { return model_ids_[m]; }
    std::size_t entry_model(std::size_t e) const { return entry_model_[e]; }
    const ThresholdPair& entry_threshold(std::size_t e) const { return entry_threshold_[e]; }

    std::span<const Word> decided_pos(std::size_t e) const { return {decided_pos_.data() + e * words_, words_}; }
    std::span<const Word> decided_neg(std::size_t e) const { return {decided_neg_.data() + e * words_, words_}; }
    std::span<const Word> terminal_pos(std::size_t m) const { return {terminal_pos_.data() + m * words_, words_}; }
    /// All-ones over valid image bits.
    std::span<const Word> valid_mask() const { return {valid_.data(), words_}; }

    Decision outcome(std::size_t e, std::size_t image) const {
        if (bit(decided_pos(e), image)) return Decision::DecidedPos;
        if (bit(decided_neg(e), image)) return Decision::DecidedNeg;
        return Decision::Uncertain;
    }

    Label terminal_label(std::size_t m, std::size_t image) const {
        return bit(terminal_pos(m), image) ? Label::Positive : Label::Negative;
    }

    static bool bit(std::span<const Word> bits, std::size_t i) { return (bits[i / 64] >> (i % 64)) & 1u; }

private:
    friend OutcomeTable precompute_outcomes(const ScoreMatrix&, const std::vector<ModelSpec>&,
                                            const std::vector<CalibratedModel>&);

    std::size_t images_ = 0;
    std::size_t words_ = 0;
    std::vector<std::string> model_ids_;
    std::vector<std::size_t> entry_model_;
    std::vector<ThresholdPair> entry_threshold_;
    std::vector<Word> decided_pos_, decided_neg_, terminal_pos_, valid_;
};

/// Model rows follow `models`, entry rows follow `calibrated`.
inline OutcomeTable precompute_outcomes(const ScoreMatrix& eval_matrix, const std::vector<ModelSpec>& models,
                                        const std::vector<CalibratedModel>& calibrated) {
    require(eval_matrix.image_count() > 0, "outcome table: evaluation matrix has no images");
    OutcomeTable t;
    t.images_ = eval_matrix.image_count();
    t.words_ = (t.images_ + 63) / 64;
    std::unordered_map<std::string, std::size_t> model_index;
    std::vector<std::size_t> matrix_row(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
        t.model_ids_.push_back(models[m].model_id);
        require(model_index.emplace(models[m].model_id, m).second, "duplicate model id '" + models[m].model_id + "'");
        matrix_row[m] = eval_matrix.model_row(models[m].model_id);
    }
    for (const auto& c : calibrated) {
        auto it = model_index.find(c.model_id);
        if (it == model_index.end()) fail("calibrated entry refers to unknown model '" + c.model_id + "'");
        t.entry_model_.push_back(it->second);
        t.entry_threshold_.push_back(c.threshold);
    }

    t.valid_.assign(t.words_, ~OutcomeTable::Word{0});
    if (t.images_ % 64) t.valid_.back() = (OutcomeTable::Word{1} << (t.images_ % 64)) - 1;

    t.terminal_pos_.assign(models.size() * t.words_, 0);
    for (std::size_t m = 0; m < models.size(); ++m) {
        const double* row = eval_matrix.row(matrix_row[m]);
        for (std::size_t i = 0; i < t.images_; ++i)
            if (row[i] >= kTerminalCutoff) t.terminal_pos_[m * t.words_ + i / 64] |= OutcomeTable::Word{1} << (i % 64);
    }
    t.decided_pos_.assign(calibrated.size() * t.words_, 0);
    t.decided_neg_.assign(calibrated.size() * t.words_, 0);
    for (std::size_t e = 0; e < calibrated.size(); ++e) {
        const double* row = eval_matrix.row(matrix_row[t.entry_model_[e]]);
        for (std::size_t i = 0; i < t.images_; ++i) {
            const auto mask = OutcomeTable::Word{1} << (i % 64);
            switch (decide(row[i], t.entry_threshold_[e])) {
                case Decision::DecidedPos: t.decided_pos_[e * t.words_ + i / 64] |= mask; break;
                case Decision::DecidedNeg: t.decided_neg_[e * t.words_ + i / 64] |= mask; break;
                case Decision::Uncertain: break;
            }
        }
    }
    return t;
}

/// Up to two thresholded levels (indices into the calibrated-entry list) and a
/// terminal model (index into the model list) whose output is always accepted.
struct CascadeSpec {
    std::uint8_t level_count = 0;
    std::array<std::uint32_t, kMaxCascadeDepth - 1> levels{};
    std::uint32_t terminal = 0;

    int depth() const noexcept { return level_count + 1; }
    std::span<const std::uint32_t> level_entries() const noexcept { return {levels.data(), level_count}; }

    friend bool operator==(const CascadeSpec&, const CascadeSpec&) = default;
};

struct EnumerationOptions {
    int max_depth = 3;
    /// Cascades of this depth or deeper must end in an anchor model.
    int anchor_terminal_only_at_depth = 3;
    /// Permit the same model at more than one position.
    bool allow_repeats = false;
};

/// The cascade catalog as an index space. Cascades are produced on demand in a
/// fixed order (depth 1; then depth 2 by level entry; then depth 3 by first
/// level entry) and never materialized as a whole. Work is partitioned into
/// blocks: the depth-1 block, then one block per leading calibrated entry for
/// each deeper depth.
class CascadeSpace {
public:
    struct Block {
        int depth = 1;
        std::uint32_t lead = 0;
    };

    CascadeSpace(const std::vector<ModelSpec>& models, const std::vector<CalibratedModel>& calibrated,
                 EnumerationOptions options = {})
        : options_(options) {
        require(options.max_depth >= 1 && options.max_depth <= kMaxCascadeDepth,
                "cascade enumeration: max_depth must be 1, 2 or 3");
        require(options.anchor_terminal_only_at_depth >= 1, "cascade enumeration: anchor depth must be >= 1");
        require(!models.empty(), "cascade enumeration: no models");
        std::unordered_map<std::string, std::uint32_t> index;
        for (std::uint32_t m = 0; m < models.size(); ++m) {
            require(index.emplace(models[m].model_id, m).second, "duplicate model id '" + models[m].model_id + "'");
            model_ids_.push_back(models[m].model_id);
            model_key_.push_back(fnv1a64(models[m].model_id));
            if (models[m].is_anchor) anchors_.push_back(m);
            all_.push_back(m);
        }
        for (const auto& c : calibrated) {
            auto it = index.find(c.model_id);
            if (it == index.end()) fail("calibrated entry refers to unknown model '" + c.model_id + "'");
            entry_model_.push_back(it->second);
            entry_precision_.push_back(c.threshold.target_precision);
            entry_key_.push_back(hash_values(model_key_[it->second], std::bit_cast<std::uint64_t>(c.threshold.target_precision)));
        }
        for (int d = 1; d <= kMaxCascadeDepth; ++d) {
            auto& in = in_terminals_[static_cast<std::size_t>(d - 1)];
            in.assign(models.size(), 0);
            for (auto m : terminals(d)) in[m] = 1;
        }

        if (options_.max_depth >= 1) add_block({1, 0});
        if (options_.max_depth >= 2)
            for (std::uint32_t e = 0; e < entry_model_.size(); ++e) add_block({2, e});
        if (options_.max_depth >= 3)
            for (std::uint32_t e = 0; e < entry_model_.size(); ++e) add_block({3, e});
    }

    const EnumerationOptions& options() const noexcept { return options_; }
    std::uint64_t size() const noexcept { return block_start_.empty() ? 0 : block_start_.back() + block_size_.back(); }
    std::size_t block_count() const noexcept { return blocks_.size(); }
    const Block& block(std::size_t b) const { return blocks_[b]; }
    std::uint64_t block_start(std::size_t b) const { return block_start_[b]; }
    std::uint64_t block_size(std::size_t b) const { return block_size_[b]; }

    const std::string& model_id(std::size_t m) const { return model_ids_[m]; }
    std::size_t model_count() const noexcept { return model_ids_.size(); }
    std::size_t entry_count() const noexcept { return entry_model_.size(); }
    std::uint32_t entry_model(std::size_t e) const { return entry_model_[e]; }
    double entry_precision(std::size_t e) const { return entry_precision_[e]; }

    /// Calls fn(spec) for every cascade of block b, in catalog order.
    template <typename Fn>
    void for_each_in_block(std::size_t b, Fn&& fn) const {
        const Block blk = blocks_[b];
        CascadeSpec spec;
        if (blk.depth == 1) {
            for (auto t : terminals(1)) {
                spec.terminal = t;
                fn(spec);
            }
            return;
        }
        const std::uint32_t m1 = entry_model_[blk.lead];
        spec.levels[0] = blk.lead;
        if (blk.depth == 2) {
            spec.level_count = 1;
            for (auto t : terminals(2)) {
                if (!options_.allow_repeats && t == m1) continue;
                spec.terminal = t;
                fn(spec);
            }
            return;
        }
        spec.level_count = 2;
        for (std::uint32_t e2 = 0; e2 < entry_model_.size(); ++e2) {
            const std::uint32_t m2 = entry_model_[e2];
            if (!options_.allow_repeats && m2 == m1) continue;
            spec.levels[1] = e2;
            for (auto t : terminals(3)) {
                if (!options_.allow_repeats && (t == m1 || t == m2)) continue;
                spec.terminal = t;
                fn(spec);
            }
        }
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t b = 0; b < blocks_.size(); ++b) for_each_in_block(b, fn);
    }

    /// Cascade at a catalog position.
    CascadeSpec at(std::uint64_t ordinal) const {
        require(ordinal < size(), "cascade ordinal out of range");
        auto it = std::upper_bound(block_start_.begin(), block_start_.end(), ordinal);
        const auto b = static_cast<std::size_t>(it - block_start_.begin()) - 1;
        std::uint64_t skip = ordinal - block_start_[b];
        const Block blk = blocks_[b];
        CascadeSpec spec;
        auto nth_terminal = [&](int depth, std::uint32_t ex1, std::uint32_t ex2, std::uint64_t k) {
            for (auto t : terminals(depth)) {
                if (!options_.allow_repeats && (t == ex1 || t == ex2)) continue;
                if (k-- == 0) return t;
            }
            fail("cascade ordinal decode overflow");
        };
        constexpr auto none = ~std::uint32_t{0};
        if (blk.depth == 1) {
            spec.terminal = nth_terminal(1, none, none, skip);
            return spec;
        }
        const std::uint32_t m1 = entry_model_[blk.lead];
        spec.levels[0] = blk.lead;
        if (blk.depth == 2) {
            spec.level_count = 1;
            spec.terminal = nth_terminal(2, m1, none, skip);
            return spec;
        }
        spec.level_count = 2;
        for (std::uint32_t e2 = 0; e2 < entry_model_.size(); ++e2) {
            const std::uint32_t m2 = entry_model_[e2];
            if (!options_.allow_repeats && m2 == m1) continue;
            const std::uint64_t n = depth3_terminal_count(m1, m2);
            if (skip < n) {
                spec.levels[1] = e2;
                spec.terminal = nth_terminal(3, m1, m2, skip);
                return spec;
            }
            skip -= n;
        }
        fail("cascade ordinal decode overflow");
    }

    /// Stable identity derived from the member model ids and precision settings.
    CascadeId id(const CascadeSpec& spec) const {
        std::uint64_t h = mix64(static_cast<std::uint64_t>(spec.depth()));
        for (auto e : spec.level_entries()) h = hash_combine(h, entry_key_[e]);
        return {hash_combine(h, model_key_[spec.terminal])};
    }

    /// "model@precision;model@precision" for the thresholded levels.
    std::string describe_levels(const CascadeSpec& spec) const {
        std::string out;
        for (auto e : spec.level_entries()) {
            if (!out.empty()) out += ';';
            out += model_ids_[entry_model_[e]] + "@" + format_double(entry_precision_[e]);
        }
        return out;
    }

private:
    std::span<const std::uint32_t> terminals(int depth) const {
        return depth >= options_.anchor_terminal_only_at_depth ? std::span<const std::uint32_t>(anchors_)
                                                               : std::span<const std::uint32_t>(all_);
    }

    std::uint64_t depth3_terminal_count(std::uint32_t m1, std::uint32_t m2) const {
        const auto& in = in_terminals_[2];
        std::uint64_t n = terminals(3).size();
        if (!options_.allow_repeats) n -= in[m1] + (m2 != m1 ? in[m2] : 0u);
        return n;
    }

    void add_block(Block blk) {
        std::uint64_t n = 0;
        if (blk.depth == 1) {
            n = terminals(1).size();
        } else if (blk.depth == 2) {
            n = terminals(2).size();
            if (!options_.allow_repeats) n -= in_terminals_[1][entry_model_[blk.lead]];
        } else {
            const std::uint32_t m1 = entry_model_[blk.lead];
            for (std::uint32_t e2 = 0; e2 < entry_model_.size(); ++e2) {
                const std::uint32_t m2 = entry_model_[e2];
                if (!options_.allow_repeats && m2 == m1) continue;
                n += depth3_terminal_count(m1, m2);
            }
        }
        if (n == 0) return;
        block_start_.push_back(size());
        block_size_.push_back(n);
        blocks_.push_back(blk);
    }

    EnumerationOptions options_;
    std::vector<std::string> model_ids_;
    std::vector<std::uint64_t> model_key_;
    std::vector<std::uint32_t> anchors_, all_;
    std::vector<std::uint32_t> entry_model_;
    std::vector<double> entry_precision_;
    std::vector<std::uint64_t> entry_key_;
    std::array<std::vector<std::uint32_t>, kMaxCascadeDepth> in_terminals_;
    std::vector<Block> blocks_;
    std::vector<std::uint64_t> block_start_, block_size_;
};

inline CascadeSpace enumerate_cascades(const std::vector<CalibratedModel>& calibrated, const std::vector<ModelSpec>& models,
                                       int max_depth, int anchor_terminal_only_at_depth = 3) {
    return CascadeSpace(models, calibrated, {max_depth, anchor_terminal_only_at_depth, false});
}

inline void check_cascade(const CascadeSpec& cascade, const OutcomeTable& table) {
    require(cascade.level_count < kMaxCascadeDepth, "cascade has too many levels");
    for (auto e : cascade.level_entries())
        require(e < table.entry_count(), "cascade level refers to unknown calibrated entry " + std::to_string(e));
    require(cascade.terminal < table.model_count(),
            "cascade terminal refers to unknown model index " + std::to_string(cascade.terminal));
}

struct SimulationResult {
    std::vector<Label> predictions;
    /// Images reaching each level; the terminal is the last slot.
    std::vector<std::uint64_t> level_hit_counts;
};

/// Walks every image through the cascade: the first level with a confident
/// outcome labels it, otherwise the terminal model's 0.5-cutoff label is used.
inline SimulationResult simulate_cascade(const CascadeSpec& cascade, const OutcomeTable& table) {
    check_cascade(cascade, table);
    SimulationResult r;
    r.predictions.resize(table.image_count());
    r.level_hit_counts.assign(static_cast<std::size_t>(cascade.depth()), 0);
    for (std::size_t i = 0; i < table.image_count(); ++i) {
        bool decided = false;
        std::size_t level = 0;
        for (auto e : cascade.level_entries()) {
            ++r.level_hit_counts[level++];
            const auto o = table.outcome(e, i);
            if (o != Decision::Uncertain) {
                r.predictions[i] = o == Decision::DecidedPos ? Label::Positive : Label::Negative;
                decided = true;
                break;
            }
        }
        if (!decided) {
            ++r.level_hit_counts[level];
            r.predictions[i] = table.terminal_label(cascade.terminal, i);
        }
    }
    return r;
}

inline double cascade_accuracy(std::span<const Label> predictions, std::span<const Label> labels) {
    require(predictions.size() == labels.size(), "accuracy: prediction and label counts differ");
    require(!labels.empty(), "accuracy: empty evaluation set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace cascadeopt
