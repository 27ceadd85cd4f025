#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qpmil/common.hpp"

namespace qpmil {

enum class QueryMode { kMax, kMean };

// Coordinate-wise max (or mean) over instance rows. Treated as a constant
// during backpropagation.
Eigen::VectorXd query_vector(const Eigen::MatrixXd& instances, QueryMode mode);

// 1 - <a,b>/(|a||b|), clamped to [0, 2]. Throws on near-zero norms.
double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Learnable (key, prompt) pair: the key is a query identifier in feature
// space, the prompt an embedding matrix describing one instance prototype.
struct PrototypePair {
    Eigen::VectorXd key;     // feature_dim
    Eigen::MatrixXd prompt;  // prompt_length x embed_dim
};

struct PoolConfig {
    int pool_size = 20;      // M
    int top_n = 5;           // N
    int prompt_length = 24;  // rows per prompt
    int embed_dim = 32;
    int feature_dim = 64;
    double key_init_scale = 0.3;
    double prompt_init_scale = 1.0;
};

class PrototypePool {
public:
    PrototypePool(const PoolConfig& config, uint64_t seed);

    const PoolConfig& config() const { return config_; }
    int size() const { return config_.pool_size; }
    int top_n() const { return config_.top_n; }

    std::vector<PrototypePair>& pairs() { return pairs_; }
    const std::vector<PrototypePair>& pairs() const { return pairs_; }

private:
    PoolConfig config_;
    std::vector<PrototypePair> pairs_;
};

// Matching-frequency tables, one per training phase (slot). Slots are
// 1-based positions in the training order; each slot remembers which
// canonical dataset it held.
class MatchStats {
public:
    explicit MatchStats(int pool_size) : pool_size_(pool_size) {}

    int pool_size() const { return pool_size_; }
    int slot_count() const { return static_cast<int>(tables_.size()); }

    void begin_slot(int slot, int dataset_index);
    void record(int slot, std::span<const int> indices);
    void finalize(int slot);

    bool has_slot(int slot) const;
    bool finalized(int slot) const;
    int dataset_index_of(int slot) const;
    const std::vector<long long>& counts(int slot) const;

    // The n most frequently matched keys of a slot, ties by lower index.
    std::vector<int> top_frequency_keys(int slot, int n) const;

private:
    struct Table {
        int dataset_index = 0;
        std::vector<long long> counts;
        bool finalized = false;
    };

    const Table& table(int slot) const;

    int pool_size_ = 0;
    std::vector<Table> tables_;
};

enum class PenaltyMode {
    // 1 + mean over prior slots of each key's relative matching frequency.
    kOffsetRelative,
    // Literal mean of raw frequency tables (comparison mode; yields zero
    // penalties for never-matched keys).
    kPaperRaw,
};

// Penalty table for the slot about to train. Slot 1 returns all ones; later
// slots require every earlier table to be finalized.
Eigen::VectorXd compute_penalty(const MatchStats& stats, int current_slot,
                                PenaltyMode mode = PenaltyMode::kOffsetRelative);

// Indices of the top_n keys minimizing penalized cosine distance to the
// query, ordered by ascending penalized distance, ties by lower index.
std::vector<int> match_top_n(const PrototypePool& pool, const Eigen::VectorXd& query,
                             const Eigen::VectorXd& penalty);

}  // namespace qpmil
