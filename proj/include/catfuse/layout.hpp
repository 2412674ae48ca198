#pragma once
#include <catfuse/data.hpp>
#include <cstddef>
#include <vector>

namespace catfuse {

enum class PenaltyKind { Nominal, Ordinal };

// Difference beta_high - beta_low penalized by one weight.
struct LevelPair
{
    int high;
    int low;
    bool operator==(const LevelPair&) const = default;
};

/*
 * Penalized differences of one factor and where its coefficients sit in the
 * global parameter vector.
 *
 * Nominal: all pairs in the order (1,0),(2,0),...,(k,0),(2,1),(3,1),...,(k,k-1);
 *          block size (k+1)k/2; the first k entries are the dummy coefficients.
 * Ordinal: adjacent pairs (1,0),(2,1),...,(k,k-1); block size k (split coding).
 */
struct FactorBlock
{
    std::size_t factor = 0;
    PenaltyKind kind = PenaltyKind::Nominal;
    int k = 0;
    std::size_t offset = 0;
    std::vector<LevelPair> pairs;

    std::size_t size() const { return pairs.size(); }
    // position of pair (i,j), i>j, inside the block; -1 if not penalized
    int pair_position(int high, int low) const;
};

struct ThetaLayout
{
    std::vector<FactorBlock> blocks;

    std::size_t size() const;
    // number of restriction rows: sum over nominal blocks of (k-1)k/2
    std::size_t restriction_count() const;
};

ThetaLayout make_layout(const std::vector<FactorSchema>& schemas);

} // namespace catfuse
