#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qmimo/codebook.hpp"
#include "qmimo/effective_channel.hpp"
#include "qmimo/model.hpp"

namespace qmimo {

struct DetectionResult {
    std::uint64_t index = 0;
    std::vector<int> messages;
    double score = 0.0;
    int tie_count = 1;
    bool degenerate = false;       // eMLD: every hypothesis at -inf
    std::uint64_t hypotheses = 0;  // metric evaluations performed
};

/// Per-hypothesis match/mismatch weights for the unified weighted decoder.
struct WeightSet {
    Eigen::MatrixXd alpha;  // m^K x N
    Eigen::MatrixXd beta;   // m^K x N
};

/// eMLD expressed as weights (base-2 logs): alpha = log2(1/(1-eps)),
/// beta = log2(1/eps). Exact decoder equivalence holds for p = 2.
WeightSet emld_weight_set(const ErrorProbs& eps);

/// Minimum Hamming distance decoding; ties broken by lowest index.
DetectionResult mdd(const LevelVector& r, const Codebook& cb);

/// Max-likelihood decoding over the effective parallel channels.
DetectionResult emld(const LevelVector& r, const TransitionTensor& tensor);

/// Weighted minimum distance decoding with zero match weights and
/// mismatch weights log2(1/eps).
DetectionResult wmdd(const LevelVector& r, const Codebook& cb, const ErrorProbs& eps);

DetectionResult unified_weighted_decode(const LevelVector& r, const Codebook& cb, const WeightSet& w);

/// Zero-forcing baseline: dequantize levels to representative analog
/// values, apply the pseudo-inverse, slice per-user to the constellation.
DetectionResult zf_detect(const LevelVector& r, const RealChannel& h, const QuantizerSpec& q,
                          const Constellation& c);

/// Splits users into groups of size k1 and K-k1 maximizing the smallest
/// principal angle between the column spaces of the two real submatrices.
/// Exhaustive for K <= 10, greedy pair swaps otherwise.
std::pair<std::vector<int>, std::vector<int>> partition_users(const RealChannel& h, int k1);

enum class InnerDetector { Mdd, Wmdd, Emld };

/// Two-stage SIC decoding: group A decoded against its own sub-codebook
/// (interference untreated), then group B against a conditional codebook
/// built with the stage-1 decision folded into the noiseless means.
DetectionResult sic_decode(const LevelVector& r, const RealChannel& h, const Constellation& c,
                           const QuantizerSpec& q,
                           const std::pair<std::vector<int>, std::vector<int>>& partition,
                           InnerDetector inner);

/// Columns of the real channel belonging to a user subset (Re block then Im block).
RealChannel user_submatrix(const RealChannel& h, const std::vector<int>& users);

}  // namespace qmimo
