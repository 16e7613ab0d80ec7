#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "qmimo/model.hpp"

namespace qmimo {

/// The channel-dependent code: one p-ary length-N codeword per joint
/// message index, c_l[i] = quantize(h_i . x(g(l))).
class Codebook {
public:
    Codebook() = default;
    Codebook(LevelMatrix codewords, int levels, int order, int users);

    const LevelMatrix& codewords() const { return codewords_; }
    Eigen::Index size() const { return codewords_.rows(); }      // m^K
    Eigen::Index length() const { return codewords_.cols(); }    // N
    int levels() const { return levels_; }
    int order() const { return order_; }
    int users() const { return users_; }

    /// Exhaustive pairwise minimum Hamming distance; computed on first use
    /// and cached. Zero marks an ambiguous channel (duplicate codewords).
    int min_distance() const;
    bool ambiguous() const { return min_distance() == 0; }

private:
    LevelMatrix codewords_;
    int levels_ = 2;
    int order_ = 2;
    int users_ = 1;
    mutable std::optional<int> d_min_;
};

/// Codebooks above this many codewords are rejected; use SIC partitioning.
inline constexpr std::uint64_t kMaxCodebookSize = 1ULL << 24;

Codebook build_codebook(const RealChannel& h, const Constellation& c, const QuantizerSpec& q);

/// Codebook with a fixed additive term in the noiseless means, used by the
/// SIC stage-2 conditional construction.
Codebook build_codebook(const RealChannel& h, const Constellation& c, const QuantizerSpec& q,
                        const Eigen::VectorXd& offset);

int min_distance(const Codebook& cb);

int hamming_distance(const LevelVector& x, const LevelVector& y);

double weighted_hamming_distance(const LevelVector& x, const LevelVector& y,
                                 const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta);

/// floor((d_min - 1) / 2)
int error_correction_capability(int d_min);

}  // namespace qmimo
