#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmimo/codebook.hpp"
#include "qmimo/effective_channel.hpp"
#include "qmimo/model.hpp"

namespace qmimo {

inline constexpr double kDefaultErrorFloor = 1e-3;
inline constexpr int kDefaultExplicitT = 25;

struct TrainingOutput {
    enum class Mode { Implicit, Explicit };

    Codebook codebook_hat;
    ErrorProbs eps_hat;
    std::uint64_t overhead = 0;  // slots
    Mode mode = Mode::Implicit;
};

/// Most frequent level; ties broken by lowest level index.
int majority_estimate(std::span<const std::uint8_t> obs);

/// Empirical mismatch rate against the estimated codeword symbol, floored.
double estimate_error_probs(std::uint8_t c_hat, std::span<const std::uint8_t> obs,
                            double floor = kDefaultErrorFloor);

/// Mirrors training observations of the first m^K/2 codeword indices onto
/// the rest via level reversal (negated transmit vector = reversed levels).
/// Requires a symmetric quantizer; the caller must use a constellation whose
/// labeling pairs negated points as b <-> m-1-b.
std::vector<LevelMatrix> symmetry_extend(const std::vector<LevelMatrix>& half, const QuantizerSpec& q);

TrainingOutput implicit_train(const RealChannel& h, const Constellation& c, const QuantizerSpec& q,
                              int t_slots, bool use_symmetry, Rng& rng,
                              double floor = kDefaultErrorFloor, double noise_sigma = kNoiseSigma);

/// Same estimation pipeline, but observations are generated at the receiver
/// from a channel estimate; only the pilot phase costs air time.
TrainingOutput explicit_train(const RealChannel& h_hat, const Constellation& c, const QuantizerSpec& q,
                              int t_slots, Rng& rng, std::uint64_t pilot_slots,
                              double floor = kDefaultErrorFloor, double noise_sigma = kNoiseSigma);

/// H + sigma_e * E with IID standard Gaussian E; estimator stand-in that
/// isolates training behavior from estimator quality.
RealChannel estimate_channel_genie(const RealChannel& h, double sigma_e, Rng& rng);

/// Orthogonal complex pilot matrix (K x t_pilot), per-slot power = snr.
Eigen::MatrixXcd dft_pilots(int k_users, int t_pilot, double snr);

struct PilotObservations {
    LevelMatrix re;  // Nr x t_pilot quantized real parts
    LevelMatrix im;
    Eigen::MatrixXcd pilots;
};

PilotObservations observe_pilots(const ComplexChannel& h, const Eigen::MatrixXcd& pilots,
                                 const QuantizerSpec& q, Rng& rng, double noise_sigma = kNoiseSigma);

/// Plain least squares, Y ~ H X; exact when Y = H X and X has full row rank.
ComplexChannel ls_estimate(const Eigen::MatrixXcd& y, const Eigen::MatrixXcd& pilots);

/// LS on dequantized pilot observations, then per-column rescaling to the
/// Rayleigh norm sqrt(Nr) (quantized observations lose amplitude).
ComplexChannel scaled_ls_estimate(const PilotObservations& po, const QuantizerSpec& q,
                                  bool rescale_columns = true);

}  // namespace qmimo
