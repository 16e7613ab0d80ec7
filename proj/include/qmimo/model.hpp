#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "qmimo/rng.hpp"

namespace qmimo {

/// Each real noise component of a CN(0,1) complex sample has variance 1/2.
inline constexpr double kNoiseSigma = 0.70710678118654752440;

using ComplexChannel = Eigen::MatrixXcd;  // Nr x K
using RealChannel = Eigen::MatrixXd;      // N x 2K, N = 2*Nr
using LevelVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;
using LevelMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// m-ary symbol set with the average-power budget folded into the points:
/// (1/m) * sum |s_i|^2 == snr.
struct Constellation {
    Eigen::VectorXcd points;
    int order = 0;     // m
    double snr = 1.0;  // linear power budget

    static Constellation bpsk(double snr);
    static Constellation qpsk(double snr);
    static Constellation qam16(double snr);
    static Constellation from_name(const std::string& name, double snr);

    int bits_per_symbol() const;

    /// True when the digit labeling pairs negated points as b <-> m-1-b,
    /// which the training symmetry shortcut relies on. Holds for the
    /// built-in BPSK/QPSK labelings but not for per-axis Gray 16-QAM.
    bool negation_symmetric_labeling() const;
};

/// Stair quantizer: output level l for u in [thresholds[l], thresholds[l-1]),
/// with implicit +inf above and -inf below. Thresholds strictly decreasing.
struct QuantizerSpec {
    Eigen::VectorXd thresholds;  // p-1 finite interior thresholds, descending

    int levels() const { return static_cast<int>(thresholds.size()) + 1; }
    bool symmetric() const;
};

QuantizerSpec one_bit_spec();
QuantizerSpec two_bit_spec(double snr);

std::uint64_t messages_to_index(const std::vector<int>& w, int m);
std::vector<int> index_to_messages(std::uint64_t index, int m, int k_users);

Eigen::VectorXcd modulate(const std::vector<int>& w, const Constellation& c);

/// [Re(x); Im(x)] stacking of a complex vector.
Eigen::VectorXd real_input_vector(const Eigen::VectorXcd& x);

/// [[Re H, -Im H], [Im H, Re H]] block expansion; commutes with
/// real_input_vector under matrix-vector multiplication.
RealChannel to_real_channel(const ComplexChannel& h);

/// IID CN(0,1) entries.
ComplexChannel sample_rayleigh(int n_rx, int k_users, Rng& rng);

int quantize(double u, const QuantizerSpec& q);

/// Representative analog value for a quantizer bin: midpoint for interior
/// bins, nearest threshold +/- kNoiseSigma for the two unbounded bins.
double dequantize_level(int level, const QuantizerSpec& q);

/// One noisy quantized observation r = phi_p(Hx + z), z_i ~ N(0, sigma^2).
LevelVector observe(const RealChannel& h, const Eigen::VectorXd& x, const QuantizerSpec& q,
                    Rng& rng, double noise_sigma = kNoiseSigma);

}  // namespace qmimo
