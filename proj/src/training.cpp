#include "qmimo/training.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qmimo {

namespace {

// Shared estimation pipeline: observations[l] is an N x T level matrix.
TrainingOutput estimate_from_observations(const std::vector<LevelMatrix>& obs, const Constellation& c,
                                          const QuantizerSpec& q, int k_users, double floor,
                                          TrainingOutput::Mode mode, std::uint64_t overhead) {
    const Eigen::Index count = static_cast<Eigen::Index>(obs.size());
    const Eigen::Index n = obs.front().rows();
    const Eigen::Index t = obs.front().cols();

    LevelMatrix codewords(count, n);
    Eigen::MatrixXd eps(count, n);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(t));
    for (Eigen::Index l = 0; l < count; ++l) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index s = 0; s < t; ++s) row[static_cast<std::size_t>(s)] = obs[static_cast<std::size_t>(l)](i, s);
            const int c_hat = majority_estimate(row);
            codewords(l, i) = static_cast<std::uint8_t>(c_hat);
            eps(l, i) = estimate_error_probs(static_cast<std::uint8_t>(c_hat), row, floor);
        }
    }

    TrainingOutput out;
    out.codebook_hat = Codebook(std::move(codewords), q.levels(), c.order, k_users);
    out.eps_hat = ErrorProbs::from_eps(eps, floor);
    out.overhead = overhead;
    out.mode = mode;
    return out;
}

std::vector<LevelMatrix> simulate_training_observations(const RealChannel& h, const Constellation& c,
                                                        const QuantizerSpec& q, int t_slots,
                                                        std::uint64_t first, std::uint64_t last,
                                                        Rng& rng, double noise_sigma) {
    std::vector<LevelMatrix> obs;
    obs.reserve(last - first);
    const int k_users = static_cast<int>(h.cols()) / 2;
    for (std::uint64_t l = first; l < last; ++l) {
        const Eigen::VectorXd x = real_input_vector(modulate(index_to_messages(l, c.order, k_users), c));
        LevelMatrix block(h.rows(), t_slots);
        for (int s = 0; s < t_slots; ++s) block.col(s) = observe(h, x, q, rng, noise_sigma);
        obs.push_back(std::move(block));
    }
    return obs;
}

}  // namespace

int majority_estimate(std::span<const std::uint8_t> obs) {
    if (obs.empty()) throw std::domain_error("majority_estimate: empty observation list");
    int counts[256] = {0};
    int max_level = 0;
    for (std::uint8_t v : obs) {
        ++counts[v];
        if (v > max_level) max_level = v;
    }
    int best = 0;
    for (int b = 1; b <= max_level; ++b) {
        if (counts[b] > counts[best]) best = b;
    }
    return best;
}

double estimate_error_probs(std::uint8_t c_hat, std::span<const std::uint8_t> obs, double floor) {
    if (obs.empty()) throw std::domain_error("estimate_error_probs: empty observation list");
    int mismatches = 0;
    for (std::uint8_t v : obs) mismatches += v != c_hat;
    const double raw = static_cast<double>(mismatches) / static_cast<double>(obs.size());
    return std::max(raw, floor);
}

std::vector<LevelMatrix> symmetry_extend(const std::vector<LevelMatrix>& half, const QuantizerSpec& q) {
    if (!q.symmetric()) throw std::invalid_argument("symmetry_extend: asymmetric quantizer");
    const std::size_t m_half = half.size();
    const int p = q.levels();
    std::vector<LevelMatrix> full(2 * m_half);
    for (std::size_t l = 0; l < m_half; ++l) {
        full[l] = half[l];
        LevelMatrix mirror = half[l];
        for (Eigen::Index i = 0; i < mirror.rows(); ++i) {
            for (Eigen::Index t = 0; t < mirror.cols(); ++t) {
                mirror(i, t) = static_cast<std::uint8_t>(p - 1 - mirror(i, t));
            }
        }
        full[2 * m_half - l - 1] = std::move(mirror);
    }
    return full;
}

TrainingOutput implicit_train(const RealChannel& h, const Constellation& c, const QuantizerSpec& q,
                              int t_slots, bool use_symmetry, Rng& rng, double floor,
                              double noise_sigma) {
    if (t_slots < 1) throw std::invalid_argument("implicit_train: T must be >= 1");
    const int k_users = static_cast<int>(h.cols()) / 2;
    std::uint64_t count = 1;
    for (int k = 0; k < k_users; ++k) count *= static_cast<std::uint64_t>(c.order);

    std::vector<LevelMatrix> obs;
    std::uint64_t overhead;
    if (use_symmetry) {
        if (!c.negation_symmetric_labeling())
            throw std::invalid_argument("implicit_train: constellation labeling not negation-symmetric");
        obs = simulate_training_observations(h, c, q, t_slots, 0, count / 2, rng, noise_sigma);
        obs = symmetry_extend(obs, q);
        overhead = static_cast<std::uint64_t>(t_slots) * count / 2;
    } else {
        obs = simulate_training_observations(h, c, q, t_slots, 0, count, rng, noise_sigma);
        overhead = static_cast<std::uint64_t>(t_slots) * count;
    }
    return estimate_from_observations(obs, c, q, k_users, floor, TrainingOutput::Mode::Implicit, overhead);
}

TrainingOutput explicit_train(const RealChannel& h_hat, const Constellation& c, const QuantizerSpec& q,
                              int t_slots, Rng& rng, std::uint64_t pilot_slots, double floor,
                              double noise_sigma) {
    if (t_slots < 1) throw std::invalid_argument("explicit_train: T must be >= 1");
    const int k_users = static_cast<int>(h_hat.cols()) / 2;
    std::uint64_t count = 1;
    for (int k = 0; k < k_users; ++k) count *= static_cast<std::uint64_t>(c.order);

    const std::vector<LevelMatrix> obs =
        simulate_training_observations(h_hat, c, q, t_slots, 0, count, rng, noise_sigma);
    return estimate_from_observations(obs, c, q, k_users, floor, TrainingOutput::Mode::Explicit,
                                      pilot_slots);
}

RealChannel estimate_channel_genie(const RealChannel& h, double sigma_e, Rng& rng) {
    if (sigma_e < 0.0) throw std::invalid_argument("sigma_e must be non-negative");
    std::normal_distribution<double> normal(0.0, 1.0);
    RealChannel out = h;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += sigma_e * normal(rng);
    }
    return out;
}

Eigen::MatrixXcd dft_pilots(int k_users, int t_pilot, double snr) {
    if (t_pilot < k_users) throw std::invalid_argument("pilot length must be >= K");
    Eigen::MatrixXcd x(k_users, t_pilot);
    const double a = std::sqrt(snr);
    for (int k = 0; k < k_users; ++k) {
        for (int t = 0; t < t_pilot; ++t) {
            const double phase = 2.0 * std::numbers::pi * k * t / t_pilot;
            x(k, t) = a * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return x;
}

PilotObservations observe_pilots(const ComplexChannel& h, const Eigen::MatrixXcd& pilots,
                                 const QuantizerSpec& q, Rng& rng, double noise_sigma) {
    if (h.cols() != pilots.rows()) throw std::invalid_argument("observe_pilots: dimension mismatch");
    std::normal_distribution<double> normal(0.0, 1.0);
    PilotObservations po;
    po.pilots = pilots;
    po.re.resize(h.rows(), pilots.cols());
    po.im.resize(h.rows(), pilots.cols());
    for (Eigen::Index t = 0; t < pilots.cols(); ++t) {
        const Eigen::VectorXcd y = h * pilots.col(t);
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
            const double zr = noise_sigma > 0.0 ? noise_sigma * normal(rng) : 0.0;
            const double zi = noise_sigma > 0.0 ? noise_sigma * normal(rng) : 0.0;
            po.re(i, t) = static_cast<std::uint8_t>(quantize(y(i).real() + zr, q));
            po.im(i, t) = static_cast<std::uint8_t>(quantize(y(i).imag() + zi, q));
        }
    }
    return po;
}

ComplexChannel ls_estimate(const Eigen::MatrixXcd& y, const Eigen::MatrixXcd& pilots) {
    const Eigen::MatrixXcd gram = pilots * pilots.adjoint();
    return y * pilots.adjoint() * gram.inverse();
}

ComplexChannel scaled_ls_estimate(const PilotObservations& po, const QuantizerSpec& q,
                                  bool rescale_columns) {
    const Eigen::Index k_users = po.pilots.rows();
    if (po.pilots.cols() < 2 * k_users)
        throw std::invalid_argument("scaled_ls: underdetermined, need t_pilot >= 2K");

    Eigen::MatrixXcd y(po.re.rows(), po.re.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        for (Eigen::Index t = 0; t < y.cols(); ++t) {
            y(i, t) = std::complex<double>(dequantize_level(po.re(i, t), q),
                                           dequantize_level(po.im(i, t), q));
        }
    }
    ComplexChannel h_hat = ls_estimate(y, po.pilots);
    if (rescale_columns) {
        const double target = std::sqrt(static_cast<double>(h_hat.rows()));
        for (Eigen::Index k = 0; k < h_hat.cols(); ++k) {
            const double norm = h_hat.col(k).norm();
            if (norm > 0.0) h_hat.col(k) *= target / norm;
        }
    }
    return h_hat;
}

}  // namespace qmimo
