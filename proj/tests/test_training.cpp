#include <array>
#include <cmath>

#include "doctest.h"
#include "qmimo/detectors.hpp"
#include "qmimo/training.hpp"

using namespace qmimo;

namespace {

double codebook_disagreement(const Codebook& a, const Codebook& b) {
    REQUIRE(a.size() == b.size());
    REQUIRE(a.length() == b.length());
    int diff = 0;
    for (Eigen::Index l = 0; l < a.size(); ++l)
        for (Eigen::Index i = 0; i < a.length(); ++i)
            diff += a.codewords()(l, i) != b.codewords()(l, i);
    return static_cast<double>(diff) / static_cast<double>(a.size() * a.length());
}

}  // namespace

TEST_CASE("majority estimate with lowest-level tie break") {
    const std::array<std::uint8_t, 5> obs{1, 1, 0, 2, 1};
    CHECK(majority_estimate(obs) == 1);
    const std::array<std::uint8_t, 4> tie{3, 0, 3, 0};
    CHECK(majority_estimate(tie) == 0);
    const std::array<std::uint8_t, 1> one{2};
    CHECK(majority_estimate(one) == 2);
    CHECK_THROWS_AS(majority_estimate(std::span<const std::uint8_t>{}), std::domain_error);
}

TEST_CASE("error probability estimate is the floored mismatch rate") {
    const std::array<std::uint8_t, 10> obs{1, 1, 1, 0, 1, 1, 2, 1, 1, 1};
    CHECK(estimate_error_probs(1, obs, 1e-3) == doctest::Approx(0.2));
    CHECK(estimate_error_probs(1, obs, 0.5) == doctest::Approx(0.5));
    const std::array<std::uint8_t, 4> clean{1, 1, 1, 1};
    CHECK(estimate_error_probs(1, clean, 1e-3) == doctest::Approx(1e-3));
    CHECK_THROWS_AS(estimate_error_probs(0, std::span<const std::uint8_t>{}), std::domain_error);
}

TEST_CASE("symmetry extension mirrors levels onto the paired indices") {
    const QuantizerSpec q = two_bit_spec(1.0);
    std::vector<LevelMatrix> half(2);
    half[0] = LevelMatrix(2, 2);
    half[0] << 0, 1, 2, 3;
    half[1] = LevelMatrix(2, 2);
    half[1] << 3, 3, 0, 0;
    const std::vector<LevelMatrix> full = symmetry_extend(half, q);
    REQUIRE(full.size() == 4);
    CHECK(full[0] == half[0]);
    CHECK(full[1] == half[1]);
    // index 3 pairs with 0, index 2 with 1, levels reversed
    LevelMatrix m3(2, 2), m2(2, 2);
    m3 << 3, 2, 1, 0;
    m2 << 0, 0, 3, 3;
    CHECK(full[3] == m3);
    CHECK(full[2] == m2);

    QuantizerSpec asym;
    asym.thresholds.resize(1);
    asym.thresholds << 0.5;
    CHECK_THROWS_AS(symmetry_extend(half, asym), std::invalid_argument);
}

TEST_CASE("noiseless implicit training recovers the codebook and floors eps") {
    Rng ch_rng(201);
    const RealChannel h = to_real_channel(sample_rayleigh(4, 2, ch_rng));
    const Constellation c = Constellation::qpsk(4.0);
    const QuantizerSpec q = one_bit_spec();
    const Codebook truth = build_codebook(h, c, q);

    for (bool sym : {false, true}) {
        Rng rng(202);
        const TrainingOutput out = implicit_train(h, c, q, 3, sym, rng, 1e-3, 0.0);
        CHECK(codebook_disagreement(out.codebook_hat, truth) == 0.0);
        CHECK((out.eps_hat.eps.array() == 1e-3).all());
        CHECK(out.overhead == (sym ? 24u : 48u));
        CHECK(out.mode == TrainingOutput::Mode::Implicit);
    }
}

TEST_CASE("symmetry shortcut refuses a labeling that negation does not pair") {
    Rng rng(203);
    const RealChannel h = to_real_channel(sample_rayleigh(2, 1, rng));
    CHECK_THROWS_AS(implicit_train(h, Constellation::qam16(10.0), one_bit_spec(), 2, true, rng),
                    std::invalid_argument);
}

TEST_CASE("symmetry-extended training is statistically equivalent to full training") {
    const Constellation c = Constellation::qpsk(std::pow(10.0, 0.5));
    const QuantizerSpec q = one_bit_spec();
    std::uint64_t diff_sym = 0, diff_full = 0, cells = 0;
    Rng rng(205);
    for (int draw = 0; draw < 200; ++draw) {
        const RealChannel h = to_real_channel(sample_rayleigh(4, 2, rng));
        const Codebook truth = build_codebook(h, c, q);
        const Eigen::Index total = truth.size() * truth.length();
        const TrainingOutput a = implicit_train(h, c, q, 4, true, rng);
        const TrainingOutput b = implicit_train(h, c, q, 4, false, rng);
        diff_sym += static_cast<std::uint64_t>(codebook_disagreement(a.codebook_hat, truth) * total + 0.5);
        diff_full += static_cast<std::uint64_t>(codebook_disagreement(b.codebook_hat, truth) * total + 0.5);
        cells += static_cast<std::uint64_t>(total);
    }
    // Two-proportion z-test at ~4 sigma.
    const double p1 = static_cast<double>(diff_sym) / cells;
    const double p2 = static_cast<double>(diff_full) / cells;
    const double pooled = static_cast<double>(diff_sym + diff_full) / (2.0 * cells);
    const double se = std::sqrt(2.0 * pooled * (1.0 - pooled) / cells);
    CHECK(std::abs(p1 - p2) < 4.0 * se + 1e-9);
}

TEST_CASE("explicit training with the exact channel matches implicit training") {
    Rng ch_rng(207);
    const RealChannel h = to_real_channel(sample_rayleigh(3, 2, ch_rng));
    const Constellation c = Constellation::qpsk(2.0);
    const QuantizerSpec q = one_bit_spec();
    Rng r1(208), r2(208);
    const TrainingOutput a = explicit_train(h, c, q, 5, r1, 20);
    const TrainingOutput b = implicit_train(h, c, q, 5, false, r2);
    CHECK(a.codebook_hat.codewords() == b.codebook_hat.codewords());
    CHECK((a.eps_hat.eps - b.eps_hat.eps).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.overhead == 20);
    CHECK(a.mode == TrainingOutput::Mode::Explicit);
}

TEST_CASE("genie estimator: exact at zero scale, calibrated variance otherwise") {
    Rng rng(209);
    const RealChannel h = to_real_channel(sample_rayleigh(4, 2, rng));
    CHECK((estimate_channel_genie(h, 0.0, rng) - h).norm() == 0.0);
    CHECK_THROWS_AS(estimate_channel_genie(h, -1.0, rng), std::invalid_argument);

    const double sigma_e = 0.3;
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        sum += (estimate_channel_genie(h, sigma_e, rng) - h).squaredNorm();
    const double normalized = sum / (draws * h.rows() * h.cols() * sigma_e * sigma_e);
    CHECK(normalized == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("codebook disagreement is monotone in the estimation-error scale") {
    const Constellation c = Constellation::qpsk(2.0);
    const QuantizerSpec q = one_bit_spec();
    Rng rng(211);
    std::array<double, 3> scales{0.0, 0.1, 0.3};
    std::array<double, 3> rates{};
    for (int draw = 0; draw < 100; ++draw) {
        const RealChannel h = to_real_channel(sample_rayleigh(4, 2, rng));
        const Codebook truth = build_codebook(h, c, q);
        for (std::size_t s = 0; s < scales.size(); ++s) {
            const RealChannel h_hat = estimate_channel_genie(h, scales[s], rng);
            rates[s] += codebook_disagreement(build_codebook(h_hat, c, q), truth);
        }
    }
    CHECK(rates[0] == 0.0);
    CHECK(rates[0] <= rates[1]);
    CHECK(rates[1] <= rates[2]);
}

TEST_CASE("the probability floor prevents the high-snr error floor") {
    // Without the floor, subchannels whose empirical error count is zero get
    // an infinite mismatch weight; one data-phase flip at such a position
    // then disqualifies the transmitted codeword outright. wmdd itself
    // rejects infinite weights, so the unfloored decoder runs through the
    // unified weighted form, which tolerates infinite scores.
    const double snr = std::pow(10.0, 2.5);  // 25 dB
    const Constellation c = Constellation::qpsk(snr);
    const QuantizerSpec q = one_bit_spec();
    Rng rng(221);
    std::uint64_t errors_unfloored = 0, errors_floored = 0;
    for (int draw = 0; draw < 60; ++draw) {
        const RealChannel h = to_real_channel(sample_rayleigh(4, 2, rng));
        Rng t1(derive_seed(221, {static_cast<std::uint64_t>(draw), 1}));
        Rng t2(derive_seed(221, {static_cast<std::uint64_t>(draw), 1}));
        const TrainingOutput raw = implicit_train(h, c, q, 4, false, t1, 0.0);
        const TrainingOutput floored = implicit_train(h, c, q, 4, false, t2, 1e-3);
        WeightSet w_raw;
        w_raw.alpha = Eigen::MatrixXd::Zero(raw.eps_hat.eps.rows(), raw.eps_hat.eps.cols());
        w_raw.beta = raw.eps_hat.weight;

        std::uniform_int_distribution<std::uint64_t> pick(0, 15);
        for (int t = 0; t < 300; ++t) {
            const std::uint64_t sent = pick(rng);
            const Eigen::VectorXd x = real_input_vector(modulate(index_to_messages(sent, 4, 2), c));
            const LevelVector r = observe(h, x, q, rng);
            errors_unfloored += unified_weighted_decode(r, raw.codebook_hat, w_raw).index != sent;
            errors_floored += wmdd(r, floored.codebook_hat, floored.eps_hat).index != sent;
        }
    }
    CHECK(errors_floored < errors_unfloored);
}

TEST_CASE("dft pilots are orthogonal at the data-phase power") {
    const double snr = 3.0;
    const Eigen::MatrixXcd x = dft_pilots(3, 9, snr);
    REQUIRE(x.rows() == 3);
    REQUIRE(x.cols() == 9);
    for (Eigen::Index t = 0; t < 9; ++t)
        for (Eigen::Index k = 0; k < 3; ++k)
            CHECK(std::norm(x(k, t)) == doctest::Approx(snr));
    const Eigen::MatrixXcd gram = x * x.adjoint();
    CHECK((gram - 9.0 * snr * Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-9);
    CHECK_THROWS_AS(dft_pilots(4, 3, 1.0), std::invalid_argument);
}

TEST_CASE("least squares is exact without noise or quantization") {
    Rng rng(213);
    const ComplexChannel h = sample_rayleigh(4, 2, rng);
    const Eigen::MatrixXcd pilots = dft_pilots(2, 8, 2.0);
    const ComplexChannel h_hat = ls_estimate(h * pilots, pilots);
    CHECK((h_hat - h).norm() < 1e-10);
}

TEST_CASE("scaled ls estimates the channel direction from quantized pilots") {
    Rng rng(217);
    const ComplexChannel h = sample_rayleigh(8, 2, rng);
    const QuantizerSpec q = two_bit_spec(4.0);
    const Eigen::MatrixXcd pilots = dft_pilots(2, 32, 4.0);
    const PilotObservations po = observe_pilots(h, pilots, q, rng);
    const ComplexChannel h_hat = scaled_ls_estimate(po, q);
    REQUIRE(h_hat.rows() == 8);
    REQUIRE(h_hat.cols() == 2);
    for (Eigen::Index k = 0; k < 2; ++k) {
        CHECK(h_hat.col(k).norm() == doctest::Approx(std::sqrt(8.0)));
        // Direction cosine with the true column stays high.
        const double cosine = std::abs(h_hat.col(k).dot(h.col(k))) /
                              (h_hat.col(k).norm() * h.col(k).norm());
        CHECK(cosine > 0.7);
    }

    PilotObservations short_po = po;
    short_po.pilots = dft_pilots(2, 3, 4.0);
    CHECK_THROWS_AS(scaled_ls_estimate(short_po, q), std::invalid_argument);
}

TEST_CASE("observe_pilots validates dimensions") {
    Rng rng(219);
    const ComplexChannel h = sample_rayleigh(2, 2, rng);
    CHECK_THROWS_AS(observe_pilots(h, dft_pilots(3, 6, 1.0), one_bit_spec(), rng),
                    std::invalid_argument);
}
