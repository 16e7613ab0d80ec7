#include "doctest.h"
#include "qmimo/model.hpp"

using namespace qmimo;

TEST_CASE("one-bit quantizer is a sign detector with 0 mapped up") {
    const QuantizerSpec q = one_bit_spec();
    CHECK(q.levels() == 2);
    CHECK(q.symmetric());
    CHECK(quantize(0.3, q) == 0);
    CHECK(quantize(-0.3, q) == 1);
    CHECK(quantize(0.0, q) == 0);
    CHECK(quantize(1e300, q) == 0);
    CHECK(quantize(-1e300, q) == 1);
}

TEST_CASE("two-bit quantizer bins") {
    const QuantizerSpec q = two_bit_spec(4.0);  // thresholds 2, 0, -2
    CHECK(q.levels() == 4);
    CHECK(q.symmetric());
    CHECK(quantize(3.0, q) == 0);
    CHECK(quantize(2.0, q) == 0);  // half-open [2, inf)
    CHECK(quantize(1.0, q) == 1);
    CHECK(quantize(-1.0, q) == 2);
    CHECK(quantize(-3.0, q) == 3);
}

TEST_CASE("symmetric quantizer satisfies quantize(-u) = p-1 - quantize(u)") {
    Rng rng(42);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (const QuantizerSpec& q : {one_bit_spec(), two_bit_spec(2.5)}) {
        const int p = q.levels();
        for (int i = 0; i < 1000; ++i) {
            const double u = normal(rng);
            CHECK(quantize(-u, q) == p - 1 - quantize(u, q));
        }
    }
}

TEST_CASE("quantize rejects NaN") {
    CHECK_THROWS_AS(quantize(std::nan(""), one_bit_spec()), std::domain_error);
}

TEST_CASE("dequantize uses interior midpoints and threshold offsets outside") {
    const QuantizerSpec q1 = one_bit_spec();
    CHECK(dequantize_level(0, q1) == doctest::Approx(kNoiseSigma));
    CHECK(dequantize_level(1, q1) == doctest::Approx(-kNoiseSigma));

    const QuantizerSpec q2 = two_bit_spec(1.0);  // thresholds 1, 0, -1
    CHECK(dequantize_level(0, q2) == doctest::Approx(1.0 + kNoiseSigma));
    CHECK(dequantize_level(1, q2) == doctest::Approx(0.5));
    CHECK(dequantize_level(2, q2) == doctest::Approx(-0.5));
    CHECK(dequantize_level(3, q2) == doctest::Approx(-1.0 - kNoiseSigma));
    CHECK_THROWS_AS(dequantize_level(4, q2), std::domain_error);
    CHECK_THROWS_AS(dequantize_level(-1, q2), std::domain_error);
}

TEST_CASE("message index round-trips, least significant user first") {
    CHECK(messages_to_index({1, 2, 3}, 4) == 1 + 2 * 4 + 3 * 16);
    for (std::uint64_t l = 0; l < 64; ++l) {
        CHECK(messages_to_index(index_to_messages(l, 4, 3), 4) == l);
    }
    CHECK_THROWS_AS(messages_to_index({4}, 4), std::domain_error);
    CHECK_THROWS_AS(index_to_messages(64, 4, 3), std::domain_error);
}

TEST_CASE("constellations respect the average power budget") {
    const double snr = 6.25;
    for (const char* name : {"bpsk", "qpsk", "16qam"}) {
        const Constellation c = Constellation::from_name(name, snr);
        double power = 0.0;
        for (int b = 0; b < c.order; ++b) power += std::norm(c.points(b));
        CHECK(power / c.order == doctest::Approx(snr));
    }
    CHECK_THROWS_AS(Constellation::from_name("8psk", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Constellation::bpsk(0.0), std::domain_error);
}

TEST_CASE("constellation labelings") {
    const Constellation q = Constellation::qpsk(2.0);
    CHECK(q.bits_per_symbol() == 2);
    CHECK(q.points(0) == std::complex<double>(1.0, 1.0));
    CHECK(q.points(3) == std::complex<double>(-1.0, -1.0));
    CHECK(q.negation_symmetric_labeling());
    CHECK(Constellation::bpsk(1.0).negation_symmetric_labeling());

    // Per-axis Gray 16-QAM deliberately breaks the b <-> m-1-b pairing.
    const Constellation g = Constellation::qam16(10.0);
    CHECK(g.bits_per_symbol() == 4);
    CHECK_FALSE(g.negation_symmetric_labeling());
    // Gray property: adjacent amplitudes differ in one bit per axis.
    CHECK(g.points(0).real() == doctest::Approx(-3.0));   // 00
    CHECK(g.points(1).real() == doctest::Approx(-1.0));   // 01
    CHECK(g.points(3).real() == doctest::Approx(1.0));    // 11
    CHECK(g.points(2).real() == doctest::Approx(3.0));    // 10
}

TEST_CASE("real block expansion commutes with complex multiplication") {
    Rng rng(7);
    const ComplexChannel h = sample_rayleigh(5, 3, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXcd x(3);
    for (int k = 0; k < 3; ++k) x(k) = std::complex<double>(normal(rng), normal(rng));

    const Eigen::VectorXd lhs = to_real_channel(h) * real_input_vector(x);
    const Eigen::VectorXd rhs = real_input_vector(h * x);
    CHECK((lhs - rhs).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rayleigh entries have unit second moment") {
    Rng rng(11);
    double sum = 0.0;
    const int draws = 500;
    for (int i = 0; i < draws; ++i) sum += sample_rayleigh(4, 4, rng).squaredNorm();
    CHECK(sum / (draws * 16.0) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("observe with zero noise is the deterministic quantized mean") {
    Rng rng(3);
    const ComplexChannel hc = sample_rayleigh(4, 2, rng);
    const RealChannel h = to_real_channel(hc);
    const Constellation c = Constellation::qpsk(4.0);
    const QuantizerSpec q = one_bit_spec();
    const Eigen::VectorXd x = real_input_vector(modulate({2, 1}, c));

    const LevelVector r = observe(h, x, q, rng, 0.0);
    const Eigen::VectorXd mean = h * x;
    for (Eigen::Index i = 0; i < r.size(); ++i) CHECK(r(i) == quantize(mean(i), q));
    CHECK_THROWS_AS(observe(h, Eigen::VectorXd::Zero(3), q, rng), std::invalid_argument);
}
