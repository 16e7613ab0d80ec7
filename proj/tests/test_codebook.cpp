#include "doctest.h"
#include "qmimo/codebook.hpp"

using namespace qmimo;

namespace {

Codebook tiny_scalar_codebook() {
    // One user, one antenna, unit channel: codewords are the sign patterns
    // of [Re s, Im s].
    ComplexChannel hc(1, 1);
    hc(0, 0) = std::complex<double>(1.0, 0.0);
    return build_codebook(to_real_channel(hc), Constellation::qpsk(2.0), one_bit_spec());
}

}  // namespace

TEST_CASE("scalar QPSK codebook enumerates the sign patterns") {
    const Codebook cb = tiny_scalar_codebook();
    REQUIRE(cb.size() == 4);
    REQUIRE(cb.length() == 2);
    // l=0: (+,+); l=1: (-,+); l=2: (+,-); l=3: (-,-)
    const int expect[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    for (int l = 0; l < 4; ++l) {
        CHECK(cb.codewords()(l, 0) == expect[l][0]);
        CHECK(cb.codewords()(l, 1) == expect[l][1]);
    }
    CHECK(cb.min_distance() == 1);
    CHECK_FALSE(cb.ambiguous());
    CHECK(cb.min_distance() == 1);  // cached path
}

TEST_CASE("single BPSK user over a generic channel yields complementary codewords") {
    Rng rng(5);
    const ComplexChannel hc = sample_rayleigh(4, 1, rng);
    const Codebook cb = build_codebook(to_real_channel(hc), Constellation::bpsk(1.0), one_bit_spec());
    REQUIRE(cb.size() == 2);
    REQUIRE(cb.length() == 8);
    CHECK(cb.min_distance() == 8);
    for (Eigen::Index i = 0; i < 8; ++i)
        CHECK(cb.codewords()(0, i) == 1 - cb.codewords()(1, i));
}

TEST_CASE("offset shifts the noiseless means") {
    ComplexChannel hc(1, 1);
    hc(0, 0) = std::complex<double>(1.0, 0.0);
    const RealChannel h = to_real_channel(hc);
    const Constellation c = Constellation::qpsk(2.0);
    // A large positive offset saturates every subchannel to level 0.
    const Codebook cb = build_codebook(h, c, one_bit_spec(), Eigen::VectorXd::Constant(2, 100.0));
    for (int l = 0; l < 4; ++l) {
        CHECK(cb.codewords()(l, 0) == 0);
        CHECK(cb.codewords()(l, 1) == 0);
    }
    CHECK(cb.min_distance() == 0);
    CHECK(cb.ambiguous());
}

TEST_CASE("oversized codebooks are rejected") {
    Rng rng(9);
    const ComplexChannel hc = sample_rayleigh(2, 13, rng);
    CHECK_THROWS_AS(build_codebook(to_real_channel(hc), Constellation::qam16(1.0), one_bit_spec()),
                    std::invalid_argument);
}

TEST_CASE("hamming distance") {
    LevelVector x(4), y(4);
    x << 0, 1, 2, 3;
    y << 0, 2, 2, 0;
    CHECK(hamming_distance(x, y) == 2);
    CHECK(hamming_distance(x, x) == 0);
    LevelVector z(3);
    CHECK_THROWS_AS(hamming_distance(x, z), std::domain_error);
}

TEST_CASE("weighted hamming distance sums match and mismatch weights") {
    LevelVector x(3), y(3);
    x << 0, 1, 0;
    y << 0, 0, 1;
    Eigen::VectorXd alpha(3), beta(3);
    alpha << 0.5, 0.25, 0.125;
    beta << 10.0, 20.0, 40.0;
    CHECK(weighted_hamming_distance(x, y, alpha, beta) == doctest::Approx(0.5 + 20.0 + 40.0));
    CHECK(weighted_hamming_distance(x, x, alpha, beta) == doctest::Approx(alpha.sum()));
}

TEST_CASE("error correction capability is floor((d-1)/2)") {
    CHECK(error_correction_capability(0) == 0);
    CHECK(error_correction_capability(1) == 0);
    CHECK(error_correction_capability(2) == 0);
    CHECK(error_correction_capability(3) == 1);
    CHECK(error_correction_capability(4) == 1);
    CHECK(error_correction_capability(5) == 2);
    CHECK_THROWS_AS(error_correction_capability(-1), std::domain_error);
}

TEST_CASE("two-bit codebooks refine one-bit codebooks") {
    // The two-bit stair contains the zero threshold, so collapsing levels
    // {0,1} -> 0 and {2,3} -> 1 recovers the one-bit codebook.
    Rng rng(13);
    const ComplexChannel hc = sample_rayleigh(3, 2, rng);
    const RealChannel h = to_real_channel(hc);
    const Constellation c = Constellation::qpsk(4.0);
    const Codebook one = build_codebook(h, c, one_bit_spec());
    const Codebook two = build_codebook(h, c, two_bit_spec(4.0));
    for (Eigen::Index l = 0; l < one.size(); ++l) {
        for (Eigen::Index i = 0; i < one.length(); ++i) {
            CHECK((two.codewords()(l, i) >= 2) == (one.codewords()(l, i) == 1));
        }
    }
    CHECK(two.min_distance() >= one.min_distance());
}
