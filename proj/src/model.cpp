#include "qmimo/model.hpp"

#include <cmath>
#include <stdexcept>

namespace qmimo {

namespace {

void check_snr(double snr) {
    if (!(snr > 0.0)) throw std::domain_error("snr must be positive");
}

// Gray-coded 4-PAM: amplitude order [-3,-1,+1,+3] carries bit pairs
// 00,01,11,10. level_of[v] is the amplitude for digit-pair value v.
constexpr double kPam4Level[4] = {-3.0, -1.0, +3.0, +1.0};

}  // namespace

Constellation Constellation::bpsk(double snr) {
    check_snr(snr);
    Constellation c;
    c.order = 2;
    c.snr = snr;
    c.points.resize(2);
    const double a = std::sqrt(snr);
    c.points << std::complex<double>(a, 0.0), std::complex<double>(-a, 0.0);
    return c;
}

Constellation Constellation::qpsk(double snr) {
    check_snr(snr);
    Constellation c;
    c.order = 4;
    c.snr = snr;
    c.points.resize(4);
    const double a = std::sqrt(snr / 2.0);
    // bit0 -> sign of Re, bit1 -> sign of Im (per-axis Gray)
    for (int w = 0; w < 4; ++w) {
        const double re = (w & 1) ? -a : a;
        const double im = (w & 2) ? -a : a;
        c.points(w) = std::complex<double>(re, im);
    }
    return c;
}

Constellation Constellation::qam16(double snr) {
    check_snr(snr);
    Constellation c;
    c.order = 16;
    c.snr = snr;
    c.points.resize(16);
    const double scale = std::sqrt(snr / 10.0);
    for (int w = 0; w < 16; ++w) {
        const double re = scale * kPam4Level[w & 3];
        const double im = scale * kPam4Level[(w >> 2) & 3];
        c.points(w) = std::complex<double>(re, im);
    }
    return c;
}

Constellation Constellation::from_name(const std::string& name, double snr) {
    if (name == "bpsk") return bpsk(snr);
    if (name == "qpsk") return qpsk(snr);
    if (name == "16qam") return qam16(snr);
    throw std::invalid_argument("unknown constellation: " + name);
}

int Constellation::bits_per_symbol() const {
    int b = 0;
    for (int v = order; v > 1; v >>= 1) ++b;
    return b;
}

bool Constellation::negation_symmetric_labeling() const {
    for (int b = 0; b < order; ++b) {
        if (std::abs(points(order - 1 - b) + points(b)) > 1e-12) return false;
    }
    return true;
}

bool QuantizerSpec::symmetric() const {
    const Eigen::Index n = thresholds.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(thresholds(i) + thresholds(n - 1 - i)) > 1e-12) return false;
    }
    return true;
}

QuantizerSpec one_bit_spec() {
    QuantizerSpec q;
    q.thresholds.resize(1);
    q.thresholds << 0.0;
    return q;
}

QuantizerSpec two_bit_spec(double snr) {
    check_snr(snr);
    QuantizerSpec q;
    const double d = std::sqrt(snr);
    q.thresholds.resize(3);
    q.thresholds << d, 0.0, -d;
    return q;
}

std::uint64_t messages_to_index(const std::vector<int>& w, int m) {
    std::uint64_t index = 0;
    std::uint64_t weight = 1;
    for (int entry : w) {
        if (entry < 0 || entry >= m) throw std::domain_error("message entry out of range");
        index += static_cast<std::uint64_t>(entry) * weight;
        weight *= static_cast<std::uint64_t>(m);
    }
    return index;
}

std::vector<int> index_to_messages(std::uint64_t index, int m, int k_users) {
    std::uint64_t limit = 1;
    for (int k = 0; k < k_users; ++k) limit *= static_cast<std::uint64_t>(m);
    if (index >= limit) throw std::domain_error("codeword index out of range");
    std::vector<int> w(static_cast<std::size_t>(k_users));
    for (int k = 0; k < k_users; ++k) {
        w[static_cast<std::size_t>(k)] = static_cast<int>(index % static_cast<std::uint64_t>(m));
        index /= static_cast<std::uint64_t>(m);
    }
    return w;
}

Eigen::VectorXcd modulate(const std::vector<int>& w, const Constellation& c) {
    Eigen::VectorXcd x(static_cast<Eigen::Index>(w.size()));
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] < 0 || w[k] >= c.order) throw std::domain_error("message entry out of range");
        x(static_cast<Eigen::Index>(k)) = c.points(w[k]);
    }
    return x;
}

Eigen::VectorXd real_input_vector(const Eigen::VectorXcd& x) {
    const Eigen::Index k = x.size();
    Eigen::VectorXd v(2 * k);
    v.head(k) = x.real();
    v.tail(k) = x.imag();
    return v;
}

RealChannel to_real_channel(const ComplexChannel& h) {
    const Eigen::Index nr = h.rows();
    const Eigen::Index k = h.cols();
    RealChannel out(2 * nr, 2 * k);
    out.topLeftCorner(nr, k) = h.real();
    out.topRightCorner(nr, k) = -h.imag();
    out.bottomLeftCorner(nr, k) = h.imag();
    out.bottomRightCorner(nr, k) = h.real();
    return out;
}

ComplexChannel sample_rayleigh(int n_rx, int k_users, Rng& rng) {
    if (n_rx < 1 || k_users < 1) throw std::invalid_argument("channel dimensions must be >= 1");
    std::normal_distribution<double> normal(0.0, kNoiseSigma);
    ComplexChannel h(n_rx, k_users);
    for (int i = 0; i < n_rx; ++i) {
        for (int j = 0; j < k_users; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            h(i, j) = std::complex<double>(re, im);
        }
    }
    return h;
}

int quantize(double u, const QuantizerSpec& q) {
    if (std::isnan(u)) throw std::domain_error("quantize: NaN input");
    int level = 0;
    for (Eigen::Index j = 0; j < q.thresholds.size(); ++j) {
        if (q.thresholds(j) > u) ++level;
    }
    return level;
}

double dequantize_level(int level, const QuantizerSpec& q) {
    const int p = q.levels();
    if (level < 0 || level >= p) throw std::domain_error("level out of range");
    if (level == 0) return q.thresholds(0) + kNoiseSigma;
    if (level == p - 1) return q.thresholds(p - 2) - kNoiseSigma;
    return 0.5 * (q.thresholds(level) + q.thresholds(level - 1));
}

LevelVector observe(const RealChannel& h, const Eigen::VectorXd& x, const QuantizerSpec& q,
                    Rng& rng, double noise_sigma) {
    if (h.cols() != x.size()) throw std::invalid_argument("observe: dimension mismatch");
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::VectorXd mean = h * x;
    LevelVector r(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const double z = noise_sigma > 0.0 ? noise_sigma * normal(rng) : 0.0;
        r(i) = static_cast<std::uint8_t>(quantize(mean(i) + z, q));
    }
    return r;
}

}  // namespace qmimo
