#include "qmimo/codebook.hpp"

#include <stdexcept>

namespace qmimo {

Codebook::Codebook(LevelMatrix codewords, int levels, int order, int users)
    : codewords_(std::move(codewords)), levels_(levels), order_(order), users_(users) {}

int Codebook::min_distance() const {
    if (!d_min_) {
        const Eigen::Index n = codewords_.rows();
        int best = static_cast<int>(codewords_.cols());
        for (Eigen::Index a = 0; a < n && best > 0; ++a) {
            for (Eigen::Index b = a + 1; b < n; ++b) {
                int d = 0;
                for (Eigen::Index i = 0; i < codewords_.cols(); ++i) {
                    d += codewords_(a, i) != codewords_(b, i);
                }
                if (d < best) best = d;
                if (best == 0) break;
            }
        }
        d_min_ = best;
    }
    return *d_min_;
}

Codebook build_codebook(const RealChannel& h, const Constellation& c, const QuantizerSpec& q,
                        const Eigen::VectorXd& offset) {
    const int k_users = static_cast<int>(h.cols()) / 2;
    if (h.cols() != 2 * k_users) throw std::invalid_argument("real channel must have even column count");
    if (offset.size() != h.rows()) throw std::invalid_argument("offset length mismatch");

    std::uint64_t count = 1;
    for (int k = 0; k < k_users; ++k) {
        count *= static_cast<std::uint64_t>(c.order);
        if (count > kMaxCodebookSize)
            throw std::invalid_argument("codebook too large; partition users (SIC) instead");
    }

    LevelMatrix codewords(static_cast<Eigen::Index>(count), h.rows());
    for (std::uint64_t l = 0; l < count; ++l) {
        const Eigen::VectorXd x = real_input_vector(modulate(index_to_messages(l, c.order, k_users), c));
        const Eigen::VectorXd mean = offset + h * x;
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
            codewords(static_cast<Eigen::Index>(l), i) = static_cast<std::uint8_t>(quantize(mean(i), q));
        }
    }
    return Codebook(std::move(codewords), q.levels(), c.order, k_users);
}

Codebook build_codebook(const RealChannel& h, const Constellation& c, const QuantizerSpec& q) {
    return build_codebook(h, c, q, Eigen::VectorXd::Zero(h.rows()));
}

int min_distance(const Codebook& cb) { return cb.min_distance(); }

int hamming_distance(const LevelVector& x, const LevelVector& y) {
    if (x.size() != y.size()) throw std::domain_error("hamming_distance: length mismatch");
    int d = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) d += x(i) != y(i);
    return d;
}

double weighted_hamming_distance(const LevelVector& x, const LevelVector& y,
                                 const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
    if (x.size() != y.size() || x.size() != alpha.size() || x.size() != beta.size())
        throw std::domain_error("weighted_hamming_distance: length mismatch");
    double d = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) d += (x(i) == y(i)) ? alpha(i) : beta(i);
    return d;
}

int error_correction_capability(int d_min) {
    if (d_min < 0) throw std::domain_error("d_min must be non-negative");
    return d_min <= 1 ? 0 : (d_min - 1) / 2;
}

}  // namespace qmimo
