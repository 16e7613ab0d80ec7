#include "qmimo/effective_channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qmimo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2

// log-sum-exp over the entries of a row excluding one column.
double log_sum_exp_excluding(const Eigen::MatrixXd& logp, Eigen::Index row, Eigen::Index skip) {
    double m = -kInf;
    for (Eigen::Index j = 0; j < logp.cols(); ++j) {
        if (j != skip && logp(row, j) > m) m = logp(row, j);
    }
    if (m == -kInf) return -kInf;
    double s = 0.0;
    for (Eigen::Index j = 0; j < logp.cols(); ++j) {
        if (j != skip) s += std::exp(logp(row, j) - m);
    }
    return m + std::log(s);
}

// Fills one subchannel row of the (log-)transition matrices for mean mu.
void fill_row(const QuantizerSpec& q, double mu, Eigen::MatrixXd& prob, Eigen::MatrixXd& logp,
              Eigen::Index row) {
    const int p = q.levels();
    for (int j = 0; j < p; ++j) {
        const double lo = (j == p - 1) ? -kInf : (q.thresholds(j) - mu) / kNoiseSigma;
        const double hi = (j == 0) ? kInf : (q.thresholds(j - 1) - mu) / kNoiseSigma;
        const double lp = log_interval_prob(lo, hi);
        logp(row, j) = lp;
        prob(row, j) = std::exp(lp);
    }
}

}  // namespace

double q_function(double t) { return 0.5 * std::erfc(t / std::numbers::sqrt2); }

double log_q(double t) {
    if (t == kInf) return -kInf;
    if (t < 0.0) {
        // Q(t) = 1 - Q(-t), and Q(-t) is well scaled here.
        return std::log1p(-q_function(-t));
    }
    if (t < 35.0) return std::log(q_function(t));
    // Asymptotic tail expansion; erfc has underflowed by here.
    const double t2 = t * t;
    return -0.5 * t2 - std::log(t) - kHalfLog2Pi + std::log1p(-1.0 / t2 + 3.0 / (t2 * t2));
}

double log_interval_prob(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("log_interval_prob: lo must be < hi");
    if (lo == -kInf && hi == kInf) return 0.0;
    if (hi == kInf) return log_q(lo);
    if (lo == -kInf) return log_q(-hi);
    if (lo <= 0.0 && hi >= 0.0) {
        // Interval straddles the mean; the probability is not tiny.
        return std::log(q_function(lo) - q_function(hi));
    }
    if (lo > 0.0) {
        const double la = log_q(lo);
        const double lb = log_q(hi);
        return la + std::log1p(-std::exp(lb - la));
    }
    // Mirror of the positive case.
    const double la = log_q(-hi);
    const double lb = log_q(-lo);
    return la + std::log1p(-std::exp(lb - la));
}

Eigen::MatrixXd transition_matrix(const RealChannel& h, const Constellation& c,
                                  const QuantizerSpec& q, std::uint64_t index) {
    const int k_users = static_cast<int>(h.cols()) / 2;
    const Eigen::VectorXd x = real_input_vector(modulate(index_to_messages(index, c.order, k_users), c));
    const Eigen::VectorXd mean = h * x;
    Eigen::MatrixXd prob(h.rows(), q.levels());
    Eigen::MatrixXd logp(h.rows(), q.levels());
    for (Eigen::Index i = 0; i < h.rows(); ++i) fill_row(q, mean(i), prob, logp, i);
    return prob;
}

TransitionTensor build_transition_tensor(const RealChannel& h, const Constellation& c,
                                         const QuantizerSpec& q) {
    return build_transition_tensor(h, c, q, Eigen::VectorXd::Zero(h.rows()));
}

TransitionTensor build_transition_tensor(const RealChannel& h, const Constellation& c,
                                         const QuantizerSpec& q, const Eigen::VectorXd& offset) {
    const int k_users = static_cast<int>(h.cols()) / 2;
    if (offset.size() != h.rows()) throw std::invalid_argument("offset length mismatch");
    std::uint64_t count = 1;
    for (int k = 0; k < k_users; ++k) count *= static_cast<std::uint64_t>(c.order);

    TransitionTensor t;
    t.levels = q.levels();
    t.order = c.order;
    t.users = k_users;
    t.prob.reserve(count);
    t.logp.reserve(count);
    for (std::uint64_t l = 0; l < count; ++l) {
        const Eigen::VectorXd x = real_input_vector(modulate(index_to_messages(l, c.order, k_users), c));
        const Eigen::VectorXd mean = offset + h * x;
        Eigen::MatrixXd prob(h.rows(), q.levels());
        Eigen::MatrixXd logp(h.rows(), q.levels());
        for (Eigen::Index i = 0; i < h.rows(); ++i) fill_row(q, mean(i), prob, logp, i);
        t.prob.push_back(std::move(prob));
        t.logp.push_back(std::move(logp));
    }
    return t;
}

Eigen::VectorXd one_bit_crossover(const RealChannel& h, const Constellation& c, std::uint64_t index) {
    const int k_users = static_cast<int>(h.cols()) / 2;
    const Eigen::VectorXd x = real_input_vector(modulate(index_to_messages(index, c.order, k_users), c));
    const Eigen::VectorXd mean = h * x;
    Eigen::VectorXd eps(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) eps(i) = q_function(std::abs(mean(i)) / kNoiseSigma);
    return eps;
}

ErrorProbs ErrorProbs::from_eps(const Eigen::MatrixXd& eps, double floor) {
    ErrorProbs out;
    out.eps = eps;
    out.floor = floor;
    out.weight = (-eps.array().log() / std::numbers::ln2).matrix();
    return out;
}

ErrorProbs exact_error_probs(const TransitionTensor& tensor, const Codebook& cb) {
    if (tensor.size() != cb.size() || tensor.length() != cb.length())
        throw std::invalid_argument("tensor/codebook shape mismatch");
    ErrorProbs out;
    out.floor = 0.0;
    out.eps.resize(cb.size(), cb.length());
    out.weight.resize(cb.size(), cb.length());
    for (Eigen::Index l = 0; l < cb.size(); ++l) {
        const Eigen::MatrixXd& logp = tensor.logp[static_cast<std::size_t>(l)];
        for (Eigen::Index i = 0; i < cb.length(); ++i) {
            const double log_eps = log_sum_exp_excluding(logp, i, cb.codewords()(l, i));
            out.eps(l, i) = std::exp(log_eps);
            out.weight(l, i) = -log_eps / std::numbers::ln2;
        }
    }
    return out;
}

}  // namespace qmimo
