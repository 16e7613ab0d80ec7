#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qmimo/codebook.hpp"
#include "qmimo/model.hpp"

namespace qmimo {

/// Standard normal upper tail, Q(t) = P(Z >= t).
double q_function(double t);

/// Natural log of Q(t); stays finite far into the tail where Q underflows.
double log_q(double t);

/// log P(lo <= Z < hi) for standard normal Z, computed without underflow.
double log_interval_prob(double lo, double hi);

/// Per-hypothesis transition matrices of the N parallel p-ary subchannels.
/// prob[l](i,j) = P(r_i = j | message index l); logp holds the natural logs
/// computed in log space (usable below double underflow).
struct TransitionTensor {
    std::vector<Eigen::MatrixXd> prob;
    std::vector<Eigen::MatrixXd> logp;
    int levels = 2;
    int order = 2;
    int users = 1;

    Eigen::Index size() const { return static_cast<Eigen::Index>(prob.size()); }
    Eigen::Index length() const { return prob.empty() ? 0 : prob.front().rows(); }
};

/// N x p transition matrix for one hypothesis, rows summing to one.
Eigen::MatrixXd transition_matrix(const RealChannel& h, const Constellation& c,
                                  const QuantizerSpec& q, std::uint64_t index);

TransitionTensor build_transition_tensor(const RealChannel& h, const Constellation& c,
                                         const QuantizerSpec& q);

/// Tensor with a fixed additive term in the noiseless means (SIC stage 2).
TransitionTensor build_transition_tensor(const RealChannel& h, const Constellation& c,
                                         const QuantizerSpec& q, const Eigen::VectorXd& offset);

/// One-bit crossover probabilities eps_{l,i} = Q(|mu_i| / sigma).
Eigen::VectorXd one_bit_crossover(const RealChannel& h, const Constellation& c, std::uint64_t index);

/// Per-hypothesis per-subchannel error probabilities together with the
/// base-2 mismatch weights log2(1/eps). Weights are kept separately so that
/// underflowed eps (exact, high SNR) still yields a finite usable weight.
struct ErrorProbs {
    Eigen::MatrixXd eps;     // m^K x N
    Eigen::MatrixXd weight;  // log2(1/eps), same shape
    double floor = 0.0;      // 0 for exact values, 1e-3 when trained

    static ErrorProbs from_eps(const Eigen::MatrixXd& eps, double floor);
};

/// eps_{l,i} = 1 - P_l(i, c_{l,i}), i.e. the summed off-codeword-symbol
/// transition probabilities; weights computed from the log tensor.
ErrorProbs exact_error_probs(const TransitionTensor& tensor, const Codebook& cb);

}  // namespace qmimo
