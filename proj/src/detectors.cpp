#include "qmimo/detectors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qmimo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Argmin over hypotheses with lowest-index tie-breaking; score(l) must be
// deterministic.
template <typename ScoreFn>
DetectionResult argmin_decode(Eigen::Index count, int order, int users, ScoreFn&& score) {
    DetectionResult best;
    best.score = kInf;
    best.tie_count = 0;
    for (Eigen::Index l = 0; l < count; ++l) {
        const double s = score(l);
        if (s < best.score) {
            best.score = s;
            best.index = static_cast<std::uint64_t>(l);
            best.tie_count = 1;
        } else if (s == best.score) {
            ++best.tie_count;
        }
    }
    best.messages = index_to_messages(best.index, order, users);
    best.hypotheses = static_cast<std::uint64_t>(count);
    return best;
}

std::vector<int> sorted_copy(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Smallest principal angle between the column spaces of the submatrices
// for user groups a and b.
// Orthonormal basis of the column space, rank-revealing.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& a) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), qr.rank());
}

double partition_score(const RealChannel& h, const std::vector<int>& a, const std::vector<int>& b) {
    const Eigen::MatrixXd qa = orthonormal_basis(user_submatrix(h, a));
    const Eigen::MatrixXd qb = orthonormal_basis(user_submatrix(h, b));
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
    const double smax = std::min(1.0, svd.singularValues()(0));
    return std::acos(smax);
}

DetectionResult decode_stage(const LevelVector& r, const RealChannel& hsub,
                             const Eigen::VectorXd& offset, const Constellation& c,
                             const QuantizerSpec& q, const Codebook& cb, InnerDetector inner) {
    switch (inner) {
        case InnerDetector::Mdd:
            return mdd(r, cb);
        case InnerDetector::Wmdd: {
            const TransitionTensor tensor = build_transition_tensor(hsub, c, q, offset);
            return wmdd(r, cb, exact_error_probs(tensor, cb));
        }
        case InnerDetector::Emld: {
            const TransitionTensor tensor = build_transition_tensor(hsub, c, q, offset);
            return emld(r, tensor);
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

WeightSet emld_weight_set(const ErrorProbs& eps) {
    WeightSet w;
    w.alpha = (-(1.0 - eps.eps.array()).log() / std::numbers::ln2).matrix();
    w.beta = eps.weight;
    return w;
}

DetectionResult mdd(const LevelVector& r, const Codebook& cb) {
    if (r.size() != cb.length()) throw std::invalid_argument("mdd: observation length mismatch");
    const LevelMatrix& cw = cb.codewords();
    return argmin_decode(cb.size(), cb.order(), cb.users(), [&](Eigen::Index l) {
        int d = 0;
        for (Eigen::Index i = 0; i < r.size(); ++i) d += r(i) != cw(l, i);
        return static_cast<double>(d);
    });
}

DetectionResult emld(const LevelVector& r, const TransitionTensor& tensor) {
    if (r.size() != tensor.length()) throw std::invalid_argument("emld: observation length mismatch");
    DetectionResult res = argmin_decode(tensor.size(), tensor.order, tensor.users, [&](Eigen::Index l) {
        const Eigen::MatrixXd& logp = tensor.logp[static_cast<std::size_t>(l)];
        double s = 0.0;
        for (Eigen::Index i = 0; i < r.size(); ++i) s -= logp(i, r(i));
        return s;
    });
    if (res.score == kInf) {
        res.index = 0;
        res.messages = index_to_messages(0, tensor.order, tensor.users);
        res.degenerate = true;
    }
    return res;
}

DetectionResult wmdd(const LevelVector& r, const Codebook& cb, const ErrorProbs& eps) {
    if (r.size() != cb.length()) throw std::invalid_argument("wmdd: observation length mismatch");
    if (eps.weight.rows() != cb.size() || eps.weight.cols() != cb.length())
        throw std::invalid_argument("wmdd: weight shape mismatch");
    if (eps.weight.array().isInf().any())
        throw std::domain_error("wmdd: zero error probability; apply a floor");
    const LevelMatrix& cw = cb.codewords();
    return argmin_decode(cb.size(), cb.order(), cb.users(), [&](Eigen::Index l) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            if (r(i) != cw(l, i)) s += eps.weight(l, i);
        }
        return s;
    });
}

DetectionResult unified_weighted_decode(const LevelVector& r, const Codebook& cb, const WeightSet& w) {
    if (r.size() != cb.length()) throw std::invalid_argument("unified decode: observation length mismatch");
    const LevelMatrix& cw = cb.codewords();
    return argmin_decode(cb.size(), cb.order(), cb.users(), [&](Eigen::Index l) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            s += (r(i) == cw(l, i)) ? w.alpha(l, i) : w.beta(l, i);
        }
        return s;
    });
}

DetectionResult zf_detect(const LevelVector& r, const RealChannel& h, const QuantizerSpec& q,
                          const Constellation& c) {
    if (r.size() != h.rows()) throw std::invalid_argument("zf: observation length mismatch");
    const int k_users = static_cast<int>(h.cols()) / 2;

    Eigen::VectorXd v(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) v(i) = dequantize_level(r(i), q);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(h);
    if (cod.rank() < h.cols()) throw std::invalid_argument("zf: rank-deficient channel");
    const Eigen::VectorXd y = cod.solve(v);

    std::vector<int> w(static_cast<std::size_t>(k_users));
    double residual = 0.0;
    for (int k = 0; k < k_users; ++k) {
        const std::complex<double> est(y(k), y(k + k_users));
        int best = 0;
        double best_d = std::abs(est - c.points(0));
        for (int b = 1; b < c.order; ++b) {
            const double d = std::abs(est - c.points(b));
            if (d < best_d) {
                best_d = d;
                best = b;
            }
        }
        w[static_cast<std::size_t>(k)] = best;
        residual += best_d * best_d;
    }

    DetectionResult res;
    res.index = messages_to_index(w, c.order);
    res.messages = std::move(w);
    res.score = residual;
    res.tie_count = 1;
    res.hypotheses = 0;
    return res;
}

RealChannel user_submatrix(const RealChannel& h, const std::vector<int>& users) {
    const int k_users = static_cast<int>(h.cols()) / 2;
    RealChannel sub(h.rows(), 2 * static_cast<Eigen::Index>(users.size()));
    for (std::size_t j = 0; j < users.size(); ++j) {
        const int u = users[j];
        if (u < 0 || u >= k_users) throw std::invalid_argument("user index out of range");
        sub.col(static_cast<Eigen::Index>(j)) = h.col(u);
        sub.col(static_cast<Eigen::Index>(j + users.size())) = h.col(u + k_users);
    }
    return sub;
}

std::pair<std::vector<int>, std::vector<int>> partition_users(const RealChannel& h, int k1) {
    const int k_users = static_cast<int>(h.cols()) / 2;
    if (k1 < 1 || k1 >= k_users) throw std::invalid_argument("k1 must satisfy 1 <= k1 < K");

    auto complement = [&](const std::vector<int>& a) {
        std::vector<int> b;
        std::vector<bool> in_a(static_cast<std::size_t>(k_users), false);
        for (int u : a) in_a[static_cast<std::size_t>(u)] = true;
        for (int u = 0; u < k_users; ++u) {
            if (!in_a[static_cast<std::size_t>(u)]) b.push_back(u);
        }
        return b;
    };

    if (k_users <= 10) {
        // Lexicographic combination walk; strict improvement keeps the
        // lexicographically-smallest group on ties.
        std::vector<int> pick(static_cast<std::size_t>(k1));
        for (int i = 0; i < k1; ++i) pick[static_cast<std::size_t>(i)] = i;
        std::vector<int> best_a = pick;
        double best_score = -1.0;
        while (true) {
            const std::vector<int> b = complement(pick);
            const double s = partition_score(h, pick, b);
            if (s > best_score) {
                best_score = s;
                best_a = pick;
            }
            // next combination
            int i = k1 - 1;
            while (i >= 0 && pick[static_cast<std::size_t>(i)] == k_users - k1 + i) --i;
            if (i < 0) break;
            ++pick[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k1; ++j)
                pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
        }
        return {best_a, complement(best_a)};
    }

    // Greedy pair swaps from the identity split.
    std::vector<int> a(static_cast<std::size_t>(k1));
    for (int i = 0; i < k1; ++i) a[static_cast<std::size_t>(i)] = i;
    std::vector<int> b = complement(a);
    double score = partition_score(h, a, b);
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                std::swap(a[i], b[j]);
                const double s = partition_score(h, a, b);
                if (s > score) {
                    score = s;
                    improved = true;
                } else {
                    std::swap(a[i], b[j]);
                }
            }
        }
    }
    return {sorted_copy(a), sorted_copy(b)};
}

DetectionResult sic_decode(const LevelVector& r, const RealChannel& h, const Constellation& c,
                           const QuantizerSpec& q,
                           const std::pair<std::vector<int>, std::vector<int>>& partition,
                           InnerDetector inner) {
    const auto& [group_a, group_b] = partition;
    const int k_users = static_cast<int>(h.cols()) / 2;
    if (group_a.empty() || group_b.empty() ||
        group_a.size() + group_b.size() != static_cast<std::size_t>(k_users))
        throw std::invalid_argument("sic: invalid partition");

    const RealChannel ha = user_submatrix(h, group_a);
    const RealChannel hb = user_submatrix(h, group_b);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(h.rows());

    const Codebook cb1 = build_codebook(ha, c, q);
    const DetectionResult stage1 = decode_stage(r, ha, zero, c, q, cb1, inner);

    const Eigen::VectorXd offset = ha * real_input_vector(modulate(stage1.messages, c));
    const Codebook cb2 = build_codebook(hb, c, q, offset);
    const DetectionResult stage2 = decode_stage(r, hb, offset, c, q, cb2, inner);

    std::vector<int> w(static_cast<std::size_t>(k_users));
    for (std::size_t i = 0; i < group_a.size(); ++i)
        w[static_cast<std::size_t>(group_a[i])] = stage1.messages[i];
    for (std::size_t i = 0; i < group_b.size(); ++i)
        w[static_cast<std::size_t>(group_b[i])] = stage2.messages[i];

    DetectionResult res;
    res.index = messages_to_index(w, c.order);
    res.messages = std::move(w);
    res.score = stage2.score;
    res.tie_count = stage2.tie_count;
    res.degenerate = stage1.degenerate || stage2.degenerate;
    res.hypotheses = static_cast<std::uint64_t>(cb1.size() + cb2.size());
    return res;
}

}  // namespace qmimo
