#include "qmimo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "qmimo/effective_channel.hpp"
#include "qmimo/rng.hpp"
#include "qmimo/training.hpp"

namespace qmimo {

namespace {

constexpr std::uint64_t kSweepTag = 0x53574545;
constexpr std::uint64_t kCondTag = 0x434f4e44;
constexpr std::uint64_t kDminTag = 0x444d494e;

struct Counts {
    std::uint64_t trials = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t cw_errors = 0;
    std::uint64_t sym_errors = 0;
};

std::uint64_t hypothesis_count(int m, int k_users) {
    std::uint64_t n = 1;
    for (int k = 0; k < k_users; ++k) n *= static_cast<std::uint64_t>(m);
    return n;
}

Constellation make_constellation(const ExperimentConfig& cfg, double snr) {
    return Constellation::from_name(cfg.modulation, snr);
}

QuantizerSpec make_quantizer(const ExperimentConfig& cfg, double snr) {
    if (cfg.adc_levels == 2) return one_bit_spec();
    if (cfg.adc_levels == 4) return two_bit_spec(snr);
    throw std::invalid_argument("adc_levels must be 2 or 4");
}

bool wants(const ExperimentConfig& cfg, DetectorKind d) {
    return std::find(cfg.detectors.begin(), cfg.detectors.end(), d) != cfg.detectors.end();
}

void parallel_for(std::uint64_t n, int threads, const std::function<void(std::uint64_t)>& body) {
    if (threads <= 1 || n <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    const int count = std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), n);
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) {
        pool.emplace_back([&] {
            for (std::uint64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

InnerDetector to_inner(DetectorKind d) {
    switch (d) {
        case DetectorKind::Mdd: return InnerDetector::Mdd;
        case DetectorKind::Wmdd: return InnerDetector::Wmdd;
        case DetectorKind::Emld: return InnerDetector::Emld;
        default: throw std::invalid_argument("zf has no SIC form");
    }
}

// All decode-time material for one channel draw under one config.
struct DrawResources {
    RealChannel h;
    std::optional<Codebook> cb_mdd;
    std::optional<Codebook> cb_wmdd;
    std::optional<ErrorProbs> eps_wmdd;
    std::optional<TransitionTensor> tensor;  // for eMLD
    std::optional<RealChannel> h_zf;
    std::optional<std::pair<std::vector<int>, std::vector<int>>> partition;
};

DrawResources prepare_draw(const ExperimentConfig& cfg, const Constellation& c,
                           const QuantizerSpec& q, const ComplexChannel& hc, double snr,
                           std::uint64_t seed) {
    DrawResources res;
    res.h = to_real_channel(hc);
    const bool use_sic = cfg.sic_k1 > 0;

    RealChannel h_hat;
    if (cfg.training == TrainingKind::Explicit) {
        Rng pilot_rng(derive_seed(seed, {3}));
        if (cfg.explicit_scheme == "genie") {
            const double sigma_e = std::sqrt(1.0 / (cfg.t_pilot * snr));
            h_hat = estimate_channel_genie(res.h, sigma_e, pilot_rng);
        } else {
            const auto pilots = dft_pilots(cfg.k_users, cfg.t_pilot, snr);
            const auto po = observe_pilots(hc, pilots, q, pilot_rng, cfg.noise_sigma);
            h_hat = to_real_channel(scaled_ls_estimate(po, q));
        }
    }

    std::optional<TrainingOutput> trained;
    if (cfg.training == TrainingKind::Implicit) {
        Rng train_rng(derive_seed(seed, {1}));
        trained = implicit_train(res.h, c, q, cfg.t_train, cfg.symmetry, train_rng, cfg.error_floor,
                                 cfg.noise_sigma);
    } else if (cfg.training == TrainingKind::Explicit) {
        Rng train_rng(derive_seed(seed, {1}));
        trained = explicit_train(h_hat, c, q, cfg.t_train, train_rng,
                                 static_cast<std::uint64_t>(cfg.t_pilot), cfg.error_floor,
                                 cfg.noise_sigma);
    }

    if (use_sic) {
        res.partition = partition_users(res.h, cfg.sic_k1);
        if (wants(cfg, DetectorKind::Zf)) res.h_zf = res.h;
        return res;
    }

    std::optional<Codebook> cb_exact;
    auto exact_cb = [&]() -> const Codebook& {
        if (!cb_exact) cb_exact = build_codebook(res.h, c, q);
        return *cb_exact;
    };

    if (wants(cfg, DetectorKind::Emld)) {
        // eMLD sees the true channel under perfect CSIR and the estimated
        // channel under explicit training.
        const RealChannel& h_for_tensor =
            cfg.training == TrainingKind::Explicit ? h_hat : res.h;
        res.tensor = build_transition_tensor(h_for_tensor, c, q);
    }
    if (wants(cfg, DetectorKind::Mdd)) {
        res.cb_mdd = trained ? trained->codebook_hat : exact_cb();
    }
    if (wants(cfg, DetectorKind::Wmdd)) {
        if (trained) {
            res.cb_wmdd = trained->codebook_hat;
            res.eps_wmdd = trained->eps_hat;
        } else {
            res.cb_wmdd = exact_cb();
            const TransitionTensor exact_tensor =
                res.tensor && cfg.training == TrainingKind::Perfect
                    ? *res.tensor
                    : build_transition_tensor(res.h, c, q);
            res.eps_wmdd = exact_error_probs(exact_tensor, *res.cb_wmdd);
        }
    }
    if (wants(cfg, DetectorKind::Zf)) {
        res.h_zf = cfg.training == TrainingKind::Explicit ? h_hat : res.h;
    }
    return res;
}

std::vector<Counts> run_draw_with_channel(const ExperimentConfig& cfg, const Constellation& c,
                                          const QuantizerSpec& q, const ComplexChannel& hc,
                                          double snr, std::uint64_t seed) {
    const DrawResources res = prepare_draw(cfg, c, q, hc, snr, seed);
    const std::uint64_t m_pow_k = hypothesis_count(c.order, cfg.k_users);

    std::vector<Counts> counts(cfg.detectors.size());
    Rng trial_rng(derive_seed(seed, {2}));
    std::uniform_int_distribution<std::uint64_t> pick(0, m_pow_k - 1);

    for (int t = 0; t < cfg.noise_trials; ++t) {
        const std::uint64_t sent = pick(trial_rng);
        const std::vector<int> w = index_to_messages(sent, c.order, cfg.k_users);
        const Eigen::VectorXd x = real_input_vector(modulate(w, c));
        const LevelVector r = observe(res.h, x, q, trial_rng, cfg.noise_sigma);

        for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
            const DetectorKind kind = cfg.detectors[d];
            DetectionResult dec;
            if (cfg.sic_k1 > 0 && kind != DetectorKind::Zf) {
                dec = sic_decode(r, res.h, c, q, *res.partition, to_inner(kind));
            } else {
                switch (kind) {
                    case DetectorKind::Mdd: dec = mdd(r, *res.cb_mdd); break;
                    case DetectorKind::Emld: dec = emld(r, *res.tensor); break;
                    case DetectorKind::Wmdd: dec = wmdd(r, *res.cb_wmdd, *res.eps_wmdd); break;
                    case DetectorKind::Zf: dec = zf_detect(r, *res.h_zf, q, c); break;
                }
            }
            Counts& cnt = counts[d];
            ++cnt.trials;
            cnt.cw_errors += dec.index != sent;
            for (int k = 0; k < cfg.k_users; ++k) {
                const unsigned diff = static_cast<unsigned>(w[static_cast<std::size_t>(k)] ^
                                                            dec.messages[static_cast<std::size_t>(k)]);
                cnt.bit_errors += static_cast<std::uint64_t>(std::popcount(diff));
                cnt.sym_errors += diff != 0;
            }
        }
    }
    return counts;
}

ResultRow make_row(const ExperimentConfig& cfg, double snr_db, DetectorKind kind, int dmin_bin,
                   const Counts& cnt, int bits_per_symbol) {
    ResultRow row;
    row.snr_db = snr_db;
    row.detector = detector_name(kind);
    row.k = cfg.k_users;
    row.nr = cfg.n_rx;
    row.p = cfg.adc_levels;
    row.m = 1 << bits_per_symbol;
    row.training = training_name(cfg.training);
    row.dmin_bin = dmin_bin;
    row.trials = cnt.trials;
    row.bit_errors = cnt.bit_errors;
    row.cw_errors = cnt.cw_errors;
    row.sym_errors = cnt.sym_errors;
    row.seed = cfg.master_seed;
    const std::uint64_t bits = cnt.trials * static_cast<std::uint64_t>(cfg.k_users) *
                               static_cast<std::uint64_t>(bits_per_symbol);
    const std::uint64_t syms = cnt.trials * static_cast<std::uint64_t>(cfg.k_users);
    row.ber = bits ? static_cast<double>(cnt.bit_errors) / static_cast<double>(bits) : 0.0;
    row.cwer = cnt.trials ? static_cast<double>(cnt.cw_errors) / static_cast<double>(cnt.trials) : 0.0;
    row.ser = syms ? static_cast<double>(cnt.sym_errors) / static_cast<double>(syms) : 0.0;
    return row;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string detector_name(DetectorKind d) {
    switch (d) {
        case DetectorKind::Mdd: return "mdd";
        case DetectorKind::Emld: return "emld";
        case DetectorKind::Wmdd: return "wmdd";
        case DetectorKind::Zf: return "zf";
    }
    throw std::logic_error("unreachable");
}

DetectorKind detector_from_name(const std::string& name) {
    if (name == "mdd") return DetectorKind::Mdd;
    if (name == "emld") return DetectorKind::Emld;
    if (name == "wmdd") return DetectorKind::Wmdd;
    if (name == "zf") return DetectorKind::Zf;
    throw std::invalid_argument("unknown detector: " + name);
}

std::string training_name(TrainingKind t) {
    switch (t) {
        case TrainingKind::Perfect: return "perfect";
        case TrainingKind::Implicit: return "implicit";
        case TrainingKind::Explicit: return "explicit";
    }
    throw std::logic_error("unreachable");
}

TrainingKind training_from_name(const std::string& name) {
    if (name == "perfect") return TrainingKind::Perfect;
    if (name == "implicit") return TrainingKind::Implicit;
    if (name == "explicit") return TrainingKind::Explicit;
    throw std::invalid_argument("unknown training mode: " + name);
}

std::uint64_t training_overhead(const ExperimentConfig& cfg) {
    switch (cfg.training) {
        case TrainingKind::Perfect:
            return 0;
        case TrainingKind::Implicit: {
            const Constellation c = make_constellation(cfg, 1.0);
            std::uint64_t overhead =
                static_cast<std::uint64_t>(cfg.t_train) * hypothesis_count(c.order, cfg.k_users);
            if (cfg.symmetry) overhead /= 2;
            return overhead;
        }
        case TrainingKind::Explicit:
            return static_cast<std::uint64_t>(cfg.t_pilot);
    }
    throw std::logic_error("unreachable");
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.k_users < 1 || cfg.n_rx < 1) throw std::invalid_argument("k and nr must be >= 1");
    if (cfg.adc_levels != 2 && cfg.adc_levels != 4)
        throw std::invalid_argument("adc_levels must be 2 or 4");
    if (cfg.detectors.empty()) throw std::invalid_argument("empty detector set");
    if (cfg.snr_db.empty()) throw std::invalid_argument("empty snr grid");
    for (double db : cfg.snr_db) {
        if (!std::isfinite(db)) throw std::invalid_argument("snr grid must be finite");
    }
    if (cfg.channel_draws < 1 || cfg.noise_trials < 1)
        throw std::invalid_argument("trial counts must be positive");
    if (cfg.t_train < 1) throw std::invalid_argument("t must be >= 1");
    if (cfg.coherence < 1) throw std::invalid_argument("coherence must be positive");

    const Constellation c = make_constellation(cfg, 1.0);
    if (cfg.sic_k1 < 0 || (cfg.sic_k1 > 0 && cfg.sic_k1 >= cfg.k_users))
        throw std::invalid_argument("sic k1 must satisfy 1 <= k1 < K");
    if (cfg.sic_k1 > 0 && cfg.training != TrainingKind::Perfect)
        throw std::invalid_argument("SIC decoding requires perfect CSIR");
    if (cfg.sic_k1 == 0 && hypothesis_count(c.order, cfg.k_users) > kMaxCodebookSize)
        throw std::invalid_argument("codebook infeasible at this size; enable SIC (--sic-k1)");

    if (cfg.training == TrainingKind::Implicit) {
        if (wants(cfg, DetectorKind::Emld))
            throw std::invalid_argument("emld needs transition probabilities; not available with implicit training");
        if (wants(cfg, DetectorKind::Zf))
            throw std::invalid_argument("zf needs a channel estimate; not available with implicit training");
        if (cfg.symmetry && !c.negation_symmetric_labeling())
            throw std::invalid_argument("symmetry reduction needs a negation-symmetric labeling");
    }
    if (cfg.training == TrainingKind::Explicit) {
        if (cfg.explicit_scheme != "genie" && cfg.explicit_scheme != "scaled_ls")
            throw std::invalid_argument("unknown explicit scheme: " + cfg.explicit_scheme);
        if (cfg.explicit_scheme == "scaled_ls" && cfg.t_pilot < 2 * cfg.k_users)
            throw std::invalid_argument("scaled_ls needs t_pilot >= 2K");
    }

    const std::uint64_t overhead = training_overhead(cfg);
    if (!cfg.allow_overbudget &&
        overhead * 10 > static_cast<std::uint64_t>(cfg.coherence))
        throw std::invalid_argument("training overhead exceeds 10% of the coherence block; "
                                    "pass --allow-overbudget to override");
}

std::vector<ResultRow> run_ber_sweep(const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<ResultRow> rows;
    const int bits = make_constellation(cfg, 1.0).bits_per_symbol();

    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
        const double snr = std::pow(10.0, cfg.snr_db[s] / 10.0);
        const Constellation c = make_constellation(cfg, snr);
        const QuantizerSpec q = make_quantizer(cfg, snr);

        std::vector<std::vector<Counts>> per_draw(static_cast<std::size_t>(cfg.channel_draws));
        parallel_for(static_cast<std::uint64_t>(cfg.channel_draws), cfg.threads,
                     [&](std::uint64_t d) {
                         const std::uint64_t seed = derive_seed(cfg.master_seed, {kSweepTag, s, d});
                         Rng ch_rng(derive_seed(seed, {0}));
                         const ComplexChannel hc = sample_rayleigh(cfg.n_rx, cfg.k_users, ch_rng);
                         per_draw[d] = run_draw_with_channel(cfg, c, q, hc, snr, seed);
                     });

        for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
            Counts total;
            for (const auto& draw : per_draw) {
                total.trials += draw[d].trials;
                total.bit_errors += draw[d].bit_errors;
                total.cw_errors += draw[d].cw_errors;
                total.sym_errors += draw[d].sym_errors;
            }
            rows.push_back(make_row(cfg, cfg.snr_db[s], cfg.detectors[d], -1, total, bits));
        }
    }
    return rows;
}

std::vector<ResultRow> run_conditional_ber(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.dmin_bins.empty()) throw std::invalid_argument("conditional BER needs --dmin-bins");
    const int bits = make_constellation(cfg, 1.0).bits_per_symbol();

    std::vector<ResultRow> rows;
    for (int bin : cfg.dmin_bins) {
        // One-bit codebooks are SNR-invariant and two-bit codebooks scale
        // jointly with SNR, so acceptance at any grid point is valid for all.
        const double snr0 = std::pow(10.0, cfg.snr_db.front() / 10.0);
        const Constellation c0 = make_constellation(cfg, snr0);
        const QuantizerSpec q0 = make_quantizer(cfg, snr0);

        std::vector<std::uint64_t> accepted;
        std::uint64_t attempt = 0;
        for (; attempt < cfg.draw_budget &&
               accepted.size() < static_cast<std::size_t>(cfg.channel_draws);
             ++attempt) {
            const std::uint64_t seed =
                derive_seed(cfg.master_seed, {kCondTag, static_cast<std::uint64_t>(bin), attempt});
            Rng ch_rng(derive_seed(seed, {0}));
            const ComplexChannel hc = sample_rayleigh(cfg.n_rx, cfg.k_users, ch_rng);
            const Codebook cb = build_codebook(to_real_channel(hc), c0, q0);
            if (cb.min_distance() == bin) accepted.push_back(attempt);
        }
        std::cerr << "dmin bin " << bin << ": accepted " << accepted.size() << " of " << attempt
                  << " attempts\n";

        for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
            const double snr = std::pow(10.0, cfg.snr_db[s] / 10.0);
            const Constellation c = make_constellation(cfg, snr);
            const QuantizerSpec q = make_quantizer(cfg, snr);

            std::vector<std::vector<Counts>> per_draw(accepted.size());
            parallel_for(accepted.size(), cfg.threads, [&](std::uint64_t i) {
                const std::uint64_t attempt_id = accepted[i];
                const std::uint64_t ch_seed = derive_seed(
                    cfg.master_seed, {kCondTag, static_cast<std::uint64_t>(bin), attempt_id});
                Rng ch_rng(derive_seed(ch_seed, {0}));
                const ComplexChannel hc = sample_rayleigh(cfg.n_rx, cfg.k_users, ch_rng);
                const std::uint64_t seed = derive_seed(
                    cfg.master_seed, {kCondTag, static_cast<std::uint64_t>(bin), attempt_id, s + 1});
                per_draw[i] = run_draw_with_channel(cfg, c, q, hc, snr, seed);
            });

            for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
                Counts total;
                for (const auto& draw : per_draw) {
                    total.trials += draw[d].trials;
                    total.bit_errors += draw[d].bit_errors;
                    total.cw_errors += draw[d].cw_errors;
                    total.sym_errors += draw[d].sym_errors;
                }
                rows.push_back(make_row(cfg, cfg.snr_db[s], cfg.detectors[d], bin, total, bits));
            }
        }
    }
    return rows;
}

DminStats run_dmin_stats(const ExperimentConfig& cfg, std::uint64_t samples) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    const double snr = std::pow(10.0, cfg.snr_db.front() / 10.0);
    const Constellation c = make_constellation(cfg, snr);
    const QuantizerSpec q = make_quantizer(cfg, snr);

    std::vector<int> dmin(samples);
    parallel_for(samples, cfg.threads, [&](std::uint64_t i) {
        Rng rng(derive_seed(cfg.master_seed, {kDminTag, i}));
        const ComplexChannel hc = sample_rayleigh(cfg.n_rx, cfg.k_users, rng);
        dmin[i] = build_codebook(to_real_channel(hc), c, q).min_distance();
    });

    DminStats stats;
    stats.samples = samples;
    double sum = 0.0;
    for (int d : dmin) {
        ++stats.histogram[d];
        sum += d;
    }
    stats.mean = sum / static_cast<double>(samples);
    return stats;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "snr_db,detector,k,nr,p,m,training,dmin_bin,trials,bit_errors,ber,cw_errors,cwer,seed\n";
    for (const ResultRow& r : rows) {
        out << fmt_double(r.snr_db) << ',' << r.detector << ',' << r.k << ',' << r.nr << ',' << r.p
            << ',' << r.m << ',' << r.training << ',' << r.dmin_bin << ',' << r.trials << ','
            << r.bit_errors << ',' << fmt_double(r.ber) << ',' << r.cw_errors << ','
            << fmt_double(r.cwer) << ',' << r.seed << '\n';
    }
    return out.str();
}

std::string to_json(const std::vector<ResultRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ResultRow& r : rows) {
        arr.push_back({{"snr_db", r.snr_db},
                       {"detector", r.detector},
                       {"k", r.k},
                       {"nr", r.nr},
                       {"p", r.p},
                       {"m", r.m},
                       {"training", r.training},
                       {"dmin_bin", r.dmin_bin},
                       {"trials", r.trials},
                       {"bit_errors", r.bit_errors},
                       {"ber", r.ber},
                       {"cw_errors", r.cw_errors},
                       {"cwer", r.cwer},
                       {"seed", r.seed},
                       {"sym_errors", r.sym_errors},
                       {"ser", r.ser}});
    }
    return nlohmann::json{{"results", arr}}.dump(2) + "\n";
}

std::vector<ResultRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 14) throw std::invalid_argument("malformed CSV row: " + line);
        ResultRow r;
        r.snr_db = std::stod(fields[0]);
        r.detector = fields[1];
        r.k = std::stoi(fields[2]);
        r.nr = std::stoi(fields[3]);
        r.p = std::stoi(fields[4]);
        r.m = std::stoi(fields[5]);
        r.training = fields[6];
        r.dmin_bin = std::stoi(fields[7]);
        r.trials = std::stoull(fields[8]);
        r.bit_errors = std::stoull(fields[9]);
        r.ber = std::stod(fields[10]);
        r.cw_errors = std::stoull(fields[11]);
        r.cwer = std::stod(fields[12]);
        r.seed = std::stoull(fields[13]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& format,
                  const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("no results to emit");
    std::string body;
    if (format == "csv") {
        body = to_csv(rows);
    } else if (format == "json") {
        body = to_json(rows);
    } else {
        throw std::invalid_argument("unknown output format: " + format);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << body;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace qmimo
