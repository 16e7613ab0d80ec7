#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmimo/effective_channel.hpp"
#include "qmimo/harness.hpp"
#include "qmimo/rng.hpp"
#include "qmimo/training.hpp"

namespace {

struct CliOptions {
    qmimo::ExperimentConfig cfg;
    std::vector<std::string> detector_names = {"wmdd"};
    std::string training = "perfect";
    std::string out = "results.csv";
    std::string format = "csv";
    std::uint64_t samples = 10000;  // dmin-stats
    std::string observation;        // decode
    bool codebook_dump = false;
};

void add_model_flags(CLI::App* app, CliOptions& o) {
    app->add_option("--k", o.cfg.k_users, "number of users K");
    app->add_option("--nr", o.cfg.n_rx, "receive antennas Nr");
    app->add_option("--p", o.cfg.adc_levels, "ADC output levels (2 or 4)");
    app->add_option("--mod", o.cfg.modulation, "constellation")
        ->check(CLI::IsMember({"bpsk", "qpsk", "16qam"}));
    app->add_option("--snr-db", o.cfg.snr_db, "SNR grid in dB")->delimiter(',');
    app->add_option("--seed", o.cfg.master_seed, "master seed");
    app->add_option("--threads", o.cfg.threads, "worker threads");
    app->set_config("--config", "", "flat key=value config file; command line overrides");
}

void add_experiment_flags(CLI::App* app, CliOptions& o) {
    app->add_option("--detectors", o.detector_names, "detectors: mdd,emld,wmdd,zf")->delimiter(',');
    app->add_option("--training", o.training, "CSIR mode")
        ->check(CLI::IsMember({"perfect", "implicit", "explicit"}));
    app->add_option("--t", o.cfg.t_train, "training repetitions T per codeword");
    app->add_option("--tt", o.cfg.t_pilot, "pilot slots (explicit training)");
    app->add_flag("--symmetry", o.cfg.symmetry, "halve implicit training via codeword symmetry");
    app->add_option("--sic-k1", o.cfg.sic_k1, "first-stage group size (0 disables SIC)");
    app->add_option("--channel-draws", o.cfg.channel_draws, "channel realizations per SNR point");
    app->add_option("--noise-trials", o.cfg.noise_trials, "noise trials per channel draw");
    app->add_option("--out", o.out, "output path");
    app->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app->add_flag("--allow-overbudget", o.cfg.allow_overbudget,
                  "permit training overhead above 10% of the coherence block");
    app->add_option("--scheme", o.cfg.explicit_scheme, "explicit channel estimator")
        ->check(CLI::IsMember({"scaled_ls", "genie"}));
    app->add_option("--coherence", o.cfg.coherence, "coherence block length Tc");
    app->add_option("--floor", o.cfg.error_floor, "crossover probability floor");
}

void finalize(CliOptions& o) {
    o.cfg.detectors.clear();
    for (const std::string& n : o.detector_names)
        o.cfg.detectors.push_back(qmimo::detector_from_name(n));
    o.cfg.training = qmimo::training_from_name(o.training);
}

int run_decode(const CliOptions& o) {
    using namespace qmimo;
    const double snr = std::pow(10.0, o.cfg.snr_db.front() / 10.0);
    const Constellation c = Constellation::from_name(o.cfg.modulation, snr);
    const QuantizerSpec q = o.cfg.adc_levels == 2 ? one_bit_spec() : two_bit_spec(snr);

    Rng rng(derive_seed(o.cfg.master_seed, {0}));
    const ComplexChannel hc = sample_rayleigh(o.cfg.n_rx, o.cfg.k_users, rng);
    const RealChannel h = to_real_channel(hc);
    const Codebook cb = build_codebook(h, c, q);

    if (o.codebook_dump) {
        std::cout << "codebook " << cb.size() << " x " << cb.length() << " (d_min "
                  << cb.min_distance() << ")\n";
        for (Eigen::Index l = 0; l < cb.size(); ++l) {
            std::cout << l << ": ";
            for (Eigen::Index i = 0; i < cb.length(); ++i)
                std::cout << static_cast<int>(cb.codewords()(l, i));
            std::cout << '\n';
        }
    }
    if (o.observation.empty()) {
        if (!o.codebook_dump) {
            std::cerr << "decode: supply an observation digit string or --codebook-dump\n";
            return 1;
        }
        return 0;
    }
    if (static_cast<Eigen::Index>(o.observation.size()) != cb.length()) {
        std::cerr << "decode: observation must have " << cb.length() << " digits\n";
        return 1;
    }
    LevelVector r(cb.length());
    for (Eigen::Index i = 0; i < cb.length(); ++i) {
        const char ch = o.observation[static_cast<std::size_t>(i)];
        if (ch < '0' || ch >= '0' + o.cfg.adc_levels) {
            std::cerr << "decode: digit out of range: " << ch << '\n';
            return 1;
        }
        r(i) = static_cast<std::uint8_t>(ch - '0');
    }

    const TransitionTensor tensor = build_transition_tensor(h, c, q);
    const ErrorProbs eps = exact_error_probs(tensor, cb);
    for (DetectorKind kind : o.cfg.detectors) {
        DetectionResult res;
        switch (kind) {
            case DetectorKind::Mdd: res = mdd(r, cb); break;
            case DetectorKind::Emld: res = emld(r, tensor); break;
            case DetectorKind::Wmdd: res = wmdd(r, cb, eps); break;
            case DetectorKind::Zf: res = zf_detect(r, h, q, c); break;
        }
        std::cout << detector_name(kind) << ": index " << res.index << " messages [";
        for (std::size_t k = 0; k < res.messages.size(); ++k)
            std::cout << (k ? "," : "") << res.messages[k];
        std::cout << "] score " << res.score << " ties " << res.tie_count << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantized multiuser MIMO detection experiments"};
    app.require_subcommand(1);
    CliOptions o;

    CLI::App* sweep = app.add_subcommand("sweep", "BER sweep over an SNR grid");
    add_model_flags(sweep, o);
    add_experiment_flags(sweep, o);

    CLI::App* cond = app.add_subcommand("conditional-ber", "BER conditioned on d_min bins");
    add_model_flags(cond, o);
    add_experiment_flags(cond, o);
    cond->add_option("--dmin-bins", o.cfg.dmin_bins, "d_min values to condition on")->delimiter(',');
    cond->add_option("--draw-budget", o.cfg.draw_budget, "rejection-sampling attempts per bin");

    CLI::App* dmin = app.add_subcommand("dmin-stats", "d_min distribution over random channels");
    add_model_flags(dmin, o);
    dmin->add_option("--samples", o.samples, "channel draws");

    CLI::App* dec = app.add_subcommand("decode", "one-shot debug decode");
    add_model_flags(dec, o);
    dec->add_option("--detectors", o.detector_names, "detectors to run")->delimiter(',');
    dec->add_option("--obs", o.observation, "observation as a digit string");
    dec->add_flag("--codebook-dump", o.codebook_dump, "print the channel's codebook");

    CLI11_PARSE(app, argc, argv);

    try {
        finalize(o);
        if (sweep->parsed()) {
            qmimo::emit_results(qmimo::run_ber_sweep(o.cfg), o.format, o.out);
        } else if (cond->parsed()) {
            qmimo::emit_results(qmimo::run_conditional_ber(o.cfg), o.format, o.out);
        } else if (dmin->parsed()) {
            const qmimo::DminStats stats = qmimo::run_dmin_stats(o.cfg, o.samples);
            std::cout << "samples," << stats.samples << "\nmean," << stats.mean << '\n';
            for (const auto& [d, n] : stats.histogram) std::cout << d << ',' << n << '\n';
        } else if (dec->parsed()) {
            return run_decode(o);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
