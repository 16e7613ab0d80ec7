#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qmimo/detectors.hpp"
#include "qmimo/model.hpp"

namespace qmimo {

enum class DetectorKind { Mdd, Emld, Wmdd, Zf };
enum class TrainingKind { Perfect, Implicit, Explicit };

std::string detector_name(DetectorKind d);
DetectorKind detector_from_name(const std::string& name);
std::string training_name(TrainingKind t);
TrainingKind training_from_name(const std::string& name);

struct ExperimentConfig {
    int k_users = 2;
    int n_rx = 4;
    int adc_levels = 2;  // 2 (one-bit) or 4 (two-bit)
    std::string modulation = "qpsk";
    std::vector<double> snr_db = {10.0};
    std::vector<DetectorKind> detectors = {DetectorKind::Wmdd};
    TrainingKind training = TrainingKind::Perfect;
    int t_train = 4;                          // T repetitions per codeword
    int t_pilot = 20;                         // pilot slots (explicit)
    bool symmetry = false;                    // implicit overhead halving
    std::string explicit_scheme = "scaled_ls";  // or "genie"
    int coherence = 1000;                     // T_c
    int channel_draws = 100;
    int noise_trials = 1000;
    std::uint64_t master_seed = 1;
    std::vector<int> dmin_bins;
    std::uint64_t draw_budget = 100000;  // rejection-sampling attempts per bin
    int sic_k1 = 0;                      // 0 disables SIC
    bool allow_overbudget = false;
    int threads = 1;
    double error_floor = 1e-3;
    double noise_sigma = kNoiseSigma;  // test hook; 0 = noiseless
};

struct ResultRow {
    double snr_db = 0.0;
    std::string detector;
    int k = 0, nr = 0, p = 0, m = 0;
    std::string training;
    int dmin_bin = -1;  // -1 when unbinned
    std::uint64_t trials = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0.0;
    std::uint64_t cw_errors = 0;
    double cwer = 0.0;
    std::uint64_t seed = 0;
    // Per-user message-symbol errors; serialized in JSON output only.
    std::uint64_t sym_errors = 0;
    double ser = 0.0;
};

/// Throws std::invalid_argument on inconsistent configs, including training
/// overhead above 10% of the coherence block without allow_overbudget.
void validate(const ExperimentConfig& cfg);

std::uint64_t training_overhead(const ExperimentConfig& cfg);

std::vector<ResultRow> run_ber_sweep(const ExperimentConfig& cfg);

/// Rejection-samples channels into d_min bins and reports per-bin rates.
/// Unreachable bins within the draw budget come back with trials = 0.
std::vector<ResultRow> run_conditional_ber(const ExperimentConfig& cfg);

struct DminStats {
    std::map<int, std::uint64_t> histogram;
    double mean = 0.0;
    std::uint64_t samples = 0;
};

DminStats run_dmin_stats(const ExperimentConfig& cfg, std::uint64_t samples);

std::string to_csv(const std::vector<ResultRow>& rows);
std::string to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);

void emit_results(const std::vector<ResultRow>& rows, const std::string& format,
                  const std::string& path);

}  // namespace qmimo
