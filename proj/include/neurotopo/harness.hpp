#ifndef NEUROTOPO_HARNESS_HPP
#define NEUROTOPO_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurotopo/geometry.hpp"
#include "neurotopo/rules.hpp"
#include "neurotopo/topology.hpp"

namespace neurotopo {

struct ModelConfig {
    std::size_t input_dim = 1;
    std::size_t hidden = 1000;
    std::size_t output_dim = 1;
    std::string loss = "mse";  // "mse" | "cross_entropy"
};

struct DataConfig {
    std::string kind = "teacher";  // "teacher" | "idx"
    std::size_t n = 5000;
    std::size_t teacher_hidden = 50;
    double train_fraction = 0.7;
    std::size_t batch_size = 128;
    std::string images_path;  // idx only
    std::string labels_path;  // idx only
};

struct InitConfig {
    std::string kind = "gaussian";  // "gaussian" or a manifold name
    double gaussian_std = 1.0;
    ManifoldSpec manifold;
    std::string embed_mode = "random_frame";  // "random_frame" | "zero_pad"
    double output_scale = 0.1;  // a-block noise for zero_pad embedding
    std::vector<std::int64_t> multiplicities;  // head of the multiplicity vector
};

struct RuleConfig {
    std::string name = "gd";  // "gd" | "momentum" | "adam"
    double mu = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::string adam_ordering = "paper";  // "paper" | "standard"
};

struct MeasureConfig {
    std::size_t betti_every = 100;
    std::size_t sharpness_every = 100;
    std::size_t snapshot_every = 100;
    double sharpness_tol = 1e-4;
    std::size_t sharpness_max_iters = 200;
};

struct TopologyConfig {
    bool adaptive = true;
    double fixed_scale = 0.0;
    int max_dim = 3;
    std::size_t subsample_cap = 2048;
    std::size_t budget = kDefaultSimplexBudget;
};

struct StopConfig {
    double loss_delta_tol = 0.0;
    std::size_t window = 0;  // measurement rows; 0 disables early stopping
};

struct RunConfig {
    ModelConfig model;
    DataConfig data;
    InitConfig init;
    RuleConfig rule;
    double eta = 1e-3;
    std::size_t steps = 1000;
    std::uint64_t seed = 0;
    MeasureConfig measure;
    TopologyConfig topology;
    std::optional<StopConfig> stop;
    std::string out_dir = "run";
    std::string notes;

    /// Parses and validates a config JSON document.
    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_json_file(const std::string& path);
    std::string to_json_text() const;
};

/// One metrics row; written as CSV with the schema
/// step,loss,test_metric,b0,b1,b2,scale,k_hat,eta_star,eta_times_k,min_pair_dist,max_pair_ratio
struct MetricsRow {
    std::size_t step = 0;
    double loss = 0.0;
    double test_metric = 0.0;
    std::int64_t b0 = 0, b1 = 0, b2 = 0;
    double scale = 0.0;
    double k_hat = 0.0;
    double eta_star = 0.0;
    double eta_times_k = 0.0;
    double min_pair_dist = 0.0;
    double max_pair_ratio = 1.0;
};

struct RunLog {
    std::string out_dir;
    std::string manifest_json;
    std::vector<MetricsRow> metrics;
    std::vector<std::string> snapshot_files;  // relative to out_dir
    bool diverged = false;
    std::size_t diverged_step = 0;
};

/// Executes a full experiment: initialization, training with scheduled
/// measurements, and persistence into config.out_dir (manifest.json,
/// metrics.csv, snapshots/). Fully deterministic given (config, seed).
RunLog run(const RunConfig& config);

/// Parses a metrics.csv produced by run().
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

/// Replays the trajectory invariance checks over a recorded run directory and returns
/// the TrajectoryCheckReport as a JSON document. Stateful rules are evaluated
/// with reset optimizer state around the stored theta-clouds.
std::string check_run_directory(const std::string& run_dir);

/// Renders loss / Betti / sharpness-inversion line charts for a run directory
/// as a static SVG document.
std::string render_report_svg(const std::string& run_dir);

extern const char* kMetricsHeader;
extern const char* kVersion;

} // namespace neurotopo

#endif
