#include "neurotopo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "neurotopo/diagnostics.hpp"
#include "neurotopo/models.hpp"
#include "neurotopo/rng.hpp"
#include "neurotopo/sharpness.hpp"

namespace neurotopo {

using nlohmann::json;

const char* kMetricsHeader =
    "step,loss,test_metric,b0,b1,b2,scale,k_hat,eta_star,eta_times_k,"
    "min_pair_dist,max_pair_ratio";
const char* kVersion = "neurotopo 0.1.0";

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void expect_object(const json& j, const std::string& what) {
    if (!j.is_object()) throw FormatError("config: '" + what + "' must be an object");
}

} // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: invalid JSON: ") + e.what());
    }
    expect_object(j, "config");

    RunConfig cfg;
    try {
        if (j.contains("model")) {
            const auto& m = j.at("model");
            expect_object(m, "model");
            read_field(m, "input_dim", cfg.model.input_dim);
            read_field(m, "hidden", cfg.model.hidden);
            read_field(m, "output_dim", cfg.model.output_dim);
            read_field(m, "loss", cfg.model.loss);
        }
        if (j.contains("data")) {
            const auto& d = j.at("data");
            expect_object(d, "data");
            read_field(d, "kind", cfg.data.kind);
            read_field(d, "n", cfg.data.n);
            read_field(d, "teacher_hidden", cfg.data.teacher_hidden);
            read_field(d, "train_fraction", cfg.data.train_fraction);
            read_field(d, "batch_size", cfg.data.batch_size);
            read_field(d, "images", cfg.data.images_path);
            read_field(d, "labels", cfg.data.labels_path);
        }
        if (j.contains("init")) {
            const auto& i = j.at("init");
            expect_object(i, "init");
            read_field(i, "kind", cfg.init.kind);
            read_field(i, "gaussian_std", cfg.init.gaussian_std);
            read_field(i, "embed_mode", cfg.init.embed_mode);
            read_field(i, "output_scale", cfg.init.output_scale);
            read_field(i, "multiplicities", cfg.init.multiplicities);
            auto& m = cfg.init.manifold;
            read_field(i, "radius", m.radius);
            read_field(i, "separation", m.separation);
            read_field(i, "outer_radius", m.outer_radius);
            read_field(i, "hole_radius", m.hole_radius);
            read_field(i, "hole_offset", m.hole_offset);
            read_field(i, "major_radius", m.major_radius);
            read_field(i, "minor_radius", m.minor_radius);
            read_field(i, "genus2_s", m.genus2_s);
            read_field(i, "genus2_t", m.genus2_t);
            if (cfg.init.kind != "gaussian")
                m.kind = manifold_kind_from_string(cfg.init.kind);
        }
        read_field(j, "rule", cfg.rule.name);
        read_field(j, "mu", cfg.rule.mu);
        read_field(j, "beta1", cfg.rule.beta1);
        read_field(j, "beta2", cfg.rule.beta2);
        read_field(j, "epsilon", cfg.rule.epsilon);
        read_field(j, "adam_ordering", cfg.rule.adam_ordering);
        read_field(j, "eta", cfg.eta);
        read_field(j, "steps", cfg.steps);
        read_field(j, "seed", cfg.seed);
        if (j.contains("measure")) {
            const auto& m = j.at("measure");
            expect_object(m, "measure");
            read_field(m, "betti_every", cfg.measure.betti_every);
            read_field(m, "sharpness_every", cfg.measure.sharpness_every);
            read_field(m, "snapshot_every", cfg.measure.snapshot_every);
            read_field(m, "sharpness_tol", cfg.measure.sharpness_tol);
            read_field(m, "sharpness_max_iters", cfg.measure.sharpness_max_iters);
        }
        if (j.contains("topology")) {
            const auto& t = j.at("topology");
            expect_object(t, "topology");
            if (t.contains("scale")) {
                if (t.at("scale").is_string()) {
                    if (t.at("scale").get<std::string>() != "adaptive")
                        throw FormatError("config: topology.scale must be 'adaptive' or a number");
                    cfg.topology.adaptive = true;
                } else {
                    cfg.topology.adaptive = false;
                    cfg.topology.fixed_scale = t.at("scale").get<double>();
                }
            }
            read_field(t, "max_dim", cfg.topology.max_dim);
            read_field(t, "subsample_cap", cfg.topology.subsample_cap);
            read_field(t, "budget", cfg.topology.budget);
        }
        if (j.contains("stop")) {
            const auto& s = j.at("stop");
            expect_object(s, "stop");
            StopConfig stop;
            read_field(s, "loss_delta_tol", stop.loss_delta_tol);
            read_field(s, "window", stop.window);
            cfg.stop = stop;
        }
        read_field(j, "out_dir", cfg.out_dir);
        read_field(j, "notes", cfg.notes);
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }

    // Validation.
    if (!(cfg.eta > 0.0)) throw FormatError("config: eta must be positive");
    if (cfg.measure.betti_every < 1 || cfg.measure.sharpness_every < 1 ||
        cfg.measure.snapshot_every < 1)
        throw FormatError("config: measurement cadences must be >= 1");
    if (cfg.model.loss != "mse" && cfg.model.loss != "cross_entropy")
        throw FormatError("config: model.loss must be 'mse' or 'cross_entropy'");
    if (cfg.rule.name != "gd" && cfg.rule.name != "momentum" && cfg.rule.name != "adam")
        throw FormatError("config: rule must be 'gd', 'momentum' or 'adam'");
    if (cfg.rule.adam_ordering != "paper" && cfg.rule.adam_ordering != "standard")
        throw FormatError("config: adam_ordering must be 'paper' or 'standard'");
    if (cfg.init.embed_mode != "random_frame" && cfg.init.embed_mode != "zero_pad")
        throw FormatError("config: embed_mode must be 'random_frame' or 'zero_pad'");
    if (cfg.data.kind == "idx") {
        if (!std::filesystem::exists(cfg.data.images_path))
            throw FormatError("config: idx images file not found: " + cfg.data.images_path);
        if (!std::filesystem::exists(cfg.data.labels_path))
            throw FormatError("config: idx labels file not found: " + cfg.data.labels_path);
    } else if (cfg.data.kind != "teacher") {
        throw FormatError("config: data.kind must be 'teacher' or 'idx'");
    }
    if (cfg.topology.max_dim < 1 || cfg.topology.max_dim > 3)
        throw FormatError("config: topology.max_dim must be in {1,2,3}");
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string RunConfig::to_json_text() const {
    json j;
    j["model"] = {{"input_dim", model.input_dim},
                  {"hidden", model.hidden},
                  {"output_dim", model.output_dim},
                  {"loss", model.loss}};
    j["data"] = {{"kind", data.kind},         {"n", data.n},
                 {"teacher_hidden", data.teacher_hidden},
                 {"train_fraction", data.train_fraction},
                 {"batch_size", data.batch_size}};
    if (data.kind == "idx") {
        j["data"]["images"] = data.images_path;
        j["data"]["labels"] = data.labels_path;
    }
    j["init"] = {{"kind", init.kind},
                 {"gaussian_std", init.gaussian_std},
                 {"embed_mode", init.embed_mode},
                 {"output_scale", init.output_scale}};
    if (!init.multiplicities.empty()) j["init"]["multiplicities"] = init.multiplicities;
    if (init.kind != "gaussian") {
        const auto& m = init.manifold;
        j["init"]["radius"] = m.radius;
        j["init"]["separation"] = m.separation;
        j["init"]["outer_radius"] = m.outer_radius;
        j["init"]["hole_radius"] = m.hole_radius;
        j["init"]["hole_offset"] = m.hole_offset;
        j["init"]["major_radius"] = m.major_radius;
        j["init"]["minor_radius"] = m.minor_radius;
        j["init"]["genus2_s"] = m.genus2_s;
        j["init"]["genus2_t"] = m.genus2_t;
    }
    j["rule"] = rule.name;
    j["mu"] = rule.mu;
    j["beta1"] = rule.beta1;
    j["beta2"] = rule.beta2;
    j["epsilon"] = rule.epsilon;
    j["adam_ordering"] = rule.adam_ordering;
    j["eta"] = eta;
    j["steps"] = steps;
    j["seed"] = seed;
    j["measure"] = {{"betti_every", measure.betti_every},
                    {"sharpness_every", measure.sharpness_every},
                    {"snapshot_every", measure.snapshot_every},
                    {"sharpness_tol", measure.sharpness_tol},
                    {"sharpness_max_iters", measure.sharpness_max_iters}};
    if (topology.adaptive)
        j["topology"]["scale"] = "adaptive";
    else
        j["topology"]["scale"] = topology.fixed_scale;
    j["topology"]["max_dim"] = topology.max_dim;
    j["topology"]["subsample_cap"] = topology.subsample_cap;
    j["topology"]["budget"] = topology.budget;
    if (stop) {
        j["stop"] = {{"loss_delta_tol", stop->loss_delta_tol}, {"window", stop->window}};
    }
    j["out_dir"] = out_dir;
    if (!notes.empty()) j["notes"] = notes;
    return j.dump(2);
}

namespace {

std::string format_double(double v) {
    char buf[40];
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Training state: the packed collection plus the step counter for Adam.
struct RuleState {
    ParticleCollection packed;
    std::int64_t adam_t = 1;
};

ParticleCollection initial_neurons(const RunConfig& cfg) {
    const std::size_t D = cfg.model.input_dim + cfg.model.output_dim;
    ParticleCollection cloud(cfg.model.hidden, D);
    if (cfg.init.kind == "gaussian") {
        for (std::size_t i = 0; i < cloud.count(); ++i) {
            Rng rng = Rng::substream(cfg.seed, 0x1417 + i);
            for (std::size_t k = 0; k < D; ++k)
                cloud(i, k) = rng.normal(0.0, cfg.init.gaussian_std);
        }
    } else {
        ManifoldSpec spec = cfg.init.manifold;
        spec.n = cfg.model.hidden;
        spec.seed = cfg.seed;
        ParticleCollection sampled = sample(spec);
        if (sampled.dim() > D)
            throw PreconditionError(
                "init: manifold dimension exceeds neuron dimension d + C");
        if (sampled.dim() == D) {
            cloud = std::move(sampled);
        } else {
            const EmbedMode mode = cfg.init.embed_mode == "zero_pad"
                                       ? EmbedMode::zero_pad
                                       : EmbedMode::random_frame;
            cloud = embed(sampled, D, cfg.seed ^ 0xe4bedULL, mode);
            if (mode == EmbedMode::zero_pad && cfg.init.output_scale > 0.0) {
                // Give the padded output block a small random component so
                // that first-layer gradients are not identically zero.
                Rng rng = Rng::substream(cfg.seed, 0x0417b10c);
                for (std::size_t i = 0; i < cloud.count(); ++i)
                    for (std::size_t c = 0; c < cfg.model.output_dim; ++c)
                        cloud(i, cfg.model.input_dim + c) =
                            rng.normal(0.0, cfg.init.output_scale);
            }
        }
    }
    if (!cfg.init.multiplicities.empty()) {
        std::vector<std::int64_t> mult(cloud.count(), 1);
        for (std::size_t i = 0; i < cfg.init.multiplicities.size() && i < mult.size(); ++i)
            mult[i] = cfg.init.multiplicities[i];
        cloud.set_multiplicity(std::move(mult));
    }
    return cloud;
}

RuleState initial_state(const RunConfig& cfg, const ParticleCollection& neurons) {
    RuleState state{neurons, 1};
    const std::size_t D = neurons.dim();
    std::size_t blocks = 1;
    if (cfg.rule.name == "momentum") blocks = 2;
    if (cfg.rule.name == "adam") blocks = 3;
    if (blocks == 1) return state;

    ParticleCollection packed(neurons.count(), D * blocks);
    for (std::size_t i = 0; i < neurons.count(); ++i)
        for (std::size_t k = 0; k < D; ++k) packed(i, k) = neurons(i, k);
    if (neurons.has_multiplicity())
        packed.set_multiplicity(neurons.multiplicity_vector());
    state.packed = std::move(packed);
    return state;
}

ParticleCollection theta_of(const RunConfig& cfg, const ParticleCollection& packed) {
    std::size_t blocks = 1;
    if (cfg.rule.name == "momentum") blocks = 2;
    if (cfg.rule.name == "adam") blocks = 3;
    if (blocks == 1) return packed;
    const std::size_t D = packed.dim() / blocks;
    ParticleCollection theta(packed.count(), D);
    for (std::size_t i = 0; i < packed.count(); ++i)
        for (std::size_t k = 0; k < D; ++k) theta(i, k) = packed(i, k);
    if (packed.has_multiplicity()) theta.set_multiplicity(packed.multiplicity_vector());
    return theta;
}

/// Builds the packed update rule closed over the oracle and hyperparameters.
ParticleCollection evaluate_rule(const RunConfig& cfg, const GradientOracle& oracle,
                                 const RuleState& state) {
    const StepSize eta(cfg.eta);
    if (cfg.rule.name == "gd") return gd_update(oracle, state.packed);
    if (cfg.rule.name == "momentum")
        return momentum_update(oracle, MomentumPackedCollection(state.packed, cfg.rule.mu),
                               eta);
    const AdamOrdering ordering = cfg.rule.adam_ordering == "standard"
                                      ? AdamOrdering::standard
                                      : AdamOrdering::paper;
    return adam_update(oracle,
                       AdamPackedCollection(state.packed, cfg.rule.beta1, cfg.rule.beta2,
                                            cfg.rule.epsilon, state.adam_t),
                       eta, ordering);
}

struct BettiResult {
    BettiProfile profile;
    std::size_t used_points = 0;
    bool subsampled = false;
};

BettiResult measure_betti(const RunConfig& cfg, const ParticleCollection& theta,
                          std::vector<std::string>& events) {
    BettiResult result;
    std::size_t target = std::min(theta.count(), cfg.topology.subsample_cap);
    while (true) {
        ParticleCollection cloud = theta;
        DistanceMatrix dm = pairwise_distances(theta);
        if (target < theta.count()) {
            const auto keep = farthest_point_subsample(dm, target, cfg.seed ^ 0x5ab5a);
            ParticleCollection sub(keep.size(), theta.dim());
            for (std::size_t i = 0; i < keep.size(); ++i)
                for (std::size_t k = 0; k < theta.dim(); ++k)
                    sub(i, k) = theta(keep[i], k);
            cloud = std::move(sub);
            dm = pairwise_distances(cloud);
            result.subsampled = true;
        }
        try {
            const double scale =
                cfg.topology.adaptive ? adaptive_scale(dm) : cfg.topology.fixed_scale;
            const RipsComplex cx =
                build_rips(dm, scale, cfg.topology.max_dim, cfg.topology.budget);
            result.profile = betti_numbers(cx);
            result.used_points = cloud.count();
            return result;
        } catch (const DegenerateCloudError&) {
            // Fully collapsed cloud: one component, nothing higher.
            result.profile = BettiProfile{1, 0, 0, 0.0, cloud.count()};
            result.used_points = cloud.count();
            events.push_back("degenerate cloud at betti measurement");
            return result;
        } catch (const BudgetError&) {
            if (target <= 16) throw;
            target /= 2;
            events.push_back("simplex budget exceeded; subsampling to " +
                             std::to_string(target) + " points");
        }
    }
}

} // namespace

RunLog run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const auto wall_start = std::chrono::steady_clock::now();

    fs::create_directories(cfg.out_dir);
    fs::create_directories(cfg.out_dir + "/snapshots");

    // Data.
    Dataset dataset;
    if (cfg.data.kind == "teacher") {
        if (cfg.model.loss != "mse")
            throw PreconditionError("teacher data requires the mse loss");
        const TeacherSpec teacher =
            TeacherSpec::draw(cfg.data.teacher_hidden, cfg.model.input_dim, cfg.seed);
        dataset = generate_teacher_dataset(teacher, cfg.data.n, cfg.model.input_dim,
                                           cfg.seed, cfg.data.train_fraction);
    } else {
        dataset = load_idx_dataset(cfg.data.images_path, cfg.data.labels_path,
                                   cfg.model.output_dim, cfg.data.train_fraction);
        if (dataset.inputs.cols != cfg.model.input_dim)
            throw PreconditionError("idx input dim " + std::to_string(dataset.inputs.cols) +
                                    " != model input_dim");
    }
    const std::size_t train_n = std::max<std::size_t>(1, dataset.train_count());
    Batch train_all(train_n);
    for (std::size_t i = 0; i < train_n; ++i) train_all[i] = i;
    Batch test_all;
    for (std::size_t i = train_n; i < dataset.size(); ++i) test_all.push_back(i);

    // Model and optimizer state.
    const ParticleCollection neurons0 = initial_neurons(cfg);
    RuleState state = initial_state(cfg, neurons0);

    const GradientOracle full_oracle = make_loss_oracle(
        cfg.model.input_dim, cfg.model.output_dim, dataset, train_all, cfg.model.loss);

    const std::size_t batches_per_epoch =
        (train_n + cfg.data.batch_size - 1) / cfg.data.batch_size;

    RunLog log;
    log.out_dir = cfg.out_dir;

    std::vector<std::string> events;
    if (!cfg.notes.empty()) events.push_back("note: " + cfg.notes);

    // Carry-forward cells for fields measured on their own cadence.
    MetricsRow carry;
    carry.eta_star = std::numeric_limits<double>::infinity();
    ParticleCollection prev_theta = theta_of(cfg, state.packed);
    bool have_prev_betti = false;
    bool have_prev_sharp = false;
    std::vector<double> recent_losses;

    std::vector<Batch> epoch_batches;
    std::size_t epoch = 0;
    bool stopped_early = false;

    const auto due = [&](std::size_t t, std::size_t every) {
        return t % every == 0 || t == cfg.steps;
    };

    for (std::size_t t = 0; t <= cfg.steps; ++t) {
        const bool betti_due = due(t, cfg.measure.betti_every);
        const bool sharp_due = due(t, cfg.measure.sharpness_every);
        const bool snap_due = due(t, cfg.measure.snapshot_every);

        if (betti_due || sharp_due || snap_due) {
            const ParticleCollection theta = theta_of(cfg, state.packed);
            MetricsRow row = carry;
            row.step = t;

            GradientEval train_eval;
            try {
                train_eval = full_oracle(theta);
            } catch (const NumericError&) {
                log.diverged = true;
                log.diverged_step = t;
                break;
            }
            row.loss = train_eval.loss;

            // Test metric: MSE for regression, accuracy for classification.
            row.test_metric = 0.0;
            if (!test_all.empty()) {
                TwoLayerNet net(cfg.model.input_dim, cfg.model.output_dim, theta);
                if (cfg.model.loss == "mse") {
                    double total = 0.0;
                    for (const std::size_t s : test_all) {
                        const auto out = net.forward(dataset.inputs.row(s));
                        for (std::size_t c = 0; c < cfg.model.output_dim; ++c) {
                            const double r = out[c] - dataset.targets(s, c);
                            total += r * r;
                        }
                    }
                    row.test_metric = total / static_cast<double>(test_all.size());
                } else {
                    std::size_t correct = 0;
                    for (const std::size_t s : test_all) {
                        const auto out = net.forward(dataset.inputs.row(s));
                        const std::size_t pred = static_cast<std::size_t>(
                            std::max_element(out.begin(), out.end()) - out.begin());
                        if (dataset.targets(s, pred) == 1.0) ++correct;
                    }
                    row.test_metric =
                        static_cast<double>(correct) / static_cast<double>(test_all.size());
                }
            }

            if (betti_due) {
                const BettiResult betti = measure_betti(cfg, theta, events);
                row.b0 = betti.profile.b0;
                row.b1 = betti.profile.b1;
                row.b2 = betti.profile.b2;
                row.scale = betti.profile.scale_used;
                have_prev_betti = true;
            } else if (!have_prev_betti) {
                row.b0 = row.b1 = row.b2 = -1;  // not yet measured
            }

            if (sharp_due) {
                const SharpnessEstimate sharp =
                    power_iteration(full_oracle, theta, cfg.measure.sharpness_max_iters,
                                    cfg.measure.sharpness_tol, cfg.seed ^ t);
                row.k_hat = sharp.k_hat;
                row.eta_star = sharp.eta_star;
                row.eta_times_k = cfg.eta * sharp.k_hat;
                have_prev_sharp = true;
            } else if (!have_prev_sharp) {
                row.k_hat = row.eta_star = row.eta_times_k = -1.0;
            }

            double min_pair = std::numeric_limits<double>::infinity();
            double max_ratio = 1.0;
            for (std::size_t i = 0; i < theta.count(); ++i) {
                for (std::size_t j = i + 1; j < theta.count(); ++j) {
                    const double dnow = pair_distance(theta, i, j);
                    min_pair = std::min(min_pair, dnow);
                    const double dprev = pair_distance(prev_theta, i, j);
                    if (dprev > 0.0) max_ratio = std::max(max_ratio, dnow / dprev);
                }
            }
            if (!std::isfinite(min_pair)) min_pair = 0.0;
            row.min_pair_dist = min_pair;
            row.max_pair_ratio = t == 0 ? 1.0 : max_ratio;
            prev_theta = theta;

            if (snap_due) {
                char name[64];
                std::snprintf(name, sizeof(name), "snapshots/step_%08zu.csv", t);
                write_point_cloud_csv(theta, cfg.out_dir + "/" + name);
                log.snapshot_files.emplace_back(name);
            }

            log.metrics.push_back(row);
            carry = row;

            if (cfg.stop && cfg.stop->window > 0) {
                recent_losses.push_back(row.loss);
                if (recent_losses.size() > cfg.stop->window) {
                    recent_losses.erase(recent_losses.begin());
                    const auto [lo, hi] =
                        std::minmax_element(recent_losses.begin(), recent_losses.end());
                    if (*hi - *lo < cfg.stop->loss_delta_tol) {
                        stopped_early = true;
                        events.push_back("early stop at step " + std::to_string(t));
                    }
                }
            }
        }

        if (t == cfg.steps || log.diverged || stopped_early) break;

        // One mini-batch update.
        if (t % batches_per_epoch == 0) {
            epoch = t / batches_per_epoch;
            epoch_batches = minibatches(train_n, cfg.data.batch_size, cfg.seed, epoch);
        }
        const Batch& batch = epoch_batches[t % batches_per_epoch];
        const GradientOracle batch_oracle = make_loss_oracle(
            cfg.model.input_dim, cfg.model.output_dim, dataset, batch, cfg.model.loss);
        try {
            const ParticleCollection u = evaluate_rule(cfg, batch_oracle, state);
            state.packed = step(state.packed, u, StepSize(cfg.eta));
            if (cfg.rule.name == "adam") ++state.adam_t;
        } catch (const NumericError&) {
            log.diverged = true;
            log.diverged_step = t + 1;
            break;
        }
    }

    // Metrics CSV.
    {
        std::ofstream out(cfg.out_dir + "/metrics.csv");
        out << kMetricsHeader << '\n';
        for (const auto& row : log.metrics) {
            out << row.step << ',' << format_double(row.loss) << ','
                << format_double(row.test_metric) << ',' << row.b0 << ',' << row.b1 << ','
                << row.b2 << ',' << format_double(row.scale) << ','
                << format_double(row.k_hat) << ',' << format_double(row.eta_star) << ','
                << format_double(row.eta_times_k) << ','
                << format_double(row.min_pair_dist) << ','
                << format_double(row.max_pair_ratio) << '\n';
        }
    }

    // Manifest.
    const auto wall_end = std::chrono::steady_clock::now();
    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = json::parse(cfg.to_json_text());
    manifest["seed"] = cfg.seed;
    manifest["wall_clock_sec"] =
        std::chrono::duration<double>(wall_end - wall_start).count();
    manifest["diverged"] = log.diverged;
    if (log.diverged) manifest["diverged_step"] = log.diverged_step;
    manifest["stopped_early"] = stopped_early;
    manifest["snapshots"] = log.snapshot_files;
    manifest["events"] = events;
    manifest["metrics_csv"] = "metrics.csv";
    log.manifest_json = manifest.dump(2);
    {
        std::ofstream out(cfg.out_dir + "/manifest.json");
        out << log.manifest_json << '\n';
    }
    return log;
}

} // namespace neurotopo
