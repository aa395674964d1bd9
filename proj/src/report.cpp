#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "neurotopo/diagnostics.hpp"
#include "neurotopo/harness.hpp"
#include "neurotopo/models.hpp"

namespace neurotopo {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

} // namespace

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty metrics file: " + path);
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 12) throw FormatError("bad metrics row in " + path);
        MetricsRow r;
        r.step = static_cast<std::size_t>(std::stoull(f[0]));
        r.loss = to_double(f[1]);
        r.test_metric = to_double(f[2]);
        r.b0 = std::stoll(f[3]);
        r.b1 = std::stoll(f[4]);
        r.b2 = std::stoll(f[5]);
        r.scale = to_double(f[6]);
        r.k_hat = to_double(f[7]);
        r.eta_star = to_double(f[8]);
        r.eta_times_k = to_double(f[9]);
        r.min_pair_dist = to_double(f[10]);
        r.max_pair_ratio = to_double(f[11]);
        rows.push_back(r);
    }
    return rows;
}

namespace {

struct LoadedRun {
    RunConfig config;
    json manifest;
    std::vector<MetricsRow> metrics;
    Trajectory snapshots;
    std::vector<std::size_t> snapshot_steps;
};

LoadedRun load_run(const std::string& run_dir) {
    LoadedRun run;
    run.manifest = json::parse(slurp(run_dir + "/manifest.json"));
    run.config = RunConfig::from_json_text(run.manifest.at("config").dump());
    run.metrics = read_metrics_csv(run_dir + "/metrics.csv");
    for (const auto& rel : run.manifest.at("snapshots")) {
        const std::string name = rel.get<std::string>();
        run.snapshots.push_back(read_point_cloud_csv(run_dir + "/" + name));
        // snapshots/step_XXXXXXXX.csv
        const auto pos = name.find_last_of('_');
        run.snapshot_steps.push_back(std::stoull(name.substr(pos + 1)));
    }
    return run;
}

/// Packed update rule with reset optimizer state, for replay checks on
/// stored theta-clouds.
UpdateRuleFn replay_rule(const RunConfig& cfg, const GradientOracle& oracle) {
    if (cfg.rule.name == "gd")
        return [&oracle](const ParticleCollection& x) { return gd_update(oracle, x); };
    if (cfg.rule.name == "momentum") {
        const double mu = cfg.rule.mu;
        const double eta = cfg.eta;
        return [&oracle, mu, eta](const ParticleCollection& x) {
            return momentum_update(oracle, MomentumPackedCollection(x, mu), StepSize(eta));
        };
    }
    const RuleConfig rc = cfg.rule;
    const double eta = cfg.eta;
    return [&oracle, rc, eta](const ParticleCollection& x) {
        const AdamOrdering ordering = rc.adam_ordering == "standard"
                                          ? AdamOrdering::standard
                                          : AdamOrdering::paper;
        return adam_update(oracle,
                           AdamPackedCollection(x, rc.beta1, rc.beta2, rc.epsilon, 1),
                           StepSize(eta), ordering);
    };
}

ParticleCollection pack_with_zero_state(const RunConfig& cfg,
                                        const ParticleCollection& theta) {
    std::size_t blocks = 1;
    if (cfg.rule.name == "momentum") blocks = 2;
    if (cfg.rule.name == "adam") blocks = 3;
    if (blocks == 1) return theta;
    ParticleCollection packed(theta.count(), theta.dim() * blocks);
    for (std::size_t i = 0; i < theta.count(); ++i)
        for (std::size_t k = 0; k < theta.dim(); ++k) packed(i, k) = theta(i, k);
    if (theta.has_multiplicity()) packed.set_multiplicity(theta.multiplicity_vector());
    return packed;
}

} // namespace

std::string check_run_directory(const std::string& run_dir) {
    LoadedRun run = load_run(run_dir);
    const RunConfig& cfg = run.config;
    if (run.snapshots.empty())
        throw PreconditionError("check: run directory has no snapshots");

    // Rebuild the training data and full-batch oracle from the config echo.
    Dataset dataset;
    if (cfg.data.kind == "teacher") {
        const TeacherSpec teacher =
            TeacherSpec::draw(cfg.data.teacher_hidden, cfg.model.input_dim, cfg.seed);
        dataset = generate_teacher_dataset(teacher, cfg.data.n, cfg.model.input_dim,
                                           cfg.seed, cfg.data.train_fraction);
    } else {
        dataset = load_idx_dataset(cfg.data.images_path, cfg.data.labels_path,
                                   cfg.model.output_dim, cfg.data.train_fraction);
    }
    const std::size_t train_n = std::max<std::size_t>(1, dataset.train_count());
    Batch train_all(train_n);
    for (std::size_t i = 0; i < train_n; ++i) train_all[i] = i;
    const GradientOracle oracle = make_loss_oracle(
        cfg.model.input_dim, cfg.model.output_dim, dataset, train_all, cfg.model.loss);
    const UpdateRuleFn rule = replay_rule(cfg, oracle);

    TrajectoryCheckReport report;
    report.steps_checked = run.snapshots.size();

    // Merge / split scan over the stored theta-clouds.
    {
        const TrajectoryCheckReport scan = check_injectivity(run.snapshots);
        auto remap = [&](std::vector<MergeEvent> events) {
            for (auto& e : events) e.step = run.snapshot_steps[e.step];
            return events;
        };
        report.merge_events = remap(scan.merge_events);
        report.split_events = remap(scan.split_events);
    }

    // eta*k per snapshot transition: the largest measured value in the gap.
    std::vector<double> eta_k(run.snapshots.size() > 0 ? run.snapshots.size() - 1 : 0, 0.0);
    for (std::size_t s = 0; s + 1 < run.snapshots.size(); ++s) {
        const std::size_t lo = run.snapshot_steps[s];
        const std::size_t hi = run.snapshot_steps[s + 1];
        double worst = 0.0;
        for (const auto& row : run.metrics)
            if (row.step > lo && row.step <= hi && row.eta_times_k >= 0.0)
                worst = std::max(worst, row.eta_times_k);
        eta_k[s] = worst;
    }

    const MeasureReport measure = check_measure_preservation(run.snapshots, eta_k);
    report.multiplicity_histogram_ok = measure.ok;

    // Pair-ratio band between snapshots, compounded over the gap length.
    double max_excess = 0.0;
    for (std::size_t s = 0; s + 1 < run.snapshots.size(); ++s) {
        const ParticleCollection& cur = run.snapshots[s];
        const ParticleCollection& nxt = run.snapshots[s + 1];
        const double gap = static_cast<double>(run.snapshot_steps[s + 1] -
                                               run.snapshot_steps[s]);
        const double ek = eta_k[s];
        const double hi = std::pow(1.0 + ek, gap) * (1.0 + 1e-6) + 1e-9;
        const double lo = ek >= 1.0 ? 0.0 : std::pow(1.0 - ek, gap) * (1.0 - 1e-6) - 1e-9;
        for (std::size_t i = 0; i < cur.count(); ++i)
            for (std::size_t j = i + 1; j < cur.count(); ++j) {
                const double d = pair_distance(cur, i, j);
                if (d <= 0.0) continue;
                const double r = pair_distance(nxt, i, j) / d;
                max_excess = std::max(max_excess, std::max(lo - r, r - hi));
            }
    }
    report.max_pair_ratio_excess = max_excess;

    // Equivariance of the configured rule at the final cloud.
    const ParticleCollection final_packed =
        pack_with_zero_state(cfg, run.snapshots.back());
    report.max_equivariance_dev =
        check_equivariance(rule, final_packed, 10, cfg.seed ^ 0xe9f1ULL).max_deviation;

    // Duplicated-neuron drift over a short replay from the initial cloud.
    report.duplicate_drift = check_well_definedness(
        rule, pack_with_zero_state(cfg, run.snapshots.front()),
        std::min<std::size_t>(cfg.steps, 50), StepSize(cfg.eta));

    // Jacobian singular values at the final cloud, only in the claimed regime.
    double final_eta_k = -1.0;
    for (const auto& row : run.metrics)
        if (row.eta_times_k >= 0.0) final_eta_k = row.eta_times_k;
    bool jacobian_checked = false;
    if (final_eta_k >= 0.0 && final_eta_k < 1.0) {
        report.jacobian_sv_range = check_jacobian_svs(
            rule, final_packed, StepSize(cfg.eta), final_eta_k / cfg.eta,
            std::min<std::size_t>(10, final_packed.count()), cfg.seed);
        jacobian_checked = true;
    }

    json out;
    out["steps_checked"] = report.steps_checked;
    out["max_equivariance_dev"] = report.max_equivariance_dev;
    out["max_pair_ratio_excess"] = report.max_pair_ratio_excess;
    // The per-step continuity constant is a surrogate lower bound; band
    // overshoot is therefore flagged as inconclusive, not as a violation.
    out["pair_ratio_flag"] = report.max_pair_ratio_excess > 0.0 ? "inconclusive" : "ok";
    out["merge_events"] = json::array();
    for (const auto& e : report.merge_events)
        out["merge_events"].push_back({{"step", e.step}, {"i", e.i}, {"j", e.j},
                                       {"distance", e.distance}});
    out["split_events"] = json::array();
    for (const auto& e : report.split_events)
        out["split_events"].push_back({{"step", e.step}, {"i", e.i}, {"j", e.j},
                                       {"distance", e.distance}});
    out["duplicate_drift"] = report.duplicate_drift;
    out["multiplicity_histogram_ok"] = report.multiplicity_histogram_ok;
    if (!measure.ok) out["multiplicity_first_failing_snapshot"] = measure.first_failing_step;
    out["jacobian_checked"] = jacobian_checked;
    out["jacobian_sv_range"] = {report.jacobian_sv_range.first,
                                report.jacobian_sv_range.second};
    return out.dump(2);
}

namespace {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

std::string svg_panel(const std::vector<Series>& series, const std::string& title,
                      double x0, double y0, double width, double height,
                      bool log_y = false) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double yv = s.y[i];
            if (!std::isfinite(yv)) continue;
            if (log_y && yv <= 0.0) continue;
            if (log_y) yv = std::log10(yv);
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
        }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) {
        ymax = ymin + 1;
        ymin -= 1;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const double plot_x = x0 + 70, plot_y = y0 + 28;
    const double plot_w = width - 90, plot_h = height - 60;
    auto px = [&](double v) { return plot_x + (v - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double v) {
        if (log_y) v = std::log10(std::max(v, 1e-300));
        return plot_y + plot_h - (v - ymin) / (ymax - ymin) * plot_h;
    };

    char buf[256];
    std::ostringstream svg;
    svg << "<rect x='" << plot_x << "' y='" << plot_y << "' width='" << plot_w
        << "' height='" << plot_h << "' fill='none' stroke='#888'/>\n";
    svg << "<text x='" << x0 + width / 2 << "' y='" << y0 + 16
        << "' text-anchor='middle' font-size='14' font-family='sans-serif'>" << title
        << "</text>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x='%.1f' y='%.1f' font-size='10' font-family='sans-serif' "
                  "text-anchor='end'>%.4g</text>\n",
                  plot_x - 4, plot_y + 10, log_y ? std::pow(10.0, ymax) : ymax);
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x='%.1f' y='%.1f' font-size='10' font-family='sans-serif' "
                  "text-anchor='end'>%.4g</text>\n",
                  plot_x - 4, plot_y + plot_h, log_y ? std::pow(10.0, ymin) : ymin);
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x='%.1f' y='%.1f' font-size='10' font-family='sans-serif'>step "
                  "%.0f .. %.0f</text>\n",
                  plot_x, plot_y + plot_h + 16, xmin, xmax);
    svg << buf;

    double legend_x = plot_x + 8;
    for (const auto& s : series) {
        if (s.x.empty()) continue;
        svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i]) || (log_y && s.y[i] <= 0.0)) continue;
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
            svg << buf;
        }
        svg << "'/>\n";
        svg << "<text x='" << legend_x << "' y='" << plot_y + 14
            << "' font-size='11' font-family='sans-serif' fill='" << s.color << "'>"
            << s.label << "</text>\n";
        legend_x += 90;
    }
    return svg.str();
}

} // namespace

std::string render_report_svg(const std::string& run_dir) {
    const auto metrics = read_metrics_csv(run_dir + "/metrics.csv");
    const json manifest = json::parse(slurp(run_dir + "/manifest.json"));
    const double eta = manifest.at("config").at("eta").get<double>();

    Series loss{"train loss", "#1f77b4", {}, {}};
    Series test{"test metric", "#ff7f0e", {}, {}};
    Series b0{"b0", "#1f77b4", {}, {}}, b1{"b1", "#2ca02c", {}, {}},
        b2{"b2", "#d62728", {}, {}};
    Series inv_k{"1/K", "#9467bd", {}, {}};
    Series eta_line{"eta", "#555555", {}, {}};
    for (const auto& r : metrics) {
        const auto s = static_cast<double>(r.step);
        loss.x.push_back(s);
        loss.y.push_back(r.loss);
        test.x.push_back(s);
        test.y.push_back(r.test_metric);
        if (r.b0 >= 0) {
            b0.x.push_back(s);
            b0.y.push_back(static_cast<double>(r.b0));
            b1.x.push_back(s);
            b1.y.push_back(static_cast<double>(r.b1));
            b2.x.push_back(s);
            b2.y.push_back(static_cast<double>(r.b2));
        }
        if (r.k_hat > 0.0) {
            inv_k.x.push_back(s);
            inv_k.y.push_back(1.0 / r.k_hat);
            eta_line.x.push_back(s);
            eta_line.y.push_back(eta);
        }
    }

    bool loss_positive = !loss.y.empty();
    for (double v : loss.y)
        if (!(v > 0.0)) loss_positive = false;

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='900' height='820' "
           "viewBox='0 0 900 820'>\n<rect width='900' height='820' fill='white'/>\n";
    svg << svg_panel({loss, test}, "Loss", 0, 0, 900, 260, loss_positive);
    svg << svg_panel({b0, b1, b2}, "Betti numbers", 0, 270, 900, 260);
    svg << svg_panel({inv_k, eta_line}, "Sharpness inversion 1/K vs step size", 0, 540,
                     900, 260, false);
    svg << "</svg>\n";
    return svg.str();
}

} // namespace neurotopo
