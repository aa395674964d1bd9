#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "neurotopo/geometry.hpp"
#include "neurotopo/harness.hpp"
#include "neurotopo/sharpness.hpp"
#include "neurotopo/models.hpp"
#include "neurotopo/topology.hpp"

namespace {

using namespace neurotopo;
using nlohmann::json;

int cmd_run(const std::string& config_path, const std::string& out_override) {
    RunConfig cfg = RunConfig::from_json_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    const RunLog log = run(cfg);
    std::cout << "run complete: " << log.metrics.size() << " metric rows, "
              << log.snapshot_files.size() << " snapshots in " << log.out_dir << "\n";
    if (log.diverged)
        std::cout << "warning: run diverged at step " << log.diverged_step << "\n";
    return 0;
}

int cmd_topology(const std::string& points_path, double scale, bool adaptive,
                 int max_dim, const std::string& format, bool use_oracle) {
    const ParticleCollection points = read_point_cloud_csv(points_path);
    const DistanceMatrix dm = pairwise_distances(points);
    const double s = adaptive ? adaptive_scale(dm) : scale;
    const RipsComplex cx = build_rips(dm, s, max_dim);
    const BettiProfile betti = use_oracle ? betti_oracle(cx) : betti_numbers(cx);
    if (format == "plain") {
        std::cout << betti.b0 << ',' << betti.b1 << ',' << betti.b2 << "\n";
    } else if (format == "csv") {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", betti.scale_used);
        std::cout << betti.b0 << ',' << betti.b1 << ',' << betti.b2 << ',' << buf << ','
                  << betti.n_points << "\n";
    } else {
        json j = {{"b0", betti.b0},       {"b1", betti.b1},
                  {"b2", betti.b2},       {"scale", betti.scale_used},
                  {"n_points", betti.n_points}};
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int cmd_check(const std::string& run_dir, const std::string& out_path) {
    const std::string report = check_run_directory(run_dir);
    if (out_path.empty()) {
        std::cout << report << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw FormatError("cannot open for writing: " + out_path);
        out << report << "\n";
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

int cmd_sample(const std::string& spec_path, const std::string& out_path) {
    std::ifstream in(spec_path);
    if (!in) throw FormatError("cannot open " + spec_path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(std::string("sample spec: invalid JSON: ") + e.what());
    }
    ManifoldSpec spec;
    spec.kind = manifold_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("n")) spec.n = j.at("n").get<std::size_t>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("radius")) spec.radius = j.at("radius").get<double>();
    if (j.contains("separation")) spec.separation = j.at("separation").get<double>();
    if (j.contains("outer_radius")) spec.outer_radius = j.at("outer_radius").get<double>();
    if (j.contains("hole_radius")) spec.hole_radius = j.at("hole_radius").get<double>();
    if (j.contains("hole_offset")) spec.hole_offset = j.at("hole_offset").get<double>();
    if (j.contains("major_radius")) spec.major_radius = j.at("major_radius").get<double>();
    if (j.contains("minor_radius")) spec.minor_radius = j.at("minor_radius").get<double>();
    if (j.contains("genus2_s")) spec.genus2_s = j.at("genus2_s").get<double>();
    if (j.contains("genus2_t")) spec.genus2_t = j.at("genus2_t").get<double>();

    ParticleCollection points = sample(spec);
    if (j.contains("embed_dim")) {
        const auto target = j.at("embed_dim").get<std::size_t>();
        const std::string mode = j.value("embed_mode", std::string("random_frame"));
        points = embed(points, target, spec.seed,
                       mode == "zero_pad" ? EmbedMode::zero_pad : EmbedMode::random_frame);
    }
    write_point_cloud_csv(points, out_path);
    std::cout << "wrote " << points.count() << " points to " << out_path << "\n";
    return 0;
}

int cmd_sharpness(const std::string& run_dir, std::size_t step_index) {
    const json manifest = json::parse([&] {
        std::ifstream in(run_dir + "/manifest.json");
        if (!in) throw FormatError("cannot open " + run_dir + "/manifest.json");
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    }());
    const RunConfig cfg = RunConfig::from_json_text(manifest.at("config").dump());

    char name[64];
    std::snprintf(name, sizeof(name), "snapshots/step_%08zu.csv", step_index);
    const ParticleCollection theta = read_point_cloud_csv(run_dir + "/" + name);

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

    const SharpnessEstimate est =
        power_iteration(oracle, theta, cfg.measure.sharpness_max_iters,
                        cfg.measure.sharpness_tol, cfg.seed ^ step_index);
    json out = {{"step", step_index},
                {"k_hat", est.k_hat},
                {"eta_star", est.eta_star},
                {"eta_times_k", cfg.eta * est.k_hat},
                {"iterations_used", est.iterations_used},
                {"residual", est.residual},
                {"converged", est.converged}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_report(const std::string& run_dir, const std::string& out_path) {
    const std::string svg = render_report_svg(run_dir);
    std::ofstream out(out_path);
    if (!out) throw FormatError("cannot open for writing: " + out_path);
    out << svg;
    std::cout << "report written to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"neurotopo: topology-tracking training laboratory for "
                 "permutation-equivariant particle systems"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    auto* run_cmd = app.add_subcommand("run", "Execute an experiment from a JSON config");
    run_cmd->add_option("--config", config_path, "Run config JSON path")
        ->required()
        ->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_override, "Override the output directory");

    std::string points_path, topo_format = "plain";
    double scale = 0.0;
    bool adaptive = false, use_oracle = false;
    int max_dim = 3;
    auto* topo_cmd =
        app.add_subcommand("topology", "Betti numbers of a point-cloud CSV");
    topo_cmd->add_option("--points", points_path, "Point-cloud CSV path")
        ->required()
        ->check(CLI::ExistingFile);
    auto* scale_opt = topo_cmd->add_option("--scale", scale, "Rips scale");
    auto* adaptive_flag =
        topo_cmd->add_flag("--adaptive", adaptive, "Use 1/4 of the cloud diameter");
    scale_opt->excludes(adaptive_flag);
    topo_cmd->add_option("--max-dim", max_dim, "Max simplex dimension (1..3)")
        ->check(CLI::Range(1, 3));
    topo_cmd->add_option("--format", topo_format, "Output format")
        ->check(CLI::IsMember({"plain", "csv", "json"}));
    topo_cmd->add_flag("--oracle", use_oracle,
                       "Use the independent verification path (small clouds)");

    std::string run_dir, check_out;
    auto* check_cmd =
        app.add_subcommand("check", "Replay trajectory invariance checks over a run directory");
    check_cmd->add_option("--run", run_dir, "Run directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    check_cmd->add_option("--out", check_out, "Write the JSON report here");

    std::string spec_path, sample_out;
    auto* sample_cmd =
        app.add_subcommand("sample", "Sample a seeded manifold point cloud");
    sample_cmd->add_option("--spec", spec_path, "Manifold spec JSON path")
        ->required()
        ->check(CLI::ExistingFile);
    sample_cmd->add_option("--out", sample_out, "Output point-cloud CSV")->required();

    std::string sharp_run;
    std::size_t sharp_step = 0;
    auto* sharp_cmd =
        app.add_subcommand("sharpness", "Sharpness at a stored snapshot of a run");
    sharp_cmd->add_option("--run", sharp_run, "Run directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    sharp_cmd->add_option("--step", sharp_step, "Snapshot step")->required();

    std::string report_run, report_out;
    auto* report_cmd =
        app.add_subcommand("report", "Render loss/Betti/1-over-K charts as SVG");
    report_cmd->add_option("--run", report_run, "Run directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    report_cmd->add_option("--out", report_out, "Output SVG path")->required();

    // Usage problems (unknown flags, missing files) exit 1; help exits 0.
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(config_path, out_override);
        if (topo_cmd->parsed()) {
            if (!adaptive && !(scale > 0.0)) {
                std::cerr << "topology: either --scale <r> or --adaptive is required\n";
                return 1;
            }
            return cmd_topology(points_path, scale, adaptive, max_dim, topo_format,
                                use_oracle);
        }
        if (check_cmd->parsed()) return cmd_check(run_dir, check_out);
        if (sample_cmd->parsed()) return cmd_sample(spec_path, sample_out);
        if (sharp_cmd->parsed()) return cmd_sharpness(sharp_run, sharp_step);
        if (report_cmd->parsed()) return cmd_report(report_run, report_out);
    } catch (const neurotopo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
