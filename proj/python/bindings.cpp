#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "neurotopo/geometry.hpp"
#include "neurotopo/harness.hpp"
#include "neurotopo/models.hpp"
#include "neurotopo/sharpness.hpp"
#include "neurotopo/topology.hpp"

namespace py = pybind11;
using namespace neurotopo;

namespace {

ParticleCollection to_collection(const py::array_t<double, py::array::c_style |
                                                              py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw DimensionError("expected a 2-D array of points");
    const auto n = static_cast<std::size_t>(arr.shape(0));
    const auto d = static_cast<std::size_t>(arr.shape(1));
    std::vector<double> data(arr.data(), arr.data() + n * d);
    return ParticleCollection(n, d, std::move(data));
}

py::array_t<double> to_array(const ParticleCollection& x) {
    py::array_t<double> out({x.count(), x.dim()});
    std::copy(x.data().begin(), x.data().end(), out.mutable_data());
    return out;
}

ManifoldSpec spec_from_kwargs(const std::string& kind, std::size_t n, std::uint64_t seed,
                              const py::dict& params) {
    ManifoldSpec spec;
    spec.kind = manifold_kind_from_string(kind);
    spec.n = n;
    spec.seed = seed;
    for (const auto& item : params) {
        const auto key = item.first.cast<std::string>();
        const double value = item.second.cast<double>();
        if (key == "radius") spec.radius = value;
        else if (key == "separation") spec.separation = value;
        else if (key == "outer_radius") spec.outer_radius = value;
        else if (key == "hole_radius") spec.hole_radius = value;
        else if (key == "hole_offset") spec.hole_offset = value;
        else if (key == "major_radius") spec.major_radius = value;
        else if (key == "minor_radius") spec.minor_radius = value;
        else if (key == "genus2_s") spec.genus2_s = value;
        else if (key == "genus2_t") spec.genus2_t = value;
        else throw PreconditionError("unknown manifold parameter '" + key + "'");
    }
    return spec;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Topology-tracking training laboratory for permutation-equivariant "
              "particle systems.";

    py::register_exception<Error>(m, "NeurotopoError");

    m.def(
        "sample",
        [](const std::string& kind, std::size_t n, std::uint64_t seed,
           const py::dict& params) { return to_array(sample(spec_from_kwargs(kind, n, seed, params))); },
        py::arg("kind"), py::arg("n"), py::arg("seed") = 0,
        py::arg("params") = py::dict(),
        "Sample a seeded point cloud on a named manifold "
        "(circle, disjoint_circles, annulus_two_holes, sphere, torus, disjoint_tori, "
        "genus2).");

    m.def(
        "embed",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
           std::size_t target_dim, std::uint64_t seed, const std::string& mode) {
            return to_array(embed(to_collection(points), target_dim, seed,
                                  mode == "zero_pad" ? EmbedMode::zero_pad
                                                     : EmbedMode::random_frame));
        },
        py::arg("points"), py::arg("target_dim"), py::arg("seed") = 0,
        py::arg("mode") = "random_frame",
        "Isometrically embed a cloud into a higher dimension.");

    m.def(
        "adaptive_scale",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
            return adaptive_scale(pairwise_distances(to_collection(points)));
        },
        py::arg("points"), "Rips scale set to 1/4 of the cloud diameter.");

    m.def(
        "betti",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
           std::optional<double> scale, int max_dim, bool oracle) {
            const ParticleCollection cloud = to_collection(points);
            const DistanceMatrix dm = pairwise_distances(cloud);
            const double s = scale ? *scale : adaptive_scale(dm);
            const RipsComplex cx = build_rips(dm, s, max_dim);
            const BettiProfile b = oracle ? betti_oracle(cx) : betti_numbers(cx);
            return py::make_tuple(b.b0, b.b1, b.b2);
        },
        py::arg("points"), py::arg("scale") = std::nullopt, py::arg("max_dim") = 3,
        py::arg("oracle") = false,
        "Betti numbers (b0, b1, b2) of the Vietoris-Rips complex at a scale "
        "(adaptive when omitted).");

    m.def(
        "teacher_dataset",
        [](std::size_t n, std::size_t d, std::size_t teacher_hidden, std::uint64_t seed) {
            const TeacherSpec teacher = TeacherSpec::draw(teacher_hidden, d, seed);
            const Dataset data = generate_teacher_dataset(teacher, n, d, seed);
            py::array_t<double> inputs({data.inputs.rows, data.inputs.cols});
            std::copy(data.inputs.data.begin(), data.inputs.data.end(),
                      inputs.mutable_data());
            py::array_t<double> targets({data.targets.rows, data.targets.cols});
            std::copy(data.targets.data.begin(), data.targets.data.end(),
                      targets.mutable_data());
            return py::make_tuple(inputs, targets);
        },
        py::arg("n"), py::arg("d"), py::arg("teacher_hidden") = 50, py::arg("seed") = 0,
        "Teacher-student regression data: inputs ~ N(0,4), targets from a frozen "
        "random teacher.");

    m.def(
        "two_layer_gradient",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& neurons,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& inputs,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& targets,
           const std::string& loss) {
            Dataset data;
            data.inputs = Matrix(static_cast<std::size_t>(inputs.shape(0)),
                                 static_cast<std::size_t>(inputs.shape(1)));
            std::copy(inputs.data(), inputs.data() + data.inputs.data.size(),
                      data.inputs.data.begin());
            data.targets = Matrix(static_cast<std::size_t>(targets.shape(0)),
                                  static_cast<std::size_t>(targets.shape(1)));
            std::copy(targets.data(), targets.data() + data.targets.data.size(),
                      data.targets.data.begin());
            const std::size_t d = data.inputs.cols;
            const std::size_t C = data.targets.cols;
            Batch all(data.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            TwoLayerNet net(d, C, to_collection(neurons));
            const GradientEval eval = loss == "cross_entropy"
                                          ? cross_entropy_loss(net, data, all)
                                          : mse_loss(net, data, all);
            return py::make_tuple(eval.loss, to_array(eval.grad));
        },
        py::arg("neurons"), py::arg("inputs"), py::arg("targets"),
        py::arg("loss") = "mse",
        "Loss and per-neuron gradient of a two-layer sigmoid net; neuron rows are "
        "(w_i, a_i).");

    m.def(
        "sharpness",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& neurons,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& inputs,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& targets,
           const std::string& loss, std::size_t max_iters, double tol,
           std::uint64_t seed) {
            Dataset data;
            data.inputs = Matrix(static_cast<std::size_t>(inputs.shape(0)),
                                 static_cast<std::size_t>(inputs.shape(1)));
            std::copy(inputs.data(), inputs.data() + data.inputs.data.size(),
                      data.inputs.data.begin());
            data.targets = Matrix(static_cast<std::size_t>(targets.shape(0)),
                                  static_cast<std::size_t>(targets.shape(1)));
            std::copy(targets.data(), targets.data() + data.targets.data.size(),
                      data.targets.data.begin());
            Batch all(data.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            const GradientOracle oracle = make_loss_oracle(
                data.inputs.cols, data.targets.cols, data, all, loss);
            const ParticleCollection x = to_collection(neurons);
            const SharpnessEstimate est = power_iteration(oracle, x, max_iters, tol, seed);
            py::dict out;
            out["k_hat"] = est.k_hat;
            out["eta_star"] = est.eta_star;
            out["iterations_used"] = est.iterations_used;
            out["residual"] = est.residual;
            out["converged"] = est.converged;
            return out;
        },
        py::arg("neurons"), py::arg("inputs"), py::arg("targets"),
        py::arg("loss") = "mse", py::arg("max_iters") = 200, py::arg("tol") = 1e-4,
        py::arg("seed") = 0,
        "Top Hessian eigenvalue of the loss at a neuron cloud, with eta* = 1/K.");

    m.def(
        "run_experiment",
        [](const std::string& config_json, const std::string& out_dir) {
            RunConfig cfg = RunConfig::from_json_text(config_json);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            const RunLog log = run(cfg);
            py::dict out;
            out["out_dir"] = log.out_dir;
            out["rows"] = log.metrics.size();
            out["snapshots"] = log.snapshot_files.size();
            out["diverged"] = log.diverged;
            return out;
        },
        py::arg("config_json"), py::arg("out_dir") = "",
        "Run a full experiment from a config JSON document.");

    m.def("check_run", &check_run_directory, py::arg("run_dir"),
          "Replay the trajectory invariance checks over a recorded run directory; returns "
          "a JSON report.");

    m.attr("__version__") = "0.1.0";
}
