#include "neurotopo/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "neurotopo/rng.hpp"

namespace neurotopo {

using numeric::sigmoid;

TwoLayerNet::TwoLayerNet(std::size_t d, std::size_t c, ParticleCollection units)
    : input_dim(d), output_dim(c), neurons(std::move(units)) {
    if (d == 0 || c == 0) throw DimensionError("TwoLayerNet: dims must be positive");
    if (neurons.dim() != d + c)
        throw DimensionError("TwoLayerNet: neuron dim must be input_dim + output_dim");
}

std::vector<double> TwoLayerNet::forward(std::span<const double> z) const {
    if (z.size() != input_dim) throw DimensionError("forward: input dim mismatch");
    std::vector<double> out(output_dim, 0.0);
    for (std::size_t i = 0; i < neurons.count(); ++i) {
        const auto row = neurons.row(i);
        double u = 0.0;
        for (std::size_t k = 0; k < input_dim; ++k) u += row[k] * z[k];
        const double s = sigmoid(u);
        for (std::size_t c = 0; c < output_dim; ++c) out[c] += row[input_dim + c] * s;
    }
    return out;
}

namespace {

void check_batch(const Dataset& data, const Batch& batch) {
    if (batch.empty()) throw PreconditionError("loss: empty batch");
    for (const std::size_t s : batch)
        if (s >= data.size()) throw DimensionError("loss: batch index out of range");
}

} // namespace

GradientEval mse_loss(const TwoLayerNet& net, const Dataset& data, const Batch& batch) {
    check_batch(data, batch);
    if (data.inputs.cols != net.input_dim || data.targets.cols != net.output_dim)
        throw DimensionError("mse_loss: dataset shape does not match network");

    const std::size_t d = net.input_dim;
    const std::size_t C = net.output_dim;
    const std::size_t h = net.hidden();
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    // Cache activations and residuals; then each neuron's gradient row
    // depends only on its own row, so duplicated neurons get bitwise
    // identical gradients.
    Matrix act(batch.size(), h);
    Matrix residual(batch.size(), C);
    double loss = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto z = data.inputs.row(batch[b]);
        const auto y = data.targets.row(batch[b]);
        std::vector<double> out(C, 0.0);
        for (std::size_t i = 0; i < h; ++i) {
            const auto row = net.neurons.row(i);
            double u = 0.0;
            for (std::size_t k = 0; k < d; ++k) u += row[k] * z[k];
            const double s = sigmoid(u);
            act(b, i) = s;
            for (std::size_t c = 0; c < C; ++c) out[c] += row[d + c] * s;
        }
        for (std::size_t c = 0; c < C; ++c) {
            const double r = out[c] - y[c];
            residual(b, c) = r;
            loss += r * r;
        }
    }
    loss *= inv_b;

    ParticleCollection grad(h, d + C);
    for (std::size_t i = 0; i < h; ++i) {
        const auto row = net.neurons.row(i);
        auto grow = grad.row(i);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const auto z = data.inputs.row(batch[b]);
            const double s = act(b, i);
            const double sprime = s * (1.0 - s);
            double back = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                const double coeff = 2.0 * inv_b * residual(b, c);
                grow[d + c] += coeff * s;
                back += coeff * row[d + c];
            }
            const double wcoeff = back * sprime;
            for (std::size_t k = 0; k < d; ++k) grow[k] += wcoeff * z[k];
        }
    }
    return {loss, std::move(grad)};
}

GradientEval cross_entropy_loss(const TwoLayerNet& net, const Dataset& data,
                                const Batch& batch) {
    check_batch(data, batch);
    if (net.output_dim < 2)
        throw PreconditionError("cross_entropy_loss: needs C >= 2 outputs");
    if (data.inputs.cols != net.input_dim || data.targets.cols != net.output_dim)
        throw DimensionError("cross_entropy_loss: dataset shape does not match network");

    const std::size_t d = net.input_dim;
    const std::size_t C = net.output_dim;
    const std::size_t h = net.hidden();
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    Matrix act(batch.size(), h);
    Matrix dlogits(batch.size(), C);
    double loss = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto z = data.inputs.row(batch[b]);
        const auto y = data.targets.row(batch[b]);
        double one_hot_sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            if (y[c] != 0.0 && y[c] != 1.0)
                throw PreconditionError("cross_entropy_loss: targets must be one-hot");
            one_hot_sum += y[c];
        }
        if (one_hot_sum != 1.0)
            throw PreconditionError("cross_entropy_loss: each target row must have exactly one 1");

        std::vector<double> logits(C, 0.0);
        for (std::size_t i = 0; i < h; ++i) {
            const auto row = net.neurons.row(i);
            double u = 0.0;
            for (std::size_t k = 0; k < d; ++k) u += row[k] * z[k];
            const double s = sigmoid(u);
            act(b, i) = s;
            for (std::size_t c = 0; c < C; ++c) logits[c] += row[d + c] * s;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double sum_exp = 0.0;
        for (std::size_t c = 0; c < C; ++c) sum_exp += std::exp(logits[c] - mx);
        const double log_z = mx + std::log(sum_exp);
        for (std::size_t c = 0; c < C; ++c) {
            const double p = std::exp(logits[c] - log_z);
            dlogits(b, c) = (p - y[c]) * inv_b;
            if (y[c] == 1.0) loss += (log_z - logits[c]) * inv_b;
        }
    }

    ParticleCollection grad(h, d + C);
    for (std::size_t i = 0; i < h; ++i) {
        const auto row = net.neurons.row(i);
        auto grow = grad.row(i);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const auto z = data.inputs.row(batch[b]);
            const double s = act(b, i);
            const double sprime = s * (1.0 - s);
            double back = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                const double g = dlogits(b, c);
                grow[d + c] += g * s;
                back += g * row[d + c];
            }
            const double wcoeff = back * sprime;
            for (std::size_t k = 0; k < d; ++k) grow[k] += wcoeff * z[k];
        }
    }
    return {loss, std::move(grad)};
}

GradientOracle make_loss_oracle(std::size_t input_dim, std::size_t output_dim,
                                const Dataset& data, Batch batch,
                                const std::string& loss) {
    if (loss != "mse" && loss != "cross_entropy")
        throw PreconditionError("unknown loss '" + loss + "'");
    const bool use_mse = (loss == "mse");
    return GradientOracle(
        input_dim + output_dim,
        [=, &data](const ParticleCollection& x) -> GradientEval {
            TwoLayerNet net(input_dim, output_dim, x);
            return use_mse ? mse_loss(net, data, batch)
                           : cross_entropy_loss(net, data, batch);
        });
}

TeacherSpec TeacherSpec::draw(std::size_t hidden_star, std::size_t d,
                              std::uint64_t seed) {
    TeacherSpec spec;
    spec.hidden_star = hidden_star;
    spec.seed = seed;
    Rng rng = Rng::substream(seed, 0x7eac4e5ULL);
    spec.a_star.resize(hidden_star);
    for (auto& a : spec.a_star) a = rng.normal();
    spec.w_star = Matrix(hidden_star, d);
    for (auto& w : spec.w_star.data) w = rng.normal(0.0, 0.6);  // variance 0.36
    return spec;
}

Dataset generate_teacher_dataset(const TeacherSpec& teacher, std::size_t n,
                                 std::size_t d, std::uint64_t seed,
                                 double train_fraction) {
    if (n < 1) throw PreconditionError("generate_teacher_dataset: n must be >= 1");
    if (teacher.w_star.cols != d)
        throw DimensionError("teacher spec input dim != requested d");

    Dataset data;
    data.train_fraction = train_fraction;
    data.inputs = Matrix(n, d);
    data.targets = Matrix(n, 1);
    Rng rng = Rng::substream(seed, 0xda7aULL);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t k = 0; k < d; ++k)
            data.inputs(s, k) = rng.normal(0.0, 2.0);  // variance 4
        double y = 0.0;
        for (std::size_t j = 0; j < teacher.hidden_star; ++j) {
            double u = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                u += teacher.w_star(j, k) * data.inputs(s, k);
            y += teacher.a_star[j] * sigmoid(u);
        }
        data.targets(s, 0) = y;
    }
    return data;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path, std::size_t offset) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in)
        throw FormatError("idx: truncated header at byte offset " +
                          std::to_string(offset) + " in " + path);
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

} // namespace

IdxData load_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("idx: cannot open " + path);

    const std::uint32_t magic = read_be32(in, path, 0);
    if ((magic >> 16) != 0)
        throw FormatError("idx: bad magic (first two bytes nonzero) in " + path);
    const std::uint32_t type = (magic >> 8) & 0xff;
    const std::uint32_t rank = magic & 0xff;
    if (type != 0x08)
        throw FormatError("idx: unsupported element type " + std::to_string(type) +
                          " at byte offset 2 in " + path);
    if (rank == 0) throw FormatError("idx: zero rank in " + path);

    IdxData out;
    std::size_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
        const std::uint32_t dim = read_be32(in, path, 4 + 4 * r);
        out.dims.push_back(dim);
        total *= dim;
    }

    std::vector<unsigned char> raw(total);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(total));
    if (static_cast<std::size_t>(in.gcount()) != total)
        throw FormatError("idx: truncated payload at byte offset " +
                          std::to_string(4 + 4 * rank + in.gcount()) + " in " + path);

    const std::size_t rows = out.dims[0];
    const std::size_t cols = rows == 0 ? 0 : total / rows;
    out.data = Matrix(rows, cols);
    for (std::size_t k = 0; k < total; ++k)
        out.data.data[k] = static_cast<double>(raw[k]) / 255.0;
    return out;
}

Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                         std::size_t num_classes, double train_fraction) {
    IdxData images = load_idx(images_path);
    IdxData labels = load_idx(labels_path);
    if (labels.dims.size() != 1)
        throw FormatError("idx labels: expected rank 1 in " + labels_path);
    if (images.dims.empty() || images.dims[0] != labels.dims[0])
        throw FormatError("idx: image count != label count");

    Dataset data;
    data.train_fraction = train_fraction;
    data.inputs = std::move(images.data);
    data.targets = Matrix(labels.dims[0], num_classes);
    for (std::size_t s = 0; s < labels.dims[0]; ++s) {
        // load_idx scales bytes to [0,1]; undo that to recover the class id.
        const auto cls = static_cast<std::size_t>(labels.data(s, 0) * 255.0 + 0.5);
        if (cls >= num_classes)
            throw FormatError("idx labels: class " + std::to_string(cls) +
                              " out of range in " + labels_path);
        data.targets(s, cls) = 1.0;
    }
    return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    for (std::size_t k = 0; k < data.inputs.cols; ++k) out << 'x' << k << ',';
    for (std::size_t c = 0; c < data.targets.cols; ++c)
        out << 'y' << c << (c + 1 < data.targets.cols ? "," : "");
    out << '\n';
    char buf[40];
    for (std::size_t s = 0; s < data.size(); ++s) {
        for (std::size_t k = 0; k < data.inputs.cols; ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.inputs(s, k));
            out << buf << ',';
        }
        for (std::size_t c = 0; c < data.targets.cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.targets(s, c));
            out << buf << (c + 1 < data.targets.cols ? "," : "");
        }
        out << '\n';
    }
    if (!out) throw FormatError("write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path, double train_fraction) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty dataset file: " + path);

    std::size_t d = 0, c = 0;
    {
        std::string field;
        std::istringstream header(line);
        while (std::getline(header, field, ',')) {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            if (field.size() >= 2 && field[0] == 'x') ++d;
            else if (field.size() >= 2 && field[0] == 'y') ++c;
            else throw FormatError("dataset header column '" + field + "' in " + path);
        }
    }
    if (d == 0 || c == 0)
        throw FormatError("dataset header needs x* and y* columns: " + path);

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string field;
        std::istringstream row(line);
        std::size_t fields = 0;
        while (std::getline(row, field, ',')) {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            try {
                values.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw FormatError("bad numeric field '" + field + "' in " + path);
            }
            ++fields;
        }
        if (fields != d + c) throw FormatError("row width mismatch in " + path);
        ++rows;
    }
    if (rows == 0) throw FormatError("dataset file has no rows: " + path);

    Dataset data;
    data.train_fraction = train_fraction;
    data.inputs = Matrix(rows, d);
    data.targets = Matrix(rows, c);
    for (std::size_t s = 0; s < rows; ++s) {
        for (std::size_t k = 0; k < d; ++k) data.inputs(s, k) = values[s * (d + c) + k];
        for (std::size_t j = 0; j < c; ++j)
            data.targets(s, j) = values[s * (d + c) + d + j];
    }
    return data;
}

std::vector<Batch> minibatches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                               std::uint64_t epoch) {
    if (batch_size < 1) throw PreconditionError("minibatches: batch_size must be >= 1");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = Rng::substream(seed, 0xba7c4 + epoch);
    rng.shuffle(order);
    std::vector<Batch> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

} // namespace neurotopo
