#ifndef NEUROTOPO_MODELS_HPP
#define NEUROTOPO_MODELS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neurotopo/matrix.hpp"
#include "neurotopo/particles.hpp"
#include "neurotopo/rules.hpp"

namespace neurotopo {

/// Two-layer sigmoid network F(z) = sum_i a_i sigma(<w_i, z>), no biases.
/// Each hidden unit is one particle: row i of `neurons` is the concatenation
/// (w_i in R^d, a_i in R^C), so the collection dimension is d + C. For C > 1
/// the a-block is the i-th column of the output matrix, which keeps the loss
/// permutation-symmetric in the particles.
struct TwoLayerNet {
    std::size_t input_dim = 0;
    std::size_t output_dim = 1;
    ParticleCollection neurons;

    TwoLayerNet(std::size_t d, std::size_t c, ParticleCollection units);

    std::size_t hidden() const { return neurons.count(); }

    /// Forward pass for a single input.
    std::vector<double> forward(std::span<const double> z) const;
};

struct Dataset {
    Matrix inputs;   // n x d
    Matrix targets;  // n x C
    double train_fraction = 0.7;

    std::size_t size() const { return inputs.rows; }
    std::size_t train_count() const {
        return static_cast<std::size_t>(train_fraction * static_cast<double>(inputs.rows));
    }
};

/// Frozen teacher network parameters (drawn once per dataset).
struct TeacherSpec {
    std::size_t hidden_star = 50;
    std::vector<double> a_star;  // h*
    Matrix w_star;               // h* x d
    std::uint64_t seed = 0;

    /// Draws a_star ~ N(0,1) and w_star ~ N(0, 0.36) for the given shape.
    static TeacherSpec draw(std::size_t hidden_star, std::size_t d, std::uint64_t seed);
};

/// Batch of sample indices into a dataset.
using Batch = std::vector<std::size_t>;

/// Mean squared error over the batch and its per-neuron gradient.
GradientEval mse_loss(const TwoLayerNet& net, const Dataset& data, const Batch& batch);

/// Mean softmax cross-entropy over the batch (one-hot targets, C >= 2) and
/// its per-neuron gradient.
GradientEval cross_entropy_loss(const TwoLayerNet& net, const Dataset& data,
                                const Batch& batch);

/// Gradient oracle over the neuron collection for a fixed dataset and batch.
/// loss must be "mse" or "cross_entropy". The dataset is captured by
/// reference and must outlive the oracle.
GradientOracle make_loss_oracle(std::size_t input_dim, std::size_t output_dim,
                                const Dataset& data, Batch batch,
                                const std::string& loss);

/// Teacher-student data: inputs z ~ N(0, 4) entrywise, targets y = <a*, sigma(W* z)>.
Dataset generate_teacher_dataset(const TeacherSpec& teacher, std::size_t n,
                                 std::size_t d, std::uint64_t seed,
                                 double train_fraction = 0.7);

struct IdxData {
    std::vector<std::size_t> dims;
    Matrix data;  // dims[0] rows, product of remaining dims columns, scaled to [0,1]
};

/// Parses a big-endian IDX file (unsigned-byte element type).
IdxData load_idx(const std::string& path);

/// Builds a one-hot classification dataset from IDX image/label files.
Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                         std::size_t num_classes, double train_fraction = 6.0 / 7.0);

/// Deterministic shuffled partition of the first `n` training indices for one
/// epoch; the final short batch is kept.
std::vector<Batch> minibatches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                               std::uint64_t epoch = 0);

/// Dataset CSV: header `x0,...,x{d-1},y0,...,y{C-1}`, inputs then targets,
/// full double precision.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path, double train_fraction = 0.7);

} // namespace neurotopo

#endif
