#ifndef NEUROTOPO_PARTICLES_HPP
#define NEUROTOPO_PARTICLES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neurotopo/errors.hpp"

namespace neurotopo {

/// A finite indexed collection of D-dimensional particles (neurons).
///
/// Storage is dense row-major: row i is particle x_i. Every entry must be
/// finite. The optional multiplicity vector implements integer push-forward
/// weights; it defaults to all ones. Collections are value types and all
/// operations on them are pure, so they are safe to share across threads.
class ParticleCollection {
public:
    ParticleCollection() = default;

    /// Zero-initialized collection of `count` particles in `dim` dimensions.
    ParticleCollection(std::size_t count, std::size_t dim);

    /// Takes ownership of row-major data (count*dim entries, all finite).
    ParticleCollection(std::size_t count, std::size_t dim, std::vector<double> data);

    ParticleCollection(std::size_t count, std::size_t dim, std::vector<double> data,
                       std::vector<std::int64_t> multiplicity);

    std::size_t count() const { return count_; }
    std::size_t dim() const { return dim_; }

    double operator()(std::size_t i, std::size_t k) const { return data_[i * dim_ + k]; }
    double& operator()(std::size_t i, std::size_t k) { return data_[i * dim_ + k]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool has_multiplicity() const { return !multiplicity_.empty(); }
    /// Multiplicity of particle i (1 when no explicit vector is present).
    std::int64_t multiplicity(std::size_t i) const {
        return multiplicity_.empty() ? 1 : multiplicity_[i];
    }
    const std::vector<std::int64_t>& multiplicity_vector() const { return multiplicity_; }
    void set_multiplicity(std::vector<std::int64_t> m);

    /// Throws NumericError if any entry is non-finite.
    void validate() const;

private:
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
    std::vector<std::int64_t> multiplicity_;
};

/// A bijection on particle indices 0..N-1.
class Permutation {
public:
    explicit Permutation(std::vector<std::size_t> mapping);

    /// Identity permutation on n indices.
    static Permutation identity(std::size_t n);
    /// Swap of indices i and j, identity elsewhere.
    static Permutation transposition(std::size_t n, std::size_t i, std::size_t j);

    std::size_t size() const { return mapping_.size(); }
    std::size_t operator()(std::size_t i) const { return mapping_[i]; }
    const std::vector<std::size_t>& mapping() const { return mapping_; }

    Permutation inverse() const;

private:
    std::vector<std::size_t> mapping_;
};

/// Positive training step size.
class StepSize {
public:
    explicit StepSize(double eta);
    double value() const { return eta_; }

private:
    double eta_;
};

/// (PX)_i = X_{p(i)}; multiplicities are permuted identically.
ParticleCollection apply_permutation(const Permutation& p, const ParticleCollection& x);

/// sqrt(sum_i ||x_i - y_i||^2) over two same-shape collections.
double collection_distance(const ParticleCollection& x, const ParticleCollection& y);

/// Euclidean distance ||x_i - x_j||.
double pair_distance(const ParticleCollection& x, std::size_t i, std::size_t j);

/// One generic update step: row i of the result is x_i + eta * u_i.
ParticleCollection step(const ParticleCollection& x, const ParticleCollection& u,
                        StepSize eta);

/// Max absolute entry of (x - y); used by the equivariance checker.
double max_abs_difference(const ParticleCollection& x, const ParticleCollection& y);

/// Writes the point-cloud snapshot CSV: header `x0,...,x{D-1},mult`, one
/// particle per row, 17 significant digits.
void write_point_cloud_csv(const ParticleCollection& x, const std::string& path);

/// Reads a snapshot written by write_point_cloud_csv. The `mult` column is
/// optional on input.
ParticleCollection read_point_cloud_csv(const std::string& path);

} // namespace neurotopo

#endif
