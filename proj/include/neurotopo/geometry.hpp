#ifndef NEUROTOPO_GEOMETRY_HPP
#define NEUROTOPO_GEOMETRY_HPP

#include <cstdint>
#include <string>

#include "neurotopo/particles.hpp"

namespace neurotopo {

enum class ManifoldKind {
    circle,            // 2D, radius
    disjoint_circles,  // 2D, radius, centers at (+-separation, 0)
    annulus_two_holes, // 2D filled disk with two circular holes
    sphere,            // 3D unit sphere surface (radius configurable)
    torus,             // 3D, major/minor radii
    disjoint_tori,     // 3D, two copies offset along x
    genus2             // 3D implicit double-torus surface
};

ManifoldKind manifold_kind_from_string(const std::string& name);
std::string to_string(ManifoldKind kind);

/// Sampling request for an initial neuron distribution.
struct ManifoldSpec {
    ManifoldKind kind = ManifoldKind::sphere;
    std::size_t n = 1024;
    std::uint64_t seed = 0;

    double radius = 1.0;       // circle / disjoint_circles / sphere
    double separation = 2.0;   // center offset for disjoint variants
    double outer_radius = 3.0; // annulus_two_holes
    double hole_radius = 1.0;  // annulus_two_holes (holes at +-1.5 on x)
    double hole_offset = 1.5;  // annulus_two_holes
    double major_radius = 2.0; // torus
    double minor_radius = 0.9; // torus
    double genus2_s = 36.0;    // implicit surface z^2 scale
    double genus2_t = 0.04;    // implicit surface level
};

/// Draws n seeded points on the requested manifold. Deterministic given the
/// seed and independent of thread count.
ParticleCollection sample(const ManifoldSpec& spec);

/// Residual of the genus-2 implicit surface at a 3D point.
double genus2_residual(double x, double y, double z, double s, double t);

enum class EmbedMode { random_frame, zero_pad };

/// Maps a low-dimensional cloud into target_dim dimensions through a seeded
/// random orthonormal frame (or plain zero padding); pairwise distances are
/// preserved to rounding.
ParticleCollection embed(const ParticleCollection& points, std::size_t target_dim,
                         std::uint64_t seed, EmbedMode mode = EmbedMode::random_frame);

} // namespace neurotopo

#endif
