#include "neurotopo/geometry.hpp"

#include <cmath>

#include "neurotopo/rng.hpp"

namespace neurotopo {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr std::size_t kMaxProposals = 1'000'000;

} // namespace

ManifoldKind manifold_kind_from_string(const std::string& name) {
    if (name == "circle") return ManifoldKind::circle;
    if (name == "disjoint_circles") return ManifoldKind::disjoint_circles;
    if (name == "annulus_two_holes") return ManifoldKind::annulus_two_holes;
    if (name == "sphere") return ManifoldKind::sphere;
    if (name == "torus") return ManifoldKind::torus;
    if (name == "disjoint_tori") return ManifoldKind::disjoint_tori;
    if (name == "genus2") return ManifoldKind::genus2;
    throw PreconditionError("unknown manifold kind '" + name + "'");
}

std::string to_string(ManifoldKind kind) {
    switch (kind) {
        case ManifoldKind::circle: return "circle";
        case ManifoldKind::disjoint_circles: return "disjoint_circles";
        case ManifoldKind::annulus_two_holes: return "annulus_two_holes";
        case ManifoldKind::sphere: return "sphere";
        case ManifoldKind::torus: return "torus";
        case ManifoldKind::disjoint_tori: return "disjoint_tori";
        case ManifoldKind::genus2: return "genus2";
    }
    return "?";
}

double genus2_residual(double x, double y, double z, double s, double t) {
    const double w = (x * x - 1.0) * x * x + y * y;
    return w * w + z * z / s - t;
}

namespace {

// Each sample index gets its own substream so the output is independent of
// any internal parallelism or evaluation order.
Rng sample_rng(std::uint64_t seed, std::size_t index) {
    return Rng::substream(seed, 0x9e0 + index);
}

void circle_point(Rng& rng, double radius, double cx, double* out) {
    const double theta = rng.uniform(0.0, kTwoPi);
    out[0] = cx + radius * std::cos(theta);
    out[1] = radius * std::sin(theta);
}

void sphere_point(Rng& rng, double radius, double* out) {
    double v[3];
    double norm = 0.0;
    do {
        for (int k = 0; k < 3; ++k) v[k] = rng.normal();
        norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    } while (norm <= 1e-12);
    for (int k = 0; k < 3; ++k) out[k] = radius * v[k] / norm;
}

void torus_point(Rng& rng, double R, double r, double cx, double* out) {
    const double u = rng.uniform(0.0, kTwoPi);
    const double v = rng.uniform(0.0, kTwoPi);
    out[0] = cx + (R + r * std::cos(v)) * std::cos(u);
    out[1] = (R + r * std::cos(v)) * std::sin(u);
    out[2] = r * std::sin(v);
}

void annulus_point(Rng& rng, const ManifoldSpec& spec, double* out) {
    const double R = spec.outer_radius;
    for (std::size_t attempt = 0; attempt < kMaxProposals; ++attempt) {
        const double x = rng.uniform(-R, R);
        const double y = rng.uniform(-R, R);
        if (x * x + y * y > R * R) continue;
        const double dl = (x + spec.hole_offset) * (x + spec.hole_offset) + y * y;
        const double dr = (x - spec.hole_offset) * (x - spec.hole_offset) + y * y;
        const double hr2 = spec.hole_radius * spec.hole_radius;
        if (dl <= hr2 || dr <= hr2) continue;
        out[0] = x;
        out[1] = y;
        return;
    }
    throw SamplingError("annulus_two_holes: rejection sampling failed");
}

// Rejection over the 2-holed planar domain |w(x,y)| <= sqrt(t), then the z
// branch from the implicit equation; this lands exactly on the surface.
void genus2_point(Rng& rng, double s, double t, double* out) {
    const double wmax = std::sqrt(t);
    for (std::size_t attempt = 0; attempt < kMaxProposals; ++attempt) {
        const double x = rng.uniform(-1.2, 1.2);
        const double y = rng.uniform(-0.7, 0.7);
        const double w = (x * x - 1.0) * x * x + y * y;
        if (std::abs(w) > wmax) continue;
        const double z2 = s * (t - w * w);
        const double z = std::sqrt(std::max(0.0, z2));
        out[0] = x;
        out[1] = y;
        out[2] = rng.uniform() < 0.5 ? z : -z;
        return;
    }
    throw SamplingError("genus2: rejection sampling failed");
}

} // namespace

ParticleCollection sample(const ManifoldSpec& spec) {
    if (spec.n < 1) throw PreconditionError("sample: n must be >= 1");
    if (spec.radius <= 0.0 || spec.major_radius <= 0.0 || spec.minor_radius <= 0.0 ||
        spec.outer_radius <= 0.0 || spec.hole_radius <= 0.0)
        throw PreconditionError("sample: radii must be positive");

    const bool planar = spec.kind == ManifoldKind::circle ||
                        spec.kind == ManifoldKind::disjoint_circles ||
                        spec.kind == ManifoldKind::annulus_two_holes;
    const std::size_t dim = planar ? 2 : 3;
    ParticleCollection points(spec.n, dim);

    for (std::size_t i = 0; i < spec.n; ++i) {
        Rng rng = sample_rng(spec.seed, i);
        double* out = points.row(i).data();
        switch (spec.kind) {
            case ManifoldKind::circle:
                circle_point(rng, spec.radius, 0.0, out);
                break;
            case ManifoldKind::disjoint_circles:
                circle_point(rng, spec.radius, i % 2 == 0 ? -spec.separation : spec.separation,
                             out);
                break;
            case ManifoldKind::annulus_two_holes:
                annulus_point(rng, spec, out);
                break;
            case ManifoldKind::sphere:
                sphere_point(rng, spec.radius, out);
                break;
            case ManifoldKind::torus:
                torus_point(rng, spec.major_radius, spec.minor_radius, 0.0, out);
                break;
            case ManifoldKind::disjoint_tori: {
                // Surface gap = (R+r) + 2*separation, which stays above the
                // adaptive scale (union diameter / 4) whenever
                // separation > (R+r)/6, so the components remain disjoint.
                const double offset = 3.0 * (spec.major_radius + spec.minor_radius) +
                                      2.0 * spec.separation;
                torus_point(rng, spec.major_radius, spec.minor_radius,
                            i % 2 == 0 ? -offset / 2.0 : offset / 2.0, out);
                break;
            }
            case ManifoldKind::genus2:
                genus2_point(rng, spec.genus2_s, spec.genus2_t, out);
                break;
        }
    }
    points.validate();
    return points;
}

ParticleCollection embed(const ParticleCollection& points, std::size_t target_dim,
                         std::uint64_t seed, EmbedMode mode) {
    const std::size_t d = points.dim();
    if (target_dim < d)
        throw DimensionError("embed: target_dim must be >= source dim");

    ParticleCollection out(points.count(), target_dim);
    if (mode == EmbedMode::zero_pad) {
        for (std::size_t i = 0; i < points.count(); ++i)
            for (std::size_t k = 0; k < d; ++k) out(i, k) = points(i, k);
        if (points.has_multiplicity())
            out.set_multiplicity(points.multiplicity_vector());
        return out;
    }

    // Seeded random orthonormal frame: Gaussian target_dim x d matrix,
    // orthonormalized column by column (modified Gram-Schmidt).
    Rng rng(Rng::substream(seed, 0xf7a3e).next_u64());
    std::vector<std::vector<double>> frame(d, std::vector<double>(target_dim));
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t r = 0; r < target_dim; ++r) frame[c][r] = rng.normal();
        for (std::size_t prev = 0; prev < c; ++prev) {
            double proj = 0.0;
            for (std::size_t r = 0; r < target_dim; ++r)
                proj += frame[c][r] * frame[prev][r];
            for (std::size_t r = 0; r < target_dim; ++r)
                frame[c][r] -= proj * frame[prev][r];
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < target_dim; ++r) norm += frame[c][r] * frame[c][r];
        norm = std::sqrt(norm);
        if (norm <= 1e-12) throw NumericError("embed: degenerate random frame");
        for (std::size_t r = 0; r < target_dim; ++r) frame[c][r] /= norm;
    }

    for (std::size_t i = 0; i < points.count(); ++i) {
        for (std::size_t r = 0; r < target_dim; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += frame[c][r] * points(i, c);
            out(i, r) = acc;
        }
    }
    if (points.has_multiplicity()) out.set_multiplicity(points.multiplicity_vector());
    return out;
}

} // namespace neurotopo
