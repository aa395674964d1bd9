#include "neurotopo/topology.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "neurotopo/rng.hpp"
#include "neurotopo/threading.hpp"
#include "neurotopo/union_find.hpp"

namespace neurotopo {

namespace {

using Simplex = std::array<std::int32_t, 4>;

// Edge membership rule: d <= scale plus a snap tolerance, so that isometries
// applied in floating point cannot flip boundary-case edges.
inline bool within_scale(double d, double scale) {
    return d <= scale + 1e-12 * (1.0 + scale);
}

} // namespace

double DistanceMatrix::max_entry() const {
    double m = 0.0;
    for (double e : entries_) m = std::max(m, e);
    return m;
}

std::size_t RipsComplex::total_simplices() const {
    std::size_t total = 0;
    for (const auto& list : simplices) total += list.size();
    return total;
}

DistanceMatrix pairwise_distances(const ParticleCollection& points) {
    const std::size_t n = points.count();
    const std::size_t d = points.dim();
    DistanceMatrix dm(n);
    parallel_for(n, [&](std::size_t i) {
        const auto xi = points.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto xj = points.row(j);
            double sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = xi[k] - xj[k];
                sq += diff * diff;
            }
            dm.set(i, j, std::sqrt(sq));
        }
    });
    return dm;
}

double adaptive_scale(const DistanceMatrix& dm) {
    if (dm.size() < 2)
        throw PreconditionError("adaptive_scale: needs at least 2 points");
    const double diameter = dm.max_entry();
    if (diameter <= 0.0)
        throw DegenerateCloudError("adaptive_scale: all points coincide");
    return diameter / 4.0;
}

RipsComplex build_rips(const DistanceMatrix& dm, double scale, int max_dim,
                       std::size_t budget) {
    if (!(scale > 0.0)) throw PreconditionError("build_rips: scale must be positive");
    if (max_dim < 1 || max_dim > 3)
        throw PreconditionError("build_rips: max_dim must be 1, 2 or 3");

    const std::size_t n = dm.size();
    RipsComplex cx;
    cx.scale = scale;
    cx.n_points = n;
    cx.max_dim = max_dim;

    cx.simplices[0].reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        cx.simplices[0].push_back({static_cast<std::int32_t>(i), -1, -1, -1});

    // Adjacency bitsets; up[i] keeps only neighbors with larger index so the
    // clique expansion enumerates each simplex once, in sorted-vertex order.
    const std::size_t words = (n + 63) / 64;
    std::vector<std::uint64_t> up(n * words, 0);
    std::size_t edge_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (within_scale(dm(i, j), scale)) {
                up[i * words + j / 64] |= (1ULL << (j % 64));
                ++edge_count;
            }
        }
    }
    if (n + edge_count > budget)
        throw BudgetError("build_rips: simplex budget exceeded at edges");

    cx.simplices[1].reserve(edge_count);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t* row = &up[i * words];
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t bits = row[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                bits &= bits - 1;
                const std::int32_t j = static_cast<std::int32_t>(w * 64 + b);
                cx.simplices[1].push_back({static_cast<std::int32_t>(i), j, -1, -1});
            }
        }
    }
    if (max_dim < 2) return cx;

    // Triangles and tetrahedra, bucketed per lowest vertex so the expansion
    // can run in parallel and still produce a deterministic ordering.
    std::vector<std::vector<Simplex>> tri_buckets(n);
    std::vector<std::vector<Simplex>> tet_buckets(n);
    std::atomic<std::size_t> extra_count{n + edge_count};
    const bool want_tets = max_dim >= 3;

    // Workers flush their local counts every 4096 simplices so the budget is
    // enforced while enumerating, before memory is committed.
    const auto charge = [&](std::size_t& local) {
        if (++local >= 4096) {
            if (extra_count.fetch_add(local, std::memory_order_relaxed) + local > budget)
                throw BudgetError("build_rips: simplex budget exceeded");
            local = 0;
        }
    };

    parallel_for(n, [&](std::size_t i) {
        const std::uint64_t* row_i = &up[i * words];
        std::vector<std::uint64_t> common(words), common3(words);
        std::size_t local = 0;
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t bits = row_i[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                bits &= bits - 1;
                const std::size_t j = w * 64 + b;
                const std::uint64_t* row_j = &up[j * words];
                for (std::size_t t = 0; t < words; ++t) common[t] = row_i[t] & row_j[t];
                for (std::size_t w2 = 0; w2 < words; ++w2) {
                    std::uint64_t cbits = common[w2];
                    while (cbits) {
                        const int cb = std::countr_zero(cbits);
                        cbits &= cbits - 1;
                        const std::size_t k = w2 * 64 + cb;
                        tri_buckets[i].push_back({static_cast<std::int32_t>(i),
                                                  static_cast<std::int32_t>(j),
                                                  static_cast<std::int32_t>(k), -1});
                        charge(local);
                        if (want_tets) {
                            const std::uint64_t* row_k = &up[k * words];
                            for (std::size_t t = 0; t < words; ++t)
                                common3[t] = common[t] & row_k[t];
                            for (std::size_t w3 = 0; w3 < words; ++w3) {
                                std::uint64_t dbits = common3[w3];
                                while (dbits) {
                                    const int db = std::countr_zero(dbits);
                                    dbits &= dbits - 1;
                                    const std::size_t l = w3 * 64 + db;
                                    tet_buckets[i].push_back(
                                        {static_cast<std::int32_t>(i),
                                         static_cast<std::int32_t>(j),
                                         static_cast<std::int32_t>(k),
                                         static_cast<std::int32_t>(l)});
                                    charge(local);
                                }
                            }
                        }
                    }
                }
            }
        }
        extra_count.fetch_add(local, std::memory_order_relaxed);
    });

    if (extra_count.load() > budget)
        throw BudgetError("build_rips: simplex budget exceeded");

    std::size_t tri_total = 0, tet_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tri_total += tri_buckets[i].size();
        tet_total += tet_buckets[i].size();
    }
    cx.simplices[2].reserve(tri_total);
    for (auto& bucket : tri_buckets)
        cx.simplices[2].insert(cx.simplices[2].end(), bucket.begin(), bucket.end());
    if (want_tets) {
        cx.simplices[3].reserve(tet_total);
        for (auto& bucket : tet_buckets)
            cx.simplices[3].insert(cx.simplices[3].end(), bucket.begin(), bucket.end());
    }
    return cx;
}

namespace {

// Sparse GF(2) column: sorted row indices. XOR = symmetric difference.
std::vector<std::int32_t> xor_merge(const std::vector<std::int32_t>& a,
                                    const std::vector<std::int32_t>& b) {
    std::vector<std::int32_t> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else if (a[i] > b[j]) {
            out.push_back(b[j++]);
        } else {
            ++i;
            ++j;
        }
    }
    out.insert(out.end(), a.begin() + i, a.end());
    out.insert(out.end(), b.begin() + j, b.end());
    return out;
}

std::size_t reduce_columns(std::vector<std::vector<std::int32_t>>& columns,
                           std::int32_t n_rows) {
    std::vector<std::int64_t> pivot_of_row(static_cast<std::size_t>(n_rows), -1);
    std::vector<std::vector<std::int32_t>> reduced;
    std::size_t rank = 0;
    for (auto& col : columns) {
        while (!col.empty()) {
            const std::int64_t p = pivot_of_row[static_cast<std::size_t>(col.back())];
            if (p < 0) break;
            col = xor_merge(col, reduced[static_cast<std::size_t>(p)]);
        }
        if (!col.empty()) {
            pivot_of_row[static_cast<std::size_t>(col.back())] =
                static_cast<std::int64_t>(reduced.size());
            reduced.push_back(std::move(col));
            ++rank;
        }
        col.clear();
        col.shrink_to_fit();
    }
    return rank;
}

} // namespace

std::size_t gf2_rank(std::vector<std::vector<std::int32_t>> columns) {
    std::int32_t n_rows = 0;
    for (const auto& col : columns)
        if (!col.empty()) n_rows = std::max(n_rows, col.back() + 1);
    return reduce_columns(columns, n_rows);
}

namespace {

// Binary search for a face among the sorted (k-1)-simplices. Simplex lists
// produced by build_rips are already in lexicographic order.
std::int64_t find_simplex(const std::vector<Simplex>& sorted, const Simplex& s) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), s);
    if (it == sorted.end() || *it != s) return -1;
    return it - sorted.begin();
}

// Columns of the boundary operator from k-simplices to (k-1)-simplices.
// Throws when a face is missing (downward-closure violation).
std::vector<std::vector<std::int32_t>> boundary_columns(
    const std::vector<Simplex>& faces, const std::vector<Simplex>& cells, int k) {
    std::vector<std::vector<std::int32_t>> cols(cells.size());
    parallel_for(cells.size(), [&](std::size_t c) {
        std::vector<std::int32_t> rows;
        rows.reserve(static_cast<std::size_t>(k) + 1);
        for (int omit = 0; omit <= k; ++omit) {
            Simplex face = {-1, -1, -1, -1};
            int w = 0;
            for (int v = 0; v <= k; ++v)
                if (v != omit) face[w++] = cells[c][v];
            const std::int64_t idx = find_simplex(faces, face);
            if (idx < 0)
                throw MalformedComplexError(
                    "betti_numbers: complex violates downward closure");
            rows.push_back(static_cast<std::int32_t>(idx));
        }
        std::sort(rows.begin(), rows.end());
        cols[c] = std::move(rows);
    });
    return cols;
}

// Rank of the boundary matrix, reducing whichever orientation has fewer
// columns (rank is invariant under transpose and the narrow side reduces
// much faster on Rips complexes).
std::size_t boundary_rank(const std::vector<Simplex>& faces,
                          const std::vector<Simplex>& cells, int k) {
    if (cells.empty() || faces.empty()) return 0;
    auto cols = boundary_columns(faces, cells, k);
    if (cells.size() <= faces.size())
        return reduce_columns(cols, static_cast<std::int32_t>(faces.size()));
    // Transpose: one column per face listing the cells containing it.
    std::vector<std::vector<std::int32_t>> trans(faces.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (const std::int32_t r : cols[c])
            trans[static_cast<std::size_t>(r)].push_back(static_cast<std::int32_t>(c));
    cols.clear();
    cols.shrink_to_fit();
    return reduce_columns(trans, static_cast<std::int32_t>(cells.size()));
}

std::vector<Simplex> sorted_copy(const std::vector<Simplex>& v) {
    std::vector<Simplex> out = v;
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

BettiProfile betti_numbers(const RipsComplex& complex) {
    const auto verts = sorted_copy(complex.simplices[0]);
    const auto edges = sorted_copy(complex.simplices[1]);
    const auto tris = sorted_copy(complex.simplices[2]);
    const auto tets = sorted_copy(complex.simplices[3]);

    const std::size_t r1 = boundary_rank(verts, edges, 1);
    const std::size_t r2 = boundary_rank(edges, tris, 2);
    const std::size_t r3 = boundary_rank(tris, tets, 3);

    const auto n0 = static_cast<std::int64_t>(verts.size());
    const auto n1 = static_cast<std::int64_t>(edges.size());
    const auto n2 = static_cast<std::int64_t>(tris.size());
    const auto n3 = static_cast<std::int64_t>(tets.size());

    BettiProfile profile;
    profile.b0 = n0 - static_cast<std::int64_t>(r1);
    profile.b1 = n1 - static_cast<std::int64_t>(r1) - static_cast<std::int64_t>(r2);
    profile.b2 = n2 - static_cast<std::int64_t>(r2) - static_cast<std::int64_t>(r3);
    profile.scale_used = complex.scale;
    profile.n_points = complex.n_points;

    // Euler-Poincare bookkeeping check on the computed ranks.
    const std::int64_t b3_term = n3 - static_cast<std::int64_t>(r3);
    const std::int64_t euler = n0 - n1 + n2 - n3;
    if (profile.b0 - profile.b1 + profile.b2 - b3_term != euler)
        throw NumericError("betti_numbers: Euler-Poincare check failed");
    return profile;
}

namespace {

using BigInt = boost::multiprecision::cpp_int;

// Exact rank over the rationals by fraction-free (Bareiss) elimination with
// full pivoting. Dense; only used inside the size-capped oracle.
std::size_t bareiss_rank(std::vector<std::vector<BigInt>> m) {
    const std::size_t rows = m.size();
    if (rows == 0) return 0;
    const std::size_t cols = m[0].size();
    std::size_t rank = 0;
    BigInt prev = 1;
    for (std::size_t step = 0; step < std::min(rows, cols); ++step) {
        // Find any nonzero entry in the remaining submatrix.
        std::size_t pr = rows, pc = cols;
        for (std::size_t i = step; i < rows && pr == rows; ++i)
            for (std::size_t j = step; j < cols; ++j)
                if (m[i][j] != 0) {
                    pr = i;
                    pc = j;
                    break;
                }
        if (pr == rows) break;
        std::swap(m[step], m[pr]);
        if (pc != step)
            for (std::size_t i = 0; i < rows; ++i) std::swap(m[i][step], m[i][pc]);

        for (std::size_t i = step + 1; i < rows; ++i) {
            for (std::size_t j = step + 1; j < cols; ++j) {
                m[i][j] = (m[step][step] * m[i][j] - m[i][step] * m[step][j]) / prev;
            }
            m[i][step] = 0;
        }
        prev = m[step][step];
        ++rank;
    }
    return rank;
}

// Signed boundary matrix (entries in {-1, 0, +1}) of the k-boundary operator.
std::vector<std::vector<BigInt>> signed_boundary(const std::vector<Simplex>& faces,
                                                 const std::vector<Simplex>& cells,
                                                 int k) {
    std::vector<std::vector<BigInt>> m(faces.size(),
                                       std::vector<BigInt>(cells.size(), 0));
    for (std::size_t c = 0; c < cells.size(); ++c) {
        int sign = 1;
        for (int omit = 0; omit <= k; ++omit) {
            Simplex face = {-1, -1, -1, -1};
            int w = 0;
            for (int v = 0; v <= k; ++v)
                if (v != omit) face[w++] = cells[c][v];
            const std::int64_t idx = find_simplex(faces, face);
            if (idx < 0)
                throw MalformedComplexError(
                    "betti_oracle: complex violates downward closure");
            m[static_cast<std::size_t>(idx)][c] = sign;
            sign = -sign;
        }
    }
    return m;
}

} // namespace

BettiProfile betti_oracle(const RipsComplex& complex) {
    if (complex.total_simplices() > 2000)
        throw PreconditionError("betti_oracle: size cap of 2000 simplices exceeded");

    const auto verts = sorted_copy(complex.simplices[0]);
    const auto edges = sorted_copy(complex.simplices[1]);
    const auto tris = sorted_copy(complex.simplices[2]);
    const auto tets = sorted_copy(complex.simplices[3]);

    // b0 by union-find over the edge graph.
    UnionFind uf(verts.size());
    std::vector<std::size_t> vertex_index(
        verts.empty() ? 0 : static_cast<std::size_t>(verts.back()[0]) + 1, 0);
    for (std::size_t i = 0; i < verts.size(); ++i)
        vertex_index[static_cast<std::size_t>(verts[i][0])] = i;
    for (const auto& e : edges)
        uf.unite(vertex_index[static_cast<std::size_t>(e[0])],
                 vertex_index[static_cast<std::size_t>(e[1])]);

    // b1, b2 from exact integer ranks of the signed boundary matrices.
    const std::size_t r1 =
        edges.empty() ? 0 : bareiss_rank(signed_boundary(verts, edges, 1));
    const std::size_t r2 =
        tris.empty() ? 0 : bareiss_rank(signed_boundary(edges, tris, 2));
    const std::size_t r3 =
        tets.empty() ? 0 : bareiss_rank(signed_boundary(tris, tets, 3));

    BettiProfile profile;
    profile.b0 = static_cast<std::int64_t>(uf.components());
    profile.b1 = static_cast<std::int64_t>(edges.size()) -
                 static_cast<std::int64_t>(r1) - static_cast<std::int64_t>(r2);
    profile.b2 = static_cast<std::int64_t>(tris.size()) -
                 static_cast<std::int64_t>(r2) - static_cast<std::int64_t>(r3);
    profile.scale_used = complex.scale;
    profile.n_points = complex.n_points;
    return profile;
}

std::vector<std::size_t> farthest_point_subsample(const DistanceMatrix& dm,
                                                  std::size_t target,
                                                  std::uint64_t seed) {
    const std::size_t n = dm.size();
    if (target >= n) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    if (target == 0) return {};
    Rng rng(seed);
    std::vector<std::size_t> chosen;
    chosen.reserve(target);
    std::vector<double> dist_to_set(n, std::numeric_limits<double>::infinity());
    std::size_t current = static_cast<std::size_t>(rng.uniform_index(n));
    chosen.push_back(current);
    while (chosen.size() < target) {
        std::size_t best = 0;
        double best_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            dist_to_set[i] = std::min(dist_to_set[i], dm(current, i));
            if (dist_to_set[i] > best_dist) {
                best_dist = dist_to_set[i];
                best = i;
            }
        }
        current = best;
        chosen.push_back(current);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

} // namespace neurotopo
