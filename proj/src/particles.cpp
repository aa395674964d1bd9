#include "neurotopo/particles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace neurotopo {

ParticleCollection::ParticleCollection(std::size_t count, std::size_t dim)
    : count_(count), dim_(dim), data_(count * dim, 0.0) {
    if (count == 0 || dim == 0)
        throw DimensionError("ParticleCollection: count and dim must be positive");
}

ParticleCollection::ParticleCollection(std::size_t count, std::size_t dim,
                                       std::vector<double> data)
    : count_(count), dim_(dim), data_(std::move(data)) {
    if (count == 0 || dim == 0)
        throw DimensionError("ParticleCollection: count and dim must be positive");
    if (data_.size() != count * dim)
        throw DimensionError("ParticleCollection: data size != count*dim");
    validate();
}

ParticleCollection::ParticleCollection(std::size_t count, std::size_t dim,
                                       std::vector<double> data,
                                       std::vector<std::int64_t> multiplicity)
    : ParticleCollection(count, dim, std::move(data)) {
    set_multiplicity(std::move(multiplicity));
}

void ParticleCollection::set_multiplicity(std::vector<std::int64_t> m) {
    if (m.empty()) {
        multiplicity_.clear();
        return;
    }
    if (m.size() != count_)
        throw DimensionError("multiplicity length != particle count");
    for (auto v : m)
        if (v < 1) throw PreconditionError("multiplicity entries must be >= 1");
    multiplicity_ = std::move(m);
}

void ParticleCollection::validate() const {
    for (std::size_t k = 0; k < data_.size(); ++k) {
        if (!std::isfinite(data_[k]))
            throw NumericError("non-finite entry at particle " +
                               std::to_string(k / dim_) + ", coordinate " +
                               std::to_string(k % dim_));
    }
}

Permutation::Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
    std::vector<bool> seen(mapping_.size(), false);
    for (auto m : mapping_) {
        if (m >= mapping_.size() || seen[m])
            throw PreconditionError("permutation mapping is not a bijection on 0..N-1");
        seen[m] = true;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = i;
    return Permutation(std::move(m));
}

Permutation Permutation::transposition(std::size_t n, std::size_t i, std::size_t j) {
    if (i >= n || j >= n) throw PreconditionError("transposition index out of range");
    auto p = identity(n);
    std::swap(p.mapping_[i], p.mapping_[j]);
    return p;
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(mapping_.size());
    for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = i;
    return Permutation(std::move(inv));
}

StepSize::StepSize(double eta) : eta_(eta) {
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw PreconditionError("step size must be a positive finite real");
}

ParticleCollection apply_permutation(const Permutation& p, const ParticleCollection& x) {
    if (p.size() != x.count())
        throw DimensionError("permutation length != particle count");
    ParticleCollection out(x.count(), x.dim());
    for (std::size_t i = 0; i < x.count(); ++i) {
        const auto src = x.row(p(i));
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    if (x.has_multiplicity()) {
        std::vector<std::int64_t> m(x.count());
        for (std::size_t i = 0; i < x.count(); ++i) m[i] = x.multiplicity(p(i));
        out.set_multiplicity(std::move(m));
    }
    return out;
}

double collection_distance(const ParticleCollection& x, const ParticleCollection& y) {
    if (x.dim() != y.dim() || x.count() != y.count())
        throw DimensionError("collection_distance: shape mismatch");
    double sq = 0.0;
    const auto& a = x.data();
    const auto& b = y.data();
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        sq += d * d;
    }
    return std::sqrt(sq);
}

double pair_distance(const ParticleCollection& x, std::size_t i, std::size_t j) {
    if (i >= x.count() || j >= x.count())
        throw DimensionError("pair_distance: index out of range");
    double sq = 0.0;
    const auto a = x.row(i);
    const auto b = x.row(j);
    for (std::size_t k = 0; k < x.dim(); ++k) {
        const double d = a[k] - b[k];
        sq += d * d;
    }
    return std::sqrt(sq);
}

ParticleCollection step(const ParticleCollection& x, const ParticleCollection& u,
                        StepSize eta) {
    if (x.dim() != u.dim() || x.count() != u.count())
        throw DimensionError("step: update shape != collection shape");
    std::vector<double> out(x.data().size());
    const double e = eta.value();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = x.data()[k] + e * u.data()[k];
    ParticleCollection result(x.count(), x.dim(), std::move(out));
    if (x.has_multiplicity()) {
        result.set_multiplicity(x.multiplicity_vector());
    }
    return result;
}

double max_abs_difference(const ParticleCollection& x, const ParticleCollection& y) {
    if (x.dim() != y.dim() || x.count() != y.count())
        throw DimensionError("max_abs_difference: shape mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < x.data().size(); ++k)
        m = std::max(m, std::abs(x.data()[k] - y.data()[k]));
    return m;
}

void write_point_cloud_csv(const ParticleCollection& x, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    for (std::size_t k = 0; k < x.dim(); ++k) out << 'x' << k << ',';
    out << "mult\n";
    char buf[40];
    for (std::size_t i = 0; i < x.count(); ++i) {
        for (std::size_t k = 0; k < x.dim(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", x(i, k));
            out << buf << ',';
        }
        out << x.multiplicity(i) << '\n';
    }
    if (!out) throw FormatError("write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError("bad numeric field '" + s + "' in " + path);
    }
}

} // namespace

ParticleCollection read_point_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw FormatError("empty point-cloud file: " + path);
    const auto cols = split_csv_line(header);
    bool has_mult = !cols.empty() && cols.back() == "mult";
    const std::size_t dim = has_mult ? cols.size() - 1 : cols.size();
    if (dim == 0) throw FormatError("point-cloud header has no coordinate columns: " + path);

    std::vector<double> data;
    std::vector<std::int64_t> mult;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != cols.size())
            throw FormatError("row width mismatch in " + path);
        for (std::size_t k = 0; k < dim; ++k) data.push_back(parse_double(fields[k], path));
        if (has_mult)
            mult.push_back(static_cast<std::int64_t>(parse_double(fields[dim], path)));
    }
    if (data.empty()) throw FormatError("point-cloud file has no rows: " + path);
    const std::size_t n = data.size() / dim;
    ParticleCollection x(n, dim, std::move(data));
    if (has_mult) x.set_multiplicity(std::move(mult));
    return x;
}

} // namespace neurotopo
