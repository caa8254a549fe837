#include "leslab/weight_projection.hpp"

#include "binary_io.hpp"
#include "leslab/octa_group.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace leslab::equiv {

std::string_view to_string(LayerKind kind)
{
    switch (kind) {
    case LayerKind::Lift: return "lift";
    case LayerKind::Inner: return "inner";
    case LayerKind::Final: return "final";
    }
    return "unknown";
}

LayerShape shape_of(LayerKind kind)
{
    switch (kind) {
    case LayerKind::Lift: return {48, 9, 9};
    case LayerKind::Inner: return {48, 48, 48};
    case LayerKind::Final: return {9, 48, 9};
    }
    throw std::invalid_argument("unknown layer kind");
}

namespace {

constexpr double kInvOrder = 1.0 / octa::kOrder;

struct Reps {
    std::array<octa::RegularRep, octa::kOrder> regular;
    std::array<octa::TensorRep, octa::kOrder> tensor;
    Reps()
    {
        for (auto g : octa::enumerate_group()) {
            regular[g.index()] = octa::regular_rep(g);
            tensor[g.index()] = octa::tensor_rep(g);
        }
    }
};

const Reps& reps()
{
    static const Reps r;
    return r;
}

void check_size(LayerKind kind, std::span<const double> w)
{
    if (int(w.size()) != shape_of(kind).size())
        throw std::invalid_argument("weight matrix has wrong size for " +
                                    std::string(to_string(kind)) + " layer");
}

}  // namespace

// (P^T w P)_ab = w[pi(a), pi(b)]
Weights project_inner(std::span<const double> w)
{
    check_size(LayerKind::Inner, w);
    Weights out(48 * 48, 0.0);
    for (const auto& rep : reps().regular) {
        const auto& pi = rep.perm;
        for (int a = 0; a < 48; ++a)
            for (int b = 0; b < 48; ++b)
                out[48 * a + b] += w[48 * pi[a] + pi[b]];
    }
    for (auto& x : out)
        x *= kInvOrder;
    return out;
}

// (P^T w Q)_ab = sign[b] w[pi(a), target[b]]
Weights project_lift(std::span<const double> w)
{
    check_size(LayerKind::Lift, w);
    Weights out(48 * 9, 0.0);
    for (int g = 0; g < octa::kOrder; ++g) {
        const auto& pi = reps().regular[g].perm;
        const auto& q = reps().tensor[g];
        for (int a = 0; a < 48; ++a)
            for (int b = 0; b < 9; ++b)
                out[9 * a + b] += q.sign[b] * w[9 * pi[a] + q.target[b]];
    }
    for (auto& x : out)
        x *= kInvOrder;
    return out;
}

// (Q^T w P)_ab = sign[a] w[target[a], pi(b)]
Weights project_final(std::span<const double> w)
{
    check_size(LayerKind::Final, w);
    Weights out(9 * 48, 0.0);
    for (int g = 0; g < octa::kOrder; ++g) {
        const auto& pi = reps().regular[g].perm;
        const auto& q = reps().tensor[g];
        for (int a = 0; a < 9; ++a)
            for (int b = 0; b < 48; ++b)
                out[48 * a + b] += q.sign[a] * w[48 * q.target[a] + pi[b]];
    }
    for (auto& x : out)
        x *= kInvOrder;
    return out;
}

Weights project(LayerKind kind, std::span<const double> w)
{
    switch (kind) {
    case LayerKind::Lift: return project_lift(w);
    case LayerKind::Inner: return project_inner(w);
    case LayerKind::Final: return project_final(w);
    }
    throw std::invalid_argument("unknown layer kind");
}

NaiveProjector projector_matrix(LayerKind kind)
{
    const int d = shape_of(kind).size();
    NaiveProjector p{kind, d, std::vector<double>(std::size_t(d) * d, 0.0)};
    std::vector<double> unit(d, 0.0);
    for (int j = 0; j < d; ++j) {
        unit[j] = 1.0;
        const Weights col = project(kind, unit);
        unit[j] = 0.0;
        for (int i = 0; i < d; ++i)
            p.matrix[std::size_t(i) * d + j] = col[i];
    }
    return p;
}

SharedBasis shared_basis(LayerKind kind)
{
    const LayerShape shape = shape_of(kind);
    NaiveProjector p = projector_matrix(kind);
    const int d = p.dim;
    // Symmetrize away round-off before the symmetric solver.
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const double s = 0.5 * (p.matrix[std::size_t(i) * d + j] + p.matrix[std::size_t(j) * d + i]);
            p.matrix[std::size_t(i) * d + j] = s;
            p.matrix[std::size_t(j) * d + i] = s;
        }
    // Group elements act by signed permutations, so the projector splits into
    // independent blocks; solve each block with the dense symmetric solver.
    std::vector<int> parent(d);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](int i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (p.matrix[std::size_t(i) * d + j] != 0.0)
                parent[find(i)] = find(j);
    std::vector<std::vector<int>> blocks(d);
    for (int i = 0; i < d; ++i)
        blocks[find(i)].push_back(i);

    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> vectors;
    eigenvalues.reserve(d);
    vectors.reserve(d);
    for (const auto& idx : blocks) {
        const int m = int(idx.size());
        if (m == 0)
            continue;
        Eigen::MatrixXd sub(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                sub(a, b) = p.matrix[std::size_t(idx[a]) * d + idx[b]];
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("symmetric eigensolver failed");
        for (int c = 0; c < m; ++c) {
            eigenvalues.push_back(solver.eigenvalues()(c));
            std::vector<double> v(d, 0.0);
            for (int a = 0; a < m; ++a)
                v[idx[a]] = solver.eigenvectors()(a, c);
            vectors.push_back(std::move(v));
        }
    }

    constexpr double kTol = 1e-8;
    std::vector<int> unit_columns;
    for (int j = 0; j < d; ++j) {
        const double lam = eigenvalues[j];
        if (std::abs(lam - 1.0) <= kTol)
            unit_columns.push_back(j);
        else if (std::abs(lam) > kTol)
            throw std::runtime_error("projector spectrum is not {0, 1}: eigenvalue " +
                                     std::to_string(lam));
    }
    if (int(unit_columns.size()) != shape.rank)
        throw std::runtime_error("projector rank " + std::to_string(unit_columns.size()) +
                                 " differs from expected " + std::to_string(shape.rank));

    SharedBasis basis{kind, d, shape.rank, std::vector<double>(std::size_t(d) * shape.rank)};
    for (int r = 0; r < shape.rank; ++r)
        for (int i = 0; i < d; ++i)
            basis.columns[std::size_t(r) * d + i] = vectors[unit_columns[r]][i];
    return basis;
}

const SharedBasis& cached_shared_basis(LayerKind kind)
{
    static std::once_flag flags[3];
    static SharedBasis bases[3];
    const int slot = int(kind);
    std::call_once(flags[slot], [&] { bases[slot] = shared_basis(kind); });
    return bases[slot];
}

Weights expand(const SharedBasis& basis, std::span<const double> theta)
{
    if (int(theta.size()) != basis.cols)
        throw std::invalid_argument("parameter vector length " + std::to_string(theta.size()) +
                                    " does not match basis rank " + std::to_string(basis.cols));
    Weights w(basis.rows, 0.0);
    for (int r = 0; r < basis.cols; ++r) {
        const double t = theta[r];
        const auto col = basis.column(r);
        for (int i = 0; i < basis.rows; ++i)
            w[i] += t * col[i];
    }
    return w;
}

std::vector<double> contract(const SharedBasis& basis, std::span<const double> w)
{
    if (int(w.size()) != basis.rows)
        throw std::invalid_argument("weight matrix size does not match basis");
    std::vector<double> theta(basis.cols, 0.0);
    for (int r = 0; r < basis.cols; ++r) {
        const auto col = basis.column(r);
        double s = 0.0;
        for (int i = 0; i < basis.rows; ++i)
            s += col[i] * w[i];
        theta[r] = s;
    }
    return theta;
}

namespace {

// Dense representation matrices, deliberately built from the group tables
// rather than the index formulas used by the projections above.
std::vector<double> dense_regular(octa::GroupElement g)
{
    std::vector<double> m(48 * 48, 0.0);
    const auto& table = octa::cayley_table();
    for (int i = 0; i < 48; ++i)
        for (int j = 0; j < 48; ++j)
            if (table[g.index()][j] == i)
                m[48 * i + j] = 1.0;
    return m;
}

std::vector<double> dense_tensor(octa::GroupElement g)
{
    const Mat3 r = octa::rotation_matrix(g).to_real();
    std::vector<double> q(81, 0.0);
    // Q[(i,j),(k,l)] = R_ik R_jl for row-major flattening.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    q[9 * (3 * i + j) + 3 * k + l] = r(i, k) * r(j, l);
    return q;
}

std::vector<double> matmul(const std::vector<double>& a, int ar, int ac,
                           std::span<const double> b, int bc)
{
    std::vector<double> c(std::size_t(ar) * bc, 0.0);
    for (int i = 0; i < ar; ++i)
        for (int k = 0; k < ac; ++k) {
            const double x = a[std::size_t(i) * ac + k];
            if (x == 0.0)
                continue;
            for (int j = 0; j < bc; ++j)
                c[std::size_t(i) * bc + j] += x * b[std::size_t(k) * bc + j];
        }
    return c;
}

std::vector<double> matmul(std::span<const double> a, int ar, int ac,
                           const std::vector<double>& b, int bc)
{
    std::vector<double> c(std::size_t(ar) * bc, 0.0);
    for (int i = 0; i < ar; ++i)
        for (int k = 0; k < ac; ++k) {
            const double x = a[std::size_t(i) * ac + k];
            for (int j = 0; j < bc; ++j)
                c[std::size_t(i) * bc + j] += x * b[std::size_t(k) * bc + j];
        }
    return c;
}

}  // namespace

double max_commutation_violation(LayerKind kind, std::span<const double> w)
{
    check_size(kind, w);
    const LayerShape s = shape_of(kind);
    double worst = 0.0;
    for (auto g : octa::enumerate_group()) {
        const auto left = (kind == LayerKind::Final) ? dense_tensor(g) : dense_regular(g);
        const auto right = (kind == LayerKind::Lift) ? dense_tensor(g) : dense_regular(g);
        const auto lw = matmul(left, s.out_dim, s.out_dim, w, s.in_dim);
        const auto wr = matmul(w, s.out_dim, s.in_dim, right, s.in_dim);
        double acc = 0.0;
        for (std::size_t i = 0; i < lw.size(); ++i)
            acc += (lw[i] - wr[i]) * (lw[i] - wr[i]);
        worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
}

void write_basis_cache(const std::filesystem::path& path, const SharedBasis& basis)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    detail::write_magic(os, "EQBASIS1");
    detail::write_le<std::uint8_t>(os, std::uint8_t(basis.kind));
    detail::write_le<std::uint32_t>(os, std::uint32_t(basis.rows));
    detail::write_le<std::uint32_t>(os, std::uint32_t(basis.cols));
    for (double x : basis.columns)
        detail::write_le<double>(os, x);
    if (!os)
        throw std::runtime_error("failed writing " + path.string());
}

SharedBasis read_basis_cache(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    const std::string what = "basis cache " + path.string();
    detail::expect_magic(is, "EQBASIS1", what);
    const auto tag = detail::read_le<std::uint8_t>(is);
    if (tag > 2)
        throw std::runtime_error(what + ": unknown layer kind tag");
    SharedBasis b;
    b.kind = LayerKind(tag);
    b.rows = int(detail::read_le<std::uint32_t>(is));
    b.cols = int(detail::read_le<std::uint32_t>(is));
    const LayerShape s = shape_of(b.kind);
    if (b.rows != s.size() || b.cols != s.rank)
        throw std::runtime_error(what + ": header dimensions do not match layer kind");
    b.columns.resize(std::size_t(b.rows) * b.cols);
    for (auto& x : b.columns)
        x = detail::read_le<double>(is);
    detail::expect_eof(is, what);
    return b;
}

bool validate_basis(const SharedBasis& basis, double tol)
{
    const LayerShape s = shape_of(basis.kind);
    if (basis.rows != s.size() || basis.cols != s.rank ||
        basis.columns.size() != std::size_t(basis.rows) * basis.cols)
        return false;
    for (int a = 0; a < basis.cols; ++a)
        for (int b = a; b < basis.cols; ++b) {
            double dot = 0.0;
            const auto ca = basis.column(a);
            const auto cb = basis.column(b);
            for (int i = 0; i < basis.rows; ++i)
                dot += ca[i] * cb[i];
            if (std::abs(dot - (a == b ? 1.0 : 0.0)) > tol)
                return false;
        }
    for (int a = 0; a < basis.cols; ++a) {
        const auto col = basis.column(a);
        const Weights projected = project(basis.kind, col);
        double diff = 0.0;
        for (int i = 0; i < basis.rows; ++i)
            diff = std::max(diff, std::abs(projected[i] - col[i]));
        if (diff > tol)
            return false;
    }
    return true;
}

}  // namespace leslab::equiv
