// Copyright 2026 The ltm-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ltm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace ltm {

namespace {

using Graph = std::vector<std::vector<std::size_t>>;

// out[u] lists v with m(v, u) > threshold.
Graph column_graph(const RMatrix &m, double threshold) {
    const auto n = static_cast<std::size_t>(m.rows());
    Graph out(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (m(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) > threshold) {
                out[u].push_back(v);
            }
        }
    }
    return out;
}

// Iterative Tarjan; components are emitted sinks first.
std::vector<std::vector<std::size_t>> tarjan(const Graph &g) {
    const std::size_t n = g.size();
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, kUnset);
    std::vector<std::size_t> low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> comps;
    std::size_t counter = 0;
    std::vector<std::pair<std::size_t, std::size_t>> frames;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) {
            continue;
        }
        frames.emplace_back(root, 0);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto &[u, pos] = frames.back();
            if (pos < g[u].size()) {
                const std::size_t v = g[u][pos++];
                if (index[v] == kUnset) {
                    index[v] = low[v] = counter++;
                    stack.push_back(v);
                    on_stack[v] = true;
                    frames.emplace_back(v, 0);
                } else if (on_stack[v]) {
                    low[u] = std::min(low[u], index[v]);
                }
                continue;
            }
            const std::size_t done = u;
            frames.pop_back();
            if (!frames.empty()) {
                low[frames.back().first] = std::min(low[frames.back().first], low[done]);
            }
            if (low[done] == index[done]) {
                std::vector<std::size_t> comp;
                std::size_t w = kUnset;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
        }
    }
    return comps;
}

std::vector<long> bfs_levels(const Graph &g, std::size_t start) {
    std::vector<long> level(g.size(), -1);
    std::queue<std::size_t> q;
    level[start] = 0;
    q.push(start);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v : g[u]) {
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            }
        }
    }
    return level;
}

bool strongly_connected(const Graph &g) {
    if (g.empty()) {
        return false;
    }
    const auto fwd = bfs_levels(g, 0);
    Graph rev(g.size());
    for (std::size_t u = 0; u < g.size(); ++u) {
        for (std::size_t v : g[u]) {
            rev[v].push_back(u);
        }
    }
    const auto bwd = bfs_levels(rev, 0);
    for (std::size_t u = 0; u < g.size(); ++u) {
        if (fwd[u] < 0 || bwd[u] < 0) {
            return false;
        }
    }
    bool any_edge = false;
    for (const auto &e : g) {
        any_edge = any_edge || !e.empty();
    }
    return any_edge;
}

// Period and cyclic class of every vertex of a strongly connected graph.
int period_and_classes(const Graph &g, std::vector<int> &classes) {
    const auto level = bfs_levels(g, 0);
    long p = 0;
    for (std::size_t u = 0; u < g.size(); ++u) {
        for (std::size_t v : g[u]) {
            p = std::gcd(p, std::labs(level[u] + 1 - level[v]));
        }
    }
    classes.resize(g.size());
    for (std::size_t u = 0; u < g.size(); ++u) {
        classes[u] = static_cast<int>(p == 0 ? 0 : level[u] % p);
    }
    return static_cast<int>(p);
}

RMatrix submatrix(const RMatrix &m, const std::vector<std::size_t> &rows, const std::vector<std::size_t> &cols) {
    RMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                m(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
        }
    }
    return out;
}

RVector dominant_real_eigenvector(const RMatrix &m, double &eigenvalue) {
    Eigen::EigenSolver<RMatrix> es(m, true);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("dense eigensolver failed");
    }
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < es.eigenvalues().size(); ++k) {
        if (es.eigenvalues()[k].real() > es.eigenvalues()[best].real()) {
            best = k;
        }
    }
    eigenvalue = es.eigenvalues()[best].real();
    Eigen::VectorXcd v = es.eigenvectors().col(best);
    // Rotate the complex phase away before taking magnitudes.
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::conj(v[big]) / std::abs(v[big]);
    return v.real().cwiseAbs();
}

double collatz_gap(const RMatrix &m, const RVector &x, double &estimate) {
    const RVector y = m * x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double ratio = y[i] / x[i];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    estimate = 0.5 * (lo + hi);
    return hi - lo;
}

RVector power_vector(const RMatrix &m, const SpectralOptions &options, double shift, double &eigenvalue) {
    const Eigen::Index n = m.rows();
    const RMatrix shifted = m + shift * RMatrix::Identity(n, n);
    RVector x = RVector::Constant(n, 1.0 / static_cast<double>(n));
    double estimate = 0.0;
    double gap = 0.0;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        x = shifted * x;
        x /= x.sum();
        if (it % 16 == 15) {
            gap = collatz_gap(m, x, estimate);
            if (gap <= options.tolerance * std::max(1.0, estimate)) {
                eigenvalue = estimate;
                return x;
            }
        }
    }
    throw NumericalFailure("power iteration did not converge; Collatz-Wielandt gap " + std::to_string(gap), gap);
}

RMatrix solve_right(const RMatrix &r, const RMatrix &a) {
    // r * a^{-1}
    Eigen::PartialPivLU<RMatrix> lu(a.transpose());
    return lu.solve(r.transpose()).transpose();
}

long lcm_checked(long a, long b) {
    const long l = std::lcm(a, b);
    if (l > 10000) {
        throw LimitExceeded("period lcm exceeds 10000");
    }
    return l;
}

} // namespace

int period_of(const RMatrix &block, double threshold) {
    if (block.rows() != block.cols() || block.rows() == 0) {
        throw std::invalid_argument("period_of needs a non-empty square matrix");
    }
    const Graph g = column_graph(block, threshold);
    if (!strongly_connected(g)) {
        throw std::invalid_argument("period_of needs an irreducible matrix");
    }
    std::vector<int> classes;
    return period_and_classes(g, classes);
}

double spectral_radius(const RMatrix &m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<RMatrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

PerronPair perron(const RMatrix &block, const SpectralOptions &options) {
    if (block.rows() != block.cols() || block.rows() == 0) {
        throw std::invalid_argument("perron needs a non-empty square matrix");
    }
    const Eigen::Index n = block.rows();
    PerronPair out;
    if (n == 1) {
        out.radius = block(0, 0);
        out.left = RVector::Ones(1);
        out.right = RVector::Ones(1);
        return out;
    }
    double r_right = 0.0;
    double r_left = 0.0;
    RVector right;
    RVector left;
    const double scale = std::max(block.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
    auto residual_of = [&](const RVector &x, double r) { return (block * x - r * x).cwiseAbs().maxCoeff(); };
    bool done = false;
    if (static_cast<std::size_t>(n) > options.dense_limit) {
        // Primitive blocks converge without a shift; periodic ones need it.
        const double shift = period_of(block, options.edge_threshold) == 1 ? 0.0 : 1.0;
        try {
            right = power_vector(block, options, shift, r_right);
            left = power_vector(block.transpose(), options, shift, r_left);
            done = true;
        } catch (const NumericalFailure &) {
            if (n > 1024) {
                throw;
            }
        }
    }
    if (!done) {
        right = dominant_real_eigenvector(block, r_right);
        left = dominant_real_eigenvector(block.transpose(), r_left);
    }
    right /= right.sum();
    out.radius = r_right;
    out.right = right;
    out.left = left / left.dot(right);
    out.residual = residual_of(out.right, out.radius);
    if (!(out.residual <= 1e-10 * scale + 1e-14)) {
        std::ostringstream msg;
        msg << "Perron residual " << out.residual << " exceeds tolerance for a block of size " << n;
        throw NumericalFailure(msg.str(), out.residual);
    }
    if (out.right.minCoeff() <= 0.0 || out.left.minCoeff() <= 0.0) {
        throw NumericalFailure("Perron vectors are not strictly positive; is the block irreducible?");
    }
    return out;
}

CanonicalDecomposition decompose(const RMatrix &t, const SpectralOptions &options) {
    if (t.rows() != t.cols() || t.rows() == 0) {
        throw std::invalid_argument("decompose needs a non-empty square matrix");
    }
    if (!t.allFinite()) {
        throw std::invalid_argument("decompose input has non-finite entries");
    }
    if (t.minCoeff() < -options.negative_tolerance) {
        throw std::invalid_argument("decompose input has a negative entry " + std::to_string(t.minCoeff()));
    }
    CanonicalDecomposition dec;
    dec.matrix = t.unaryExpr([&](double x) { return x > options.edge_threshold ? x : 0.0; });
    const Graph g = column_graph(dec.matrix, options.edge_threshold);
    const auto comps = tarjan(g);
    std::vector<std::size_t> comp_of(g.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
        for (std::size_t u : comps[c]) {
            comp_of[u] = c;
        }
    }
    for (std::size_t c = 0; c < comps.size(); ++c) {
        IrreducibleBlock b;
        b.indices = comps[c];
        b.essential = true;
        for (std::size_t u : b.indices) {
            for (std::size_t v : g[u]) {
                if (comp_of[v] != c) {
                    b.essential = false;
                }
            }
        }
        const RMatrix sub = submatrix(dec.matrix, b.indices, b.indices);
        if (b.indices.size() == 1 && sub(0, 0) == 0.0) {
            b.trivial = true;
            b.period = 0;
            b.cyclic_class = {0};
            b.perron.radius = 0.0;
            b.perron.left = RVector::Ones(1);
            b.perron.right = RVector::Ones(1);
        } else {
            const Graph sg = column_graph(sub, options.edge_threshold);
            b.period = period_and_classes(sg, b.cyclic_class);
            b.perron = perron(sub, options);
        }
        b.unit_radius = std::abs(b.perron.radius - 1.0) < options.unit_tolerance;
        const double r = b.perron.radius;
        if (r > 1.0 + options.unit_tolerance) {
            dec.warnings.push_back("block containing index " + std::to_string(b.indices.front()) + " has radius " +
                                   std::to_string(r) + " > 1");
        } else if (!b.unit_radius && r > 1.0 - options.warning_band) {
            dec.warnings.push_back("block containing index " + std::to_string(b.indices.front()) +
                                   " has radius within the warning band below 1; classified contractive");
        }
        dec.blocks.push_back(std::move(b));
    }
    std::vector<std::size_t> rec;
    for (std::size_t c = 0; c < dec.blocks.size(); ++c) {
        if (dec.blocks[c].essential && dec.blocks[c].unit_radius) {
            rec.push_back(c);
        }
    }
    std::sort(rec.begin(), rec.end(),
              [&](std::size_t a, std::size_t b) { return dec.blocks[a].indices.front() < dec.blocks[b].indices.front(); });
    dec.recurrent_blocks = rec;
    for (std::size_t c : rec) {
        const auto &idx = dec.blocks[c].indices;
        dec.recurrent_indices.insert(dec.recurrent_indices.end(), idx.begin(), idx.end());
    }
    dec.q_radius = 0.0;
    for (std::size_t c = 0; c < dec.blocks.size(); ++c) {
        if (std::find(rec.begin(), rec.end(), c) != rec.end()) {
            continue;
        }
        const auto &idx = dec.blocks[c].indices;
        dec.transient_indices.insert(dec.transient_indices.end(), idx.begin(), idx.end());
        dec.q_radius = std::max(dec.q_radius, dec.blocks[c].perron.radius);
    }
    dec.permutation = dec.recurrent_indices;
    dec.permutation.insert(dec.permutation.end(), dec.transient_indices.begin(), dec.transient_indices.end());
    dec.Q = submatrix(dec.matrix, dec.transient_indices, dec.transient_indices);
    dec.R = submatrix(dec.matrix, dec.recurrent_indices, dec.transient_indices);
    return dec;
}

CanonicalDecomposition decompose(const Ltm &t, const SpectralOptions &options) {
    CanonicalDecomposition dec = decompose(t.entries, options);
    const RVector &dk = t.partition.pattern_dims();
    for (auto &b : dec.blocks) {
        b.block_dim = 0.0;
        for (std::size_t k : b.indices) {
            b.block_dim += dk[static_cast<Eigen::Index>(k)];
        }
    }
    return dec;
}

RMatrix CanonicalDecomposition::permuted() const { return submatrix(matrix, permutation, permutation); }

RMatrix CanonicalDecomposition::reassemble() const {
    RMatrix out = RMatrix::Zero(matrix.rows(), matrix.cols());
    for (std::size_t c : recurrent_blocks) {
        const auto &idx = blocks[c].indices;
        for (std::size_t r : idx) {
            for (std::size_t s : idx) {
                out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) =
                    matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
            }
        }
    }
    for (std::size_t r = 0; r < recurrent_indices.size(); ++r) {
        for (std::size_t s = 0; s < transient_indices.size(); ++s) {
            out(static_cast<Eigen::Index>(recurrent_indices[r]), static_cast<Eigen::Index>(transient_indices[s])) =
                R(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
        }
    }
    for (std::size_t r = 0; r < transient_indices.size(); ++r) {
        for (std::size_t s = 0; s < transient_indices.size(); ++s) {
            out(static_cast<Eigen::Index>(transient_indices[r]), static_cast<Eigen::Index>(transient_indices[s])) =
                Q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
        }
    }
    return out;
}

int CanonicalDecomposition::period() const {
    long p = 1;
    for (std::size_t c : recurrent_blocks) {
        p = lcm_checked(p, std::max(1, blocks[c].period));
    }
    return static_cast<int>(p);
}

RMatrix matrix_power(const RMatrix &m, std::size_t exponent) {
    RMatrix result = RMatrix::Identity(m.rows(), m.cols());
    RMatrix base = m;
    while (exponent > 0) {
        if (exponent & 1U) {
            result = result * base;
        }
        exponent >>= 1U;
        if (exponent > 0) {
            base = base * base;
        }
    }
    return result;
}

namespace {

void require_contractive_q(const CanonicalDecomposition &dec) {
    if (dec.Q.size() > 0 && dec.q_radius >= 1.0 - 1e-12) {
        throw SingularAbsorption("inessential part is not strictly contractive (radius " +
                                     std::to_string(dec.q_radius) + ")",
                                 dec.q_radius);
    }
}

// Block-diagonal Cesaro limit of the recurrent part, canonical order.
RMatrix recurrent_projector(const CanonicalDecomposition &dec) {
    const auto nr = static_cast<Eigen::Index>(dec.recurrent_indices.size());
    RMatrix p = RMatrix::Zero(nr, nr);
    Eigen::Index off = 0;
    for (std::size_t c : dec.recurrent_blocks) {
        const auto &b = dec.blocks[c];
        const auto sz = static_cast<Eigen::Index>(b.indices.size());
        p.block(off, off, sz, sz) = b.perron.right * b.perron.left.transpose();
        off += sz;
    }
    return p;
}

// lim_N E^{p N} for the recurrent part, where p is a multiple of every
// block period: p_z (w v^t) restricted to pairs in the same cyclic class.
RMatrix recurrent_period_limit(const CanonicalDecomposition &dec) {
    const auto nr = static_cast<Eigen::Index>(dec.recurrent_indices.size());
    RMatrix p = RMatrix::Zero(nr, nr);
    Eigen::Index off = 0;
    for (std::size_t c : dec.recurrent_blocks) {
        const auto &b = dec.blocks[c];
        const auto sz = static_cast<Eigen::Index>(b.indices.size());
        const double pz = std::max(1, b.period);
        for (Eigen::Index i = 0; i < sz; ++i) {
            for (Eigen::Index j = 0; j < sz; ++j) {
                if (b.cyclic_class[static_cast<std::size_t>(i)] == b.cyclic_class[static_cast<std::size_t>(j)]) {
                    p(off + i, off + j) = pz * b.perron.right[i] * b.perron.left[j];
                }
            }
        }
        off += sz;
    }
    return p;
}

RMatrix to_original(const CanonicalDecomposition &dec, const RMatrix &canonical) {
    RMatrix out = RMatrix::Zero(dec.matrix.rows(), dec.matrix.cols());
    for (std::size_t a = 0; a < dec.permutation.size(); ++a) {
        for (std::size_t b = 0; b < dec.permutation.size(); ++b) {
            out(static_cast<Eigen::Index>(dec.permutation[a]), static_cast<Eigen::Index>(dec.permutation[b])) =
                canonical(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    return out;
}

} // namespace

RMatrix absorption_raw(const CanonicalDecomposition &dec) {
    require_contractive_q(dec);
    if (dec.Q.size() == 0) {
        return RMatrix::Zero(static_cast<Eigen::Index>(dec.recurrent_indices.size()), 0);
    }
    const Eigen::Index nq = dec.Q.rows();
    return solve_right(dec.R, RMatrix::Identity(nq, nq) - dec.Q);
}

RMatrix absorption(const CanonicalDecomposition &dec) { return recurrent_projector(dec) * absorption_raw(dec); }

DeepLimit deep_limit_matrix(const CanonicalDecomposition &dec) {
    require_contractive_q(dec);
    DeepLimit out;
    out.period = dec.period();
    out.converged = out.period == 1;
    const auto nr = static_cast<Eigen::Index>(dec.recurrent_indices.size());
    const auto nq = static_cast<Eigen::Index>(dec.transient_indices.size());
    const auto p = static_cast<std::size_t>(out.period);
    const RMatrix e = dec.permuted().topLeftCorner(nr, nr);
    const RMatrix e_inf = recurrent_period_limit(dec);
    std::vector<RMatrix> e_pow{RMatrix::Identity(nr, nr)};
    for (std::size_t m = 1; m < p; ++m) {
        e_pow.push_back(e_pow.back() * e);
    }
    std::vector<RMatrix> rq;
    RMatrix fp;
    if (nq > 0) {
        rq.push_back(dec.R);
        for (std::size_t r = 1; r < p; ++r) {
            rq.push_back(rq.back() * dec.Q);
        }
        fp = RMatrix::Identity(nq, nq) - matrix_power(dec.Q, p);
    }
    const Eigen::Index n = nr + nq;
    out.limit = RMatrix::Zero(n, n);
    for (std::size_t m = 0; m < p; ++m) {
        RMatrix canon = RMatrix::Zero(n, n);
        canon.topLeftCorner(nr, nr) = e_inf * e_pow[m];
        if (nq > 0 && nr > 0) {
            RMatrix acc = RMatrix::Zero(nr, nq);
            for (std::size_t r = 0; r < p; ++r) {
                const std::size_t k = (m + p - 1 - r % p) % p;
                acc += e_pow[k] * rq[r];
            }
            canon.topRightCorner(nr, nq) = e_inf * solve_right(acc, fp);
        }
        RMatrix orig = to_original(dec, canon);
        out.limit += orig / static_cast<double>(p);
        out.residue_limits.push_back(std::move(orig));
    }
    return out;
}

} // namespace ltm
