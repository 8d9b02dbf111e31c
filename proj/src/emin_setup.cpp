#include "hcamg/emin_setup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hcamg {

namespace {

std::vector<double> abs_row_sums(const SparseMatrix& a) {
    std::vector<double> s(a.rows(), 0.0);
    for (index_t i = 0; i < a.rows(); ++i)
        for (double v : a.row(i).vals) s[i] += std::abs(v);
    return s;
}

struct UnionFind {
    std::vector<index_t> parent;
    explicit UnionFind(index_t n) : parent(n) { std::iota(parent.begin(), parent.end(), index_t{0}); }
    index_t find(index_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(index_t a, index_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

/// Column positions of the nonzeros of G row k (one or two entries).
std::pair<index_t, index_t> row_columns(const DenseMatrix& g, index_t k) {
    index_t first = npos;
    index_t second = npos;
    for (index_t c = 0; c < g.cols; ++c) {
        if (g(k, c) == 0.0) continue;
        if (first == npos)
            first = c;
        else
            second = c;
    }
    return {first, second};
}

bool is_zero_row(const ConstraintSubproblem& sub) {
    return sub.coarse_edges.empty() && sub.coarse_nodes.size() == 1;
}

} // namespace

PatternBundle compute_pattern(const SparseMatrix& d_h, const SparseMatrix& p_n, const SparseMatrix& d_H) {
    if (d_h.cols() != p_n.rows() || p_n.cols() != d_H.cols())
        throw DimensionError("compute_pattern: inconsistent dimensions");
    const auto fine_sums = abs_row_sums(d_h);
    for (index_t i = 0; i < d_h.rows(); ++i)
        if (fine_sums[i] != 1.0 && fine_sums[i] != 2.0)
            throw Error("malformed gradient row " + std::to_string(i));

    PatternBundle b;
    b.T = pattern_of(compress(spgemm(abs_matrix(d_h), abs_matrix(p_n))));
    const auto coarse_sums = abs_row_sums(d_H);
    b.W.resize(d_H.rows());
    for (index_t k = 0; k < d_H.rows(); ++k) {
        if (coarse_sums[k] != 1.0 && coarse_sums[k] != 2.0)
            throw Error("malformed coarse gradient row " + std::to_string(k));
        b.W[k] = 3.0 - coarse_sums[k];
    }
    // entries are small integers, so the comparison with 2 below is exact
    b.B = spgemm(b.T, transpose(scale_rows(pattern_of(d_H), b.W)));

    std::vector<index_t> offsets(b.B.rows() + 1, 0);
    std::vector<index_t> cols;
    cols.reserve(b.B.nnz());
    for (index_t i = 0; i < b.B.rows(); ++i) {
        const auto r = b.B.row(i);
        for (std::size_t k = 0; k < r.size(); ++k)
            if (r.vals[k] == 2.0) cols.push_back(r.cols[k]);
        offsets[i + 1] = cols.size();
    }
    std::vector<double> ones(cols.size(), 1.0);
    b.N = SparseMatrix(b.B.rows(), b.B.cols(), std::move(offsets), std::move(cols), std::move(ones));
    return b;
}

ConstraintSubproblem extract_subproblem(const PatternBundle& bundle, const SparseMatrix& d_H, index_t fine_edge) {
    if (fine_edge >= bundle.N.rows()) throw DimensionError("fine edge out of range");
    ConstraintSubproblem sub;
    sub.fine_edge = fine_edge;
    const auto ni = bundle.N.row(fine_edge).cols;
    const auto nj = bundle.T.row(fine_edge).cols;
    if (nj.empty()) throw Error("empty coarse-node pattern for fine edge " + std::to_string(fine_edge));
    sub.coarse_edges.assign(ni.begin(), ni.end());
    sub.coarse_nodes.assign(nj.begin(), nj.end());
    sub.G.resize(ni.size(), nj.size());
    for (std::size_t a = 0; a < ni.size(); ++a) {
        const auto r = d_H.row(ni[a]);
        if (r.size() == 1) sub.has_dirichlet_edge = true;
        for (std::size_t k = 0; k < r.size(); ++k) {
            const auto it = std::lower_bound(nj.begin(), nj.end(), r.cols[k]);
            if (it == nj.end() || *it != r.cols[k])
                throw Error("coarse edge " + std::to_string(ni[a]) + " leaves the node pattern of fine edge " +
                            std::to_string(fine_edge));
            sub.G(a, static_cast<index_t>(it - nj.begin())) = r.vals[k];
        }
    }
    return sub;
}

bool check_irreducible(const DenseMatrix& g) {
    if (g.cols == 0) return false;
    UnionFind uf(g.cols);
    std::vector<char> touched(g.cols, 0);
    index_t components = g.cols;
    for (index_t k = 0; k < g.rows; ++k) {
        const auto [a, b] = row_columns(g, k);
        if (a != npos) touched[a] = 1;
        if (b != npos) {
            touched[b] = 1;
            if (uf.unite(a, b)) --components;
        }
    }
    if (components != 1) return false;
    return std::all_of(touched.begin(), touched.end(), [](char t) { return t != 0; });
}

CouplingOracle::CouplingOracle(const SparseMatrix& d_h, const SparseMatrix& p_n) : rt_(transpose(spgemm(d_h, p_n))) {}

double CouplingOracle::score(index_t a, index_t b) const {
    const auto ra = rt_.row(a);
    const auto rb = rt_.row(b);
    double s = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ra.size() && j < rb.size()) {
        if (ra.cols[i] < rb.cols[j])
            ++i;
        else if (rb.cols[j] < ra.cols[i])
            ++j;
        else
            s += ra.vals[i++] * rb.vals[j++];
    }
    return std::abs(s);
}

index_t make_irreducible(ConstraintSubproblem& sub, CoarseGradient& cg, const CouplingOracle& oracle,
                         std::map<std::pair<index_t, index_t>, index_t>& existing) {
    const index_t nj = sub.coarse_nodes.size();
    UnionFind uf(nj);
    index_t components = nj;
    for (index_t k = 0; k < sub.G.rows; ++k) {
        const auto [a, b] = row_columns(sub.G, k);
        if (b != npos && uf.unite(a, b)) --components;
    }
    index_t added = 0;
    std::vector<std::pair<index_t, index_t>> new_rows;
    while (components > 1) {
        index_t best_a = npos;
        index_t best_b = npos;
        double best = -1.0;
        for (index_t a = 0; a < nj; ++a)
            for (index_t b = a + 1; b < nj; ++b) {
                if (uf.find(a) == uf.find(b)) continue;
                const double s = oracle.score(sub.coarse_nodes[a], sub.coarse_nodes[b]);
                if (s > best) {
                    best = s;
                    best_a = a;
                    best_b = b;
                }
            }
        const std::pair<index_t, index_t> key{sub.coarse_nodes[best_a], sub.coarse_nodes[best_b]};
        auto it = existing.find(key);
        if (it == existing.end()) {
            const index_t id = cg.edge_endpoints.size();
            cg.edge_endpoints.push_back({key.first, key.second});
            cg.augmented_edges.push_back(id);
            it = existing.emplace(key, id).first;
        }
        sub.coarse_edges.push_back(it->second);
        new_rows.emplace_back(best_a, best_b);
        uf.unite(best_a, best_b);
        --components;
        ++added;
    }
    if (added > 0) {
        DenseMatrix g(sub.G.rows + added, nj);
        std::copy(sub.G.data.begin(), sub.G.data.end(), g.data.begin());
        for (index_t k = 0; k < added; ++k) {
            g(sub.G.rows + k, new_rows[k].first) = -1.0;
            g(sub.G.rows + k, new_rows[k].second) = 1.0;
        }
        sub.G = std::move(g);
    }
    return added;
}

void factor_subproblem(ConstraintSubproblem& sub) {
    const index_t ni = sub.G.rows;
    const index_t nj = sub.G.cols;
    const index_t k = sub.has_dirichlet_edge ? nj : nj - 1;
    if (ni < k)
        throw Error("constraint block of fine edge " + std::to_string(sub.fine_edge) + " has too few coarse edges");
    DenseMatrix q;
    DenseMatrix r;
    householder_qr(sub.G, q, r);
    const double ref = k > 0 ? std::abs(r(0, 0)) : 0.0;
    for (index_t j = 0; j < k; ++j)
        if (std::abs(r(j, j)) < 1e-10 * ref || r(j, j) == 0.0)
            throw Error("constraint block of fine edge " + std::to_string(sub.fine_edge) + " is rank deficient");
    if (!sub.has_dirichlet_edge && ni >= nj && std::abs(r(k, k)) >= 1e-10 * ref)
        throw Error("constraint block of fine edge " + std::to_string(sub.fine_edge) + " has unexpected full rank");

    sub.Q.resize(ni, k);
    for (index_t i = 0; i < ni; ++i)
        for (index_t j = 0; j < k; ++j) sub.Q(i, j) = q(i, j);
    sub.R.resize(k, k);
    for (index_t i = 0; i < k; ++i)
        for (index_t j = i; j < k; ++j) sub.R(i, j) = r(i, j);
    sub.rank = k;
    sub.factored = true;
}

void least_norm(const FactorView& f, std::span<const double> r, std::span<double> p) {
    std::vector<double> y(f.rank);
    solve_upper_transposed(f.r, f.rank, f.rank, r.first(f.rank), y);
    for (index_t i = 0; i < f.n_rows; ++i) {
        double s = 0.0;
        for (index_t j = 0; j < f.rank; ++j) s += f.q[i * f.rank + j] * y[j];
        p[i] = s;
    }
}

void project_out(const FactorView& f, std::span<double> x) {
    if (f.rank == 0) return;
    std::vector<double> c(f.rank, 0.0);
    for (index_t i = 0; i < f.n_rows; ++i)
        for (index_t j = 0; j < f.rank; ++j) c[j] += f.q[i * f.rank + j] * x[i];
    for (index_t i = 0; i < f.n_rows; ++i) {
        double s = 0.0;
        for (index_t j = 0; j < f.rank; ++j) s += f.q[i * f.rank + j] * c[j];
        x[i] -= s;
    }
}

double constraint_residual(const DenseMatrix& g, std::span<const double> p, std::span<const double> r) {
    double worst = 0.0;
    for (index_t j = 0; j < g.cols; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < g.rows; ++i) s += g(i, j) * p[i];
        worst = std::max(worst, std::abs(s - r[j]));
    }
    return worst;
}

FactorView SubproblemSet::factors(index_t row) const {
    FactorView f;
    f.n_rows = N.row_nnz(row);
    f.rank = rank[row];
    f.q = std::span<const double>(q).subspan(q_offsets[row], q_offsets[row + 1] - q_offsets[row]);
    f.r = std::span<const double>(r).subspan(r_offsets[row], r_offsets[row + 1] - r_offsets[row]);
    return f;
}

EminSetup setup_constraints(const SparseMatrix& d_h, const SparseMatrix& p_n, CoarseGradient coarse) {
    EminSetup out;
    out.R = spgemm(d_h, p_n);
    out.pattern = compute_pattern(d_h, p_n, coarse.D_H);
    const index_t nf = d_h.rows();

    // repair pass: every addition is visible to later rows through `existing`,
    // and the pattern is recomputed once afterwards so N stays maximal
    {
        const CouplingOracle oracle(d_h, p_n);
        std::map<std::pair<index_t, index_t>, index_t> existing;
        for (index_t i = 0; i < nf; ++i) {
            auto sub = extract_subproblem(out.pattern, coarse.D_H, i);
            if (is_zero_row(sub) || check_irreducible(sub.G)) continue;
            make_irreducible(sub, coarse, oracle, existing);
            ++out.repaired_rows;
        }
        if (out.repaired_rows > 0) {
            coarse.D_H = gradient_from_edges(coarse.edge_endpoints, coarse.D_H.cols());
            out.pattern = compute_pattern(d_h, p_n, coarse.D_H);
        }
    }

    auto& set = out.subproblems;
    set.N = out.pattern.N;
    set.node_offsets.assign(nf + 1, 0);
    set.q_offsets.assign(nf + 1, 0);
    set.r_offsets.assign(nf + 1, 0);
    set.rank.assign(nf, 0);
    set.dirichlet.assign(nf, 0);
    for (index_t i = 0; i < nf; ++i) {
        auto sub = extract_subproblem(out.pattern, coarse.D_H, i);
        set.nodes.insert(set.nodes.end(), sub.coarse_nodes.begin(), sub.coarse_nodes.end());
        set.node_offsets[i + 1] = set.nodes.size();
        if (is_zero_row(sub)) {
            ++out.zero_rows;
        } else {
            if (!check_irreducible(sub.G))
                throw Error("constraint block of fine edge " + std::to_string(i) + " is still reducible");
            factor_subproblem(sub);
            set.rank[i] = sub.rank;
            set.dirichlet[i] = sub.has_dirichlet_edge ? 1 : 0;
            set.q.insert(set.q.end(), sub.Q.data.begin(), sub.Q.data.end());
            set.r.insert(set.r.end(), sub.R.data.begin(), sub.R.data.end());
        }
        set.q_offsets[i + 1] = set.q.size();
        set.r_offsets[i + 1] = set.r.size();
        ++out.histogram[{sub.coarse_edges.size(), sub.coarse_nodes.size()}];
    }
    out.coarse = std::move(coarse);
    return out;
}

ConstraintSubproblem subproblem_of(const EminSetup& setup, index_t fine_edge) {
    auto sub = extract_subproblem(setup.pattern, setup.coarse.D_H, fine_edge);
    if (!is_zero_row(sub)) factor_subproblem(sub);
    return sub;
}

} // namespace hcamg
