#include "hcamg/coarse_topology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hcamg {

SparseMatrix gen_piecewise_const(const SparseMatrix& p, index_t n_passes) {
    if (n_passes == 0) throw Error("gen_piecewise_const needs at least one pass");
    const index_t nrows = p.rows();
    const index_t ncols = p.cols();
    const auto pt = transpose(p);
    const double total = static_cast<double>(p.nnz());

    // column entries sorted by decreasing magnitude, ties by row
    std::vector<std::vector<index_t>> order(ncols);
    std::vector<index_t> target(ncols);
    for (index_t j = 0; j < ncols; ++j) {
        const auto c = pt.row(j);
        if (c.size() == 0) throw Error("empty column " + std::to_string(j) + " in prolongator");
        std::vector<std::pair<double, index_t>> items;
        items.reserve(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) items.emplace_back(std::abs(c.vals[k]), c.cols[k]);
        std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
            return x.first != y.first ? x.first > y.first : x.second < y.second;
        });
        order[j].reserve(items.size());
        for (const auto& it : items) order[j].push_back(it.second);
        const double share = static_cast<double>(c.size()) / total * static_cast<double>(nrows);
        target[j] = std::max<index_t>(1, static_cast<index_t>(std::llround(share)));
    }

    std::vector<index_t> owner(nrows, npos);
    std::vector<index_t> count(ncols, 0);
    std::vector<std::size_t> cursor(ncols, 0);
    for (index_t pass = 0; pass < n_passes; ++pass) {
        for (index_t j = 0; j < ncols; ++j) {
            const index_t per_pass = (target[j] + n_passes - 1) / n_passes;
            const index_t quota = std::min(per_pass, target[j] - std::min(target[j], count[j]));
            index_t claimed = 0;
            auto& cur = cursor[j];
            while (claimed < quota && cur < order[j].size()) {
                const auto i = order[j][cur++];
                if (owner[i] != npos) continue;
                owner[i] = j;
                ++count[j];
                ++claimed;
            }
        }
    }

    // leftovers: largest entry among columns that already own rows
    for (index_t i = 0; i < nrows; ++i) {
        if (owner[i] != npos) continue;
        const auto r = p.row(i);
        if (r.size() == 0) throw Error("empty row " + std::to_string(i) + " in prolongator");
        index_t best = npos;
        double best_val = -1.0;
        index_t fallback = npos;
        double fallback_val = -1.0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            const double v = std::abs(r.vals[k]);
            if (v > fallback_val) {
                fallback = r.cols[k];
                fallback_val = v;
            }
            if (count[r.cols[k]] > 0 && v > best_val) {
                best = r.cols[k];
                best_val = v;
            }
        }
        owner[i] = best != npos ? best : fallback;
    }
    std::fill(count.begin(), count.end(), 0);
    for (auto j : owner) ++count[j];

    // safeguard: every column keeps at least one row
    for (index_t j = 0; j < ncols; ++j) {
        if (count[j] > 0) continue;
        bool done = false;
        for (auto i : order[j]) {
            if (count[owner[i]] > 1) {
                --count[owner[i]];
                owner[i] = j;
                ++count[j];
                done = true;
                break;
            }
        }
        if (!done) throw Error("column " + std::to_string(j) + " cannot be assigned any row");
    }

    std::vector<index_t> offsets(nrows + 1);
    for (index_t i = 0; i < nrows; ++i) offsets[i + 1] = i + 1;
    return SparseMatrix(nrows, ncols, std::move(offsets), std::move(owner), std::vector<double>(nrows, 1.0));
}

SparseMatrix gradient_from_edges(const std::vector<CoarseEdge>& edges, index_t n_nodes) {
    std::vector<index_t> offsets(edges.size() + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(2 * edges.size());
    vals.reserve(2 * edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& ce = edges[e];
        if (ce.single()) {
            cols.push_back(ce.first);
            vals.push_back(1.0);
        } else if (ce.first < ce.second) {
            cols.insert(cols.end(), {ce.first, ce.second});
            vals.insert(vals.end(), {-1.0, 1.0});
        } else {
            cols.insert(cols.end(), {ce.second, ce.first});
            vals.insert(vals.end(), {1.0, -1.0});
        }
        offsets[e + 1] = cols.size();
    }
    return SparseMatrix(edges.size(), n_nodes, std::move(offsets), std::move(cols), std::move(vals));
}

CoarseGradient build_coarse_gradient(const SparseMatrix& d_h, const SparseMatrix& p_const) {
    if (d_h.cols() != p_const.rows()) throw DimensionError("build_coarse_gradient: D_h and P_const mismatch");
    const auto dp = spgemm(abs_matrix(d_h), abs_matrix(p_const));
    const auto z = compress(spgemm(transpose(dp), dp));
    CoarseGradient cg;
    for (index_t i = 0; i < z.rows(); ++i)
        for (auto j : z.row(i).cols)
            if (j > i) cg.edge_endpoints.push_back({i, j});
    cg.D_H = gradient_from_edges(cg.edge_endpoints, p_const.cols());
    return cg;
}

CoarseGradient augment_dirichlet_edges(CoarseGradient cg, const SparseMatrix& d_h, const SparseMatrix& p_const) {
    const index_t nc = p_const.cols();
    std::vector<char> has_single(nc, 0);
    for (const auto& e : cg.edge_endpoints)
        if (e.single()) has_single[e.first] = 1;
    bool changed = false;
    for (index_t i = 0; i < d_h.rows(); ++i) {
        const auto r = d_h.row(i);
        if (r.size() != 1) continue;
        for (auto c : p_const.row(r.cols[0]).cols) {
            if (has_single[c]) continue;
            has_single[c] = 1;
            cg.edge_endpoints.push_back({c, npos});
            changed = true;
        }
    }
    if (changed) cg.D_H = gradient_from_edges(cg.edge_endpoints, nc);
    return cg;
}

} // namespace hcamg
