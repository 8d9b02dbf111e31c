#include "hcamg/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace hcamg {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ParseError("MatrixMarket line " + std::to_string(line) + ": " + what);
}

} // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError("MatrixMarket: empty input");
    {
        std::istringstream hs(line);
        std::string banner, object, format, field, symmetry;
        hs >> banner >> object >> format >> field >> symmetry;
        if (banner != "%%MatrixMarket") fail(lineno, "missing %%MatrixMarket banner");
        if (lower(object) != "matrix" || lower(format) != "coordinate")
            fail(lineno, "only 'matrix coordinate' files are supported");
        const auto f = lower(field);
        if (f != "real" && f != "integer") fail(lineno, "unsupported field '" + field + "'");
        if (lower(symmetry) != "general")
            fail(lineno, "symmetry '" + symmetry + "' is not supported; expand to 'general' first");
    }
    index_t nrows = 0, ncols = 0, nnz = 0;
    bool have_size = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        std::istringstream ss(line);
        long long r = 0, c = 0, z = 0;
        if (!(ss >> r >> c >> z) || r < 0 || c < 0 || z < 0) fail(lineno, "malformed size line");
        nrows = static_cast<index_t>(r);
        ncols = static_cast<index_t>(c);
        nnz = static_cast<index_t>(z);
        have_size = true;
        break;
    }
    if (!have_size) throw ParseError("MatrixMarket: missing size line");

    std::vector<Triplet> entries;
    entries.reserve(nnz);
    while (entries.size() < nnz && std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        std::istringstream ss(line);
        long long r = 0, c = 0;
        double v = 0.0;
        if (!(ss >> r >> c >> v)) fail(lineno, "malformed entry");
        if (r < 1 || c < 1 || static_cast<index_t>(r) > nrows || static_cast<index_t>(c) > ncols)
            fail(lineno, "index out of range (indices are 1-based)");
        entries.push_back({static_cast<index_t>(r - 1), static_cast<index_t>(c - 1), v});
    }
    if (entries.size() != nnz) throw ParseError("MatrixMarket: expected " + std::to_string(nnz) + " entries");
    return SparseMatrix::from_triplets(nrows, ncols, entries);
}

SparseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_matrix_market(in);
}

void write_matrix_market(const SparseMatrix& m, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    char buf[64];
    for (index_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        for (std::size_t k = 0; k < r.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", r.vals[k]);
            out << (i + 1) << ' ' << (r.cols[k] + 1) << ' ' << buf << '\n';
        }
    }
}

void write_matrix_market(const SparseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_matrix_market(m, out);
    if (!out) throw Error("write failed for " + path);
}

} // namespace hcamg
