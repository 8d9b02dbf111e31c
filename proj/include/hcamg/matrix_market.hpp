/// @file matrix_market.hpp
/// @brief Coordinate-format MatrixMarket reader and writer (real, general).

#pragma once

#include "hcamg/sparse.hpp"

#include <iosfwd>
#include <string>

namespace hcamg {

/// Parse failures carry the offending line number when there is one.
class ParseError : public Error {
public:
    using Error::Error;
};

SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);

/// Values are written with 17 significant digits so a round trip is exact.
void write_matrix_market(const SparseMatrix& m, std::ostream& out);
void write_matrix_market(const SparseMatrix& m, const std::string& path);

} // namespace hcamg
