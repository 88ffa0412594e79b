#pragma once

#include <sparselogit/model.hpp>

#include <string>
#include <vector>

namespace sparselogit::cli {

struct CsvTable {
    Matrix X;
    Vector y;
    // Predictor names from the header row; empty when the file has none.
    std::vector<std::string> names;
};

/// Reads the data CSV: optional header, first column y in {0, 1}, remaining
/// columns predictors. Throws DataError with the offending line number.
CsvTable read_data_csv(const std::string& path);

// All numeric fields of a file, row by row (one value per line or one row of
// values); an optional non-numeric header line is skipped.
Vector read_vector_csv(const std::string& path);

}  // namespace sparselogit::cli
