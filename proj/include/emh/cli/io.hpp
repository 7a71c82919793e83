#pragma once

#include "emh/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace emh::cli {

/// One CSV row. Columns u1, v1, u2, v2, x, y, z hold the first two parameters and
/// three coordinates; absent entries (curves) are empty fields.
struct CsvRow {
    std::size_t seed_index = 0;
    std::vector<double> p1, p2;
    Vec x;
    double lambda = 0.0;
    double residual = 0.0;
    std::optional<double> delta;
    std::optional<bool> smooth;
    std::optional<ConicClass> conic_class;
    std::optional<double> conic_center_dist, contact_det;
};

extern const char* const csv_header;

/// 17 significant digits, locale-free.
std::string format_number(double x);

std::vector<CsvRow> csv_rows(const SolutionSet& set);
std::string to_csv(const std::vector<CsvRow>& rows);
/// Throws an io error naming the line on malformed input.
std::vector<CsvRow> parse_csv(const std::string& text);
std::vector<CsvRow> read_csv(const std::string& path);

std::string to_obj(const SolutionSet& set);

/// Writes to a temporary file next to `path`, then renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace emh::cli
