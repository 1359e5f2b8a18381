#pragma once

#include "reltest/types.hpp"

#include <string>

namespace reltest {

// Strict numeric CSV: comma-separated, rows = observations, all rows the
// same width, entries finite. Diagnostics name the file and line.
DataMatrix read_csv(const std::string& path, bool has_header);

// Values serialized with 17 significant digits so a written matrix reads
// back bit-identical.
void write_csv(const std::string& path, const DataMatrix& m);

std::string format_double(double v);

}  // namespace reltest
