#pragma once

#include <string>
#include <vector>

#include "ggm/linalg.hpp"

namespace ggm {

// Matrix CSV: p rows of p comma-separated decimal literals, with an optional
// single leading header line starting with '#'. Values are written with 17
// significant digits so a write/read round trip is bit-exact.

void write_matrix_csv(const SymMatrix& a, const std::string& path);

// Reads and symmetrizes (file data is only symmetric up to formatting).
SymMatrix read_matrix_csv(const std::string& path);

// Rectangular table (n rows x p columns), same literal format.
void write_table_csv(const std::vector<std::vector<double>>& rows, const std::string& path,
                     const std::string& header = "");
std::vector<std::vector<double>> read_table_csv(const std::string& path);

std::string format_double(double v);

}  // namespace ggm
