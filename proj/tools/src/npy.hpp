#pragma once

#include <string>

#include "varflow/numerics/matrix.hpp"

namespace varflow::cli {

// 2-D little-endian float32 .npy (format 1.0, C order).
void write_npy(const std::string& path, const num::Matrix& m);
num::Matrix read_npy(const std::string& path);

}  // namespace varflow::cli
