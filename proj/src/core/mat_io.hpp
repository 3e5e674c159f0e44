#ifndef LANTK_MAT_IO_HPP
#define LANTK_MAT_IO_HPP

#include "common.hpp"

#include <string>

namespace lantk {

// Binary matrix cache format: magic "LANTKMAT", u32 rows, u32 cols,
// row-major little-endian float64. JSON sidecars live next to the file.

void save_matrix(const std::string& path, const Mat& m);
Mat load_matrix(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lantk

#endif
