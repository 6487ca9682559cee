#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "corrnet/errors.hpp"

namespace corrnet::fileio {

inline std::string read_file(const std::filesystem::path& path, Errc on_missing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(on_missing, "cannot read file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Write-temp-then-rename, so partially written artifacts never appear.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out) raise(Errc::invalid_argument, "cannot write file " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace corrnet::fileio
