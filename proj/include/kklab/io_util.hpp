#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kklab/errors.hpp"
#include "kklab/version.hpp"

namespace kklab {

/// Shortest round-trippable decimal form of a double; keeps emitted files
/// byte-stable across runs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Write content to path via a temp file and rename, so readers never observe
/// a half-written artifact.
inline void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.good()) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

/// Provenance comment line carried by every emitted artifact.
inline std::string provenance_line(const std::string& subcommand, const std::string& params,
                                   unsigned long long seed) {
  std::ostringstream os;
  os << "# kklab v" << version_string << " | " << subcommand << " | seed=" << seed << " | "
     << params;
  return os.str();
}

}  // namespace kklab
