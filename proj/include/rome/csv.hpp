// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <string>

#include "rome/types.hpp"

namespace rome::csv {

/// Shortest-exact decimal form would round-trip too, but the file format asks
/// for explicit precision: 17 significant digits, enough to recover the bits.
std::string format_real(Real v);

/// Writes `body` to `path` via a temp file in the same directory plus rename,
/// so an interrupted run never leaves a partial file behind.
void atomic_write_text(const std::string& path, const std::string& body);

/// Header row `x0,...,x{M-1}`, one sample per line.
void write_dataset(const std::string& path, const Dataset& data);
Dataset read_dataset(const std::string& path);

}  // namespace rome::csv
