// Apache License, Version 2.0, refer to LICENSE.txt
#include "rome/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace rome::csv {

std::string format_real(Real v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void atomic_write_text(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp);
    out << body;
    out.flush();
    if (!out) throw DataError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DataError("rename failed: " + path);
  }
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::ostringstream out;
  for (Index j = 0; j < data.dims(); ++j) {
    if (j > 0) out << ',';
    out << 'x' << j;
  }
  out << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dims(); ++j) {
      if (j > 0) out << ',';
      out << format_real(data.values(i, j));
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty csv: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Index dims = static_cast<Index>(split_fields(line).size());

  std::vector<Real> flat;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<Index>(fields.size()) != dims) {
      throw DataError("ragged row in csv: " + path);
    }
    for (const auto& f : fields) {
      Real v = 0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw DataError("bad number '" + f + "' in csv: " + path);
      }
      flat.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("csv has no data rows: " + path);

  Dataset data;
  data.values.resize(rows, dims);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < dims; ++j) data.values(i, j) = flat[i * dims + j];
  }
  return data;
}

}  // namespace rome::csv
