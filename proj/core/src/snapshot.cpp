#include "wflow/snapshot.hpp"

#include <cstdio>
#include <cstdlib>
#include <iterator>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "wflow/errors.hpp"
#include "wflow/text_format.hpp"

namespace wflow {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_snapshot(std::ostream& out, const WignerField& W, double t) {
  const PhaseGrid& g = W.grid();
  out << "# " << g.nx() << ' ' << g.np() << ' ' << format_double(g.xmin()) << ' '
      << format_double(g.xmax()) << ' ' << format_double(g.pmin()) << ' '
      << format_double(g.pmax()) << ' ' << format_double(t) << '\n';
  std::string line;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < g.np(); ++j) {
      if (j) line += ' ';
      line += format_double(W(i, j));
    }
    line += '\n';
    out << line;
  }
}

void write_snapshot(const std::filesystem::path& path, const WignerField& W, double t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open snapshot file for writing: " + path.string());
  write_snapshot(out, W, t);
  if (!out) throw std::runtime_error("failed writing snapshot file: " + path.string());
}

Snapshot read_snapshot(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.size() < 2 || header[0] != '#') {
    throw ConfigurationError("snapshot: missing '#' header line");
  }
  std::istringstream hs(header.substr(1));
  std::size_t nx = 0, np = 0;
  double xmin, xmax, pmin, pmax, t;
  if (!(hs >> nx >> np >> xmin >> xmax >> pmin >> pmax >> t)) {
    throw ConfigurationError("snapshot: malformed header '" + header + "'");
  }
  PhaseGrid grid(nx, np, xmin, xmax, pmin, pmax);
  // strtod rather than operator>>: the latter rejects subnormal values, which decayed tails produce.
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<double> values(grid.size());
  const char* cursor = body.c_str();
  for (std::size_t k = 0; k < values.size(); ++k) {
    char* end = nullptr;
    values[k] = std::strtod(cursor, &end);
    if (end == cursor) {
      throw ConfigurationError("snapshot: expected " + std::to_string(values.size()) +
                               " values, found " + std::to_string(k));
    }
    cursor = end;
  }
  while (*cursor == ' ' || *cursor == '\n' || *cursor == '\r' || *cursor == '\t') ++cursor;
  if (*cursor != '\0') throw ConfigurationError("snapshot: trailing data after the grid values");
  return Snapshot{WignerField(grid, std::move(values)), t};
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot file: " + path.string());
  return read_snapshot(in);
}

}  // namespace wflow
