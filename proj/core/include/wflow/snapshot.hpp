#pragma once

#include <filesystem>
#include <iosfwd>

#include "wflow/grid.hpp"

namespace wflow {

struct Snapshot {
  WignerField field;
  double t = 0.0;
};

// Text format: header "# nx np xmin xmax pmin pmax t", then nx rows of np values
// (x outer, p inner), every number printed with 17 significant digits.
void write_snapshot(std::ostream& out, const WignerField& W, double t);
void write_snapshot(const std::filesystem::path& path, const WignerField& W, double t);

Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace wflow
