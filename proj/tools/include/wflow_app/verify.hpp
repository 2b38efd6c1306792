#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wflow::app {

/// One numeric check. `relation` is "<", "<=", ">=" or "report" (always passes once computed).
struct CheckResult {
  std::string id;    // "A1", "A2.ring", ...
  std::string name;  // short human description
  double measured = 0.0;
  double tolerance = 0.0;
  std::string relation = "<";
  bool passed = false;
  std::string detail;
};

enum class Suite { oracles, quantum, gradient, filters, negativity, all };

std::optional<Suite> parse_suite(std::string_view name);
std::string_view suite_name(Suite s);

struct VerifyOptions {
  /// Coarser grids and shorter horizons everywhere; for smoke tests of the wiring.
  bool quick = false;
  /// Progress lines ("running A1 ...") go here when set.
  std::ostream* log = nullptr;
  /// Restricts the run to criteria whose id starts with one of these (empty: no filter).
  std::vector<std::string> only;
};

struct Criterion {
  std::string id;  // "A1" .. "A11", "F1" ..
  std::string title;
  std::vector<Suite> suites;
};

/// Every registered criterion in run order.
const std::vector<Criterion>& criteria();

/// Runs the criteria of one suite. An exception inside a criterion becomes a failed check.
std::vector<CheckResult> run_suite(Suite suite, const VerifyOptions& options = {});

/// Runs a single criterion by id ("A4"). Throws std::invalid_argument for an unknown id.
std::vector<CheckResult> run_criterion(std::string_view id, const VerifyOptions& options = {});

bool all_passed(const std::vector<CheckResult>& results);

/// Tab-separated "status id measured relation tolerance name detail" lines.
void write_report_text(std::ostream& out, const std::vector<CheckResult>& results);
/// JSON array of {id, name, measured, tolerance, relation, passed, detail}.
void write_report_json(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace wflow::app
