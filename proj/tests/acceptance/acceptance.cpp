// Acceptance gate: one PASS/FAIL line per criterion A1..A11, sub-checks indented below it.
// Set WFLOW_ACCEPTANCE_QUICK=1 for the coarse smoke configuration.

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "wflow/text_format.hpp"
#include "wflow_app/verify.hpp"

int main(int argc, char** argv) {
  using namespace wflow::app;
  VerifyOptions opt;
  const char* q = std::getenv("WFLOW_ACCEPTANCE_QUICK");
  opt.quick = q != nullptr && std::strcmp(q, "0") != 0 && *q != '\0';
  std::string only = argc > 1 ? argv[1] : "";

  int failed = 0;
  for (const auto& c : criteria()) {
    if (c.id.front() != 'A') continue;
    if (!only.empty() && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = run_criterion(c.id, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = all_passed(results);
    failed += !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << c.id << "  " << c.title << "  (" << static_cast<int>(secs) << " s)\n";
    for (const auto& r : results) {
      std::cout << "    " << (r.passed ? "ok   " : "FAIL ") << r.id << "  " << wflow::format_double(r.measured) << ' '
                << r.relation << ' ' << wflow::format_double(r.tolerance) << "  " << r.name;
      if (!r.detail.empty()) std::cout << "  [" << r.detail << ']';
      std::cout << '\n';
    }
    std::cout.flush();
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " criteria failed\n";
  return failed ? 1 : 0;
}
