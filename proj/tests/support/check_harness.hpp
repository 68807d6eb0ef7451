#pragma once

#include <cstdio>
#include <string>

// Minimal pass/fail printer for the long-running suites: one line per check,
// nonzero exit when anything failed, [REPORT] lines never gate.

namespace harness {

class Checks {
 public:
  void check(bool ok, const std::string& label, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", label.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures_;
  }

  void report(const std::string& label, const std::string& detail) {
    std::printf("[REPORT] %s: %s\n", label.c_str(), detail.c_str());
    std::fflush(stdout);
  }

  int failures() const { return failures_; }
  int exit_code() const { return failures_ == 0 ? 0 : 1; }

 private:
  int failures_ = 0;
};

}  // namespace harness
