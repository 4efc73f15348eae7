#pragma once

#include <string>
#include <vector>

namespace tailatlas {

/// One verified statement. Checks never throw on a false statement; they
/// record it, so a report can carry every failure at once.
struct CheckItem {
  std::string name;
  bool passed = false;
  std::string detail;  // empty on success unless there is something to say
};

struct CheckReport {
  std::string title;
  std::vector<CheckItem> items;

  bool all_passed() const {
    for (const auto& it : items)
      if (!it.passed) return false;
    return true;
  }
  void add(const std::string& name, bool ok, const std::string& detail = "") {
    items.push_back({name, ok, detail});
  }
  int failures() const {
    int n = 0;
    for (const auto& it : items) n += it.passed ? 0 : 1;
    return n;
  }
};

}  // namespace tailatlas
