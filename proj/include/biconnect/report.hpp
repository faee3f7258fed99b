#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace biconnect {

enum class CheckStatus { Pass, Warn, Fail };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Warn: return "warn";
    case CheckStatus::Fail: return "fail";
  }
  return "?";
}

struct CheckEntry {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  double defect = 0.0;
  std::vector<std::size_t> offending;  // indices meaningful to the check
};

/// Ordered list of named checks. Overall pass iff no entry failed.
class ValidationReport {
 public:
  void add(CheckEntry e) { entries_.push_back(std::move(e)); }

  void add(std::string name, CheckStatus status, double defect = 0.0,
           std::vector<std::size_t> offending = {}) {
    entries_.push_back({std::move(name), status, defect, std::move(offending)});
  }

  void merge(const ValidationReport& other, const std::string& prefix = {}) {
    for (auto e : other.entries_) {
      e.name = prefix + e.name;
      entries_.push_back(std::move(e));
    }
  }

  bool passed() const {
    return std::none_of(entries_.begin(), entries_.end(),
                        [](const CheckEntry& e) { return e.status == CheckStatus::Fail; });
  }

  bool has_warnings() const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [](const CheckEntry& e) { return e.status == CheckStatus::Warn; });
  }

  std::vector<CheckEntry> failures() const {
    std::vector<CheckEntry> out;
    std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
                 [](const CheckEntry& e) { return e.status == CheckStatus::Fail; });
    return out;
  }

  /// Worst defect over all entries whose name starts with `prefix`.
  double worst_defect(const std::string& prefix = {}) const {
    double worst = 0.0;
    for (const auto& e : entries_)
      if (e.name.rfind(prefix, 0) == 0) worst = std::max(worst, e.defect);
    return worst;
  }

  const CheckEntry* find(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }

  const std::vector<CheckEntry>& entries() const { return entries_; }

 private:
  std::vector<CheckEntry> entries_;
};

}  // namespace biconnect
